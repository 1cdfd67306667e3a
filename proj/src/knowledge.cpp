/*
 * Copyright (c) 2026, the faircheck authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
*/

#include "faircheck/knowledge.hpp"

#include <algorithm>

namespace faircheck {

TermFormula substitute(const TermFormula& f, const Binding& b) {
  if (f.kind == TermFormula::Kind::Leaf)
    return TermFormula::mk_leaf(substitute(f.leaf, b));
  TermFormula out;
  out.kind = f.kind;
  for (const auto& k : f.kids) out.kids.push_back(substitute(k, b));
  return out;
}

KnowledgeBase KnowledgeBase::axioms(const std::vector<Term>& agents,
                                    const std::vector<Term>& constants) {
  KnowledgeBase kb;
  std::vector<Term> seed = constants;
  for (Term a : agents) seed.push_back(Term::pk(a));
  return kb.add_all(seed);
}

bool KnowledgeBase::contains(Term t) const {
  return std::binary_search(facts_.begin(), facts_.end(), t, TermLess{});
}

bool KnowledgeBase::insert_fact(Term t) {
  auto it = std::lower_bound(facts_.begin(), facts_.end(), t, TermLess{});
  if (it != facts_.end() && *it == t) return false;
  facts_.insert(it, t);
  return true;
}

KnowledgeBase KnowledgeBase::add(Term t) const { return add_all({t}); }

KnowledgeBase KnowledgeBase::add_all(const std::vector<Term>& ts) const {
  KnowledgeBase out;
  out.facts_ = facts_;
  std::vector<Term> pending;
  for (Term t : ts) {
    if (!t.is_ground()) throw TermError("knowledge facts must be ground");
    if (out.insert_fact(t)) pending.push_back(t);
  }
  if (!pending.empty()) out.saturate(std::move(pending));
  return out;
}

void KnowledgeBase::saturate(std::vector<Term> work) {
  // Decomposition to a fixpoint. Locked ciphertexts are rechecked whenever
  // the fact set grows, so a late key unlocks earlier ciphertexts.
  std::vector<Term> locked;
  for (Term f : facts_)
    if (f.tag() == Tag::SEnc || f.tag() == Tag::AEnc) locked.push_back(f);
  auto push = [&](Term t) {
    if (insert_fact(t)) work.push_back(t);
  };
  while (true) {
    while (!work.empty()) {
      Term t = work.back();
      work.pop_back();
      switch (t.tag()) {
        case Tag::Pair:
          push(t.child0());
          push(t.child1());
          break;
        case Tag::Sign:
          push(t.child0());
          break;
        case Tag::SEnc:
        case Tag::AEnc:
          locked.push_back(t);
          break;
        default:
          break;
      }
    }
    bool progress = false;
    std::vector<Term> still_locked;
    for (Term t : locked) {
      Term opener = t.tag() == Tag::SEnc ? t.child1() : Term::inv(t.child1());
      if (deduce_nomemo(opener)) {
        if (insert_fact(t.child0())) {
          work.push_back(t.child0());
          progress = true;
        }
      } else {
        still_locked.push_back(t);
      }
    }
    locked.swap(still_locked);
    if (!progress && work.empty()) break;
  }
}

bool KnowledgeBase::deduce_nomemo(Term t) const {
  if (contains(t)) return true;
  switch (t.tag()) {
    case Tag::Atom:
    case Tag::Var:
    case Tag::Inv:
      return false;  // atoms and private keys only from facts
    case Tag::Pair:
    case Tag::SEnc:
    case Tag::AEnc:
    case Tag::Sign:
      return deduce_nomemo(t.child0()) && deduce_nomemo(t.child1());
    case Tag::Hash:
    case Tag::Pk:
      return deduce_nomemo(t.child0());
  }
  return false;
}

bool KnowledgeBase::can_deduce(Term t) const {
  if (!t.is_ground()) throw TermError("can_deduce target must be ground");
  {
    std::lock_guard<std::mutex> lock(memo_->mu);
    auto it = memo_->map.find(&t.node());
    if (it != memo_->map.end()) return it->second;
  }
  bool r = deduce_nomemo(t);
  std::lock_guard<std::mutex> lock(memo_->mu);
  memo_->map.emplace(&t.node(), r);
  return r;
}

bool KnowledgeBase::eval(const TermFormula& f) const {
  switch (f.kind) {
    case TermFormula::Kind::Leaf:
      return can_deduce(f.leaf);
    case TermFormula::Kind::And:
      for (const auto& k : f.kids)
        if (!eval(k)) return false;
      return true;
    case TermFormula::Kind::Or:
      for (const auto& k : f.kids)
        if (eval(k)) return true;
      return false;
    case TermFormula::Kind::Not:
      return !eval(f.kids[0]);
  }
  return false;
}

}  // namespace faircheck
