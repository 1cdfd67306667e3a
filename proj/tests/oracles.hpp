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

#ifndef FAIRCHECK_TESTS_ORACLES_HPP_
#define FAIRCHECK_TESTS_ORACLES_HPP_

#include <functional>
#include <set>
#include <vector>

#include "faircheck/knowledge.hpp"
#include "faircheck/runtime.hpp"

namespace faircheck::test {

/**
 * Brute-force derivation-closure oracle, independent of KnowledgeBase's
 * analyze/synthesize split: iterate decomposition and composition to a
 * fixpoint over the subterm universe of (facts + query). For free
 * constructors any derivation only ever passes through that universe, so
 * membership of the query decides deducibility.
 */
inline bool oracle_deduce(const std::vector<Term>& facts, Term query) {
  std::set<Term, TermLess> universe;
  for (Term f : facts)
    for (Term s : subterms(f)) universe.insert(s);
  for (Term s : subterms(query)) universe.insert(s);

  std::set<Term, TermLess> known(facts.begin(), facts.end());
  bool grew = true;
  while (grew) {
    grew = false;
    std::vector<Term> snapshot(known.begin(), known.end());
    for (Term t : snapshot) {
      auto add = [&](Term x) {
        if (known.insert(x).second) grew = true;
      };
      switch (t.tag()) {
        case Tag::Pair:
          add(t.child0());
          add(t.child1());
          break;
        case Tag::Sign:
          add(t.child0());
          break;
        case Tag::SEnc:
          if (known.count(t.child1())) add(t.child0());
          break;
        case Tag::AEnc:
          if (known.count(Term::inv(t.child1()))) add(t.child0());
          break;
        default:
          break;
      }
    }
    for (Term u : universe) {
      if (known.count(u)) continue;
      bool ok = false;
      switch (u.tag()) {
        case Tag::Pair:
        case Tag::SEnc:
        case Tag::AEnc:
        case Tag::Sign:
          ok = known.count(u.child0()) && known.count(u.child1());
          break;
        case Tag::Hash:
        case Tag::Pk:
          ok = known.count(u.child0()) != 0;
          break;
        default:
          break;
      }
      if (ok) {
        known.insert(u);
        grew = true;
      }
    }
  }
  return known.count(query) != 0;
}

/**
 * Literal enumeration of the bounded delivery semantics: every assignment
 * of pattern variables to members of the subterm closure of (intruder
 * knowledge + session-bound terms), filtered by deducibility of the whole
 * instantiated message. Exponential; for small states only.
 */
inline std::vector<Term> oracle_deliveries(Term pattern, const Binding& seed,
                                           const KnowledgeBase& kb,
                                           const std::vector<Term>& extra) {
  std::set<Term, TermLess> closure;
  for (Term f : kb.facts())
    for (Term s : subterms(f)) closure.insert(s);
  for (Term e : extra)
    if (e.is_ground())
      for (Term s : subterms(e)) closure.insert(s);

  Term p = substitute(pattern, seed);
  std::vector<Term> vars = vars_of(p);
  std::vector<Term> out;
  std::function<void(size_t, const Binding&)> rec = [&](size_t i,
                                                        const Binding& b) {
    if (i == vars.size()) {
      Term m = substitute(p, b);
      if (m.is_ground() && kb.can_deduce(m)) out.push_back(m);
      return;
    }
    for (Term c : closure) {
      Binding b2 = b;
      if (match(vars[i], c, b2)) rec(i + 1, b2);
    }
  };
  rec(0, Binding{});
  std::sort(out.begin(), out.end(), TermLess{});
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace faircheck::test

#endif  // FAIRCHECK_TESTS_ORACLES_HPP_
