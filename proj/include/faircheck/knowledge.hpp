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

#ifndef FAIRCHECK_KNOWLEDGE_HPP_
#define FAIRCHECK_KNOWLEDGE_HPP_

#include <memory>
#include <mutex>
#include <unordered_map>
#include <vector>

#include "faircheck/term.hpp"

namespace faircheck {

/**
 * Logical combination of terms with and/or/not. Leaves are message terms
 * (possibly with Vars until instantiated against a session).
 */
struct TermFormula {
  enum class Kind : uint8_t { Leaf, And, Or, Not };
  Kind kind = Kind::Leaf;
  Term leaf;
  std::vector<TermFormula> kids;

  static TermFormula mk_leaf(Term t) { return {Kind::Leaf, t, {}}; }
  static TermFormula mk_and(TermFormula a, TermFormula b) {
    return {Kind::And, Term(), {std::move(a), std::move(b)}};
  }
  static TermFormula mk_or(TermFormula a, TermFormula b) {
    return {Kind::Or, Term(), {std::move(a), std::move(b)}};
  }
  static TermFormula mk_not(TermFormula a) {
    return {Kind::Not, Term(), {std::move(a)}};
  }
  bool operator==(const TermFormula&) const = default;
};

TermFormula substitute(const TermFormula& f, const Binding& b);

/**
 * Dolev-Yao knowledge set. The fact set is kept saturated under
 * decomposition: pairs project, signature payloads are readable, symmetric
 * and asymmetric ciphertexts open once their key becomes derivable (late keys
 * re-analyze earlier ciphertexts). Hashes have no destructor.
 *
 * Values are immutable snapshots; add() returns a new snapshot. Queries on
 * one snapshot are safe from any number of threads.
 */
class KnowledgeBase {
 public:
  KnowledgeBase() = default;

  /// Base knowledge every party has: public keys of all named agents plus
  /// public protocol constants and labels.
  static KnowledgeBase axioms(const std::vector<Term>& agents,
                              const std::vector<Term>& constants);

  KnowledgeBase add(Term t) const;
  KnowledgeBase add_all(const std::vector<Term>& ts) const;

  bool contains(Term t) const;
  const std::vector<Term>& facts() const { return facts_; }

  /// true iff t is a fact or can be composed: constructor applications over
  /// deducible children (signing additionally needs the private key; Inv is
  /// never composable; Hash only forward).
  bool can_deduce(Term t) const;

  /// Homomorphic evaluation: leaves via can_deduce, connectives classical.
  bool eval(const TermFormula& f) const;

  bool operator==(const KnowledgeBase& o) const { return facts_ == o.facts_; }

 private:
  std::vector<Term> facts_;  // sorted by term order, unique, saturated
  struct Memo {
    std::mutex mu;
    std::unordered_map<const TermNode*, bool> map;
  };
  std::shared_ptr<Memo> memo_ = std::make_shared<Memo>();

  void saturate(std::vector<Term> pending);
  bool insert_fact(Term t);
  bool deduce_nomemo(Term t) const;
};

using KbRef = std::shared_ptr<const KnowledgeBase>;

}  // namespace faircheck

#endif  // FAIRCHECK_KNOWLEDGE_HPP_
