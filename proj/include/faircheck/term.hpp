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

#ifndef FAIRCHECK_TERM_HPP_
#define FAIRCHECK_TERM_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace faircheck {

enum class AtomKind : uint8_t { Agent, Nonce, SymKey, Payload, Label, Constant };

const char* to_string(AtomKind k);
std::optional<AtomKind> atom_kind_from_string(const std::string& s);

/**
 * Provenance tag for freshly generated atoms. Two fresh atoms with the same
 * name but different origins are distinct terms, so values minted in one
 * session can never collide with another session's.
 *
 * session == 0 marks intruder-minted atoms ("role" is "!").
 */
struct Origin {
  int session = 0;
  std::string role;
  bool operator==(const Origin&) const = default;
  auto operator<=>(const Origin&) const = default;
};

enum class Tag : uint8_t { Atom, Var, Pair, SEnc, AEnc, Sign, Hash, Pk, Inv };

class Term;

struct TermNode {
  Tag tag;
  AtomKind kind = AtomKind::Constant;  // Atom kind or Var sort (if sorted)
  bool sorted = false;                 // Var carries a sort
  std::string name;                    // Atom / Var
  std::optional<Origin> origin;        // fresh Atom provenance
  const TermNode* child0 = nullptr;    // Pair lhs, SEnc/AEnc/Sign body, Hash body, Pk agent, Inv key
  const TermNode* child1 = nullptr;    // Pair rhs, SEnc/AEnc/Sign key
  uint64_t shash = 0;                  // structural hash, content-only
  bool ground = false;
};

/**
 * Immutable, interned message term. Copies are cheap handles; structural
 * equality is pointer equality. A Term may contain Var leaves, in which case
 * it doubles as a receive pattern / send template.
 */
class Term {
 public:
  Term() = default;

  bool null() const { return node_ == nullptr; }
  const TermNode& node() const { return *node_; }
  Tag tag() const { return node_->tag; }
  bool is_ground() const { return node_->ground; }
  uint64_t shash() const { return node_->shash; }

  bool is_atom() const { return node_->tag == Tag::Atom; }
  bool is_var() const { return node_->tag == Tag::Var; }
  AtomKind kind() const { return node_->kind; }
  const std::string& name() const { return node_->name; }
  const std::optional<Origin>& origin() const { return node_->origin; }
  Term child0() const;
  Term child1() const;

  bool operator==(const Term& o) const { return node_ == o.node_; }
  bool operator!=(const Term& o) const { return node_ != o.node_; }

  // Factories (interning constructors).
  static Term atom(AtomKind k, const std::string& name,
                   std::optional<Origin> origin = std::nullopt);
  static Term var(const std::string& name,
                  std::optional<AtomKind> sort = std::nullopt);
  static Term pair(Term l, Term r);
  static Term senc(Term body, Term key);
  static Term aenc(Term body, Term key);  // key must be Pk(_) or Var
  static Term sign(Term body, Term key);  // key must be Inv(Pk(_)) or Var
  static Term hash(Term body);
  static Term pk(Term agent);  // agent atom or Var
  static Term inv(Term key);   // key must be Pk(_) or Var; Inv(Inv(_)) rejected

  // Right-associated product of >= 1 terms (dot notation).
  static Term dots(const std::vector<Term>& parts);

 private:
  friend struct TermInterner;
  explicit Term(const TermNode* n) : node_(n) {}
  const TermNode* node_ = nullptr;
};

struct TermError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Total structural order: tag, then atom/var payload, then children.
int term_compare(Term a, Term b);
inline bool term_less(Term a, Term b) { return term_compare(a, b) < 0; }

struct TermLess {
  bool operator()(Term a, Term b) const { return term_less(a, b); }
};

struct TermHash {
  size_t operator()(Term t) const { return static_cast<size_t>(t.shash()); }
};

/// t and all transitive children, deduplicated, in total order.
std::vector<Term> subterms(Term t);

/// All Var leaves of t, deduplicated, in total order.
std::vector<Term> vars_of(Term t);

/**
 * Map from Var name to ground term. Bindings only ever hold ground terms, so
 * applying one twice equals applying it once.
 */
class Binding {
 public:
  bool has(const std::string& name) const { return map_.count(name) != 0; }
  Term get(const std::string& name) const;
  /// Insert; returns false (and leaves the binding unchanged) on conflict.
  bool bind(const std::string& name, Term value);
  const std::map<std::string, Term>& entries() const { return map_; }
  bool operator==(const Binding&) const = default;

 private:
  std::map<std::string, Term> map_;
};

/**
 * Replace every bound Var in p. Result is ground iff all Vars were bound.
 * Throws TermError if a sorted Var is bound to a term of a different kind.
 */
Term substitute(Term p, const Binding& b);

/**
 * One-way matching: extend `b` so that substitute(p, b) == t. Returns false on
 * mismatch, leaving `b` in an unspecified (partially extended) state; callers
 * should match on a copy. A Var occurring twice must bind the same term.
 */
bool match(Term p, Term t, Binding& b);

struct RenderOpts {
  bool origins = false;  // append @role#session to fresh atoms
};

/**
 * Canonical text form: dot for pairs, {t}k for symmetric encryption,
 * {t}pk(a) for asymmetric, sig(a, t) for signatures, h(t) for hashes.
 * Re-parseable by the DSL given a matching symbol context.
 */
std::string render(Term t, const RenderOpts& opts = {});

}  // namespace faircheck

#endif  // FAIRCHECK_TERM_HPP_
