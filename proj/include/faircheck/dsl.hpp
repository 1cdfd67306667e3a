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

#ifndef FAIRCHECK_DSL_HPP_
#define FAIRCHECK_DSL_HPP_

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "faircheck/knowledge.hpp"
#include "faircheck/term.hpp"

namespace faircheck {

struct SourcePos {
  int line = 0;
  int col = 0;
};

struct ParseError : std::runtime_error {
  ParseError(const std::string& msg, SourcePos p)
      : std::runtime_error(msg + " (line " + std::to_string(p.line) +
                           ", col " + std::to_string(p.col) + ")"),
        pos(p) {}
  SourcePos pos;
};

enum class ChannelModel : uint8_t { Dy, Secure };

// ---------------------------------------------------------------------------
// Protocol description (.proto)

struct FreshDecl {
  std::string role;
  std::string name;
  AtomKind kind = AtomKind::Nonce;
  bool operator==(const FreshDecl&) const = default;
};

struct AliasDef {
  std::string name;
  Term value;  // over role/fresh Vars
  bool operator==(const AliasDef&) const = default;
};

struct Attachment {
  enum class Kind : uint8_t { Annotate, Witness, Request };
  Kind kind;
  std::string role;             // annotating / claiming / accepting role
  std::string peer;             // witness "for" / request "of" peer
  std::vector<Term> terms;      // annotate payload(s)
  Term data;                    // witness/request data
  bool operator==(const Attachment&) const = default;
};

struct StoreUpdate {
  bool resolved = false;  // false: aborted
  Term key;
  bool operator==(const StoreUpdate&) const = default;
};

struct BranchArm {
  Term reply;
  std::optional<StoreUpdate> store;
  std::vector<Attachment> attachments;
  bool operator==(const BranchArm&) const = default;
};

struct BranchSpec {
  bool on_resolved = false;  // guard predicate: resolved(key) vs aborted(key)
  Term key;
  BranchArm then_arm;
  BranchArm else_arm;
  bool operator==(const BranchSpec&) const = default;
};

/// One numbered Alice&Bob line. `fetch` lines (A <-> TTP) expand to a
/// request/response with the responder side run as a TTP service.
struct Exchange {
  int number = 0;
  std::string from;
  std::string to;
  bool fetch = false;
  Term payload;                      // message (or fetch reply)
  Term query;                        // fetch request
  std::optional<BranchSpec> branch;  // TTP conditional reply (subs only)
  std::vector<Attachment> attachments;
  bool operator==(const Exchange&) const = default;
};

struct EntrySpec {
  std::string role;
  int waiting_line = 0;  // main exchange number the role is blocked on
  bool operator==(const EntrySpec&) const = default;
};

struct SubProtocol {
  std::string name;
  std::vector<EntrySpec> entries;
  std::vector<Exchange> lines;  // from/to may be "G" (the entering role)
  bool operator==(const SubProtocol&) const = default;
};

struct EvidenceDef {
  std::string name;
  std::string owner;
  std::string against;
  std::string protects;  // protected message symbol
  TermFormula formula;   // over role/fresh Vars
  bool operator==(const EvidenceDef&) const = default;
};

struct ProtocolSpec {
  std::string name;
  std::vector<std::string> roles;
  std::optional<std::string> ttp_role;  // persistent-store role
  std::vector<std::string> labels;
  std::vector<FreshDecl> fresh;
  std::vector<AliasDef> aliases;
  std::map<std::pair<std::string, std::string>, ChannelModel> channels;
  std::vector<Exchange> main_lines;
  std::vector<SubProtocol> subs;
  std::vector<EvidenceDef> evidences;

  int role_index(const std::string& r) const;
  const EvidenceDef* find_evidence(const std::string& name) const;
  ChannelModel channel(const std::string& a, const std::string& b) const;
  bool operator==(const ProtocolSpec&) const = default;
};

// ---------------------------------------------------------------------------
// Scenario (.scn)

struct SessionDecl {
  std::string id;
  std::map<std::string, std::string> role_agents;  // role -> agent name
};

struct Bounds {
  uint64_t max_states = 1000000;
  uint32_t max_depth = 1000;
  uint32_t fresh_budget = 1;
};

struct Scenario {
  std::string name;
  std::string protocol;
  std::vector<SessionDecl> sessions;
  std::set<std::string> dishonest;
  std::map<std::pair<std::string, std::string>, ChannelModel> channel_overrides;
  Bounds bounds;
};

// ---------------------------------------------------------------------------
// Properties (.prop)

struct Formula {
  enum class Kind : uint8_t {
    Aknows, Deduce, Auth, And, Or, Not, Implies, Iff, Const
  };
  Kind kind = Kind::Const;
  bool cval = true;          // Const
  std::string role;          // Aknows/Deduce subject, Auth X
  std::string session;       // Aknows (required), Deduce (optional)
  std::string peer;          // Auth Y
  TermFormula tf;            // Aknows/Deduce payload
  Term auth_data;            // Auth D
  std::vector<Formula> kids;

  static Formula aknows(std::string role, std::string session, TermFormula tf);
  static Formula deduce(std::string role, std::string session, TermFormula tf);
  static Formula auth(std::string x, std::string y, Term d);
  static Formula conj(std::vector<Formula> ks);
  static Formula implies(Formula a, Formula b);
  static Formula iff(Formula a, Formula b);
};

enum class PropMode : uint8_t { Invariant, Terminal };

struct NamedProperty {
  std::string name;
  PropMode mode = PropMode::Terminal;
  Formula formula;
};

struct PropertyFile {
  std::vector<NamedProperty> props;
};

// ---------------------------------------------------------------------------
// Term scope: resolves identifiers inside terms.

struct TermScope {
  std::map<std::string, Term> names;    // role vars, fresh vars, labels, atoms
  std::map<std::string, Term> aliases;  // expanded alias bodies
  const ProtocolSpec* spec = nullptr;   // for evidence names in formulas
};

/// Scope of a protocol's declarations (role/fresh Vars, labels, aliases).
TermScope protocol_scope(const ProtocolSpec& spec);

// ---------------------------------------------------------------------------
// Parsing

ProtocolSpec parse_protocol(const std::string& text);
Scenario parse_scenario(const std::string& text, const ProtocolSpec& spec);
PropertyFile parse_property_file(const std::string& text,
                                 const ProtocolSpec& spec,
                                 const Scenario& scn);
Formula parse_formula(const std::string& text, const ProtocolSpec& spec,
                      const Scenario& scn);
Term parse_term(const std::string& text, const TermScope& scope);
TermFormula parse_term_formula(const std::string& text,
                               const TermScope& scope);

// ---------------------------------------------------------------------------
// Rendering (re-parseable)

std::string render_protocol(const ProtocolSpec& spec);
/// `collapse_evidence` prints a term formula equal to an evidence definition
/// as its name; pass false for the expanded display form.
std::string render_formula(const Formula& f, const ProtocolSpec& spec,
                           bool collapse_evidence = true);
std::string render_term_formula(const TermFormula& f, const ProtocolSpec& spec,
                                bool collapse_evidence = true);
/// Render with alias names substituted for matching subterms.
std::string render_named(Term t, const ProtocolSpec& spec);

}  // namespace faircheck

#endif  // FAIRCHECK_DSL_HPP_
