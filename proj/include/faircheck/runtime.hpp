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

#ifndef FAIRCHECK_RUNTIME_HPP_
#define FAIRCHECK_RUNTIME_HPP_

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "faircheck/elaborate.hpp"
#include "faircheck/knowledge.hpp"

namespace faircheck {

struct ModelError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/**
 * A scenario resolved against an elaborated protocol: interned agent atoms,
 * per-session canonical bindings, channel security, and the shared axioms
 * (all public keys, all protocol labels).
 */
struct Context {
  ElaboratedModel model;
  Scenario scn;

  std::vector<Term> agents;       // all bound agents, sorted by name
  std::vector<Term> label_atoms;  // public labels/constants
  KnowledgeBase base;             // axioms: pk(a) for all agents + labels

  struct Sess {
    std::string id;
    std::vector<Term> role_agents;  // by role index
    std::vector<bool> honest;       // by role index
    Binding canonical;              // roles + fresh names -> ground atoms
  };
  std::vector<Sess> sessions;

  int roles() const { return model.role_count(); }
  int session_index(const std::string& id) const;
  int role_of_agent_session(int s, Term agent) const;
  ChannelModel channel(int role_a, int role_b) const;
  bool is_dishonest_agent(Term agent) const;
  const std::string& role_name(int r) const { return model.spec.roles[r]; }
};

Context make_context(const ProtocolSpec& spec, const Scenario& scn);

// ---------------------------------------------------------------------------

struct SecureMsg {
  Term from, to;  // agent atoms
  Term payload;
  uint32_t seq = 0;
  bool operator==(const SecureMsg&) const = default;
};

struct RoleState {
  uint16_t pc = 0;
  int16_t sub = -1;  // index into model.subs once entered
  uint16_t sub_pc = 0;
  Binding binding;
  KbRef kb;
  bool operator==(const RoleState& o) const;
};

struct SvcState {
  uint8_t used = 0;
  int16_t active_pc = -1;  // -1: no running instance
  Binding binding;
  bool operator==(const SvcState&) const = default;
};

struct AkFact {
  int16_t session;
  int16_t role;
  Term term;
  bool operator==(const AkFact&) const = default;
};

struct AuthFact {
  Term a, b;  // witness: (claimer, intended peer); violation: (acceptor, peer)
  Term data;
  bool operator==(const AuthFact&) const = default;
};

struct GlobalState {
  std::vector<RoleState> roles;  // session-major: s * role_count + r
  KbRef intruder;
  std::vector<std::pair<Term, Term>> aborted;   // (ttp agent, key), sorted
  std::vector<std::pair<Term, Term>> resolved;  // (ttp agent, key), sorted
  std::vector<SecureMsg> net;                   // sorted by seq
  uint32_t next_seq = 0;
  std::vector<AkFact> aknows;      // sorted
  std::vector<AuthFact> witnessed; // sorted
  std::vector<AuthFact> violated;  // sorted; auth violations latch
  std::vector<SvcState> services;  // session-major: s * svc_count + k
  std::vector<AtomKind> minted_kinds;

  bool operator==(const GlobalState& o) const;
};

struct Transition {
  enum class Kind : uint8_t {
    Fresh, Send, Recv, SubEntry, SvcRecv, SvcSend, Branch, Mint
  };
  Kind kind = Kind::Fresh;
  int16_t session = -1;
  int16_t role = -1;  // acting role (TTP for svc transitions)
  int16_t sub = -1;   // AgentSub index (SubEntry and in-sub steps)
  int16_t svc = -1;   // service index
  int16_t pc = -1;
  int16_t alt = -1;
  int32_t net_pos = -1;  // index into state.net consumed (secure receives)
  Term input;            // received message / minted atom
  bool branch_then = false;
  AtomKind mint_kind = AtomKind::Nonce;

  /// Stable text encoding used in traces and for deterministic tie-breaks.
  std::string encode(const Context& ctx) const;
};

bool transition_less(const Transition& a, const Transition& b);

GlobalState initial_state(const Context& ctx);

/// All executable transitions, in a fixed total order.
std::vector<Transition> enabled(const GlobalState& st, const Context& ctx);

/// Applies t (which must come from enabled(st)); pure function of (st, t).
GlobalState apply(const GlobalState& st, const Transition& t,
                  const Context& ctx);

inline bool is_terminal(const GlobalState& st, const Context& ctx) {
  return enabled(st, ctx).empty();
}

/// Semantic delivery enumeration per the bounded intruder model: every
/// ground instantiation of `pattern` (seeded with `seed`) whose variables
/// take values in the subterm closure of the intruder knowledge plus
/// session-bound terms, filtered by deducibility of the whole message.
/// `extra` supplies the session-bound candidate terms.
std::vector<Term> enumerate_deliveries(Term pattern, const Binding& seed,
                                       const KnowledgeBase& kb,
                                       const std::vector<Term>& extra);

}  // namespace faircheck

#endif  // FAIRCHECK_RUNTIME_HPP_
