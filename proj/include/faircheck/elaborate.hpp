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

#ifndef FAIRCHECK_ELABORATE_HPP_
#define FAIRCHECK_ELABORATE_HPP_

#include <optional>
#include <string>
#include <vector>

#include "faircheck/dsl.hpp"

namespace faircheck {

// The elaborated model turns numbered Alice&Bob exchanges into linear
// per-role scripts plus request/response services for the TTP side of
// sub-protocols and fetch exchanges.

struct EmitSpec {
  bool witness = false;   // else request
  std::string role;       // claiming / accepting role
  std::string peer;
  Term data;
};

struct RecvAlt {
  Term pattern;
  std::vector<Term> annotations;
  std::vector<EmitSpec> emits;
  int branch_case = -1;  // 0 = then-arm reply, 1 = else-arm, -1 plain
};

struct BranchAction {
  Term reply;
  std::optional<StoreUpdate> store;
  std::vector<EmitSpec> emits;
};

enum class StepKind : uint8_t { Fresh, Send, Recv, Branch };

struct Step {
  StepKind kind = StepKind::Send;
  int line = 0;                          // source exchange number
  std::string peer;                      // Send target / Recv source role
  std::vector<std::string> fresh_names;  // Fresh
  Term payload;                          // Send
  std::vector<Term> annotations;         // Send-side annotations
  std::vector<EmitSpec> emits;           // Send-side emits
  std::vector<RecvAlt> alts;             // Recv
  bool guard_on_resolved = false;        // Branch
  Term guard_key;
  BranchAction then_act, else_act;
};

struct Script {
  std::string role;
  std::string block;  // "main", "sub:<name>", "svc:<name>"
  std::vector<Step> steps;
};

struct AgentSub {
  std::string name;
  std::string role;
  int entry_pc = 0;  // index of the main Recv step the role must be blocked on
  Script script;
};

struct TtpService {
  std::string name;  // "<sub>@<requester>" / "fetch<line>@<requester>"
  std::string home_role;
  std::string requester;
  Script script;  // [Recv request, (Branch | Send reply)]
  int max_instances = 1;
};

struct ElaboratedModel {
  ProtocolSpec spec;
  std::vector<Script> mains;  // indexed by role
  std::vector<AgentSub> subs;
  std::vector<TtpService> services;

  int role_count() const { return static_cast<int>(spec.roles.size()); }
};

struct ElaborationError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Builds scripts and checks static invariants: every variable in a send
/// template or annotation is bound earlier in the role's script.
ElaboratedModel elaborate(const ProtocolSpec& spec);

}  // namespace faircheck

#endif  // FAIRCHECK_ELABORATE_HPP_
