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

#ifndef FAIRCHECK_PROPERTY_HPP_
#define FAIRCHECK_PROPERTY_HPP_

#include <string>
#include <vector>

#include "faircheck/runtime.hpp"

namespace faircheck {

/**
 * A property formula resolved against a context: roles and sessions become
 * indices, term payloads become ground (canonically instantiated) terms.
 *
 * Semantics: aknows over honest agents is fact-based (an annotation must
 * have been logged for every positive leaf); for dishonest agents it falls
 * back to composability from the intruder knowledge. deduce is always
 * knowledge-based. auth(X,Y,D) is non-injective agreement: no acceptance of
 * D by X from Y without a prior claim by Y towards X.
 */
struct CompiledFormula {
  Formula::Kind kind = Formula::Kind::Const;
  bool cval = true;
  int16_t role = -1;
  int16_t session = -1;
  Term x_agent, y_agent;  // auth endpoints
  Term auth_data;
  TermFormula tf;  // ground
  std::vector<CompiledFormula> kids;
};

struct CompiledProperty {
  std::string name;
  PropMode mode = PropMode::Terminal;
  CompiledFormula formula;
};

CompiledFormula compile_formula(const Formula& f, const Context& ctx);
CompiledProperty compile_property(const NamedProperty& p, const Context& ctx);

bool eval_formula(const GlobalState& st, const Context& ctx,
                  const CompiledFormula& f);

// ---------------------------------------------------------------------------

struct WellFormedness {
  bool well_formed = false;
  std::vector<std::string> diagnostics;  // failing conditions
  std::vector<std::string> warnings;     // borderline injectivity
};

/// Syntactic well-formedness of an evidence formula: (a) some positive leaf
/// carries a session-fresh atom, (b) some positive leaf contains the
/// protected message under an injective context (at most one hash on the
/// path; two or more is flagged as a warning, not a verdict).
WellFormedness check_well_formed(const EvidenceDef& ev,
                                 const ProtocolSpec& spec);

/// The two validity implications for a non-repudiation service:
///   aknows(owner, s, EV) => aknows(peer, s, M)
///   deduce(owner, s, EV) => aknows(owner, s, EV)
std::vector<NamedProperty> nr_service_properties(
    const EvidenceDef& ev, const std::string& session,
    PropMode mode = PropMode::Terminal);

/// Fairness of a service pair. Terminal mode gives the biconditional
/// aknows(owner2, s, ev2) <=> aknows(owner1, s, ev1); invariant mode gives
/// the two always-implications instead.
NamedProperty fairness_property(const EvidenceDef& nro, const EvidenceDef& nrr,
                                const std::string& session,
                                PropMode mode = PropMode::Terminal);

}  // namespace faircheck

#endif  // FAIRCHECK_PROPERTY_HPP_
