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

#ifndef FAIRCHECK_REPORT_HPP_
#define FAIRCHECK_REPORT_HPP_

#include <string>
#include <utility>
#include <vector>

#include "faircheck/search.hpp"

namespace faircheck {

inline constexpr const char* kToolVersion = "0.1.0";
inline constexpr const char* kTraceFormat = "faircheck-trace-v1";

struct RunReport {
  std::string tool = "faircheck";
  std::string version = kToolVersion;
  std::string protocol_path;
  std::string scenario_path;
  std::string protocol_digest;  // content hash of the model files, so a
  std::string scenario_digest;  // report pins the exact inputs it came from
  std::string protocol_name;
  std::string scenario_name;
  std::string verdict;
  std::string property;          // violated property, when verdict == attack
  std::string property_formula;  // its rendered formula (re-parseable)
  SearchStats stats;
  std::string trace_format = kTraceFormat;
  std::string initial_digest;
  std::vector<std::string> records;  // machine trace, one record per line
  std::vector<std::string> human;    // Alice&Bob rendering of the same trace
};

RunReport make_report(const Context& ctx, const ExplorationResult& result,
                      const std::string& protocol_path,
                      const std::string& scenario_path);

std::string report_to_json(const RunReport& r);
RunReport report_from_json(const std::string& text);

/// Human Alice&Bob lines for a trace (internally replays it).
std::vector<std::string> render_human_trace(
    const Context& ctx, const std::vector<Transition>& trace);

/// Re-executes a machine trace by matching each record against the enabled
/// transitions. Throws ReplayError on divergence.
std::pair<GlobalState, std::vector<Transition>> replay_records(
    const Context& ctx, const std::vector<std::string>& records);

/// Ground rendering with session-instantiated alias names (traces read like
/// the protocol sources: EOO_M instead of the full signature term).
std::string render_ground(Term t, const Context& ctx);

}  // namespace faircheck

#endif  // FAIRCHECK_REPORT_HPP_
