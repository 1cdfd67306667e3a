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

#ifndef FAIRCHECK_SEARCH_HPP_
#define FAIRCHECK_SEARCH_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "faircheck/property.hpp"

namespace faircheck {

struct Digest {
  uint64_t hi = 0;
  uint64_t lo = 0;
  bool operator==(const Digest&) const = default;
};

struct DigestHash {
  size_t operator()(const Digest& d) const {
    return static_cast<size_t>(d.hi ^ (d.lo * 0x9e3779b97f4a7c15ULL));
  }
};

/// Order-insensitive over all set components (they are kept sorted), order-
/// sensitive over the secure network buffer (delivery order matters).
Digest canonical_digest(const GlobalState& st, const Context& ctx);

enum class Verdict : uint8_t { SafeWithinBounds, Attack, BoundExhausted };

const char* to_string(Verdict v);

struct SearchStats {
  uint64_t states = 0;     // states expanded (visited)
  uint64_t terminals = 0;  // complete runs seen
  uint32_t depth = 0;      // deepest level reached
  uint64_t millis = 0;
};

struct AttackInfo {
  std::string property;
  std::vector<Transition> trace;
};

struct ExplorationResult {
  Verdict verdict = Verdict::SafeWithinBounds;
  std::optional<AttackInfo> attack;
  SearchStats stats;
};

struct SearchOptions {
  Bounds bounds;
  int workers = 1;
  bool dfs = false;
};

/// A model error (unsound annotation, non-composable send) carrying the
/// trace that reaches it.
struct ModelViolation : std::runtime_error {
  ModelViolation(const std::string& msg, std::vector<Transition> tr)
      : std::runtime_error(msg), trace(std::move(tr)) {}
  std::vector<Transition> trace;
};

/// Bounded exhaustive exploration. Invariant-mode properties are evaluated
/// at every distinct state, terminal-mode ones at every complete run. The
/// first violation in breadth-first order wins; ties at equal depth break on
/// the trace's transition encodings, so results do not depend on workers.
ExplorationResult explore(const Context& ctx,
                          const std::vector<CompiledProperty>& props,
                          const SearchOptions& opts);

struct ReplayError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Deterministic re-execution; throws ReplayError naming the first
/// transition that is not enabled.
GlobalState replay(const Context& ctx, const std::vector<Transition>& trace);

}  // namespace faircheck

#endif  // FAIRCHECK_SEARCH_HPP_
