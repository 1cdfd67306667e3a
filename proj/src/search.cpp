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

#include "faircheck/search.hpp"

#include <atomic>
#include <chrono>
#include <thread>
#include <unordered_map>

namespace faircheck {

const char* to_string(Verdict v) {
  switch (v) {
    case Verdict::SafeWithinBounds: return "safe_within_bounds";
    case Verdict::Attack: return "attack";
    case Verdict::BoundExhausted: return "bound_exhausted";
  }
  return "?";
}

namespace {

uint64_t mix(uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

struct Hasher {
  uint64_t h1 = 0x6a09e667f3bcc908ULL;
  uint64_t h2 = 0xbb67ae8584caa73bULL;
  void feed(uint64_t w) {
    h1 = mix(h1 ^ w);
    h2 = mix(h2 + (w ^ 0x2545f4914f6cdd1dULL));
  }
  void feed_term(Term t) { feed(t.null() ? 0x17 : t.shash()); }
  void feed_str(const std::string& s) {
    uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : s) {
      h ^= c;
      h *= 1099511628211ULL;
    }
    feed(h);
  }
  Digest digest() const { return {h1, h2}; }
};

void feed_binding(Hasher& h, const Binding& b) {
  h.feed(0xB1);
  for (const auto& [name, val] : b.entries()) {
    h.feed_str(name);
    h.feed_term(val);
  }
}

}  // namespace

Digest canonical_digest(const GlobalState& st, const Context& ctx) {
  Hasher h;
  h.feed(st.roles.size());
  for (const auto& rs : st.roles) {
    h.feed(0xA0);
    h.feed(rs.pc);
    h.feed(static_cast<uint64_t>(static_cast<int64_t>(rs.sub) + 8));
    h.feed(rs.sub_pc);
    feed_binding(h, rs.binding);
    if (rs.kb) {
      h.feed(rs.kb->facts().size());
      for (Term f : rs.kb->facts()) h.feed_term(f);
    } else {
      h.feed(0xDEAD);
    }
  }
  h.feed(0xA1);
  for (Term f : st.intruder->facts()) h.feed_term(f);
  h.feed(0xA2);
  for (const auto& [a, k] : st.aborted) {
    h.feed_term(a);
    h.feed_term(k);
  }
  h.feed(0xA3);
  for (const auto& [a, k] : st.resolved) {
    h.feed_term(a);
    h.feed_term(k);
  }
  // The buffer hashes positionally: relative delivery order is semantic,
  // absolute sequence numbers are not.
  h.feed(0xA4);
  for (const auto& m : st.net) {
    h.feed_term(m.from);
    h.feed_term(m.to);
    h.feed_term(m.payload);
  }
  h.feed(0xA5);
  for (const auto& f : st.aknows) {
    h.feed(static_cast<uint64_t>(f.session) << 16 |
           static_cast<uint16_t>(f.role));
    h.feed_term(f.term);
  }
  h.feed(0xA6);
  for (const auto& f : st.witnessed) {
    h.feed_term(f.a);
    h.feed_term(f.b);
    h.feed_term(f.data);
  }
  h.feed(0xA7);
  for (const auto& f : st.violated) {
    h.feed_term(f.a);
    h.feed_term(f.b);
    h.feed_term(f.data);
  }
  h.feed(0xA8);
  for (const auto& s : st.services) {
    h.feed(s.used);
    h.feed(static_cast<uint64_t>(static_cast<int64_t>(s.active_pc) + 8));
    feed_binding(h, s.binding);
  }
  h.feed(0xA9);
  for (AtomKind k : st.minted_kinds) h.feed(static_cast<uint64_t>(k));
  (void)ctx;
  return h.digest();
}

// ---------------------------------------------------------------------------

namespace {

struct Node {
  GlobalState state;
  int64_t parent = -1;
  Transition via;
  uint32_t depth = 0;
};

std::vector<Transition> trace_of(const std::vector<Node>& nodes, int64_t idx) {
  std::vector<Transition> tr;
  for (int64_t i = idx; i > 0; i = nodes[i].parent)
    tr.push_back(nodes[i].via);
  std::reverse(tr.begin(), tr.end());
  return tr;
}

std::vector<std::string> encode_trace(const std::vector<Transition>& tr,
                                      const Context& ctx) {
  std::vector<std::string> out;
  for (const auto& t : tr) out.push_back(t.encode(ctx));
  return out;
}

struct Candidate {
  uint32_t depth;
  std::vector<std::string> enc;
  size_t prop_index;
  int64_t node;
};

bool candidate_less(const Candidate& a, const Candidate& b) {
  if (a.depth != b.depth) return a.depth < b.depth;
  if (a.enc != b.enc) return a.enc < b.enc;
  return a.prop_index < b.prop_index;
}

struct Expansion {
  std::vector<std::pair<Transition, GlobalState>> succs;
  std::string error;
  Transition error_via;
  bool failed = false;
  bool error_has_via = false;
};

}  // namespace

ExplorationResult explore(const Context& ctx,
                          const std::vector<CompiledProperty>& props,
                          const SearchOptions& opts) {
  auto t0 = std::chrono::steady_clock::now();
  ExplorationResult res;

  std::vector<Node> nodes;
  std::unordered_map<Digest, int64_t, DigestHash> visited;
  nodes.push_back({initial_state(ctx), -1, Transition{}, 0});
  visited.emplace(canonical_digest(nodes[0].state, ctx), 0);

  std::optional<Candidate> best;
  auto note_violation = [&](int64_t node, size_t prop) {
    Candidate c{nodes[node].depth, encode_trace(trace_of(nodes, node), ctx),
                prop, node};
    if (!best || candidate_less(c, *best)) best = std::move(c);
  };
  auto check_invariants = [&](int64_t node) {
    for (size_t i = 0; i < props.size(); ++i)
      if (props[i].mode == PropMode::Invariant &&
          !eval_formula(nodes[node].state, ctx, props[i].formula))
        note_violation(node, i);
  };
  auto check_terminal = [&](int64_t node) {
    ++res.stats.terminals;
    for (size_t i = 0; i < props.size(); ++i)
      if (props[i].mode == PropMode::Terminal &&
          !eval_formula(nodes[node].state, ctx, props[i].formula))
        note_violation(node, i);
  };
  auto finish = [&](Verdict v) {
    res.verdict = v;
    if (best) {
      res.verdict = Verdict::Attack;
      res.attack = AttackInfo{props[best->prop_index].name,
                              trace_of(nodes, best->node)};
    }
    res.stats.millis = static_cast<uint64_t>(
        std::chrono::duration_cast<std::chrono::milliseconds>(
            std::chrono::steady_clock::now() - t0)
            .count());
    return res;
  };

  check_invariants(0);
  ++res.stats.states;
  if (best) return finish(Verdict::Attack);

  if (opts.dfs) {
    // Sequential depth-first variant for memory-constrained runs.
    std::vector<int64_t> stack{0};
    while (!stack.empty()) {
      int64_t cur = stack.back();
      stack.pop_back();
      std::vector<Transition> ts;
      try {
        ts = enabled(nodes[cur].state, ctx);
      } catch (const ModelError& e) {
        throw ModelViolation(e.what(), trace_of(nodes, cur));
      }
      if (ts.empty()) {
        check_terminal(cur);
        if (best) return finish(Verdict::Attack);
        continue;
      }
      if (nodes[cur].depth >= opts.bounds.max_depth)
        return finish(Verdict::BoundExhausted);
      for (auto it = ts.rbegin(); it != ts.rend(); ++it) {
        GlobalState succ;
        try {
          succ = apply(nodes[cur].state, *it, ctx);
        } catch (const ModelError& e) {
          auto tr = trace_of(nodes, cur);
          tr.push_back(*it);
          throw ModelViolation(e.what(), tr);
        }
        Digest d = canonical_digest(succ, ctx);
        if (visited.count(d)) continue;
        int64_t idx = static_cast<int64_t>(nodes.size());
        visited.emplace(d, idx);
        nodes.push_back({std::move(succ), cur, *it, nodes[cur].depth + 1});
        res.stats.depth = std::max(res.stats.depth, nodes[cur].depth + 1);
        ++res.stats.states;
        check_invariants(idx);
        if (best) return finish(Verdict::Attack);
        if (res.stats.states >= opts.bounds.max_states)
          return finish(Verdict::BoundExhausted);
        stack.push_back(idx);
      }
    }
    return finish(Verdict::SafeWithinBounds);
  }

  // Breadth-first levels: parallel expansion, deterministic serial commit.
  std::vector<int64_t> frontier{0};
  uint32_t depth = 0;
  while (!frontier.empty()) {
    std::vector<Expansion> exp(frontier.size());
    auto expand_one = [&](size_t i) {
      try {
        for (const Transition& t : enabled(nodes[frontier[i]].state, ctx)) {
          GlobalState succ;
          try {
            succ = apply(nodes[frontier[i]].state, t, ctx);
          } catch (const ModelError& e) {
            exp[i].failed = true;
            exp[i].error = e.what();
            exp[i].error_via = t;
            exp[i].error_has_via = true;
            return;
          }
          exp[i].succs.emplace_back(t, std::move(succ));
        }
      } catch (const ModelError& e) {
        exp[i].failed = true;
        exp[i].error = e.what();
      }
    };
    int workers = std::max(1, opts.workers);
    if (workers == 1 || frontier.size() < 2) {
      for (size_t i = 0; i < frontier.size(); ++i) expand_one(i);
    } else {
      std::atomic<size_t> next{0};
      std::vector<std::thread> pool;
      for (int w = 0; w < workers; ++w)
        pool.emplace_back([&] {
          for (size_t i = next.fetch_add(1); i < frontier.size();
               i = next.fetch_add(1))
            expand_one(i);
        });
      for (auto& th : pool) th.join();
    }
    // Serial, order-deterministic commit.
    std::vector<int64_t> next_frontier;
    bool exhausted = false;
    for (size_t i = 0; i < frontier.size(); ++i) {
      if (exp[i].failed) {
        auto tr = trace_of(nodes, frontier[i]);
        if (exp[i].error_has_via) tr.push_back(exp[i].error_via);
        throw ModelViolation(exp[i].error, tr);
      }
      if (exp[i].succs.empty()) {
        check_terminal(frontier[i]);
        continue;
      }
      if (depth + 1 > opts.bounds.max_depth) {
        exhausted = true;
        continue;
      }
      for (auto& [t, succ] : exp[i].succs) {
        Digest d = canonical_digest(succ, ctx);
        if (visited.count(d)) continue;
        if (res.stats.states >= opts.bounds.max_states) {
          exhausted = true;
          break;
        }
        int64_t idx = static_cast<int64_t>(nodes.size());
        visited.emplace(d, idx);
        nodes.push_back({std::move(succ), frontier[i], t, depth + 1});
        ++res.stats.states;
        res.stats.depth = std::max(res.stats.depth, depth + 1);
        check_invariants(idx);
        next_frontier.push_back(idx);
      }
      if (exhausted && res.stats.states >= opts.bounds.max_states) break;
    }
    if (best) return finish(Verdict::Attack);  // minimal at this level
    if (exhausted) return finish(Verdict::BoundExhausted);
    frontier = std::move(next_frontier);
    ++depth;
  }
  return finish(Verdict::SafeWithinBounds);
}

GlobalState replay(const Context& ctx, const std::vector<Transition>& trace) {
  GlobalState st = initial_state(ctx);
  for (size_t i = 0; i < trace.size(); ++i) {
    std::string want = trace[i].encode(ctx);
    bool found = false;
    for (const Transition& t : enabled(st, ctx)) {
      if (t.encode(ctx) == want) {
        st = apply(st, t, ctx);
        found = true;
        break;
      }
    }
    if (!found)
      throw ReplayError("transition " + std::to_string(i + 1) +
                        " is not enabled at replay time: " + want);
  }
  return st;
}

}  // namespace faircheck
