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

#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <set>

#include "faircheck/report.hpp"
#include "faircheck/search.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

using namespace faircheck;
using namespace faircheck::test;

namespace {

Context load_ctx(const std::string& proto, const std::string& scn) {
  ProtocolSpec spec = parse_protocol(read_file(model_path(proto)));
  Scenario s = parse_scenario(read_file(model_path(scn)), spec);
  return make_context(spec, s);
}

std::vector<CompiledProperty> load_props(const Context& ctx,
                                         const std::string& prop_file) {
  PropertyFile pf = parse_property_file(read_file(model_path(prop_file)),
                                        ctx.model.spec, ctx.scn);
  std::vector<CompiledProperty> out;
  for (const auto& p : pf.props) out.push_back(compile_property(p, ctx));
  return out;
}

}  // namespace

TEST_CASE("digest ignores fact insertion order") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  GlobalState a = initial_state(ctx);
  GlobalState b = a;
  Term x = Term::atom(AtomKind::Nonce, "x");
  Term y = Term::atom(AtomKind::Nonce, "y");
  a.intruder = std::make_shared<KnowledgeBase>(a.intruder->add(x).add(y));
  b.intruder = std::make_shared<KnowledgeBase>(b.intruder->add(y).add(x));
  CHECK(a == b);
  CHECK(canonical_digest(a, ctx) == canonical_digest(b, ctx));
}

TEST_CASE("digest distinguishes store differences") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  GlobalState a = initial_state(ctx);
  GlobalState b = a;
  CcdTerms t;
  b.aborted.push_back({t.ttp, t.K});
  CHECK(canonical_digest(a, ctx) != canonical_digest(b, ctx));
}

TEST_CASE("1000 random distinct states have distinct digests") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  TermGen gen(41);
  std::vector<GlobalState> states;
  std::set<std::pair<uint64_t, uint64_t>> digests;
  GlobalState base = initial_state(ctx);
  while (states.size() < 1000) {
    GlobalState st = base;
    int mutations = 1 + static_cast<int>(gen.pick(4));
    for (int m = 0; m < mutations; ++m) {
      switch (gen.pick(4)) {
        case 0:
          st.intruder =
              std::make_shared<KnowledgeBase>(st.intruder->add(gen.gen(2)));
          break;
        case 1:
          st.aknows.push_back(
              {0, static_cast<int16_t>(gen.pick(3)), gen.gen(2)});
          std::sort(st.aknows.begin(), st.aknows.end(),
                    [](const AkFact& a, const AkFact& b) {
                      if (a.role != b.role) return a.role < b.role;
                      return term_less(a.term, b.term);
                    });
          break;
        case 2:
          st.aborted.push_back({gen.agent(), gen.gen(2)});
          break;
        default:
          st.roles[gen.pick(st.roles.size())].pc++;
          break;
      }
    }
    bool dup = false;
    for (const auto& other : states)
      if (other == st) dup = true;
    if (dup) continue;
    Digest d = canonical_digest(st, ctx);
    bool inserted = digests.insert({d.hi, d.lo}).second;
    if (!inserted) {
      // A collision would require two structurally different states; the
      // full-equality cross-check above already excluded duplicates.
      FAIL("digest collision on structurally distinct states");
    }
    states.push_back(std::move(st));
  }
  CHECK(states.size() == digests.size());
}

TEST_CASE("a zero-session scenario explores one state, one terminal") {
  ProtocolSpec spec = parse_protocol(read_file(model_path("ccd.proto")));
  Scenario empty;
  empty.name = "empty";
  empty.protocol = "ccd";
  Context ctx = make_context(spec, empty);
  SearchOptions opts;
  opts.bounds = empty.bounds;
  ExplorationResult res = explore(ctx, {}, opts);
  CHECK(res.verdict == Verdict::SafeWithinBounds);
  CHECK(res.stats.states == 1);
  CHECK(res.stats.terminals == 1);
}

TEST_CASE("attack traces replay to a state falsifying the property") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  auto props = load_props(ctx, "ccd_fairness.prop");
  SearchOptions opts;
  opts.bounds = ctx.scn.bounds;
  ExplorationResult res = explore(ctx, props, opts);
  REQUIRE(res.verdict == Verdict::Attack);
  REQUIRE(res.attack);
  GlobalState final_state = replay(ctx, res.attack->trace);
  CHECK(is_terminal(final_state, ctx));
  CHECK_FALSE(eval_formula(final_state, ctx, props[0].formula));
}

TEST_CASE("replay of the empty trace is the initial state") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  CHECK(replay(ctx, {}) == initial_state(ctx));
}

TEST_CASE("safe verdicts require an emptied frontier") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  SearchOptions opts;
  opts.bounds = ctx.scn.bounds;
  opts.bounds.max_depth = 1;
  ExplorationResult res = explore(ctx, {}, opts);
  CHECK(res.verdict == Verdict::BoundExhausted);

  opts.bounds = ctx.scn.bounds;
  opts.bounds.max_states = 5;
  res = explore(ctx, {}, opts);
  CHECK(res.verdict == Verdict::BoundExhausted);

  opts.bounds = ctx.scn.bounds;
  res = explore(ctx, {}, opts);
  CHECK(res.verdict == Verdict::SafeWithinBounds);
  CHECK(res.stats.terminals >= 2);
}

TEST_CASE("worker count changes neither verdict nor attack trace") {
  for (const char* scn : {"ccd_honest.scn", "ccd_b_dishonest.scn"}) {
    Context ctx = load_ctx("ccd.proto", scn);
    auto props = load_props(ctx, "ccd_fairness.prop");
    SearchOptions opts;
    opts.bounds = ctx.scn.bounds;
    opts.workers = 1;
    ExplorationResult one = explore(ctx, props, opts);
    opts.workers = 4;
    ExplorationResult four = explore(ctx, props, opts);
    REQUIRE(one.verdict == Verdict::Attack);
    REQUIRE(four.verdict == Verdict::Attack);
    auto enc = [&](const ExplorationResult& r) {
      std::vector<std::string> out;
      for (const auto& t : r.attack->trace) out.push_back(t.encode(ctx));
      return out;
    };
    CHECK(enc(one) == enc(four));
    CHECK(one.stats.states == four.stats.states);
  }
}

TEST_CASE("dfs finds the same verdicts") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  auto props = load_props(ctx, "ccd_fairness.prop");
  SearchOptions opts;
  opts.bounds = ctx.scn.bounds;
  opts.dfs = true;
  ExplorationResult res = explore(ctx, props, opts);
  CHECK(res.verdict == Verdict::Attack);
  GlobalState final_state = replay(ctx, res.attack->trace);
  CHECK_FALSE(eval_formula(final_state, ctx, props[0].formula));

  Context sec = load_ctx("ccd_secure_ttp.proto", "ccd_secure_honest.scn");
  auto sprops = load_props(sec, "ccd_fairness.prop");
  SearchOptions sopts;
  sopts.bounds = sec.scn.bounds;
  sopts.dfs = true;
  CHECK(explore(sec, sprops, sopts).verdict == Verdict::SafeWithinBounds);
}

TEST_CASE("machine trace records replay through the report layer") {
  Context ctx = load_ctx("ccd.proto", "ccd_b_dishonest.scn");
  auto props = load_props(ctx, "ccd_fairness.prop");
  SearchOptions opts;
  opts.bounds = ctx.scn.bounds;
  ExplorationResult res = explore(ctx, props, opts);
  REQUIRE(res.verdict == Verdict::Attack);
  RunReport rep = make_report(ctx, res, "p", "s");
  CHECK(rep.records.size() == res.attack->trace.size());
  CHECK(rep.human.size() == rep.records.size());
  auto [st, trace] = replay_records(ctx, rep.records);
  CHECK(is_terminal(st, ctx));
  std::string json = report_to_json(rep);
  RunReport back = report_from_json(json);
  CHECK(back.records == rep.records);
  CHECK(back.verdict == rep.verdict);
  CHECK(back.stats.states == rep.stats.states);
}
