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

#include "faircheck/runtime.hpp"
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

}  // namespace

TEST_CASE("initial knowledge") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  GlobalState st = initial_state(ctx);
  CcdTerms t;
  CHECK(st.intruder->can_deduce(Term::pk(t.a)));
  CHECK(st.intruder->can_deduce(Term::pk(t.b)));
  CHECK(st.intruder->can_deduce(Term::pk(t.ttp)));
  CHECK_FALSE(st.intruder->can_deduce(Term::inv(Term::pk(t.a))));
  CHECK(st.intruder->can_deduce(t.a));
  // Honest roles know identities, peers, their own private key, all pks.
  const RoleState& ra = st.roles[0];
  CHECK(ra.kb->can_deduce(Term::inv(Term::pk(t.a))));
  CHECK(ra.kb->can_deduce(t.b));
  CHECK_FALSE(ra.kb->can_deduce(Term::inv(Term::pk(t.b))));

  Context dis = load_ctx("ccd.proto", "ccd_b_dishonest.scn");
  GlobalState st2 = initial_state(dis);
  Term i = Term::atom(AtomKind::Agent, "i");
  CHECK(st2.intruder->can_deduce(Term::inv(Term::pk(i))));
}

TEST_CASE("zero-session scenario is immediately terminal") {
  ProtocolSpec spec = parse_protocol(read_file(model_path("ccd.proto")));
  Scenario empty;
  empty.name = "empty";
  empty.protocol = "ccd";
  Context ctx = make_context(spec, empty);
  GlobalState st = initial_state(ctx);
  CHECK(enabled(st, ctx).empty());
  CHECK(is_terminal(st, ctx));
}

TEST_CASE("after ccd main step 1 only the genuine message reaches B") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  GlobalState st = initial_state(ctx);
  REQUIRE(step_matching(st, ctx, "fresh|s1|A"));
  REQUIRE(step_matching(st, ctx, "send|s1|A|main"));
  CHECK_FALSE(is_terminal(st, ctx));

  // B's receive alternatives, directed enumeration vs literal oracle.
  int b = ctx.model.spec.role_index("B");
  const Step& recv1 = ctx.model.mains[b].steps[0];
  REQUIRE(recv1.kind == StepKind::Recv);
  const RoleState& rb = st.roles[b];
  std::vector<Term> extra;
  for (int r = 0; r < ctx.roles(); ++r)
    for (const auto& [n, v] : st.roles[r].binding.entries())
      extra.push_back(v);
  auto fast = enumerate_deliveries(recv1.alts[0].pattern, rb.binding,
                                   *st.intruder, extra);
  auto slow = oracle_deliveries(recv1.alts[0].pattern, rb.binding,
                                *st.intruder, extra);
  CHECK(fast == slow);
  REQUIRE(fast.size() == 1);
  CcdTerms t;
  CHECK(fast[0] == Term::pair(t.c(), t.eoo()));
}

TEST_CASE("delivery enumeration matches the oracle on random states") {
  // Random intruder knowledge and random patterns, small enough for the
  // literal enumeration.
  TermGen gen(31);
  for (int i = 0; i < 60; ++i) {
    std::vector<Term> seed;
    int n = 1 + static_cast<int>(gen.pick(4));
    for (int j = 0; j < n; ++j) seed.push_back(gen.gen(2));
    KnowledgeBase kb = KnowledgeBase{}.add_all(seed);
    int nv = 0;
    Term pattern = gen.gen_pattern(2, &nv);
    if (vars_of(pattern).size() > 2) continue;
    auto fast = enumerate_deliveries(pattern, Binding{}, kb, {});
    auto slow = oracle_deliveries(pattern, Binding{}, kb, {});
    CHECK(fast == slow);
  }
}

TEST_CASE("the abort entry opens exactly while A waits on EOR_M") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  GlobalState st = initial_state(ctx);
  auto has_entry = [&](const GlobalState& s) {
    for (const Transition& t : enabled(s, ctx))
      if (t.kind == Transition::Kind::SubEntry &&
          ctx.model.subs[t.sub].name == "abort")
        return true;
    return false;
  };
  CHECK_FALSE(has_entry(st));
  REQUIRE(step_matching(st, ctx, "fresh|s1|A"));
  CHECK_FALSE(has_entry(st));
  REQUIRE(step_matching(st, ctx, "send|s1|A|main"));
  CHECK(has_entry(st));  // waiting at main.2 on a dy channel
  // Delivering EOR_M closes the window: B must first receive and answer.
  REQUIRE(step_matching(st, ctx, "recv|s1|B|main|0"));
  REQUIRE(step_matching(st, ctx, "send|s1|B|main"));
  REQUIRE(step_matching(st, ctx, "recv|s1|A|main|2"));
  CHECK_FALSE(has_entry(st));
}

TEST_CASE("strict entry on secure channels") {
  Context ctx = load_ctx("ccd_secure_ttp.proto", "ccd_secure_honest.scn");
  GlobalState st = initial_state(ctx);
  auto abort_entry = [&](const GlobalState& s) {
    for (const Transition& t : enabled(s, ctx))
      if (t.kind == Transition::Kind::SubEntry &&
          ctx.model.subs[t.sub].name == "abort")
        return true;
    return false;
  };
  REQUIRE(step_matching(st, ctx, "fresh|s1|A"));
  REQUIRE(step_matching(st, ctx, "send|s1|A|main"));
  CHECK(abort_entry(st));  // nothing queued from B yet
  REQUIRE(step_matching(st, ctx, "recv|s1|B|main|0"));
  CHECK(abort_entry(st));
  REQUIRE(step_matching(st, ctx, "send|s1|B|main"));
  CHECK_FALSE(abort_entry(st));  // EOR_M sits in A's buffer
}

TEST_CASE("unsound annotations abort the run") {
  // A annotates knowledge of a nonce it only ever saw under a hash.
  const char* proto =
      "protocol bad\nroles A B\nfresh B : N nonce\n"
      "main:\n"
      "  1. B -> A : h(N)\n"
      "       annotate A knows N\n";
  ProtocolSpec spec = parse_protocol(proto);
  Scenario scn = parse_scenario(
      "scenario s\nprotocol bad\nsession s1 : A = a, B = b\n", spec);
  Context ctx = make_context(spec, scn);
  SearchOptions opts;
  opts.bounds = scn.bounds;
  CHECK_THROWS_AS(explore(ctx, {}, opts), ModelViolation);
}

TEST_CASE("dy sends are absorbed into the intruder knowledge") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  GlobalState st = initial_state(ctx);
  std::vector<Transition> walk;
  REQUIRE(step_matching(st, ctx, "fresh|s1|A", &walk));
  REQUIRE(step_matching(st, ctx, "send|s1|A|main", &walk));
  CcdTerms t;
  CHECK(st.intruder->can_deduce(Term::pair(t.c(), t.eoo())));
  CHECK(st.net.empty());
}

TEST_CASE("replaying a trace reproduces the state exactly") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  GlobalState st = initial_state(ctx);
  std::vector<Transition> walk;
  for (const char* n :
       {"fresh|s1|A", "send|s1|A|main", "recv|s1|B|main|0", "send|s1|B|main",
        "recv|s1|A|main|2", "send|s1|A|main", "recv|s1|B|main|2"})
    REQUIRE(step_matching(st, ctx, n, &walk));
  GlobalState replayed = replay(ctx, walk);
  CHECK(replayed == st);
  CHECK(canonical_digest(replayed, ctx) == canonical_digest(st, ctx));
}

TEST_CASE("replay against a different scenario diverges") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  GlobalState st = initial_state(ctx);
  std::vector<Transition> walk;
  REQUIRE(step_matching(st, ctx, "fresh|s1|A", &walk));
  REQUIRE(step_matching(st, ctx, "send|s1|A|main", &walk));
  REQUIRE(step_matching(st, ctx, "recv|s1|B|main|0", &walk));
  Context other = load_ctx("ccd.proto", "ccd_b_dishonest.scn");
  CHECK_THROWS_AS(replay(other, walk), ReplayError);
}

TEST_CASE("the ttp store only grows along a trace") {
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  SearchOptions opts;
  opts.bounds = ctx.scn.bounds;
  ProtocolSpec spec = ctx.model.spec;
  Scenario scn = ctx.scn;
  PropertyFile pf = parse_property_file(
      read_file(model_path("ccd_fairness.prop")), spec, scn);
  std::vector<CompiledProperty> props{compile_property(pf.props[0], ctx)};
  ExplorationResult res = explore(ctx, props, opts);
  REQUIRE(res.verdict == Verdict::Attack);
  GlobalState st = initial_state(ctx);
  size_t ab = 0, rs = 0;
  for (const Transition& t : res.attack->trace) {
    st = apply(st, t, ctx);
    CHECK(st.aborted.size() >= ab);
    CHECK(st.resolved.size() >= rs);
    ab = st.aborted.size();
    rs = st.resolved.size();
  }
}

TEST_CASE("a session key is never both aborted and resolved") {
  // Exhaustive over the honest scenario: the TTP answers first-request-wins.
  Context ctx = load_ctx("ccd.proto", "ccd_honest.scn");
  GlobalState init = initial_state(ctx);
  std::vector<GlobalState> frontier{init};
  std::set<std::pair<uint64_t, uint64_t>> seen;
  int guard = 0;
  while (!frontier.empty() && ++guard < 60) {
    std::vector<GlobalState> next;
    for (const auto& st : frontier) {
      for (const auto& [agent, key] : st.aborted) {
        for (const auto& [agent2, key2] : st.resolved)
          CHECK_FALSE((agent == agent2 && key == key2));
      }
      for (const Transition& t : enabled(st, ctx)) {
        GlobalState succ = apply(st, t, ctx);
        Digest d = canonical_digest(succ, ctx);
        if (seen.insert({d.hi, d.lo}).second) next.push_back(std::move(succ));
      }
    }
    frontier = std::move(next);
  }
}
