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

#include "faircheck/dsl.hpp"
#include "faircheck/elaborate.hpp"
#include "testutil.hpp"

using namespace faircheck;
using faircheck::test::model_path;
using faircheck::test::read_file;

TEST_CASE("the shipped ccd model parses with the paper's step counts") {
  ProtocolSpec spec = parse_protocol(read_file(model_path("ccd.proto")));
  CHECK(spec.name == "ccd");
  CHECK(spec.main_lines.size() == 4);
  REQUIRE(spec.subs.size() == 2);
  CHECK(spec.subs[0].name == "abort");
  CHECK(spec.subs[0].lines.size() == 2);
  CHECK(spec.subs[1].name == "resolve");
  CHECK(spec.subs[1].lines.size() == 2);
  CHECK(spec.evidences.size() == 2);
  CHECK(spec.ttp_role == "TTP");
}

TEST_CASE("the shipped fairzg model has five numbered exchanges") {
  ProtocolSpec spec = parse_protocol(read_file(model_path("fairzg.proto")));
  CHECK(spec.main_lines.size() == 5);
  CHECK(spec.subs.empty());
  int fetches = 0;
  for (const auto& ex : spec.main_lines) fetches += ex.fetch ? 1 : 0;
  CHECK(fetches == 2);
}

TEST_CASE("minimal protocol with an empty script") {
  ProtocolSpec spec = parse_protocol("protocol p\nroles A\n");
  CHECK(spec.roles == std::vector<std::string>{"A"});
  CHECK(spec.main_lines.empty());
}

TEST_CASE("an undeclared identifier in a send is an error naming it") {
  const char* text =
      "protocol p\nroles A B\nmain:\n  1. A -> B : Z\n";
  try {
    parse_protocol(text);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("Z") != std::string::npos);
  }
}

TEST_CASE("a declared but never bound variable is an elaboration error") {
  // B sends A's fresh nonce without ever learning it.
  const char* text =
      "protocol p\nroles A B\nfresh A : N nonce\nmain:\n  1. B -> A : N\n";
  try {
    parse_protocol(text);
    FAIL("expected an elaboration error");
  } catch (const ElaborationError& e) {
    std::string msg = e.what();
    CHECK(msg.find("N") != std::string::npos);
    CHECK(msg.find("main.1") != std::string::npos);
  }
}

TEST_CASE("branch lines require the store role") {
  const char* text =
      "protocol p\nroles A B\nfresh A : N nonce\n"
      "main:\n  1. A -> B : N\n"
      "sub s by A when waiting main.1 :\n"
      "  1. B -> A : branch resolved(N) then reply N else reply N\n";
  CHECK_THROWS_AS(parse_protocol(text), ParseError);
}

TEST_CASE("dot association is canonical") {
  ProtocolSpec spec = parse_protocol(
      "protocol p\nroles A B C\nmain:\n  1. A -> B : A.B.C\n");
  TermScope scope = protocol_scope(spec);
  CHECK(parse_term("A.B.C", scope) == parse_term("A.(B.C)", scope));
  CHECK(parse_term("A.B.C", scope) != parse_term("(A.B).C", scope));
}

TEST_CASE("ground term rendering is re-parseable") {
  faircheck::test::CcdTerms t;
  TermScope scope;
  scope.names = {{"a", t.a},     {"b", t.b}, {"ttp", t.ttp},
                 {"K", t.K},     {"M", t.M}, {"abort", t.abort_l}};
  for (Term g : {t.c(), t.eoo(), t.eor(), t.eor_k(), t.e_ttp(),
                 Term::pair(Term::pair(t.a, t.b), t.ttp)}) {
    CHECK(parse_term(render(g), scope) == g);
  }
}

TEST_CASE("protocol rendering round-trips") {
  for (const char* name : {"ccd.proto", "fairzg.proto",
                           "ccd_secure_ttp.proto"}) {
    ProtocolSpec spec = parse_protocol(read_file(model_path(name)));
    ProtocolSpec again = parse_protocol(render_protocol(spec));
    CHECK(again == spec);
  }
}

TEST_CASE("scenario parsing and validation") {
  ProtocolSpec spec = parse_protocol(read_file(model_path("ccd.proto")));
  Scenario scn =
      parse_scenario(read_file(model_path("ccd_honest.scn")), spec);
  CHECK(scn.sessions.size() == 1);
  CHECK(scn.sessions[0].role_agents.at("A") == "a");
  CHECK(scn.dishonest.empty());
  CHECK(scn.bounds.fresh_budget == 1);

  Scenario dis =
      parse_scenario(read_file(model_path("ccd_b_dishonest.scn")), spec);
  CHECK(dis.dishonest.count("i") == 1);

  CHECK_THROWS_AS(
      parse_scenario("scenario x\nprotocol ccd\nsession s1 : A = a, B = b\n",
                     spec),
      ParseError);  // TTP binding missing
  CHECK_THROWS_AS(
      parse_scenario(
          "scenario x\nprotocol ccd\nsession s1 : A = a, B = b, Q = q\n",
          spec),
      ParseError);  // unknown role
  CHECK_THROWS_AS(
      parse_scenario("scenario x\nprotocol nope\nsession s1 : A = a\n", spec),
      ParseError);  // unknown protocol
  CHECK_THROWS_AS(
      parse_scenario("scenario x\nprotocol ccd\n"
                     "session s1 : A = a, B = b, TTP = ttp\nbound max_depth 0\n",
                     spec),
      ParseError);  // bounds must be positive
  Scenario sec = parse_scenario(
      "scenario x\nprotocol ccd\nsession s1 : A = a, B = b, TTP = ttp\n"
      "channel A TTP secure\n",
      spec);
  CHECK(sec.channel_overrides.size() == 1);
}

TEST_CASE("formula parsing") {
  ProtocolSpec spec = parse_protocol(read_file(model_path("ccd.proto")));
  Scenario scn =
      parse_scenario(read_file(model_path("ccd_honest.scn")), spec);

  Formula fair = parse_formula(
      "terminal: aknows(A, s1, NRR_A) <=> aknows(B, s1, NRO_B)", spec, scn);
  CHECK(fair.kind == Formula::Kind::Iff);
  CHECK(fair.kids[0].kind == Formula::Kind::Aknows);
  CHECK(fair.kids[0].tf == spec.find_evidence("NRR_A")->formula);

  Formula cor = parse_formula(
      "invariant: deduce(B, NRO_B) => aknows(B, s1, NRO_B)", spec, scn);
  CHECK(cor.kind == Formula::Kind::Implies);
  CHECK(cor.kids[0].kind == Formula::Kind::Deduce);
  CHECK(cor.kids[0].session == "s1");  // defaulted

  CHECK_THROWS_AS(parse_formula("aknows(A)", spec, scn), ParseError);
  CHECK_THROWS_AS(parse_formula("aknows(A, s9, M)", spec, scn), ParseError);
  CHECK_THROWS_AS(parse_formula("nosuch(A, s1, M)", spec, scn), ParseError);
}

TEST_CASE("property files carry modes and re-parse from rendering") {
  ProtocolSpec spec = parse_protocol(read_file(model_path("ccd.proto")));
  Scenario scn =
      parse_scenario(read_file(model_path("ccd_honest.scn")), spec);
  PropertyFile pf = parse_property_file(
      read_file(model_path("ccd_fairness.prop")), spec, scn);
  REQUIRE(pf.props.size() == 1);
  CHECK(pf.props[0].mode == PropMode::Terminal);
  std::string rendered = render_formula(pf.props[0].formula, spec);
  Formula again = parse_formula(rendered, spec, scn);
  CHECK(render_formula(again, spec) == rendered);

  PropertyFile auth = parse_property_file(
      read_file(model_path("fairzg_auth.prop")),
      parse_protocol(read_file(model_path("fairzg.proto"))),
      parse_scenario(read_file(model_path("fairzg_honest.scn")),
                     parse_protocol(read_file(model_path("fairzg.proto")))));
  CHECK(auth.props.size() == 2);
  CHECK(auth.props[0].mode == PropMode::Invariant);
}

TEST_CASE("all shipped corpus files parse") {
  ProtocolSpec ccd = parse_protocol(read_file(model_path("ccd.proto")));
  ProtocolSpec sec =
      parse_protocol(read_file(model_path("ccd_secure_ttp.proto")));
  ProtocolSpec zg = parse_protocol(read_file(model_path("fairzg.proto")));
  CHECK(sec.channels.size() == 3);
  Scenario s1 = parse_scenario(read_file(model_path("ccd_honest.scn")), ccd);
  Scenario s2 =
      parse_scenario(read_file(model_path("ccd_b_dishonest.scn")), ccd);
  Scenario s3 =
      parse_scenario(read_file(model_path("ccd_secure_honest.scn")), sec);
  Scenario s4 =
      parse_scenario(read_file(model_path("fairzg_honest.scn")), zg);
  // The honest ccd scenario also drives the secure variant.
  Scenario s5 = parse_scenario(read_file(model_path("ccd_honest.scn")), sec);
  for (const char* prop : {"ccd_fairness.prop", "ccd_nro.prop",
                           "ccd_nrr.prop"})
    CHECK_NOTHROW(parse_property_file(read_file(model_path(prop)), ccd, s1));
  for (const char* prop : {"fairzg_auth.prop", "fairzg_nr.prop"})
    CHECK_NOTHROW(parse_property_file(read_file(model_path(prop)), zg, s4));
}
