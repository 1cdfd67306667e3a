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

#include "faircheck/term.hpp"
#include "testutil.hpp"

using namespace faircheck;
using faircheck::test::CcdTerms;
using faircheck::test::TermGen;

namespace {

// Independent brute-force walk (no dedup during traversal).
void naive_walk(Term t, std::set<Term, TermLess>& out) {
  out.insert(t);
  if (t.node().child0) naive_walk(t.child0(), out);
  if (t.node().child1) naive_walk(t.child1(), out);
}

}  // namespace

TEST_CASE("interning gives structural identity") {
  Term a1 = Term::atom(AtomKind::Agent, "a");
  Term a2 = Term::atom(AtomKind::Agent, "a");
  CHECK(a1 == a2);
  CHECK(Term::pair(a1, a2) == Term::pair(a2, a1));
  Term fresh1 = Term::atom(AtomKind::SymKey, "K", Origin{1, "A"});
  Term fresh2 = Term::atom(AtomKind::SymKey, "K", Origin{2, "A"});
  CHECK(fresh1 != fresh2);
}

TEST_CASE("subterms of a leaf and of a pair") {
  Term a = Term::atom(AtomKind::Agent, "a");
  Term b = Term::atom(AtomKind::Agent, "b");
  CHECK(subterms(a) == std::vector<Term>{a});
  auto st = subterms(Term::pair(a, b));
  CHECK(st.size() == 3);
  CHECK(std::count(st.begin(), st.end(), Term::pair(a, b)) == 1);
}

TEST_CASE("subterms of EOO_M match the brute-force walk") {
  CcdTerms t;
  std::set<Term, TermLess> expect;
  naive_walk(t.eoo(), expect);
  auto got = subterms(t.eoo());
  CHECK(got.size() == expect.size());
  CHECK(std::equal(got.begin(), got.end(), expect.begin()));
  // Frozen from the walk: signature, body, 3 pair spines, hash, {M}K, M, K,
  // the aenc blob, K.A, the three agents, pk(ttp), inv(pk(a)), pk(a).
  CHECK(got.size() == 16);
}

TEST_CASE("subterms is closed") {
  TermGen gen(7);
  for (int i = 0; i < 200; ++i) {
    Term t = gen.gen(3);
    auto all = subterms(t);
    std::set<Term, TermLess> allset(all.begin(), all.end());
    for (Term s : all)
      for (Term ss : subterms(s)) CHECK(allset.count(ss) == 1);
  }
}

TEST_CASE("substitute examples") {
  Term k = Term::atom(AtomKind::SymKey, "k");
  Term m = Term::atom(AtomKind::Payload, "m");
  Term alice = Term::atom(AtomKind::Agent, "alice");
  Binding b;
  b.bind("X", m);
  CHECK(substitute(Term::senc(Term::var("X"), k), b) == Term::senc(m, k));
  CHECK(substitute(alice, Binding{}) == alice);
  Binding b2;
  b2.bind("D", Term::hash(m));
  b2.bind("A", alice);
  Term p = Term::sign(Term::var("D"), Term::inv(Term::pk(Term::var("A"))));
  CHECK(substitute(p, b2) ==
        Term::sign(Term::hash(m), Term::inv(Term::pk(alice))));
}

TEST_CASE("substitute rejects sort mismatches") {
  Term m = Term::atom(AtomKind::Payload, "m");
  Binding b;
  b.bind("X", m);
  CHECK_THROWS_AS(substitute(Term::var("X", AtomKind::Agent), b), TermError);
}

TEST_CASE("match examples") {
  Term a = Term::atom(AtomKind::Agent, "a");
  Term b = Term::atom(AtomKind::Agent, "b");
  Term k = Term::atom(AtomKind::SymKey, "k");
  Term k2 = Term::atom(AtomKind::SymKey, "k2");
  Term m = Term::atom(AtomKind::Payload, "m");

  Binding out;
  CHECK(match(Term::pair(Term::var("X"), Term::var("X")), Term::pair(a, a),
              out));
  CHECK(out.get("X") == a);

  Binding out2;
  CHECK_FALSE(match(Term::pair(Term::var("X"), Term::var("X")),
                    Term::pair(a, b), out2));

  Binding out3;
  CHECK_FALSE(match(Term::senc(Term::var("B"), k), Term::senc(m, k2), out3));
}

TEST_CASE("match/substitute round-trip on random pattern-binding pairs") {
  TermGen gen(11);
  for (int i = 0; i < 300; ++i) {
    int nv = 0;
    Term p = gen.gen_pattern(3, &nv);
    Binding b;
    for (Term v : vars_of(p)) b.bind(v.name(), gen.gen(2));
    Term t = substitute(p, b);
    REQUIRE(t.is_ground());
    Binding got;
    REQUIRE(match(p, t, got));
    CHECK(substitute(p, got) == t);
  }
}

TEST_CASE("total order is a strict order consistent with equality") {
  TermGen gen(13);
  std::vector<Term> ts;
  for (int i = 0; i < 60; ++i) ts.push_back(gen.gen(2));
  for (Term x : ts)
    for (Term y : ts) {
      int c = term_compare(x, y);
      CHECK(c == -term_compare(y, x));
      CHECK((c == 0) == (x == y));
    }
  // transitivity on sorted triples
  std::sort(ts.begin(), ts.end(), TermLess{});
  for (size_t i = 2; i < ts.size(); ++i) {
    CHECK(term_compare(ts[i - 2], ts[i]) <= 0);
  }
}

TEST_CASE("constructor invariants") {
  Term a = Term::atom(AtomKind::Agent, "a");
  Term n = Term::atom(AtomKind::Nonce, "n");
  CHECK_THROWS_AS(Term::inv(n), TermError);                  // inv of non-pk
  CHECK_THROWS_AS(Term::inv(Term::inv(Term::pk(a))), TermError);  // double inv
  CHECK_THROWS_AS(Term::pk(n), TermError);
  CHECK_THROWS_AS(Term::sign(n, Term::pk(a)), TermError);
  CHECK_THROWS_AS(Term::aenc(n, n), TermError);
  CHECK_NOTHROW(Term::inv(Term::pk(Term::var("A"))));
}

TEST_CASE("dot lists associate to the right") {
  Term a = Term::atom(AtomKind::Agent, "a");
  Term b = Term::atom(AtomKind::Agent, "b");
  Term c = Term::atom(AtomKind::Agent, "c");
  CHECK(Term::dots({a, b, c}) == Term::pair(a, Term::pair(b, c)));
}

TEST_CASE("rendering uses the canonical surface syntax") {
  CcdTerms t;
  CHECK(render(t.c()) == "{M}K");
  CHECK(render(t.eoo()) == "sig(a, b.ttp.h({M}K).{K.a}pk(ttp))");
  CHECK(render(Term::pair(Term::pair(t.a, t.b), t.ttp)) == "(a.b).ttp");
  RenderOpts with_origins;
  with_origins.origins = true;
  CHECK(render(t.K, with_origins) == "K@A#1");
  CHECK(render(Term::var("X")) == "?X");
}
