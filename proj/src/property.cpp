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

#include "faircheck/property.hpp"

#include <algorithm>

namespace faircheck {

namespace {

TermFormula instantiate(const TermFormula& f, const Binding& canonical) {
  TermFormula g = substitute(f, canonical);
  // Validate groundness.
  std::vector<const TermFormula*> stack{&g};
  while (!stack.empty()) {
    const TermFormula* cur = stack.back();
    stack.pop_back();
    if (cur->kind == TermFormula::Kind::Leaf) {
      if (!cur->leaf.is_ground())
        throw ModelError("formula term is not ground after instantiation: " +
                         render(cur->leaf));
    }
    for (const auto& k : cur->kids) stack.push_back(&k);
  }
  return g;
}

}  // namespace

CompiledFormula compile_formula(const Formula& f, const Context& ctx) {
  CompiledFormula out;
  out.kind = f.kind;
  out.cval = f.cval;
  switch (f.kind) {
    case Formula::Kind::Aknows:
    case Formula::Kind::Deduce: {
      int s = ctx.session_index(f.session);
      if (s < 0) throw ModelError("unknown session '" + f.session + "'");
      int r = ctx.model.spec.role_index(f.role);
      if (r < 0) throw ModelError("unknown role '" + f.role + "'");
      out.session = static_cast<int16_t>(s);
      out.role = static_cast<int16_t>(r);
      out.tf = instantiate(f.tf, ctx.sessions[s].canonical);
      return out;
    }
    case Formula::Kind::Auth: {
      if (ctx.sessions.size() != 1)
        throw ModelError("auth properties need a single-session scenario");
      int x = ctx.model.spec.role_index(f.role);
      int y = ctx.model.spec.role_index(f.peer);
      if (x < 0 || y < 0) throw ModelError("unknown role in auth(...)");
      out.x_agent = ctx.sessions[0].role_agents[x];
      out.y_agent = ctx.sessions[0].role_agents[y];
      Term d = substitute(f.auth_data, ctx.sessions[0].canonical);
      if (!d.is_ground())
        throw ModelError("auth data is not ground after instantiation");
      out.auth_data = d;
      return out;
    }
    case Formula::Kind::Const:
      return out;
    default:
      for (const auto& k : f.kids) out.kids.push_back(compile_formula(k, ctx));
      return out;
  }
}

CompiledProperty compile_property(const NamedProperty& p, const Context& ctx) {
  return {p.name, p.mode, compile_formula(p.formula, ctx)};
}

namespace {

bool aknows_leaf(const GlobalState& st, int16_t session, int16_t role,
                 Term t) {
  AkFact probe{session, role, t};
  auto less = [](const AkFact& a, const AkFact& b) {
    if (a.session != b.session) return a.session < b.session;
    if (a.role != b.role) return a.role < b.role;
    return term_less(a.term, b.term);
  };
  return std::binary_search(st.aknows.begin(), st.aknows.end(), probe, less);
}

bool eval_aknows_tf(const GlobalState& st, int16_t session, int16_t role,
                    const TermFormula& f) {
  switch (f.kind) {
    case TermFormula::Kind::Leaf:
      return aknows_leaf(st, session, role, f.leaf);
    case TermFormula::Kind::And:
      for (const auto& k : f.kids)
        if (!eval_aknows_tf(st, session, role, k)) return false;
      return true;
    case TermFormula::Kind::Or:
      for (const auto& k : f.kids)
        if (eval_aknows_tf(st, session, role, k)) return true;
      return false;
    case TermFormula::Kind::Not:
      return !eval_aknows_tf(st, session, role, f.kids[0]);
  }
  return false;
}

const KnowledgeBase* kb_of(const GlobalState& st, const Context& ctx,
                           int16_t session, int16_t role) {
  if (!ctx.sessions[session].honest[role]) return st.intruder.get();
  return st.roles[session * ctx.roles() + role].kb.get();
}

}  // namespace

bool eval_formula(const GlobalState& st, const Context& ctx,
                  const CompiledFormula& f) {
  switch (f.kind) {
    case Formula::Kind::Const:
      return f.cval;
    case Formula::Kind::Aknows: {
      if (!ctx.sessions[f.session].honest[f.role])
        return st.intruder->eval(f.tf);  // dishonest: composability
      return eval_aknows_tf(st, f.session, f.role, f.tf);
    }
    case Formula::Kind::Deduce:
      return kb_of(st, ctx, f.session, f.role)->eval(f.tf);
    case Formula::Kind::Auth: {
      AuthFact probe{f.x_agent, f.y_agent, f.auth_data};
      auto less = [](const AuthFact& a, const AuthFact& b) {
        if (int c = term_compare(a.a, b.a)) return c < 0;
        if (int c = term_compare(a.b, b.b)) return c < 0;
        return term_less(a.data, b.data);
      };
      return !std::binary_search(st.violated.begin(), st.violated.end(),
                                 probe, less);
    }
    case Formula::Kind::And:
      for (const auto& k : f.kids)
        if (!eval_formula(st, ctx, k)) return false;
      return true;
    case Formula::Kind::Or:
      for (const auto& k : f.kids)
        if (eval_formula(st, ctx, k)) return true;
      return false;
    case Formula::Kind::Not:
      return !eval_formula(st, ctx, f.kids[0]);
    case Formula::Kind::Implies:
      return !eval_formula(st, ctx, f.kids[0]) ||
             eval_formula(st, ctx, f.kids[1]);
    case Formula::Kind::Iff:
      return eval_formula(st, ctx, f.kids[0]) ==
             eval_formula(st, ctx, f.kids[1]);
  }
  return false;
}

// ---------------------------------------------------------------------------
// Well-formedness

namespace {

struct LeafInfo {
  Term term;
  bool positive;
};

void collect_leaves(const TermFormula& f, bool positive,
                    std::vector<LeafInfo>& out) {
  switch (f.kind) {
    case TermFormula::Kind::Leaf:
      out.push_back({f.leaf, positive});
      return;
    case TermFormula::Kind::Not:
      collect_leaves(f.kids[0], !positive, out);
      return;
    default:
      for (const auto& k : f.kids) collect_leaves(k, positive, out);
  }
}

// Minimum number of hashes on a path from t's root to an occurrence of m,
// or -1 if m does not occur.
int min_hashes_to(Term t, Term m, int hashes) {
  if (t == m) return hashes;
  const TermNode& n = t.node();
  int best = -1;
  int h = hashes + (t.tag() == Tag::Hash ? 1 : 0);
  if (n.child0) {
    int c = min_hashes_to(t.child0(), m, h);
    if (c >= 0 && (best < 0 || c < best)) best = c;
  }
  if (n.child1) {
    int c = min_hashes_to(t.child1(), m, h);
    if (c >= 0 && (best < 0 || c < best)) best = c;
  }
  return best;
}

}  // namespace

WellFormedness check_well_formed(const EvidenceDef& ev,
                                 const ProtocolSpec& spec) {
  WellFormedness out;
  std::set<std::string> fresh_names;
  for (const auto& f : spec.fresh) fresh_names.insert(f.name);

  std::vector<LeafInfo> leaves;
  collect_leaves(ev.formula, true, leaves);

  bool has_session_unique = false;
  for (const auto& l : leaves) {
    if (!l.positive) continue;
    for (Term v : vars_of(l.term))
      if (fresh_names.count(v.name())) has_session_unique = true;
  }
  if (!has_session_unique)
    out.diagnostics.push_back(
        "no positive leaf carries a session-fresh value");

  Term m = Term::var(ev.protects,
                     [&] {
                       for (const auto& f : spec.fresh)
                         if (f.name == ev.protects)
                           return std::optional<AtomKind>(f.kind);
                       return std::optional<AtomKind>();
                     }());
  int best = -1;
  for (const auto& l : leaves) {
    if (!l.positive) continue;
    int c = min_hashes_to(l.term, m, 0);
    if (c >= 0 && (best < 0 || c < best)) best = c;
  }
  if (best < 0) {
    out.diagnostics.push_back("no positive leaf contains the protected "
                              "message '" + ev.protects + "'");
  } else if (best >= 2) {
    out.warnings.push_back("protected message only occurs under " +
                           std::to_string(best) +
                           " hashes; injectivity is borderline");
  }
  out.well_formed = has_session_unique && best >= 0;
  return out;
}

// ---------------------------------------------------------------------------
// Generators

std::vector<NamedProperty> nr_service_properties(const EvidenceDef& ev,
                                                 const std::string& session,
                                                 PropMode mode) {
  TermFormula m = TermFormula::mk_leaf(Term::var(ev.protects));
  NamedProperty p1;
  p1.name = ev.name + "_aknows";
  p1.mode = mode;
  p1.formula = Formula::implies(Formula::aknows(ev.owner, session, ev.formula),
                                Formula::aknows(ev.against, session, m));
  NamedProperty p2;
  p2.name = ev.name + "_deduce";
  p2.mode = mode;
  p2.formula =
      Formula::implies(Formula::deduce(ev.owner, session, ev.formula),
                       Formula::aknows(ev.owner, session, ev.formula));
  return {std::move(p1), std::move(p2)};
}

NamedProperty fairness_property(const EvidenceDef& nro, const EvidenceDef& nrr,
                                const std::string& session, PropMode mode) {
  NamedProperty p;
  p.name = "fairness";
  p.mode = mode;
  Formula lhs = Formula::aknows(nrr.owner, session, nrr.formula);
  Formula rhs = Formula::aknows(nro.owner, session, nro.formula);
  if (mode == PropMode::Terminal) {
    p.formula = Formula::iff(std::move(lhs), std::move(rhs));
  } else {
    Formula f1 = Formula::implies(lhs, rhs);
    Formula f2 = Formula::implies(rhs, lhs);
    p.formula = Formula::conj({std::move(f1), std::move(f2)});
  }
  return p;
}

}  // namespace faircheck
