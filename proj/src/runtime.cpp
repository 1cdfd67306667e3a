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

#include "faircheck/runtime.hpp"

#include <algorithm>
#include <cassert>
#include <set>

namespace faircheck {

int Context::session_index(const std::string& id) const {
  for (size_t i = 0; i < sessions.size(); ++i)
    if (sessions[i].id == id) return static_cast<int>(i);
  return -1;
}

int Context::role_of_agent_session(int s, Term agent) const {
  for (int r = 0; r < roles(); ++r)
    if (sessions[s].role_agents[r] == agent) return r;
  return -1;
}

ChannelModel Context::channel(int role_a, int role_b) const {
  const std::string& a = model.spec.roles[role_a];
  const std::string& b = model.spec.roles[role_b];
  auto key = a < b ? std::make_pair(a, b) : std::make_pair(b, a);
  auto it = scn.channel_overrides.find(key);
  if (it != scn.channel_overrides.end()) return it->second;
  return model.spec.channel(a, b);
}

bool Context::is_dishonest_agent(Term agent) const {
  return scn.dishonest.count(agent.name()) != 0;
}

Context make_context(const ProtocolSpec& spec, const Scenario& scn) {
  Context ctx;
  ctx.model = elaborate(spec);
  ctx.scn = scn;

  std::set<std::string> agent_names;
  for (const auto& s : scn.sessions)
    for (const auto& [r, a] : s.role_agents) agent_names.insert(a);
  for (const auto& a : agent_names)
    ctx.agents.push_back(Term::atom(AtomKind::Agent, a));
  for (const auto& l : spec.labels)
    ctx.label_atoms.push_back(Term::atom(AtomKind::Label, l));
  ctx.base = KnowledgeBase::axioms(ctx.agents, ctx.label_atoms);

  for (size_t si = 0; si < scn.sessions.size(); ++si) {
    const auto& sd = scn.sessions[si];
    Context::Sess s;
    s.id = sd.id;
    s.role_agents.resize(spec.roles.size());
    s.honest.resize(spec.roles.size());
    for (size_t r = 0; r < spec.roles.size(); ++r) {
      Term agent = Term::atom(AtomKind::Agent, sd.role_agents.at(spec.roles[r]));
      s.role_agents[r] = agent;
      s.honest[r] = scn.dishonest.count(agent.name()) == 0;
      s.canonical.bind(spec.roles[r], agent);
    }
    for (const auto& f : spec.fresh) {
      Term atom = Term::atom(f.kind, f.name,
                             Origin{static_cast<int>(si) + 1, f.role});
      s.canonical.bind(f.name, atom);
    }
    ctx.sessions.push_back(std::move(s));
  }
  return ctx;
}

// ---------------------------------------------------------------------------

bool RoleState::operator==(const RoleState& o) const {
  if (pc != o.pc || sub != o.sub || sub_pc != o.sub_pc || !(binding == o.binding))
    return false;
  if (!kb != !o.kb) return false;
  return !kb || kb->facts() == o.kb->facts();
}

bool GlobalState::operator==(const GlobalState& o) const {
  if (roles != o.roles) return false;
  if (!intruder != !o.intruder) return false;
  if (intruder && !(intruder->facts() == o.intruder->facts())) return false;
  return aborted == o.aborted && resolved == o.resolved && net == o.net &&
         aknows == o.aknows && witnessed == o.witnessed &&
         violated == o.violated && services == o.services &&
         minted_kinds == o.minted_kinds;
}

namespace {

bool akfact_less(const AkFact& a, const AkFact& b) {
  if (a.session != b.session) return a.session < b.session;
  if (a.role != b.role) return a.role < b.role;
  return term_less(a.term, b.term);
}

bool authfact_less(const AuthFact& a, const AuthFact& b) {
  if (int c = term_compare(a.a, b.a)) return c < 0;
  if (int c = term_compare(a.b, b.b)) return c < 0;
  return term_less(a.data, b.data);
}

template <typename T, typename Less>
void sorted_insert(std::vector<T>& v, const T& x, Less less) {
  auto it = std::lower_bound(v.begin(), v.end(), x, less);
  if (it != v.end() && *it == x) return;
  v.insert(it, x);
}

bool pair_less(const std::pair<Term, Term>& a, const std::pair<Term, Term>& b) {
  if (int c = term_compare(a.first, b.first)) return c < 0;
  return term_less(a.second, b.second);
}

}  // namespace

GlobalState initial_state(const Context& ctx) {
  GlobalState st;
  int R = ctx.roles();
  st.roles.resize(ctx.sessions.size() * R);
  for (size_t s = 0; s < ctx.sessions.size(); ++s) {
    const auto& sess = ctx.sessions[s];
    for (int r = 0; r < R; ++r) {
      RoleState& rs = st.roles[s * R + r];
      if (!sess.honest[r]) continue;
      for (int q = 0; q < R; ++q)
        rs.binding.bind(ctx.role_name(q), sess.role_agents[q]);
      std::vector<Term> init;
      for (int q = 0; q < R; ++q) init.push_back(sess.role_agents[q]);
      init.push_back(Term::inv(Term::pk(sess.role_agents[r])));
      rs.kb = std::make_shared<KnowledgeBase>(ctx.base.add_all(init));
    }
  }
  std::vector<Term> intruder_init = ctx.agents;
  for (Term a : ctx.agents)
    if (ctx.is_dishonest_agent(a))
      intruder_init.push_back(Term::inv(Term::pk(a)));
  st.intruder = std::make_shared<KnowledgeBase>(ctx.base.add_all(intruder_init));
  st.services.resize(ctx.sessions.size() * ctx.model.services.size());
  return st;
}

// ---------------------------------------------------------------------------
// Delivery enumeration

namespace {

void enum_rec(Term p, const Binding& b, const KnowledgeBase& kb,
              const std::vector<Term>& cands, std::vector<Binding>& out) {
  Term pp = substitute(p, b);
  if (pp.is_ground()) {
    if (kb.can_deduce(pp)) out.push_back(b);
    return;
  }
  // Replay: deliver (a layer around) something already known.
  for (Term f : kb.facts()) {
    Binding b2 = b;
    if (match(pp, f, b2)) out.push_back(std::move(b2));
  }
  // Compose.
  switch (pp.tag()) {
    case Tag::Var:
      for (Term c : cands) {
        Binding b2 = b;
        if (match(pp, c, b2)) out.push_back(std::move(b2));
      }
      return;
    case Tag::Pair:
    case Tag::SEnc:
    case Tag::AEnc:
    case Tag::Sign: {
      std::vector<Binding> lefts;
      enum_rec(pp.child0(), b, kb, cands, lefts);
      for (const auto& bl : lefts) enum_rec(pp.child1(), bl, kb, cands, out);
      return;
    }
    case Tag::Hash:
    case Tag::Pk:
      enum_rec(pp.child0(), b, kb, cands, out);
      return;
    default:
      return;  // atoms are ground; Inv is never composable
  }
}

}  // namespace

std::vector<Term> enumerate_deliveries(Term pattern, const Binding& seed,
                                       const KnowledgeBase& kb,
                                       const std::vector<Term>& extra) {
  // Candidate values for free variables: deducible members of the subterm
  // closure of (intruder knowledge + session-bound terms).
  std::vector<Term> cands;
  auto add_subterms = [&](Term t) {
    for (Term s : subterms(t))
      if (kb.can_deduce(s)) cands.push_back(s);
  };
  for (Term f : kb.facts()) add_subterms(f);
  for (Term e : extra)
    if (e.is_ground()) add_subterms(e);
  std::sort(cands.begin(), cands.end(), TermLess{});
  cands.erase(std::unique(cands.begin(), cands.end()), cands.end());

  std::vector<Binding> bindings;
  enum_rec(pattern, seed, kb, cands, bindings);
  std::vector<Term> msgs;
  for (const auto& b : bindings) {
    Term m = substitute(pattern, b);
    if (m.is_ground() && kb.can_deduce(m)) msgs.push_back(m);
  }
  std::sort(msgs.begin(), msgs.end(), TermLess{});
  msgs.erase(std::unique(msgs.begin(), msgs.end()), msgs.end());
  return msgs;
}

// ---------------------------------------------------------------------------
// enabled()

namespace {

struct Locator {
  const Script* script = nullptr;
  int pc = 0;
};

Locator locate(const GlobalState& st, const Context& ctx, int s, int r) {
  const RoleState& rs = st.roles[s * ctx.roles() + r];
  Locator loc;
  if (rs.sub >= 0) {
    loc.script = &ctx.model.subs[rs.sub].script;
    loc.pc = rs.sub_pc;
  } else {
    loc.script = &ctx.model.mains[r];
    loc.pc = rs.pc;
  }
  return loc;
}

bool script_done(const Locator& loc) {
  return loc.pc >= static_cast<int>(loc.script->steps.size());
}

/// Session-bound ground terms, as extra var candidates for the intruder.
std::vector<Term> session_bound_terms(const GlobalState& st,
                                      const Context& ctx, int s) {
  std::vector<Term> out;
  for (int r = 0; r < ctx.roles(); ++r) {
    if (!ctx.sessions[s].honest[r]) continue;
    for (const auto& [name, val] : st.roles[s * ctx.roles() + r].binding.entries())
      out.push_back(val);
  }
  return out;
}

/// Index into st.net of the oldest entry on (from -> to), or -1.
int pair_head(const GlobalState& st, Term from, Term to) {
  for (size_t i = 0; i < st.net.size(); ++i)
    if (st.net[i].from == from && st.net[i].to == to)
      return static_cast<int>(i);
  return -1;
}

bool head_matches_step(const GlobalState& st, const Context& ctx, int s, int r,
                       const Step& step, const Binding& seed) {
  Term self = ctx.sessions[s].role_agents[r];
  Term from = ctx.sessions[s].role_agents[ctx.model.spec.role_index(step.peer)];
  int h = pair_head(st, from, self);
  if (h < 0) return false;
  for (const auto& alt : step.alts) {
    Binding b = seed;
    if (match(alt.pattern, st.net[h].payload, b)) return true;
  }
  return false;
}

struct SvcCandidate {
  int session;
  int svc;
  int net_pos;  // -1 on dy
  Term msg;
};

/// Request receives each service could perform right now, honoring per-pair
/// FIFO on secure channels and the one-instance-at-a-time store discipline.
std::vector<SvcCandidate> service_candidates(const GlobalState& st,
                                             const Context& ctx) {
  std::vector<SvcCandidate> out;
  int R = ctx.roles();
  int S = static_cast<int>(ctx.model.services.size());
  for (size_t s = 0; s < ctx.sessions.size(); ++s) {
    for (int k = 0; k < S; ++k) {
      const TtpService& svc = ctx.model.services[k];
      const SvcState& ss = st.services[s * S + k];
      if (ss.active_pc >= 0) continue;
      if (ss.used >= svc.max_instances) continue;
      int home = ctx.model.spec.role_index(svc.home_role);
      int req = ctx.model.spec.role_index(svc.requester);
      if (!ctx.sessions[s].honest[home]) continue;
      const RoleState& hs = st.roles[s * R + home];
      if (hs.sub >= 0 ||
          hs.pc < static_cast<int>(ctx.model.mains[home].steps.size()))
        continue;  // services run after the home role's main script
      // One instance at a time per agent keeps store checks atomic.
      Term agent = ctx.sessions[s].role_agents[home];
      bool busy = false;
      for (size_t s2 = 0; s2 < ctx.sessions.size(); ++s2)
        for (int k2 = 0; k2 < S; ++k2) {
          int h2 = ctx.model.spec.role_index(ctx.model.services[k2].home_role);
          if (ctx.sessions[s2].role_agents[h2] == agent &&
              st.services[s2 * S + k2].active_pc >= 0)
            busy = true;
        }
      if (busy) continue;
      const Step& reqstep = svc.script.steps[0];
      const Binding& seed = hs.binding;
      if (ctx.channel(req, home) == ChannelModel::Dy) {
        auto msgs = enumerate_deliveries(reqstep.alts[0].pattern, seed,
                                         *st.intruder,
                                         session_bound_terms(st, ctx,
                                                             static_cast<int>(s)));
        for (Term m : msgs)
          out.push_back({static_cast<int>(s), k, -1, m});
      } else {
        Term from = ctx.sessions[s].role_agents[req];
        int h = pair_head(st, from, agent);
        if (h < 0) continue;
        Binding b = seed;
        if (match(reqstep.alts[0].pattern, st.net[h].payload, b))
          out.push_back({static_cast<int>(s), k, h, st.net[h].payload});
      }
    }
  }
  // Secure requests to one agent are served oldest-first.
  std::vector<SvcCandidate> filtered;
  for (const auto& c : out) {
    if (c.net_pos < 0) {
      filtered.push_back(c);
      continue;
    }
    Term agent = st.net[c.net_pos].to;
    uint32_t seq = st.net[c.net_pos].seq;
    bool oldest = true;
    for (const auto& d : out)
      if (d.net_pos >= 0 && st.net[d.net_pos].to == agent &&
          st.net[d.net_pos].seq < seq)
        oldest = false;
    if (oldest) filtered.push_back(c);
  }
  return filtered;
}

bool mintable_kind(AtomKind k) {
  return k == AtomKind::Nonce || k == AtomKind::SymKey ||
         k == AtomKind::Payload;
}

void collect_mint_kinds(Term pattern, const Binding& bound,
                        std::set<AtomKind>& kinds) {
  for (Term v : vars_of(pattern)) {
    if (bound.has(v.name())) continue;
    if (v.node().sorted) {
      if (mintable_kind(v.kind())) kinds.insert(v.kind());
    } else {
      kinds.insert(AtomKind::Nonce);
      kinds.insert(AtomKind::SymKey);
      kinds.insert(AtomKind::Payload);
    }
  }
}

}  // namespace

bool transition_less(const Transition& a, const Transition& b) {
  auto key = [](const Transition& t) {
    return std::make_tuple(t.session, t.role, static_cast<int>(t.kind), t.sub,
                           t.svc, t.pc, t.alt, t.net_pos,
                           static_cast<int>(t.branch_then),
                           static_cast<int>(t.mint_kind));
  };
  auto ka = key(a), kb = key(b);
  if (ka != kb) return ka < kb;
  if (a.input.null() || b.input.null()) return b.input.null() < a.input.null();
  return term_less(a.input, b.input);
}

std::vector<Transition> enabled(const GlobalState& st, const Context& ctx) {
  std::vector<Transition> out;
  int R = ctx.roles();
  std::set<AtomKind> mint_kinds;

  for (size_t s = 0; s < ctx.sessions.size(); ++s) {
    for (int r = 0; r < R; ++r) {
      if (!ctx.sessions[s].honest[r]) continue;
      const RoleState& rs = st.roles[s * R + r];
      Locator loc = locate(st, ctx, static_cast<int>(s), r);
      if (!script_done(loc)) {
        const Step& step = loc.script->steps[loc.pc];
        Transition base;
        base.session = static_cast<int16_t>(s);
        base.role = static_cast<int16_t>(r);
        base.sub = rs.sub;
        base.pc = static_cast<int16_t>(loc.pc);
        switch (step.kind) {
          case StepKind::Fresh: {
            Transition t = base;
            t.kind = Transition::Kind::Fresh;
            out.push_back(t);
            break;
          }
          case StepKind::Send: {
            Transition t = base;
            t.kind = Transition::Kind::Send;
            out.push_back(t);
            break;
          }
          case StepKind::Recv: {
            int from = ctx.model.spec.role_index(step.peer);
            if (ctx.channel(from, r) == ChannelModel::Dy) {
              auto extra = session_bound_terms(st, ctx, static_cast<int>(s));
              for (size_t a = 0; a < step.alts.size(); ++a) {
                auto msgs = enumerate_deliveries(step.alts[a].pattern,
                                                 rs.binding, *st.intruder,
                                                 extra);
                for (Term m : msgs) {
                  Transition t = base;
                  t.kind = Transition::Kind::Recv;
                  t.alt = static_cast<int16_t>(a);
                  t.input = m;
                  out.push_back(t);
                }
                collect_mint_kinds(step.alts[a].pattern, rs.binding,
                                   mint_kinds);
              }
            } else {
              Term self = ctx.sessions[s].role_agents[r];
              Term from_agent = ctx.sessions[s].role_agents[from];
              int h = pair_head(st, from_agent, self);
              if (h >= 0) {
                for (size_t a = 0; a < step.alts.size(); ++a) {
                  Binding b = rs.binding;
                  if (match(step.alts[a].pattern, st.net[h].payload, b)) {
                    Transition t = base;
                    t.kind = Transition::Kind::Recv;
                    t.alt = static_cast<int16_t>(a);
                    t.input = st.net[h].payload;
                    t.net_pos = h;
                    out.push_back(t);
                  }
                }
              }
            }
            break;
          }
          case StepKind::Branch:
            break;  // branch steps live in service scripts only
        }
        // Sub-protocol entry: an alternative to waiting at a main receive.
        if (rs.sub < 0 && step.kind == StepKind::Recv) {
          for (size_t k = 0; k < ctx.model.subs.size(); ++k) {
            const AgentSub& as = ctx.model.subs[k];
            if (ctx.model.spec.role_index(as.role) != r ||
                as.entry_pc != loc.pc)
              continue;
            int from = ctx.model.spec.role_index(step.peer);
            if (ctx.channel(from, r) == ChannelModel::Secure &&
                head_matches_step(st, ctx, static_cast<int>(s), r, step,
                                  rs.binding))
              continue;  // the awaited message is deliverable: no entry
            Transition t = base;
            t.kind = Transition::Kind::SubEntry;
            t.sub = static_cast<int16_t>(k);
            out.push_back(t);
          }
        }
      }
    }
  }

  // Active service instances advance; idle ones may accept requests.
  int S = static_cast<int>(ctx.model.services.size());
  for (size_t s = 0; s < ctx.sessions.size(); ++s) {
    for (int k = 0; k < S; ++k) {
      const SvcState& ss = st.services[s * S + k];
      if (ss.active_pc < 0) continue;
      const TtpService& svc = ctx.model.services[k];
      const Step& step = svc.script.steps[ss.active_pc];
      Transition t;
      t.session = static_cast<int16_t>(s);
      t.role =
          static_cast<int16_t>(ctx.model.spec.role_index(svc.home_role));
      t.svc = static_cast<int16_t>(k);
      t.pc = ss.active_pc;
      if (step.kind == StepKind::Send) {
        t.kind = Transition::Kind::SvcSend;
        out.push_back(t);
      } else if (step.kind == StepKind::Branch) {
        t.kind = Transition::Kind::Branch;
        Term key = substitute(step.guard_key, ss.binding);
        Term agent = ctx.sessions[s].role_agents[t.role];
        const auto& store = step.guard_on_resolved ? st.resolved : st.aborted;
        t.branch_then = std::binary_search(store.begin(), store.end(),
                                           std::make_pair(agent, key),
                                           pair_less);
        out.push_back(t);
      }
    }
  }
  for (const auto& c : service_candidates(st, ctx)) {
    const TtpService& svc = ctx.model.services[c.svc];
    Transition t;
    t.kind = Transition::Kind::SvcRecv;
    t.session = static_cast<int16_t>(c.session);
    t.role = static_cast<int16_t>(ctx.model.spec.role_index(svc.home_role));
    t.svc = static_cast<int16_t>(c.svc);
    t.pc = 0;
    t.input = c.msg;
    t.net_pos = c.net_pos;
    out.push_back(t);
  }
  // Mint kinds for idle dy service request patterns too.
  for (size_t s = 0; s < ctx.sessions.size(); ++s)
    for (int k = 0; k < S; ++k) {
      const TtpService& svc = ctx.model.services[k];
      const SvcState& ss = st.services[s * S + k];
      if (ss.active_pc >= 0 || ss.used >= svc.max_instances) continue;
      int home = ctx.model.spec.role_index(svc.home_role);
      int req = ctx.model.spec.role_index(svc.requester);
      if (!ctx.sessions[s].honest[home]) continue;
      const RoleState& hs = st.roles[s * ctx.roles() + home];
      if (hs.sub >= 0 ||
          hs.pc < static_cast<int>(ctx.model.mains[home].steps.size()))
        continue;
      if (ctx.channel(req, home) == ChannelModel::Dy)
        collect_mint_kinds(svc.script.steps[0].alts[0].pattern, hs.binding,
                           mint_kinds);
    }

  if (st.minted_kinds.size() < ctx.scn.bounds.fresh_budget) {
    for (AtomKind k : mint_kinds) {
      Transition t;
      t.kind = Transition::Kind::Mint;
      t.mint_kind = k;
      t.input = Term::atom(
          k, "x" + std::to_string(st.minted_kinds.size() + 1), Origin{0, "!"});
      out.push_back(t);
    }
  }

  std::sort(out.begin(), out.end(), transition_less);
  return out;
}

// ---------------------------------------------------------------------------
// apply()

namespace {

void log_aknows(GlobalState& st, const Context& ctx, int s, int r,
                const std::vector<Term>& terms, const Binding& b,
                const KnowledgeBase& kb, const Script& sc, int line) {
  for (Term a : terms) {
    Term ground = substitute(a, b);
    if (!ground.is_ground())
      throw ModelError("annotation with unbound variable at " + sc.block +
                       "." + std::to_string(line));
    if (!kb.can_deduce(ground))
      throw ModelError("unsound annotation: " + ctx.role_name(r) +
                       " cannot deduce " + render(ground) + " at " + sc.block +
                       "." + std::to_string(line));
    sorted_insert(st.aknows,
                  AkFact{static_cast<int16_t>(s), static_cast<int16_t>(r),
                         ground},
                  akfact_less);
  }
}

void log_emits(GlobalState& st, const Context& ctx, int s,
               const std::vector<EmitSpec>& emits, const Binding& b) {
  for (const auto& e : emits) {
    Term self =
        ctx.sessions[s].role_agents[ctx.model.spec.role_index(e.role)];
    Term peer =
        ctx.sessions[s].role_agents[ctx.model.spec.role_index(e.peer)];
    Term data = substitute(e.data, b);
    if (!data.is_ground())
      throw ModelError("emit with unbound variable");
    if (e.witness) {
      sorted_insert(st.witnessed, AuthFact{self, peer, data}, authfact_less);
    } else {
      // Non-injective agreement: the acceptance must have a prior witness
      // by `peer` intended for `self`; otherwise the violation latches.
      AuthFact want{peer, self, data};
      if (!std::binary_search(st.witnessed.begin(), st.witnessed.end(), want,
                              authfact_less))
        sorted_insert(st.violated, AuthFact{self, peer, data}, authfact_less);
    }
  }
}

void deliver(GlobalState& st, const Context& ctx, int s, int from_role,
             int to_role, Term msg) {
  if (ctx.channel(from_role, to_role) == ChannelModel::Dy) {
    st.intruder = std::make_shared<KnowledgeBase>(st.intruder->add(msg));
  } else {
    SecureMsg m;
    m.from = ctx.sessions[s].role_agents[from_role];
    m.to = ctx.sessions[s].role_agents[to_role];
    m.payload = msg;
    m.seq = st.next_seq++;
    st.net.push_back(m);
  }
}

void do_send(GlobalState& st, const Context& ctx, int session, int role,
             const Script& sc, const Step& step) {
  RoleState& rs = st.roles[session * ctx.roles() + role];
  Term msg = substitute(step.payload, rs.binding);
  if (!msg.is_ground())
    throw ModelError("send with unbound variable at " + sc.block + "." +
                     std::to_string(step.line));
  if (!rs.kb->can_deduce(msg))
    throw ModelError("role " + ctx.role_name(role) + " cannot compose " +
                     render(msg));
  deliver(st, ctx, session, role, ctx.model.spec.role_index(step.peer), msg);
  log_aknows(st, ctx, session, role, step.annotations, rs.binding, *rs.kb, sc,
             step.line);
  log_emits(st, ctx, session, step.emits, rs.binding);
}

}  // namespace

GlobalState apply(const GlobalState& prev, const Transition& t,
                  const Context& ctx) {
  GlobalState st = prev;
  int R = ctx.roles();
  switch (t.kind) {
    case Transition::Kind::Fresh: {
      RoleState& rs = st.roles[t.session * R + t.role];
      Locator loc = locate(st, ctx, t.session, t.role);
      const Step& step = loc.script->steps[loc.pc];
      std::vector<Term> atoms;
      for (const auto& n : step.fresh_names) {
        Term a = ctx.sessions[t.session].canonical.get(n);
        rs.binding.bind(n, a);
        atoms.push_back(a);
      }
      rs.kb = std::make_shared<KnowledgeBase>(rs.kb->add_all(atoms));
      if (rs.sub >= 0)
        ++rs.sub_pc;
      else
        ++rs.pc;
      return st;
    }
    case Transition::Kind::Send: {
      RoleState& rs = st.roles[t.session * R + t.role];
      Locator loc = locate(st, ctx, t.session, t.role);
      do_send(st, ctx, t.session, t.role, *loc.script,
              loc.script->steps[loc.pc]);
      if (rs.sub >= 0)
        ++rs.sub_pc;
      else
        ++rs.pc;
      return st;
    }
    case Transition::Kind::Recv: {
      RoleState& rs = st.roles[t.session * R + t.role];
      Locator loc = locate(st, ctx, t.session, t.role);
      const Step& step = loc.script->steps[loc.pc];
      const RecvAlt& alt = step.alts[t.alt];
      Binding b = rs.binding;
      if (!match(alt.pattern, t.input, b))
        throw ModelError("replay divergence: message does not match pattern");
      rs.binding = b;
      rs.kb = std::make_shared<KnowledgeBase>(rs.kb->add(t.input));
      if (t.net_pos >= 0) st.net.erase(st.net.begin() + t.net_pos);
      log_aknows(st, ctx, t.session, t.role, alt.annotations, rs.binding,
                 *rs.kb, *loc.script, step.line);
      log_emits(st, ctx, t.session, alt.emits, rs.binding);
      if (rs.sub >= 0)
        ++rs.sub_pc;
      else
        ++rs.pc;
      return st;
    }
    case Transition::Kind::SubEntry: {
      RoleState& rs = st.roles[t.session * R + t.role];
      rs.sub = t.sub;
      rs.sub_pc = 0;
      // Entering means asking the TTP: the sub-protocol's opening send fires
      // with the entry, so the request is queued the moment the role gives
      // up waiting.
      const Script& sc = ctx.model.subs[t.sub].script;
      if (!sc.steps.empty() && sc.steps[0].kind == StepKind::Send) {
        do_send(st, ctx, t.session, t.role, sc, sc.steps[0]);
        rs.sub_pc = 1;
      }
      return st;
    }
    case Transition::Kind::SvcRecv: {
      int S = static_cast<int>(ctx.model.services.size());
      SvcState& ss = st.services[t.session * S + t.svc];
      const TtpService& svc = ctx.model.services[t.svc];
      RoleState& hs = st.roles[t.session * R + t.role];
      Binding b = hs.binding;
      if (!match(svc.script.steps[0].alts[0].pattern, t.input, b))
        throw ModelError("replay divergence: service request mismatch");
      ss.binding = b;
      ss.active_pc = 1;
      ++ss.used;
      hs.kb = std::make_shared<KnowledgeBase>(hs.kb->add(t.input));
      if (t.net_pos >= 0) st.net.erase(st.net.begin() + t.net_pos);
      const RecvAlt& alt = svc.script.steps[0].alts[0];
      log_aknows(st, ctx, t.session, t.role, alt.annotations, ss.binding,
                 *hs.kb, svc.script, svc.script.steps[0].line);
      log_emits(st, ctx, t.session, alt.emits, ss.binding);
      if (ss.active_pc >= static_cast<int>(svc.script.steps.size()))
        ss.active_pc = -1;
      return st;
    }
    case Transition::Kind::SvcSend: {
      int S = static_cast<int>(ctx.model.services.size());
      SvcState& ss = st.services[t.session * S + t.svc];
      const TtpService& svc = ctx.model.services[t.svc];
      const Step& step = svc.script.steps[ss.active_pc];
      const RoleState& hs = st.roles[t.session * R + t.role];
      Term msg = substitute(step.payload, ss.binding);
      if (!msg.is_ground() || !hs.kb->can_deduce(msg))
        throw ModelError("service cannot compose reply " + render(msg));
      deliver(st, ctx, t.session, t.role,
              ctx.model.spec.role_index(step.peer), msg);
      log_aknows(st, ctx, t.session, t.role, step.annotations, ss.binding,
                 *hs.kb, svc.script, step.line);
      log_emits(st, ctx, t.session, step.emits, ss.binding);
      if (++ss.active_pc >= static_cast<int>(svc.script.steps.size()))
        ss.active_pc = -1;
      return st;
    }
    case Transition::Kind::Branch: {
      int S = static_cast<int>(ctx.model.services.size());
      SvcState& ss = st.services[t.session * S + t.svc];
      const TtpService& svc = ctx.model.services[t.svc];
      const Step& step = svc.script.steps[ss.active_pc];
      const RoleState& hs = st.roles[t.session * R + t.role];
      Term agent = ctx.sessions[t.session].role_agents[t.role];
      Term key = substitute(step.guard_key, ss.binding);
      const auto& store = step.guard_on_resolved ? st.resolved : st.aborted;
      bool cond = std::binary_search(store.begin(), store.end(),
                                     std::make_pair(agent, key), pair_less);
      if (cond != t.branch_then)
        throw ModelError("replay divergence: branch condition changed");
      const BranchAction& act = cond ? step.then_act : step.else_act;
      Term msg = substitute(act.reply, ss.binding);
      if (!msg.is_ground() || !hs.kb->can_deduce(msg))
        throw ModelError("service cannot compose reply " + render(msg));
      deliver(st, ctx, t.session, t.role,
              ctx.model.spec.role_index(step.peer), msg);
      if (act.store) {
        Term skey = substitute(act.store->key, ss.binding);
        auto& dst = act.store->resolved ? st.resolved : st.aborted;
        sorted_insert(dst, std::make_pair(agent, skey), pair_less);
      }
      log_emits(st, ctx, t.session, act.emits, ss.binding);
      if (++ss.active_pc >= static_cast<int>(svc.script.steps.size()))
        ss.active_pc = -1;
      return st;
    }
    case Transition::Kind::Mint: {
      st.minted_kinds.push_back(t.mint_kind);
      st.intruder = std::make_shared<KnowledgeBase>(st.intruder->add(t.input));
      return st;
    }
  }
  throw ModelError("unknown transition kind");
}

// ---------------------------------------------------------------------------

std::string Transition::encode(const Context& ctx) const {
  RenderOpts ro;
  ro.origins = true;
  std::string s;
  auto sess = [&]() {
    return session >= 0 ? ctx.sessions[session].id : std::string("-");
  };
  auto rname = [&]() {
    return role >= 0 ? ctx.role_name(role) : std::string("-");
  };
  switch (kind) {
    case Kind::Fresh:
      return "fresh|" + sess() + "|" + rname();
    case Kind::Send:
      s = "send|" + sess() + "|" + rname() + "|";
      s += sub >= 0 ? ctx.model.subs[sub].script.block : "main";
      s += "|" + std::to_string(pc);
      return s;
    case Kind::Recv:
      s = "recv|" + sess() + "|" + rname() + "|";
      s += sub >= 0 ? ctx.model.subs[sub].script.block : "main";
      s += "|" + std::to_string(pc) + "|" + std::to_string(alt) + "|" +
           render(input, ro);
      return s;
    case Kind::SubEntry:
      return "enter|" + sess() + "|" + rname() + "|" +
             ctx.model.subs[sub].name;
    case Kind::SvcRecv:
      return "svcreq|" + sess() + "|" + ctx.model.services[svc].name + "|" +
             render(input, ro);
    case Kind::SvcSend:
      return "svcsend|" + sess() + "|" + ctx.model.services[svc].name;
    case Kind::Branch:
      return "branch|" + sess() + "|" + ctx.model.services[svc].name + "|" +
             (branch_then ? "then" : "else");
    case Kind::Mint:
      return "mint|" + std::string(to_string(mint_kind)) + "|" +
             render(input, ro);
  }
  return "?";
}

}  // namespace faircheck
