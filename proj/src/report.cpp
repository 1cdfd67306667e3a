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

#include "faircheck/report.hpp"

#include <fstream>
#include <map>
#include <sstream>

#include <json.hpp>

namespace faircheck {

namespace {

using GroundNames = std::map<Term, std::string, TermLess>;

GroundNames ground_alias_names(const Context& ctx) {
  GroundNames names;
  bool multi = ctx.sessions.size() > 1;
  for (size_t s = 0; s < ctx.sessions.size(); ++s) {
    for (const auto& a : ctx.model.spec.aliases) {
      Term g = substitute(a.value, ctx.sessions[s].canonical);
      if (!g.is_ground()) continue;
      std::string n = a.name;
      if (multi) n += "#" + ctx.sessions[s].id;
      names.emplace(g, n);
    }
  }
  return names;
}

void render_ground_rec(Term t, const GroundNames& names, bool multi,
                       bool pair_parens, std::string& out) {
  auto it = names.find(t);
  if (it != names.end()) {
    out += it->second;
    return;
  }
  switch (t.tag()) {
    case Tag::Atom:
      out += t.name();
      if (multi && t.origin()) out += "#s" + std::to_string(t.origin()->session);
      if (t.origin() && t.origin()->session == 0) out += "*";  // minted
      return;
    case Tag::Var:
      out += "?" + t.name();
      return;
    case Tag::Pair:
      if (pair_parens) out += '(';
      render_ground_rec(t.child0(), names, multi, true, out);
      out += '.';
      render_ground_rec(t.child1(), names, multi, false, out);
      if (pair_parens) out += ')';
      return;
    case Tag::SEnc:
    case Tag::AEnc: {
      out += '{';
      render_ground_rec(t.child0(), names, multi, false, out);
      out += '}';
      Term k = t.child1();
      if (k.is_atom() || k.tag() == Tag::Pk || names.count(k)) {
        render_ground_rec(k, names, multi, true, out);
      } else {
        out += '(';
        render_ground_rec(k, names, multi, false, out);
        out += ')';
      }
      return;
    }
    case Tag::Sign:
      out += "sig(";
      render_ground_rec(t.child1().child0().child0(), names, multi, false,
                        out);
      out += ", ";
      render_ground_rec(t.child0(), names, multi, false, out);
      out += ')';
      return;
    case Tag::Hash:
      out += "h(";
      render_ground_rec(t.child0(), names, multi, false, out);
      out += ')';
      return;
    case Tag::Pk:
      out += "pk(";
      render_ground_rec(t.child0(), names, multi, false, out);
      out += ')';
      return;
    case Tag::Inv:
      out += "inv(";
      render_ground_rec(t.child0(), names, multi, false, out);
      out += ')';
      return;
  }
}

uint64_t fnv1a(const std::string& s) {
  uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::string file_digest(const std::string& path) {
  std::ifstream in(path);
  if (!in) return "";
  std::ostringstream ss;
  ss << in.rdbuf();
  uint64_t h = fnv1a(ss.str());
  std::string out(16, '0');
  static const char* digits = "0123456789abcdef";
  for (int i = 15; i >= 0; --i) {
    out[i] = digits[h & 0xf];
    h >>= 4;
  }
  return out;
}

std::string hex64(uint64_t v) {
  static const char* digits = "0123456789abcdef";
  std::string s(16, '0');
  for (int i = 15; i >= 0; --i) {
    s[i] = digits[v & 0xf];
    v >>= 4;
  }
  return s;
}

}  // namespace

std::string render_ground(Term t, const Context& ctx) {
  GroundNames names = ground_alias_names(ctx);
  std::string out;
  render_ground_rec(t, names, ctx.sessions.size() > 1, false, out);
  return out;
}

std::vector<std::string> render_human_trace(
    const Context& ctx, const std::vector<Transition>& trace) {
  GroundNames names = ground_alias_names(ctx);
  bool multi = ctx.sessions.size() > 1;
  auto term_str = [&](Term t) {
    std::string s;
    render_ground_rec(t, names, multi, false, s);
    return s;
  };
  std::vector<std::string> out;
  GlobalState st = initial_state(ctx);
  int R = ctx.roles();
  for (const Transition& t : trace) {
    std::ostringstream os;
    if (t.session >= 0) os << "[" << ctx.sessions[t.session].id << "] ";
    switch (t.kind) {
      case Transition::Kind::Fresh: {
        const RoleState& rs = st.roles[t.session * R + t.role];
        const Script& sc = rs.sub >= 0 ? ctx.model.subs[rs.sub].script
                                       : ctx.model.mains[t.role];
        const Step& step = sc.steps[t.pc];
        os << ctx.role_name(t.role) << " generates";
        for (size_t i = 0; i < step.fresh_names.size(); ++i)
          os << (i ? ", " : " ") << step.fresh_names[i];
        break;
      }
      case Transition::Kind::Send: {
        const RoleState& rs = st.roles[t.session * R + t.role];
        const Script& sc = rs.sub >= 0 ? ctx.model.subs[rs.sub].script
                                       : ctx.model.mains[t.role];
        const Step& step = sc.steps[t.pc];
        Term msg = substitute(step.payload, rs.binding);
        int peer = ctx.model.spec.role_index(step.peer);
        bool dy = ctx.channel(t.role, peer) == ChannelModel::Dy;
        os << ctx.role_name(t.role) << " -> " << step.peer << " ["
           << (rs.sub >= 0 ? ctx.model.subs[rs.sub].name : std::string("main"))
           << "." << step.line << "]: " << term_str(msg)
           << (dy ? "   (intercepted)" : "   (queued)");
        break;
      }
      case Transition::Kind::Recv: {
        const RoleState& rs = st.roles[t.session * R + t.role];
        const Script& sc = rs.sub >= 0 ? ctx.model.subs[rs.sub].script
                                       : ctx.model.mains[t.role];
        const Step& step = sc.steps[t.pc];
        os << ctx.role_name(t.role) << " <- " << step.peer << " ["
           << (rs.sub >= 0 ? ctx.model.subs[rs.sub].name : std::string("main"))
           << "." << step.line << "]: " << term_str(t.input)
           << (t.net_pos >= 0 ? "   (secure channel)"
                              : "   (delivered by the network)");
        break;
      }
      case Transition::Kind::SubEntry: {
        os << ctx.role_name(t.role) << " gives up waiting and enters "
           << ctx.model.subs[t.sub].name;
        const Script& sc = ctx.model.subs[t.sub].script;
        if (!sc.steps.empty() && sc.steps[0].kind == StepKind::Send) {
          const RoleState& rs = st.roles[t.session * R + t.role];
          Term msg = substitute(sc.steps[0].payload, rs.binding);
          int peer = ctx.model.spec.role_index(sc.steps[0].peer);
          bool dy = ctx.channel(t.role, peer) == ChannelModel::Dy;
          os << "; " << sc.steps[0].peer << " <- " << term_str(msg)
             << (dy ? "   (intercepted)" : "   (queued)");
        }
        break;
      }
      case Transition::Kind::SvcRecv: {
        const TtpService& svc = ctx.model.services[t.svc];
        os << svc.home_role << " accepts " << svc.name
           << " request: " << term_str(t.input);
        break;
      }
      case Transition::Kind::SvcSend: {
        const TtpService& svc = ctx.model.services[t.svc];
        int S = static_cast<int>(ctx.model.services.size());
        const SvcState& ss = st.services[t.session * S + t.svc];
        const Step& step = svc.script.steps[ss.active_pc];
        Term msg = substitute(step.payload, ss.binding);
        os << svc.home_role << " -> " << step.peer << " [" << svc.name
           << "]: " << term_str(msg);
        break;
      }
      case Transition::Kind::Branch: {
        const TtpService& svc = ctx.model.services[t.svc];
        int S = static_cast<int>(ctx.model.services.size());
        const SvcState& ss = st.services[t.session * S + t.svc];
        const Step& step = svc.script.steps[ss.active_pc];
        const BranchAction& act = t.branch_then ? step.then_act : step.else_act;
        Term key = substitute(step.guard_key, ss.binding);
        Term msg = substitute(act.reply, ss.binding);
        os << svc.home_role << " [" << svc.name << "] store "
           << (step.guard_on_resolved ? "resolved(" : "aborted(")
           << term_str(key) << ") is " << (t.branch_then ? "true" : "false")
           << " -> reply " << term_str(msg) << " to " << step.peer;
        if (act.store)
          os << "; records "
             << (act.store->resolved ? "resolved(" : "aborted(")
             << term_str(substitute(act.store->key, ss.binding)) << ")";
        break;
      }
      case Transition::Kind::Mint:
        os << "intruder mints fresh " << to_string(t.mint_kind) << " "
           << term_str(t.input);
        break;
    }
    out.push_back(os.str());
    st = apply(st, t, ctx);
  }
  return out;
}

std::pair<GlobalState, std::vector<Transition>> replay_records(
    const Context& ctx, const std::vector<std::string>& records) {
  GlobalState st = initial_state(ctx);
  std::vector<Transition> trace;
  for (size_t i = 0; i < records.size(); ++i) {
    bool found = false;
    for (const Transition& t : enabled(st, ctx)) {
      if (t.encode(ctx) == records[i]) {
        st = apply(st, t, ctx);
        trace.push_back(t);
        found = true;
        break;
      }
    }
    if (!found)
      throw ReplayError("record " + std::to_string(i + 1) +
                        " is not an enabled transition: " + records[i]);
  }
  return {std::move(st), std::move(trace)};
}

RunReport make_report(const Context& ctx, const ExplorationResult& result,
                      const std::string& protocol_path,
                      const std::string& scenario_path) {
  RunReport r;
  r.protocol_path = protocol_path;
  r.scenario_path = scenario_path;
  r.protocol_digest = file_digest(protocol_path);
  r.scenario_digest = file_digest(scenario_path);
  r.protocol_name = ctx.model.spec.name;
  r.scenario_name = ctx.scn.name;
  r.verdict = to_string(result.verdict);
  r.stats = result.stats;
  Digest d = canonical_digest(initial_state(ctx), ctx);
  r.initial_digest = hex64(d.hi) + hex64(d.lo);
  if (result.attack) {
    r.property = result.attack->property;
    for (const Transition& t : result.attack->trace)
      r.records.push_back(t.encode(ctx));
    r.human = render_human_trace(ctx, result.attack->trace);
  }
  return r;
}

std::string report_to_json(const RunReport& r) {
  nlohmann::json j;
  j["tool"] = r.tool;
  j["version"] = r.version;
  j["protocol_path"] = r.protocol_path;
  j["scenario_path"] = r.scenario_path;
  if (!r.protocol_digest.empty()) j["protocol_digest"] = r.protocol_digest;
  if (!r.scenario_digest.empty()) j["scenario_digest"] = r.scenario_digest;
  j["protocol"] = r.protocol_name;
  j["scenario"] = r.scenario_name;
  j["verdict"] = r.verdict;
  if (!r.property.empty()) j["property"] = r.property;
  if (!r.property_formula.empty()) j["property_formula"] = r.property_formula;
  j["stats"] = {{"states", r.stats.states},
                {"terminals", r.stats.terminals},
                {"depth", r.stats.depth},
                {"ms", r.stats.millis}};
  j["trace"] = {{"format", r.trace_format},
                {"initial_digest", r.initial_digest},
                {"records", r.records}};
  j["human_trace"] = r.human;
  return j.dump(2);
}

RunReport report_from_json(const std::string& text) {
  nlohmann::json j = nlohmann::json::parse(text);
  RunReport r;
  r.tool = j.value("tool", "faircheck");
  r.version = j.value("version", "");
  r.protocol_path = j.value("protocol_path", "");
  r.scenario_path = j.value("scenario_path", "");
  r.protocol_digest = j.value("protocol_digest", "");
  r.scenario_digest = j.value("scenario_digest", "");
  r.protocol_name = j.value("protocol", "");
  r.scenario_name = j.value("scenario", "");
  r.verdict = j.value("verdict", "");
  r.property = j.value("property", "");
  r.property_formula = j.value("property_formula", "");
  if (j.contains("stats")) {
    r.stats.states = j["stats"].value("states", 0ULL);
    r.stats.terminals = j["stats"].value("terminals", 0ULL);
    r.stats.depth = j["stats"].value("depth", 0U);
    r.stats.millis = j["stats"].value("ms", 0ULL);
  }
  if (j.contains("trace")) {
    r.trace_format = j["trace"].value("format", "");
    r.initial_digest = j["trace"].value("initial_digest", "");
    for (const auto& rec : j["trace"].value("records",
                                            std::vector<std::string>{}))
      r.records.push_back(rec);
  }
  for (const auto& line : j.value("human_trace", std::vector<std::string>{}))
    r.human.push_back(line);
  return r;
}

}  // namespace faircheck
