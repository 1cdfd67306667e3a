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

#include "faircheck/elaborate.hpp"

#include <algorithm>
#include <set>

namespace faircheck {

namespace {

std::string subst_g(const std::string& role, const std::string& g) {
  return role == "G" ? g : role;
}

void split_attachments(const std::vector<Attachment>& atts,
                       const std::string& subject, const std::string& g,
                       std::vector<Term>* annotations,
                       std::vector<EmitSpec>* emits) {
  for (const auto& a : atts) {
    if (subst_g(a.role, g) != subject) continue;
    switch (a.kind) {
      case Attachment::Kind::Annotate:
        for (Term t : a.terms) annotations->push_back(t);
        break;
      case Attachment::Kind::Witness:
        emits->push_back({true, subject, subst_g(a.peer, g), a.data});
        break;
      case Attachment::Kind::Request:
        emits->push_back({false, subject, subst_g(a.peer, g), a.data});
        break;
    }
  }
}

struct Builder {
  const ProtocolSpec& spec;
  ElaboratedModel out;

  explicit Builder(const ProtocolSpec& s) : spec(s) { out.spec = s; }

  Script& main_of(const std::string& role) {
    return out.mains[spec.role_index(role)];
  }

  void build_main() {
    out.mains.resize(spec.roles.size());
    for (size_t i = 0; i < spec.roles.size(); ++i) {
      out.mains[i].role = spec.roles[i];
      out.mains[i].block = "main";
      Step fresh;
      fresh.kind = StepKind::Fresh;
      for (const auto& f : spec.fresh)
        if (f.role == spec.roles[i]) fresh.fresh_names.push_back(f.name);
      if (!fresh.fresh_names.empty()) out.mains[i].steps.push_back(fresh);
    }
    for (const auto& ex : spec.main_lines) {
      if (ex.fetch) {
        build_fetch(ex);
        continue;
      }
      Step snd;
      snd.kind = StepKind::Send;
      snd.line = ex.number;
      snd.peer = ex.to;
      snd.payload = ex.payload;
      split_attachments(ex.attachments, ex.from, "", &snd.annotations,
                        &snd.emits);
      main_of(ex.from).steps.push_back(std::move(snd));

      Step rcv;
      rcv.kind = StepKind::Recv;
      rcv.line = ex.number;
      rcv.peer = ex.from;
      RecvAlt alt;
      alt.pattern = ex.payload;
      split_attachments(ex.attachments, ex.to, "", &alt.annotations,
                        &alt.emits);
      rcv.alts.push_back(std::move(alt));
      main_of(ex.to).steps.push_back(std::move(rcv));
    }
  }

  void build_fetch(const Exchange& ex) {
    // Requester side: send the query, then receive the reply.
    Step snd;
    snd.kind = StepKind::Send;
    snd.line = ex.number;
    snd.peer = ex.to;
    snd.payload = ex.query;
    Step rcv;
    rcv.kind = StepKind::Recv;
    rcv.line = ex.number;
    rcv.peer = ex.to;
    RecvAlt alt;
    alt.pattern = ex.payload;
    std::vector<EmitSpec> req_emits;
    split_attachments(ex.attachments, ex.from, "", &alt.annotations,
                      &req_emits);
    for (auto& e : req_emits) {
      if (e.witness)
        snd.emits.push_back(e);
      else
        alt.emits.push_back(e);
    }
    rcv.alts.push_back(std::move(alt));
    main_of(ex.from).steps.push_back(std::move(snd));
    main_of(ex.from).steps.push_back(std::move(rcv));

    // Responder side: a single-shot service.
    TtpService svc;
    svc.name = "fetch" + std::to_string(ex.number) + "@" + ex.from;
    svc.home_role = ex.to;
    svc.requester = ex.from;
    svc.script.role = ex.to;
    svc.script.block = "svc:" + svc.name;
    Step sreq;
    sreq.kind = StepKind::Recv;
    sreq.line = ex.number;
    sreq.peer = ex.from;
    RecvAlt ralt;
    ralt.pattern = ex.query;
    Step srep;
    srep.kind = StepKind::Send;
    srep.line = ex.number;
    srep.peer = ex.from;
    srep.payload = ex.payload;
    std::vector<EmitSpec> ttp_emits;
    split_attachments(ex.attachments, ex.to, "", &srep.annotations,
                      &ttp_emits);
    for (auto& e : ttp_emits) {
      if (e.witness)
        srep.emits.push_back(e);
      else
        ralt.emits.push_back(e);
    }
    sreq.alts.push_back(std::move(ralt));
    svc.script.steps.push_back(std::move(sreq));
    svc.script.steps.push_back(std::move(srep));
    out.services.push_back(std::move(svc));
  }

  int main_recv_pc(const std::string& role, int line) {
    const Script& s = main_of(role);
    for (size_t i = 0; i < s.steps.size(); ++i)
      if (s.steps[i].kind == StepKind::Recv && s.steps[i].line == line)
        return static_cast<int>(i);
    throw ElaborationError("role " + role + " has no receive at main." +
                           std::to_string(line));
  }

  void build_sub(const SubProtocol& sub) {
    for (const auto& entry : sub.entries) {
      const std::string& g = entry.role;
      AgentSub as;
      as.name = sub.name;
      as.role = g;
      as.entry_pc = main_recv_pc(g, entry.waiting_line);
      as.script.role = g;
      as.script.block = "sub:" + sub.name;

      TtpService svc;
      svc.requester = g;
      svc.script.block = "";

      for (const auto& ex : sub.lines) {
        std::string from = subst_g(ex.from, g);
        std::string to = subst_g(ex.to, g);
        if (ex.branch) {
          if (from != to && from == spec.ttp_role.value_or("")) {
            // TTP side: deterministic branch on the store.
            Step br;
            br.kind = StepKind::Branch;
            br.line = ex.number;
            br.peer = to;
            br.guard_on_resolved = ex.branch->on_resolved;
            br.guard_key = ex.branch->key;
            auto arm = [&](const BranchArm& src, BranchAction* dst) {
              dst->reply = src.reply;
              dst->store = src.store;
              std::vector<Term> unused;
              split_attachments(src.attachments, from, g, &unused,
                                &dst->emits);
            };
            arm(ex.branch->then_arm, &br.then_act);
            arm(ex.branch->else_arm, &br.else_act);
            svc.script.steps.push_back(std::move(br));

            // Requester side: one receive with an alternative per arm.
            Step rcv;
            rcv.kind = StepKind::Recv;
            rcv.line = ex.number;
            rcv.peer = from;
            const BranchArm* arms[2] = {&ex.branch->then_arm,
                                        &ex.branch->else_arm};
            for (int c = 0; c < 2; ++c) {
              RecvAlt alt;
              alt.pattern = arms[c]->reply;
              alt.branch_case = c;
              split_attachments(arms[c]->attachments, to, g, &alt.annotations,
                                &alt.emits);
              rcv.alts.push_back(std::move(alt));
            }
            as.script.steps.push_back(std::move(rcv));
          } else {
            throw ElaborationError("branch line sender must be the store role");
          }
          continue;
        }
        if (from == g) {
          Step snd;
          snd.kind = StepKind::Send;
          snd.line = ex.number;
          snd.peer = to;
          snd.payload = ex.payload;
          split_attachments(ex.attachments, from, g, &snd.annotations,
                            &snd.emits);
          as.script.steps.push_back(std::move(snd));
          // TTP side of the request.
          Step sreq;
          sreq.kind = StepKind::Recv;
          sreq.line = ex.number;
          sreq.peer = from;
          RecvAlt ralt;
          ralt.pattern = ex.payload;
          split_attachments(ex.attachments, to, g, &ralt.annotations,
                            &ralt.emits);
          sreq.alts.push_back(std::move(ralt));
          svc.script.steps.push_back(std::move(sreq));
        } else if (to == g) {
          // Plain TTP -> G reply without a branch.
          Step srep;
          srep.kind = StepKind::Send;
          srep.line = ex.number;
          srep.peer = g;
          srep.payload = ex.payload;
          split_attachments(ex.attachments, from, g, &srep.annotations,
                            &srep.emits);
          svc.script.steps.push_back(std::move(srep));
          Step rcv;
          rcv.kind = StepKind::Recv;
          rcv.line = ex.number;
          rcv.peer = from;
          RecvAlt alt;
          alt.pattern = ex.payload;
          split_attachments(ex.attachments, g, g, &alt.annotations,
                            &alt.emits);
          rcv.alts.push_back(std::move(alt));
          as.script.steps.push_back(std::move(rcv));
        } else {
          throw ElaborationError("sub-protocol line does not involve the "
                                 "entering role");
        }
      }
      if (!svc.script.steps.empty()) {
        if (!spec.ttp_role)
          throw ElaborationError("sub-protocol needs a store role");
        svc.name = sub.name + "@" + g;
        svc.home_role = *spec.ttp_role;
        svc.script.role = *spec.ttp_role;
        svc.script.block = "svc:" + svc.name;
        out.services.push_back(std::move(svc));
      }
      out.subs.push_back(std::move(as));
    }
  }

  // --- static variable-boundedness checks -------------------------------

  std::set<std::string> initial_bound() const {
    std::set<std::string> b;
    for (const auto& r : spec.roles) b.insert(r);
    return b;
  }

  void require_bound(Term t, const std::set<std::string>& bound,
                     const Script& sc, const Step& st,
                     const char* what) const {
    for (Term v : vars_of(t))
      if (!bound.count(v.name()))
        throw ElaborationError("unbound variable '" + v.name() + "' in " +
                               what + " at " + sc.block + "." +
                               std::to_string(st.line) + " (role " + sc.role +
                               ")");
  }

  void check_script(const Script& sc, std::set<std::string> bound) const {
    for (const auto& st : sc.steps) {
      switch (st.kind) {
        case StepKind::Fresh:
          for (const auto& n : st.fresh_names) bound.insert(n);
          break;
        case StepKind::Send:
          require_bound(st.payload, bound, sc, st, "send");
          for (Term a : st.annotations)
            require_bound(a, bound, sc, st, "annotation");
          for (const auto& e : st.emits)
            require_bound(e.data, bound, sc, st, "emit");
          break;
        case StepKind::Recv: {
          // Any alternative binds its own variables; annotations may use them.
          std::set<std::string> after = bound;
          for (const auto& alt : st.alts) {
            std::set<std::string> local = bound;
            for (Term v : vars_of(alt.pattern)) local.insert(v.name());
            for (Term a : alt.annotations)
              require_bound(a, local, sc, st, "annotation");
            for (const auto& e : alt.emits)
              require_bound(e.data, local, sc, st, "emit");
            for (const auto& n : local) after.insert(n);
          }
          bound = after;
          break;
        }
        case StepKind::Branch: {
          require_bound(st.guard_key, bound, sc, st, "store guard");
          for (const BranchAction* a : {&st.then_act, &st.else_act}) {
            require_bound(a->reply, bound, sc, st, "reply");
            if (a->store) require_bound(a->store->key, bound, sc, st, "store");
            for (const auto& e : a->emits)
              require_bound(e.data, bound, sc, st, "emit");
          }
          break;
        }
      }
    }
  }

  std::set<std::string> bound_at(const Script& sc, int pc) const {
    std::set<std::string> bound = initial_bound();
    for (int i = 0; i < pc && i < static_cast<int>(sc.steps.size()); ++i) {
      const Step& st = sc.steps[i];
      if (st.kind == StepKind::Fresh)
        for (const auto& n : st.fresh_names) bound.insert(n);
      if (st.kind == StepKind::Recv)
        for (const auto& alt : st.alts)
          for (Term v : vars_of(alt.pattern)) bound.insert(v.name());
    }
    return bound;
  }

  void check_all() const {
    for (const auto& sc : out.mains) check_script(sc, initial_bound());
    for (const auto& as : out.subs) {
      int ri = spec.role_index(as.role);
      check_script(as.script, bound_at(out.mains[ri], as.entry_pc));
    }
    for (const auto& svc : out.services) {
      int ri = spec.role_index(svc.home_role);
      check_script(svc.script,
                   bound_at(out.mains[ri],
                            static_cast<int>(out.mains[ri].steps.size())));
    }
  }

  ElaboratedModel run() {
    build_main();
    for (const auto& sub : spec.subs) build_sub(sub);
    check_all();
    return std::move(out);
  }
};

}  // namespace

ElaboratedModel elaborate(const ProtocolSpec& spec) {
  Builder b(spec);
  return b.run();
}

}  // namespace faircheck
