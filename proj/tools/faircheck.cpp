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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "faircheck/dsl.hpp"
#include "faircheck/property.hpp"
#include "faircheck/report.hpp"
#include "faircheck/search.hpp"

namespace fs = std::filesystem;
using namespace faircheck;

namespace {

constexpr int kExitSafe = 0;
constexpr int kExitAttack = 1;
constexpr int kExitError = 2;
constexpr int kExitBound = 3;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::string resolve_path(const std::string& p) {
  if (fs::exists(p)) return p;
  if (const char* dir = std::getenv("FAIRCHECK_MODEL_DIR")) {
    fs::path cand = fs::path(dir) / p;
    if (fs::exists(cand)) return cand.string();
  }
  throw UsageError("file not found: " + p);
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw UsageError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

struct LoadedModel {
  ProtocolSpec spec;
  Scenario scn;
  Context ctx;
  std::string proto_path, scn_path;
};

LoadedModel load(const std::string& proto_arg, const std::string& scn_arg) {
  LoadedModel m;
  m.proto_path = resolve_path(proto_arg);
  m.scn_path = resolve_path(scn_arg);
  m.spec = parse_protocol(read_file(m.proto_path));
  m.scn = parse_scenario(read_file(m.scn_path), m.spec);
  m.ctx = make_context(m.spec, m.scn);
  return m;
}

std::string single_session(const LoadedModel& m) {
  if (m.scn.sessions.size() != 1)
    throw UsageError("built-in properties need a single-session scenario");
  return m.scn.sessions[0].id;
}

/// --prop NAME|FILE: "fairness", an evidence name, or a .prop file path.
std::vector<NamedProperty> select_properties(const LoadedModel& m,
                                             const std::string& selector,
                                             PropMode fairness_mode) {
  bool looks_like_file = selector.find('.') != std::string::npos ||
                         selector.find('/') != std::string::npos;
  if (looks_like_file || fs::exists(selector)) {
    std::string path = resolve_path(selector);
    PropertyFile pf = parse_property_file(read_file(path), m.spec, m.scn);
    return pf.props;
  }
  if (selector == "fairness") {
    if (m.spec.evidences.size() != 2)
      throw UsageError("--prop fairness needs exactly two evidence "
                       "definitions in the protocol");
    const EvidenceDef& nro = m.spec.evidences[0];
    const EvidenceDef& nrr = m.spec.evidences[1];
    for (const EvidenceDef* ev : {&nro, &nrr}) {
      auto wf = check_well_formed(*ev, m.spec);
      for (const auto& w : wf.warnings)
        std::cerr << "warning: evidence " << ev->name << ": " << w << "\n";
      if (!wf.well_formed) {
        std::cerr << "warning: evidence " << ev->name
                  << " is not well-formed:";
        for (const auto& d : wf.diagnostics) std::cerr << " " << d << ";";
        std::cerr << "\n";
      }
    }
    return {fairness_property(nro, nrr, single_session(m), fairness_mode)};
  }
  if (const EvidenceDef* ev = m.spec.find_evidence(selector)) {
    auto wf = check_well_formed(*ev, m.spec);
    if (!wf.well_formed)
      std::cerr << "warning: evidence " << ev->name << " is not well-formed\n";
    return nr_service_properties(*ev, single_session(m));
  }
  throw UsageError("unknown property selector '" + selector +
                   "' (expected 'fairness', an evidence name, or a .prop "
                   "file)");
}

void print_stats(std::ostream& os, const SearchStats& st) {
  os << "stats states=" << st.states << " terminals=" << st.terminals
     << " depth=" << st.depth << " ms=" << st.millis << "\n";
}

int run_check(const std::string& proto, const std::string& scn_path,
              const std::vector<std::string>& selectors,
              const std::string& report_path, Bounds bounds_override,
              bool has_states, bool has_depth, bool has_budget, int workers,
              const std::string& search, const std::string& fairness_mode_s,
              const std::string& format) {
  LoadedModel m = load(proto, scn_path);
  SearchOptions opts;
  opts.bounds = m.scn.bounds;
  if (has_states) opts.bounds.max_states = bounds_override.max_states;
  if (has_depth) opts.bounds.max_depth = bounds_override.max_depth;
  if (has_budget) opts.bounds.fresh_budget = bounds_override.fresh_budget;
  m.ctx.scn.bounds = opts.bounds;
  opts.workers = workers;
  opts.dfs = search == "dfs";
  PropMode fmode = fairness_mode_s == "invariant" ? PropMode::Invariant
                                                  : PropMode::Terminal;
  std::vector<NamedProperty> named;
  for (const auto& sel : selectors)
    for (auto& p : select_properties(m, sel, fmode)) named.push_back(p);
  if (named.empty()) throw UsageError("no properties selected");
  std::vector<CompiledProperty> props;
  for (const auto& np : named) props.push_back(compile_property(np, m.ctx));

  ExplorationResult result;
  try {
    result = explore(m.ctx, props, opts);
  } catch (const ModelViolation& mv) {
    std::cerr << "model error: " << mv.what() << "\n";
    for (const auto& line : render_human_trace(m.ctx, mv.trace))
      std::cerr << "  " << line << "\n";
    return kExitError;
  }

  RunReport rep = make_report(m.ctx, result, m.proto_path, m.scn_path);
  if (result.attack) {
    for (const auto& np : named)
      if (np.name == result.attack->property)
        rep.property_formula = render_formula(np.formula, m.spec);
  }
  if (!report_path.empty()) {
    std::ofstream out(report_path);
    out << report_to_json(rep) << "\n";
  }

  if (format == "machine") {
    std::cout << rep.trace_format << "\n";
    std::cout << "verdict " << rep.verdict;
    if (!rep.property.empty()) std::cout << " property=" << rep.property;
    std::cout << "\n";
    print_stats(std::cout, result.stats);
    for (const auto& r : rep.records) std::cout << r << "\n";
  } else {
    std::cout << "verdict: " << rep.verdict << "\n";
    if (result.attack) {
      std::cout << "violated property: " << rep.property << "\n";
      if (!rep.property_formula.empty())
        std::cout << "  " << rep.property_formula << "\n";
      std::cout << "trace (" << rep.human.size() << " steps):\n";
      int i = 0;
      for (const auto& line : rep.human)
        std::cout << "  " << ++i << ". " << line << "\n";
    }
    print_stats(std::cout, result.stats);
  }
  switch (result.verdict) {
    case Verdict::SafeWithinBounds: return kExitSafe;
    case Verdict::Attack: return kExitAttack;
    case Verdict::BoundExhausted: return kExitBound;
  }
  return kExitError;
}

int run_explore(const std::string& proto, const std::string& scn_path,
                Bounds bounds_override, bool has_states, bool has_depth,
                bool has_budget, int workers, const std::string& search) {
  LoadedModel m = load(proto, scn_path);
  SearchOptions opts;
  opts.bounds = m.scn.bounds;
  if (has_states) opts.bounds.max_states = bounds_override.max_states;
  if (has_depth) opts.bounds.max_depth = bounds_override.max_depth;
  if (has_budget) opts.bounds.fresh_budget = bounds_override.fresh_budget;
  m.ctx.scn.bounds = opts.bounds;
  opts.workers = workers;
  opts.dfs = search == "dfs";
  ExplorationResult result;
  try {
    result = explore(m.ctx, {}, opts);
  } catch (const ModelViolation& mv) {
    std::cerr << "model error: " << mv.what() << "\n";
    return kExitError;
  }
  std::cout << "verdict: " << to_string(result.verdict) << "\n";
  print_stats(std::cout, result.stats);
  return result.verdict == Verdict::BoundExhausted ? kExitBound : kExitSafe;
}

int run_trace(const std::string& report_arg, bool do_replay) {
  RunReport rep = report_from_json(read_file(resolve_path(report_arg)));
  if (rep.records.empty() && rep.human.empty())
    throw UsageError("report contains no trace");
  if (!do_replay) {
    int i = 0;
    for (const auto& line : rep.human)
      std::cout << ++i << ". " << line << "\n";
    return kExitSafe;
  }
  LoadedModel m = load(rep.protocol_path, rep.scenario_path);
  auto [final_state, trace] = replay_records(m.ctx, rep.records);
  int i = 0;
  for (const auto& line : render_human_trace(m.ctx, trace))
    std::cout << ++i << ". " << line << "\n";
  std::cout << "\nevidence at the final state:\n";
  for (const auto& sess : m.scn.sessions) {
    for (const auto& ev : m.spec.evidences) {
      Formula ak = Formula::aknows(ev.owner, sess.id, ev.formula);
      Formula de = Formula::deduce(ev.owner, sess.id, ev.formula);
      bool akv = eval_formula(final_state, m.ctx, compile_formula(ak, m.ctx));
      bool dev = eval_formula(final_state, m.ctx, compile_formula(de, m.ctx));
      std::cout << "  aknows(" << ev.owner << ", " << sess.id << ", "
                << ev.name << ") = " << (akv ? "true" : "false") << "\n";
      std::cout << "  deduce(" << ev.owner << ", " << sess.id << ", "
                << ev.name << ") = " << (dev ? "true" : "false") << "\n";
    }
  }
  if (!rep.property_formula.empty()) {
    Formula f = parse_formula(rep.property_formula, m.spec, m.scn);
    bool v = eval_formula(final_state, m.ctx, compile_formula(f, m.ctx));
    std::cout << "\nviolated property (" << rep.property
              << ") re-evaluated: " << (v ? "true" : "false") << "\n";
  }
  return kExitSafe;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"faircheck - bounded verification of non-repudiation and "
               "fair-exchange protocols"};
  app.require_subcommand(1);

  std::string proto, scn, report_path, search = "bfs", format = "human";
  std::string fairness_mode = "terminal", report_arg;
  std::vector<std::string> props;
  Bounds bounds;
  int workers = 1;
  bool do_replay = false;

  auto add_bounds = [&](CLI::App* cmd, bool* hs, bool* hd, bool* hb) {
    cmd->add_option("--max-states", bounds.max_states)->each([hs](auto) {
      *hs = true;
    });
    cmd->add_option("--max-depth", bounds.max_depth)->each([hd](auto) {
      *hd = true;
    });
    cmd->add_option("--fresh-budget", bounds.fresh_budget)->each([hb](auto) {
      *hb = true;
    });
    cmd->add_option("--workers", workers)->check(CLI::Range(1, 64));
    cmd->add_option("--search", search)
        ->check(CLI::IsMember({"bfs", "dfs"}));
  };

  bool hs = false, hd = false, hb = false;
  CLI::App* check = app.add_subcommand("check", "check properties");
  check->add_option("protocol", proto)->required();
  check->add_option("scenario", scn)->required();
  check->add_option("--prop", props, "property name or .prop file")
      ->required();
  check->add_option("--report", report_path, "write a JSON run report");
  check->add_option("--format", format)
      ->check(CLI::IsMember({"human", "machine"}));
  check->add_option("--fairness-mode", fairness_mode)
      ->check(CLI::IsMember({"terminal", "invariant"}));
  add_bounds(check, &hs, &hd, &hb);

  CLI::App* explore_cmd =
      app.add_subcommand("explore", "exhaustive exploration, no properties");
  explore_cmd->add_option("protocol", proto)->required();
  explore_cmd->add_option("scenario", scn)->required();
  add_bounds(explore_cmd, &hs, &hd, &hb);

  CLI::App* trace_cmd = app.add_subcommand("trace", "render a saved trace");
  trace_cmd->add_option("report", report_arg)->required();
  trace_cmd->add_flag("--replay", do_replay,
                      "re-execute and re-evaluate evidence");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : kExitError;
  }

  try {
    if (check->parsed())
      return run_check(proto, scn, props, report_path, bounds, hs, hd, hb,
                       workers, search, fairness_mode, format);
    if (explore_cmd->parsed())
      return run_explore(proto, scn, bounds, hs, hd, hb, workers, search);
    if (trace_cmd->parsed()) return run_trace(report_arg, do_replay);
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kExitError;
  } catch (const ReplayError& e) {
    std::cerr << "replay error: " << e.what() << "\n";
    return kExitError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitError;
  }
  return kExitError;
}
