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

#include <cstdlib>
#include <fstream>

#include "testutil.hpp"

using faircheck::test::model_path;
using faircheck::test::read_file;

namespace {

struct CliResult {
  int exit_code = -1;
  std::string out;
};

CliResult run_cli(const std::string& args, const std::string& env = "") {
  static int counter = 0;
  std::string outfile = "/tmp/faircheck_cli_" + std::to_string(++counter);
  std::string cmd = env + " " + std::string(FAIRCHECK_BIN) + " " + args +
                    " > " + outfile + " 2>&1";
  int rc = std::system(cmd.c_str());
  CliResult r;
  r.exit_code = WEXITSTATUS(rc);
  r.out = read_file(outfile);
  return r;
}

}  // namespace

TEST_CASE("exit code contract") {
  // 1: attack found
  CliResult attack = run_cli("check " + model_path("ccd.proto") + " " +
                             model_path("ccd_honest.scn") + " --prop fairness");
  CHECK(attack.exit_code == 1);
  CHECK(attack.out.find("verdict: attack") != std::string::npos);

  // 0: safe within bounds
  CliResult safe =
      run_cli("check " + model_path("ccd_secure_ttp.proto") + " " +
              model_path("ccd_honest.scn") + " --prop fairness");
  CHECK(safe.exit_code == 0);
  CHECK(safe.out.find("safe_within_bounds") != std::string::npos);

  // 2: missing file
  CliResult missing =
      run_cli("check missing.proto " + model_path("ccd_honest.scn") +
              " --prop fairness");
  CHECK(missing.exit_code == 2);

  // 2: parse error
  std::ofstream("/tmp/bad.proto") << "protocol broken roles\n";
  CliResult bad = run_cli("check /tmp/bad.proto " +
                          model_path("ccd_honest.scn") + " --prop fairness");
  CHECK(bad.exit_code == 2);

  // 2: unknown property selector
  CliResult noprop = run_cli("check " + model_path("ccd.proto") + " " +
                             model_path("ccd_honest.scn") + " --prop nosuch");
  CHECK(noprop.exit_code == 2);

  // 3: bound exhausted
  CliResult bound = run_cli("check " + model_path("ccd.proto") + " " +
                            model_path("ccd_honest.scn") +
                            " --prop fairness --max-depth 2");
  CHECK(bound.exit_code == 3);
}

TEST_CASE("machine format emits the versioned record stream") {
  CliResult r = run_cli("check " + model_path("ccd.proto") + " " +
                        model_path("ccd_honest.scn") +
                        " --prop fairness --format machine");
  CHECK(r.exit_code == 1);
  CHECK(r.out.rfind("faircheck-trace-v1", 0) == 0);
  CHECK(r.out.find("verdict attack property=fairness") != std::string::npos);
  CHECK(r.out.find("stats states=") != std::string::npos);
  CHECK(r.out.find("svcreq|s1|resolve@") != std::string::npos);
}

TEST_CASE("explore prints the statistics record") {
  CliResult r = run_cli("explore " + model_path("ccd.proto") + " " +
                        model_path("ccd_honest.scn"));
  CHECK(r.exit_code == 0);
  CHECK(r.out.find("stats states=") != std::string::npos);
  CliResult bounded = run_cli("explore " + model_path("ccd.proto") + " " +
                              model_path("ccd_honest.scn") + " --max-depth 1");
  CHECK(bounded.exit_code == 3);
}

TEST_CASE("report, trace and replay round trip") {
  CliResult r = run_cli("check " + model_path("ccd.proto") + " " +
                        model_path("ccd_honest.scn") +
                        " --prop fairness --report /tmp/faircheck_rep.json");
  CHECK(r.exit_code == 1);
  CliResult shown = run_cli("trace /tmp/faircheck_rep.json");
  CHECK(shown.exit_code == 0);
  CHECK(shown.out.find("1. ") != std::string::npos);
  CliResult replayed = run_cli("trace /tmp/faircheck_rep.json --replay");
  CHECK(replayed.exit_code == 0);
  CHECK(replayed.out.find("aknows(B, s1, NRO_B) = true") != std::string::npos);
  CHECK(replayed.out.find("aknows(A, s1, NRR_A) = false") !=
        std::string::npos);
  CHECK(replayed.out.find("re-evaluated: false") != std::string::npos);

  // Corrupted trace: divergence maps to exit 2.
  std::string json = read_file("/tmp/faircheck_rep.json");
  auto pos = json.find("svcreq");
  REQUIRE(pos != std::string::npos);
  json.replace(pos, 6, "svcxxx");
  std::ofstream("/tmp/faircheck_corrupt.json") << json;
  CliResult corrupt = run_cli("trace /tmp/faircheck_corrupt.json --replay");
  CHECK(corrupt.exit_code == 2);
}

TEST_CASE("the model directory env var resolves relative paths") {
  CliResult r = run_cli("check ccd.proto ccd_honest.scn --prop fairness",
                        "FAIRCHECK_MODEL_DIR=" +
                            faircheck::test::models_dir());
  CHECK(r.exit_code == 1);
}

TEST_CASE("evidence names select the generated service properties") {
  CliResult r = run_cli("check " + model_path("ccd.proto") + " " +
                        model_path("ccd_honest.scn") + " --prop NRO_B");
  CHECK(r.exit_code == 0);  // both corollary implications hold
  CliResult r2 = run_cli("check " + model_path("ccd.proto") + " " +
                         model_path("ccd_honest.scn") + " --prop NRR_A");
  CHECK(r2.exit_code == 0);
}

TEST_CASE("model errors exit with the diagnostic code") {
  std::ofstream("/tmp/unsound.proto")
      << "protocol bad\nroles A B\nfresh B : N nonce\n"
         "main:\n  1. B -> A : h(N)\n       annotate A knows N\n";
  std::ofstream("/tmp/unsound.scn")
      << "scenario s\nprotocol bad\nsession s1 : A = a, B = b\n";
  CliResult r = run_cli(
      "explore /tmp/unsound.proto /tmp/unsound.scn");
  CHECK(r.exit_code == 2);
  CHECK(r.out.find("unsound annotation") != std::string::npos);
}

TEST_CASE("invariant-mode fairness also finds the ccd attacks") {
  CliResult r = run_cli("check " + model_path("ccd.proto") + " " +
                        model_path("ccd_honest.scn") +
                        " --prop fairness --fairness-mode invariant");
  CHECK(r.exit_code == 1);
  CliResult r2 = run_cli("check " + model_path("ccd.proto") + " " +
                         model_path("ccd_b_dishonest.scn") +
                         " --prop fairness --fairness-mode invariant");
  CHECK(r2.exit_code == 1);
}
