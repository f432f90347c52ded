// Copyright 2026 The btsimp Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <sys/wait.h>

#include <cstdio>
#include <string>
#include <vector>

#include "doctest.h"
#include "json.hpp"
#include "micro_setup.hpp"

using namespace btsimp_it;

namespace {

struct Result {
  int code = -1;
  std::string out;
};

// Runs the CLI through the shell; stderr is folded into the captured output.
Result cli(const std::string& args, const std::string& stdin_file = "") {
  std::string cmd = std::string("'") + BTSIMP_CLI_PATH + "' " + args;
  if (!stdin_file.empty()) cmd += " < '" + stdin_file + "'";
  cmd += " 2>&1";
  Result r;
  FILE* p = popen(cmd.c_str(), "r");
  REQUIRE(p != nullptr);
  char buf[4096];
  std::size_t n;
  while ((n = fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
  const int status = pclose(p);
  r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
  return r;
}

std::string grammar_sets() {
  std::string s;
  for (const auto& kv : kMicroGrammar) s += std::string(" --set ") + kv[0] + "=" + kv[1];
  return s;
}

std::string trainer_sets() {
  std::string s;
  for (const auto& kv : kMicroTrainer) s += std::string(" --set ") + kv[0] + "=" + kv[1];
  return s;
}

std::size_t lines_in(const std::string& s) { return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n')); }

}  // namespace

TEST_SUITE("cli") {
  TEST_CASE("usage errors exit 1") {
    CHECK(cli("").code == 1);
    CHECK(cli("frobnicate").code == 1);
    CHECK(cli("gen-data --out-dir x").code == 1);  // missing --seed
    CHECK(cli("evaluate --inputs a --outputs b --refs c --bogus").code == 1);
    CHECK(cli("noise --side medium --corpus x --seed 1").code == 1);
    CHECK(cli("--help").code == 0);
  }

  TEST_CASE("evaluate identity triple") {
    const fs::path dir = scratch("cli_eval");
    spit(dir / "a.txt", "a b c d\nthe cat sat on the mat .\n");
    const std::string a = (dir / "a.txt").string();
    auto r = cli("evaluate --inputs " + a + " --outputs " + a + " --refs " + a + "," + a);
    REQUIRE(r.code == 0);
    const auto j = nlohmann::json::parse(r.out);
    CHECK(j["sari"] == 100.0);
    CHECK(j["bleu"] == 100.0);
    r = cli("evaluate --inputs " + a + " --outputs " + a + " --refs " + a + " --out " + (dir / "m.json").string());
    REQUIRE(r.code == 0);
    CHECK(nlohmann::json::parse(slurp(dir / "m.json"))["sari"] == 100.0);
    CHECK(fs::exists(dir / "m.json.config.txt"));
    CHECK(cli("evaluate --inputs " + a + " --outputs missing.txt --refs " + a).code == 2);
  }

  TEST_CASE("simplify with a missing checkpoint") {
    const fs::path dir = scratch("cli_simplify_missing");
    spit(dir / "in.txt", "x\n");
    const auto r = cli("simplify --checkpoint " + (dir / "none.ckpt").string(), (dir / "in.txt").string());
    CHECK(r.code == 2);
    CHECK(r.out.find("CheckpointError") != std::string::npos);
  }

  TEST_CASE("gen-data, noise, rules and language model") {
    const fs::path dir = scratch("cli_pipeline");
    const fs::path data = dir / "data";
    REQUIRE(cli("gen-data --seed 4 --out-dir " + data.string() + grammar_sets()).code == 0);
    CHECK(slurp(data / "config.txt").find("seed=4") != std::string::npos);
    CHECK(lines_in(slurp(data / "simple.txt")) == 120);

    auto r = cli("noise --side simple --preset full --rules " + (data / "rules.tsv").string() + " --corpus " +
                 (data / "simple.txt").string() + " --seed 2 --out " + (dir / "n.tsv").string());
    REQUIRE(r.code == 0);
    CHECK(lines_in(slurp(dir / "n.tsv")) == 120);
    CHECK(slurp(dir / "n.tsv.config.txt").find("seed=2") != std::string::npos);
    r = cli("noise --side complex --preset original --corpus " + (data / "complex.txt").string() + " --seed 2");
    REQUIRE(r.code == 0);
    CHECK(lines_in(r.out) == 120);

    r = cli("build-rules --rules " + (data / "rules.tsv").string() + " --min-score 0.5 --top-k 5");
    REQUIRE(r.code == 0);
    CHECK(lines_in(r.out) == lines_in(slurp(data / "rules.tsv")));

    r = cli("train-lm --corpus " + (data / "simple.txt").string() + " --order 3 --out " + (dir / "lm.bin").string());
    REQUIRE(r.code == 0);
    CHECK(fs::exists(dir / "lm.bin"));
    CHECK(fs::exists(dir / "lm.bin.config.txt"));
  }

  TEST_CASE("train twice with the same seed, then simplify and score") {
    const fs::path dir = scratch("cli_train");
    const fs::path data = dir / "data";
    REQUIRE(cli("gen-data --seed 7 --out-dir " + data.string() + grammar_sets()).code == 0);
    const std::string common = " --data " + data.string() + " --seed 7 --defaults toy" + trainer_sets();
    auto r1 = cli("train --out " + (dir / "a").string() + common + " --rl on --xi 0");
    REQUIRE_MESSAGE(r1.code == 0, r1.out);
    auto r2 = cli("train --out " + (dir / "b").string() + common + " --rl on --xi 0");
    REQUIRE(r2.code == 0);
    CHECK(slurp(dir / "a" / "report.json") == slurp(dir / "b" / "report.json"));
    CHECK(slurp(dir / "a" / "config.txt").find("seed=7") != std::string::npos);
    CHECK(slurp(dir / "a" / "config.txt").find("rl_enabled=true") != std::string::npos);

    spit(dir / "cfg.txt", "supervision_fraction = 0.5\n");
    auto r3 = cli("train --out " + (dir / "c").string() + common + " --config " + (dir / "cfg.txt").string() +
                  " --supervision-fraction 0.1");
    REQUIRE(r3.code == 0);
    CHECK(slurp(dir / "c" / "config.txt").find("supervision_fraction=0.1") != std::string::npos);

    // One output line per input line, blank lines included.
    std::string input;
    const std::string pairs = slurp(data / "test.pairs");
    std::size_t pos = 0;
    for (int i = 0; i < 4; ++i) {
      const std::size_t tab = pairs.find('\t', pos);
      input += pairs.substr(pos, tab - pos) + "\n";
      if (i == 1) input += "\n";
      pos = pairs.find('\n', tab) + 1;
    }
    spit(dir / "in.txt", input);
    auto s1 = cli("simplify --checkpoint " + (dir / "a" / "selected.ckpt").string(), (dir / "in.txt").string());
    REQUIRE(s1.code == 0);
    CHECK(lines_in(s1.out) == 5);
    auto s2 = cli("simplify --checkpoint " + (dir / "a" / "selected.ckpt").string(), (dir / "in.txt").string());
    CHECK(s1.out == s2.out);

    spit(dir / "pairs.tsv", input.substr(0, input.find('\n')) + "\tthe\n");
    auto sc = cli("score --data " + data.string() + " --pairs " + (dir / "pairs.tsv").string() +
                  " --side simple --set reward_embedding_dim=4 --set frequent_threshold=30");
    REQUIRE_MESSAGE(sc.code == 0, sc.out);
    const auto j = nlohmann::json::parse(sc.out);
    CHECK(j.contains("total"));

    auto p = cli("pretrain --out " + (dir / "p").string() + common);
    REQUIRE(p.code == 0);
    CHECK(fs::exists(dir / "p" / "pretrained.ckpt"));
  }
}
