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

// btsimp command-line driver. Exit status: 0 success, 1 usage error,
// 2 runtime error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "btsimp/btsimp.h"

namespace {

constexpr int kExitRuntime = 2;

class RuntimeFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

void check(bts_status st) {
  if (st != BTS_OK) throw RuntimeFailure(bts_last_error());
}

struct StringDeleter {
  void operator()(char* s) const { bts_string_free(s); }
};
using OwnedString = std::unique_ptr<char, StringDeleter>;

struct ConfigDeleter {
  void operator()(bts_config* c) const { bts_config_free(c); }
};
using Config = std::unique_ptr<bts_config, ConfigDeleter>;

Config make_config(const std::string& file) {
  bts_config* raw = nullptr;
  check(file.empty() ? bts_config_new(&raw) : bts_config_load(file.c_str(), &raw));
  return Config(raw);
}

void set(bts_config* cfg, const std::string& key, const std::string& value) {
  check(bts_config_set(cfg, key.c_str(), value.c_str()));
}

// "key=value" overrides from --set.
void apply_overrides(bts_config* cfg, const std::vector<std::string>& overrides) {
  for (const auto& kv : overrides) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set", "expected key=value, got '" + kv + "'");
    set(cfg, kv.substr(0, eq), kv.substr(eq + 1));
  }
}

std::string config_text(const bts_config* cfg) {
  char* raw = nullptr;
  check(bts_config_to_text(cfg, &raw));
  return OwnedString(raw).get();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f || !(f << text)) throw RuntimeFailure("IoError: cannot write " + path);
}

// Every file a subcommand writes gets a sidecar holding the effective settings.
void write_sidecar(const std::string& path, const std::string& text) { write_text(path + ".config.txt", text); }

void emit(const std::string& out_path, const std::string& text, const std::string& sidecar) {
  if (out_path.empty()) {
    std::cout << text;
    if (!text.empty() && text.back() != '\n') std::cout << '\n';
  } else {
    write_text(out_path, text);
    write_sidecar(out_path, sidecar);
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Back-translation text simplification toolkit"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(bts_version()));

  // gen-data
  auto* gen = app.add_subcommand("gen-data", "Generate the toy corpora, held-out pairs and rule table");
  std::uint64_t gen_seed = 0;
  std::string gen_out;
  std::vector<std::string> gen_sets;
  gen->add_option("--seed", gen_seed, "Random seed")->required();
  gen->add_option("--out-dir", gen_out, "Output directory")->required();
  gen->add_option("--set", gen_sets, "Generator override key=value");

  // build-rules
  auto* rules_cmd = app.add_subcommand("build-rules", "Filter a rule file by score and keep the top candidates");
  std::string rules_in, rules_out;
  double rules_min = 0.5;
  std::size_t rules_top = 5;
  rules_cmd->add_option("--rules", rules_in, "Rule TSV (score, complex phrase, simple phrase)")->required();
  rules_cmd->add_option("--min-score", rules_min, "Drop rules scoring below this")->capture_default_str();
  rules_cmd->add_option("--top-k", rules_top, "Candidates kept per phrase and direction")->capture_default_str();
  rules_cmd->add_option("--out", rules_out, "Output file (default: stdout)");

  // noise
  auto* noise = app.add_subcommand("noise", "Print original<TAB>noised pairs for a corpus");
  std::string noise_side, noise_preset = "full", noise_rules, noise_corpus, noise_companion, noise_out;
  std::uint64_t noise_seed = 0;
  std::vector<std::string> noise_sets;
  noise->add_option("--side", noise_side, "Corpus side")->required()->check(CLI::IsMember({"simple", "complex"}));
  noise->add_option("--preset", noise_preset, "Noise preset")
      ->check(CLI::IsMember({"original", "additive", "full"}))
      ->capture_default_str();
  noise->add_option("--rules", noise_rules, "Rule TSV for substitution");
  noise->add_option("--corpus", noise_corpus, "Corpus to noise")->required();
  noise->add_option("--companion", noise_companion, "Extra corpus counted for word frequencies");
  noise->add_option("--seed", noise_seed, "Random seed")->required();
  noise->add_option("--set", noise_sets, "Noise override key=value");
  noise->add_option("--out", noise_out, "Output file (default: stdout)");

  // train-lm
  auto* lm_cmd = app.add_subcommand("train-lm", "Train an interpolated n-gram language model");
  std::string lm_corpus, lm_out;
  std::size_t lm_order = 3;
  lm_cmd->add_option("--corpus", lm_corpus, "Training corpus")->required();
  lm_cmd->add_option("--order", lm_order, "Model order")->capture_default_str();
  lm_cmd->add_option("--out", lm_out, "Output model file")->required();

  // pretrain / train share their options.
  struct TrainOptions {
    std::string config_file, data, out, defaults = "standard", rl, preset;
    std::optional<std::uint64_t> seed;
    std::optional<double> supervision, xi;
    std::vector<std::string> sets;
  };
  TrainOptions pre_opts, train_opts;
  auto add_train_options = [](CLI::App* cmd, TrainOptions& o, bool full) {
    cmd->add_option("--config", o.config_file, "key=value configuration file");
    cmd->add_option("--data", o.data, "Data directory written by gen-data")->required();
    cmd->add_option("--out", o.out, "Output directory")->required();
    cmd->add_option("--seed", o.seed, "Random seed")->required();
    cmd->add_option("--defaults", o.defaults, "Base configuration")
        ->check(CLI::IsMember({"standard", "toy"}))
        ->capture_default_str();
    cmd->add_option("--preset", o.preset, "Noise preset")->check(CLI::IsMember({"original", "additive", "full"}));
    cmd->add_option("--set", o.sets, "Configuration override key=value");
    if (full) {
      cmd->add_option("--supervision-fraction", o.supervision, "Share of the parallel pool used for supervision");
      cmd->add_option("--rl", o.rl, "Policy-gradient training")->check(CLI::IsMember({"on", "off"}));
      cmd->add_option("--xi", o.xi, "BLEU threshold for model selection");
    }
  };
  auto* pretrain = app.add_subcommand("pretrain", "Denoising pretraining only");
  add_train_options(pretrain, pre_opts, false);
  auto* train = app.add_subcommand("train", "Pretraining, back-translation epochs and model selection");
  add_train_options(train, train_opts, true);

  // simplify
  auto* simplify = app.add_subcommand("simplify", "Simplify complex sentences read from standard input");
  std::string simplify_ckpt;
  simplify->add_option("--checkpoint", simplify_ckpt, "Model checkpoint")->required();

  // evaluate
  auto* evaluate = app.add_subcommand("evaluate", "Corpus SARI, BLEU and FKGL as JSON");
  std::string eval_inputs, eval_outputs, eval_out;
  std::vector<std::string> eval_refs;
  evaluate->add_option("--inputs", eval_inputs, "Source sentences")->required();
  evaluate->add_option("--outputs", eval_outputs, "System outputs")->required();
  evaluate->add_option("--refs", eval_refs, "Reference files")->required()->delimiter(',');
  evaluate->add_option("--out", eval_out, "Output file (default: stdout)");

  // score
  auto* score = app.add_subcommand("score", "Reward bundles for input<TAB>output pairs");
  std::string score_data, score_pairs, score_side = "simple", score_config, score_out;
  std::vector<std::string> score_sets;
  score->add_option("--data", score_data, "Data directory with simple.txt and complex.txt")->required();
  score->add_option("--pairs", score_pairs, "input<TAB>output lines")->required();
  score->add_option("--side", score_side, "Side of the outputs")
      ->check(CLI::IsMember({"simple", "complex"}))
      ->capture_default_str();
  score->add_option("--config", score_config, "key=value configuration file");
  score->add_option("--set", score_sets, "Scorer override key=value");
  score->add_option("--out", score_out, "Output file (default: stdout)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*gen) {
      Config cfg = make_config("");
      apply_overrides(cfg.get(), gen_sets);
      set(cfg.get(), "seed", std::to_string(gen_seed));
      check(bts_gen_data(cfg.get(), gen_out.c_str()));
    } else if (*rules_cmd) {
      bts_rules* raw = nullptr;
      check(bts_rules_load(rules_in.c_str(), rules_min, rules_top, &raw));
      std::unique_ptr<bts_rules, void (*)(bts_rules*)> rules(raw, bts_rules_free);
      char* tsv = nullptr;
      check(bts_rules_dump(rules.get(), &tsv));
      OwnedString owned(tsv);
      emit(rules_out, tsv,
           "rules=" + rules_in + "\nmin_score=" + std::to_string(rules_min) + "\ntop_k=" + std::to_string(rules_top) +
               "\n");
    } else if (*noise) {
      Config cfg = make_config("");
      apply_overrides(cfg.get(), noise_sets);
      set(cfg.get(), "seed", std::to_string(noise_seed));
      set(cfg.get(), "noise_preset", noise_preset);
      std::unique_ptr<bts_rules, void (*)(bts_rules*)> rules(nullptr, bts_rules_free);
      if (!noise_rules.empty()) {
        bts_rules* raw = nullptr;
        check(bts_rules_load(noise_rules.c_str(), 0.5, 5, &raw));
        rules.reset(raw);
      }
      char* tsv = nullptr;
      check(bts_noise_corpus(cfg.get(), noise_corpus.c_str(), noise_companion.empty() ? nullptr : noise_companion.c_str(),
                             rules.get(), noise_side.c_str(), &tsv));
      OwnedString owned(tsv);
      emit(noise_out, tsv, config_text(cfg.get()) + "side=" + noise_side + "\n");
    } else if (*lm_cmd) {
      bts_lm* raw = nullptr;
      check(bts_lm_train(lm_corpus.c_str(), lm_order, &raw));
      std::unique_ptr<bts_lm, void (*)(bts_lm*)> lm(raw, bts_lm_free);
      check(bts_lm_save(lm.get(), lm_out.c_str()));
      write_sidecar(lm_out, "corpus=" + lm_corpus + "\norder=" + std::to_string(lm_order) + "\n");
    } else if (*pretrain || *train) {
      const bool full = static_cast<bool>(*train);
      const TrainOptions& o = full ? train_opts : pre_opts;
      Config cfg = make_config(o.config_file);
      apply_overrides(cfg.get(), o.sets);
      set(cfg.get(), "seed", std::to_string(*o.seed));
      if (!o.preset.empty()) set(cfg.get(), "noise_preset", o.preset);
      if (o.supervision) set(cfg.get(), "supervision_fraction", std::to_string(*o.supervision));
      if (!o.rl.empty()) set(cfg.get(), "rl_enabled", o.rl == "on" ? "true" : "false");
      if (o.xi) set(cfg.get(), "xi", std::to_string(*o.xi));
      if (full) {
        char* report = nullptr;
        check(bts_train(cfg.get(), o.defaults.c_str(), o.data.c_str(), o.out.c_str(), &report));
        OwnedString owned(report);
        std::cout << "report written to " << o.out << "/report.json\n";
      } else {
        check(bts_pretrain(cfg.get(), o.defaults.c_str(), o.data.c_str(), o.out.c_str()));
        std::cout << "checkpoint written to " << o.out << "/pretrained.ckpt\n";
      }
    } else if (*simplify) {
      bts_model* raw = nullptr;
      check(bts_model_load(simplify_ckpt.c_str(), &raw));
      std::unique_ptr<bts_model, void (*)(bts_model*)> model(raw, bts_model_free);
      std::string line;
      while (std::getline(std::cin, line)) {
        char* out = nullptr;
        check(bts_model_simplify(model.get(), line.c_str(), &out));
        OwnedString owned(out);
        std::cout << out << '\n';
      }
    } else if (*evaluate) {
      std::vector<const char*> refs;
      for (const auto& r : eval_refs) refs.push_back(r.c_str());
      char* json = nullptr;
      check(bts_evaluate(eval_inputs.c_str(), eval_outputs.c_str(), refs.data(), refs.size(), &json));
      OwnedString owned(json);
      std::string sidecar = "inputs=" + eval_inputs + "\noutputs=" + eval_outputs + "\nrefs=";
      for (std::size_t i = 0; i < eval_refs.size(); ++i) sidecar += (i ? "," : "") + eval_refs[i];
      emit(eval_out, std::string(json) + "\n", sidecar + "\n");
    } else if (*score) {
      Config cfg = make_config(score_config);
      apply_overrides(cfg.get(), score_sets);
      char* jsonl = nullptr;
      check(bts_score(cfg.get(), score_data.c_str(), score_pairs.c_str(), score_side.c_str(), &jsonl));
      OwnedString owned(jsonl);
      emit(score_out, jsonl, config_text(cfg.get()) + "side=" + score_side + "\n");
    }
  } catch (const CLI::ValidationError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  } catch (const RuntimeFailure& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return 0;
}
