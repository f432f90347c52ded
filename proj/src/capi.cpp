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

#include "btsimp/btsimp.h"

#include <cstdlib>
#include <cstring>
#include <exception>
#include <memory>
#include <new>
#include <string>

#include "btsimp/config.hpp"
#include "btsimp/embedding.hpp"
#include "btsimp/error.hpp"
#include "btsimp/lm.hpp"
#include "btsimp/metrics.hpp"
#include "btsimp/noise.hpp"
#include "btsimp/reward.hpp"
#include "btsimp/rules.hpp"
#include "btsimp/seqmodel.hpp"
#include "btsimp/synthdata.hpp"
#include "btsimp/trainer.hpp"
#include "json.hpp"

struct bts_config {
  btsimp::KeyValueConfig kv;
};

struct bts_rules {
  btsimp::RuleTable table;
};

struct bts_lm {
  btsimp::NGramLM lm;
};

struct bts_model {
  btsimp::DualDecoderModel model;
};

namespace {

using namespace btsimp;
namespace fs = std::filesystem;

thread_local std::string g_last_error;

bts_status to_status(ErrorCode code) {
  switch (code) {
    case ErrorCode::invalid_argument: return BTS_INVALID_ARGUMENT;
    case ErrorCode::io: return BTS_IO_ERROR;
    case ErrorCode::encoding: return BTS_ENCODING_ERROR;
    case ErrorCode::parse: return BTS_PARSE_ERROR;
    case ErrorCode::range: return BTS_RANGE_ERROR;
    case ErrorCode::empty_line: return BTS_EMPTY_LINE;
    case ErrorCode::empty_corpus: return BTS_EMPTY_CORPUS;
    case ErrorCode::degenerate_input: return BTS_DEGENERATE_INPUT;
    case ErrorCode::shape: return BTS_SHAPE_ERROR;
    case ErrorCode::config: return BTS_CONFIG_ERROR;
    case ErrorCode::unknown_token: return BTS_UNKNOWN_TOKEN;
    case ErrorCode::numeric: return BTS_NUMERIC_ERROR;
    case ErrorCode::checkpoint: return BTS_CHECKPOINT_ERROR;
    case ErrorCode::no_records: return BTS_NO_RECORDS;
  }
  return BTS_INTERNAL_ERROR;
}

template <class F>
bts_status guarded(F&& f) {
  g_last_error.clear();
  try {
    f();
    return BTS_OK;
  } catch (const Error& e) {
    g_last_error = e.what();
    return to_status(e.code());
  } catch (const std::bad_alloc&) {
    g_last_error = "out of memory";
  } catch (const std::exception& e) {
    g_last_error = std::string("internal error: ") + e.what();
  } catch (...) {
    g_last_error = "internal error";
  }
  return BTS_INTERNAL_ERROR;
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.data(), s.size() + 1);
  return p;
}

void require(const void* p, const char* what) {
  if (!p) fail(ErrorCode::invalid_argument, std::string(what) + " must not be NULL");
}

// Lines of a text file with blank lines kept as empty sentences, so parallel
// files stay aligned.
std::vector<Sentence> read_aligned_lines(const fs::path& path) {
  const std::string content = read_file(path);
  std::vector<Sentence> out;
  std::size_t pos = 0, line_no = 0;
  while (pos < content.size()) {
    std::size_t eol = content.find('\n', pos);
    if (eol == std::string::npos) eol = content.size();
    std::string_view line(content.data() + pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (!is_valid_utf8(line)) {
      fail(ErrorCode::encoding, path.string() + ": invalid UTF-8 at line " + std::to_string(line_no));
    }
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) {
      out.emplace_back();
    } else {
      out.push_back(tokenize(line));
    }
  }
  return out;
}

std::uint64_t required_seed(const KeyValueConfig& kv) {
  if (!kv.contains("seed")) fail(ErrorCode::config, "an explicit seed is required");
  return kv.get_uint("seed", 0);
}

TrainerConfig trainer_config(const bts_config* cfg, const char* defaults) {
  const std::string base = defaults ? defaults : "standard";
  TrainerConfig start;
  if (base == "toy") {
    start = TrainerConfig::toy_defaults();
  } else if (base != "standard") {
    fail(ErrorCode::config, "unknown defaults '" + base + "' (expected standard or toy)");
  }
  return TrainerConfig::from_key_values(cfg->kv, start);
}

}  // namespace

extern "C" {

const char* bts_version(void) { return "0.1.0"; }

const char* bts_status_name(bts_status status) {
  switch (status) {
    case BTS_OK: return "OK";
    case BTS_INTERNAL_ERROR: return "InternalError";
    default: break;
  }
  if (status > BTS_OK && status < BTS_INTERNAL_ERROR) {
    return error_code_name(static_cast<ErrorCode>(status - 1)).data();
  }
  return "UnknownStatus";
}

const char* bts_last_error(void) { return g_last_error.c_str(); }

void bts_string_free(char* s) { std::free(s); }

bts_status bts_config_new(bts_config** out) {
  return guarded([&] {
    require(out, "out");
    *out = new bts_config{};
  });
}

bts_status bts_config_load(const char* path, bts_config** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto cfg = std::make_unique<bts_config>();
    cfg->kv = KeyValueConfig::load(path);
    *out = cfg.release();
  });
}

bts_status bts_config_set(bts_config* cfg, const char* key, const char* value) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(value, "value");
    if (*key == '\0') fail(ErrorCode::config, "empty configuration key");
    cfg->kv.set(key, value);
  });
}

bts_status bts_config_get(const bts_config* cfg, const char* key, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(key, "key");
    require(out, "out");
    auto v = cfg->kv.get(key);
    *out = v ? dup_string(*v) : nullptr;
  });
}

bts_status bts_config_to_text(const bts_config* cfg, char** out) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out, "out");
    *out = dup_string(cfg->kv.to_text());
  });
}

void bts_config_free(bts_config* cfg) { delete cfg; }

bts_status bts_gen_data(const bts_config* cfg, const char* out_dir) {
  return guarded([&] {
    require(cfg, "cfg");
    require(out_dir, "out_dir");
    const auto& kv = cfg->kv;
    kv.require_known({"seed", "n_simple", "n_complex", "n_pairs", "n_parallel", "nouns_paired", "nouns_shared",
                      "verbs_paired", "verbs_shared", "adjectives_paired", "adjectives_shared", "filler_clauses",
                      "filler_clause_tokens", "adjective_prob", "min_fillers", "max_fillers", "rule_score", "n_embedding",
                      "embedding_mix"});
    ToyGrammarConfig g;
    g.seed = required_seed(kv);
    g.nouns_paired = kv.get_uint("nouns_paired", g.nouns_paired);
    g.nouns_shared = kv.get_uint("nouns_shared", g.nouns_shared);
    g.verbs_paired = kv.get_uint("verbs_paired", g.verbs_paired);
    g.verbs_shared = kv.get_uint("verbs_shared", g.verbs_shared);
    g.adjectives_paired = kv.get_uint("adjectives_paired", g.adjectives_paired);
    g.adjectives_shared = kv.get_uint("adjectives_shared", g.adjectives_shared);
    g.filler_clauses = kv.get_uint("filler_clauses", g.filler_clauses);
    g.filler_clause_tokens = kv.get_uint("filler_clause_tokens", g.filler_clause_tokens);
    g.adjective_prob = kv.get_double("adjective_prob", g.adjective_prob);
    g.min_fillers = kv.get_uint("min_fillers", g.min_fillers);
    g.max_fillers = kv.get_uint("max_fillers", g.max_fillers);
    g.n_parallel = kv.get_uint("n_parallel", g.n_parallel);
    g.rule_score = kv.get_double("rule_score", g.rule_score);
    g.n_embedding = kv.get_uint("n_embedding", g.n_embedding);
    g.embedding_mix = kv.get_double("embedding_mix", g.embedding_mix);
    const auto n_simple = kv.get_uint("n_simple", 5000);
    const auto n_complex = kv.get_uint("n_complex", 5000);
    const auto n_pairs = kv.get_uint("n_pairs", 200);
    const SynthData data = generate(g, n_simple, n_complex, n_pairs);
    write_synthdata(data, out_dir);

    KeyValueConfig effective;
    auto u = [&effective](const char* k, std::uint64_t v) { effective.set(k, std::to_string(v)); };
    u("seed", g.seed);
    u("n_simple", n_simple);
    u("n_complex", n_complex);
    u("n_pairs", n_pairs);
    u("n_parallel", g.n_parallel);
    u("nouns_paired", g.nouns_paired);
    u("nouns_shared", g.nouns_shared);
    u("verbs_paired", g.verbs_paired);
    u("verbs_shared", g.verbs_shared);
    u("adjectives_paired", g.adjectives_paired);
    u("adjectives_shared", g.adjectives_shared);
    u("filler_clauses", g.filler_clauses);
    u("filler_clause_tokens", g.filler_clause_tokens);
    u("min_fillers", g.min_fillers);
    u("max_fillers", g.max_fillers);
    u("n_embedding", g.n_embedding);
    effective.set("embedding_mix", nlohmann::json(g.embedding_mix).dump());
    effective.set("adjective_prob", nlohmann::json(g.adjective_prob).dump());
    effective.set("rule_score", nlohmann::json(g.rule_score).dump());
    write_file(fs::path(out_dir) / "config.txt", effective.to_text());
  });
}

bts_status bts_rules_load(const char* path, double min_score, size_t top_k, bts_rules** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    if (!(min_score >= 0.0 && min_score <= 1.0)) fail(ErrorCode::range, "min_score outside [0,1]");
    auto r = std::make_unique<bts_rules>();
    r->table = build_rule_table(load_rules(path), min_score, top_k);
    *out = r.release();
  });
}

bts_status bts_rules_dump(const bts_rules* rules, char** out_tsv) {
  return guarded([&] {
    require(rules, "rules");
    require(out_tsv, "out_tsv");
    *out_tsv = dup_string(serialize_rules(rules->table.rules()));
  });
}

size_t bts_rules_key_count(const bts_rules* rules, int reverse) {
  if (!rules) return 0;
  return rules->table.key_count(reverse ? Direction::reverse : Direction::forward);
}

void bts_rules_free(bts_rules* rules) { delete rules; }

bts_status bts_noise_corpus(const bts_config* cfg, const char* corpus_path, const char* companion_path,
                            const bts_rules* rules, const char* side_name_c, char** out_tsv) {
  return guarded([&] {
    require(cfg, "cfg");
    require(corpus_path, "corpus_path");
    require(side_name_c, "side");
    require(out_tsv, "out_tsv");
    const auto& kv = cfg->kv;
    kv.require_known({"seed", "noise_preset", "p_rep", "p_del", "additive_frac_lo", "additive_frac_hi", "shuffle_k",
                      "frequent_threshold"});
    const Side side = parse_side(side_name_c);
    NoiseConfig nc;
    if (auto p = kv.get("noise_preset")) nc.preset = parse_preset(*p);
    nc.p_rep = kv.get_double("p_rep", nc.p_rep);
    nc.p_del = kv.get_double("p_del", nc.p_del);
    nc.additive_frac_lo = kv.get_double("additive_frac_lo", nc.additive_frac_lo);
    nc.additive_frac_hi = kv.get_double("additive_frac_hi", nc.additive_frac_hi);
    nc.shuffle_k = kv.get_uint("shuffle_k", nc.shuffle_k);
    nc.validate();
    const std::uint64_t seed = required_seed(kv);

    const ComplexityTag tag = side == Side::simple ? ComplexityTag::simple : ComplexityTag::complex;
    std::vector<Corpus> corpora{read_corpus(corpus_path, tag)};
    if (companion_path) corpora.push_back(read_corpus(companion_path, ComplexityTag::unlabeled));
    const Vocabulary vocab =
        build_vocabulary(corpora, kv.get_uint("frequent_threshold", Vocabulary::kDefaultFrequentThreshold));
    const RuleTable empty_table;
    const RuleTable& table = rules ? rules->table : empty_table;
    const Corpus& corpus = corpora.front();

    RandomSource rng = make_rng(seed, stream_id(StreamKind::noise, 0));
    std::string out;
    for (std::size_t i = 0; i < corpus.size(); ++i) {
      const Sentence& s = corpus[i];
      Sentence noised;
      if (side == Side::simple) {
        std::size_t j = corpus.size() > 1 ? rng.uniform_index(corpus.size() - 1) : 0;
        if (corpus.size() > 1 && j >= i) ++j;
        noised = noise_simple(s, corpus[j], table, nc, vocab, rng);
      } else {
        noised = noise_complex(s, table, nc, vocab, rng);
      }
      out += s.join();
      out.push_back('\t');
      out += noised.join();
      out.push_back('\n');
    }
    *out_tsv = dup_string(out);
  });
}

bts_status bts_lm_train(const char* corpus_path, size_t order, bts_lm** out) {
  return guarded([&] {
    require(corpus_path, "corpus_path");
    require(out, "out");
    const Corpus c = read_corpus(corpus_path, ComplexityTag::unlabeled);
    auto lm = std::make_unique<bts_lm>();
    lm->lm = train_lm(c.sentences(), order);
    *out = lm.release();
  });
}

bts_status bts_lm_load(const char* path, bts_lm** out) {
  return guarded([&] {
    require(path, "path");
    require(out, "out");
    auto lm = std::make_unique<bts_lm>();
    lm->lm = NGramLM::load(path);
    *out = lm.release();
  });
}

bts_status bts_lm_save(const bts_lm* lm, const char* path) {
  return guarded([&] {
    require(lm, "lm");
    require(path, "path");
    lm->lm.save(path);
  });
}

bts_status bts_lm_fluency(const bts_lm* lm, const char* sentence, double* out) {
  return guarded([&] {
    require(lm, "lm");
    require(sentence, "sentence");
    require(out, "out");
    *out = fluency_reward(lm->lm, tokenize(sentence));
  });
}

void bts_lm_free(bts_lm* lm) { delete lm; }

bts_status bts_evaluate(const char* inputs_path, const char* outputs_path, const char* const* ref_paths, size_t n_refs,
                        char** out_json) {
  return guarded([&] {
    require(inputs_path, "inputs_path");
    require(outputs_path, "outputs_path");
    require(out_json, "out_json");
    if (n_refs == 0) fail(ErrorCode::invalid_argument, "at least one reference file is required");
    require(ref_paths, "ref_paths");
    const auto inputs = read_aligned_lines(inputs_path);
    const auto outputs = read_aligned_lines(outputs_path);
    ReferenceSets refs(inputs.size());
    for (size_t r = 0; r < n_refs; ++r) {
      require(ref_paths[r], "reference path");
      const auto lines = read_aligned_lines(ref_paths[r]);
      if (lines.size() != inputs.size()) {
        fail(ErrorCode::shape, std::string(ref_paths[r]) + " has " + std::to_string(lines.size()) +
                                   " lines, inputs have " + std::to_string(inputs.size()));
      }
      for (std::size_t i = 0; i < lines.size(); ++i) refs[i].push_back(lines[i]);
    }
    const SariReport s = sari(inputs, outputs, refs);
    nlohmann::ordered_json j;
    j["sari"] = s.sari;
    j["f_keep"] = s.f_keep;
    j["f_del"] = s.f_del;
    j["f_add"] = s.f_add;
    j["bleu"] = bleu(outputs, refs);
    try {
      j["fkgl"] = fkgl(outputs).fkgl;
    } catch (const Error& e) {
      if (e.code() != ErrorCode::degenerate_input) throw;
      j["fkgl"] = nullptr;
    }
    *out_json = dup_string(j.dump());
  });
}

bts_status bts_pretrain(const bts_config* cfg, const char* defaults, const char* data_dir, const char* out_dir) {
  return guarded([&] {
    require(cfg, "cfg");
    require(data_dir, "data_dir");
    require(out_dir, "out_dir");
    required_seed(cfg->kv);
    TrainerConfig tc = trainer_config(cfg, defaults);
    tc.bt_epochs = 0;
    run(tc, load_training_data(data_dir), out_dir);
  });
}

bts_status bts_train(const bts_config* cfg, const char* defaults, const char* data_dir, const char* out_dir,
                     char** out_report_json) {
  return guarded([&] {
    require(cfg, "cfg");
    require(data_dir, "data_dir");
    require(out_dir, "out_dir");
    required_seed(cfg->kv);
    const TrainerConfig tc = trainer_config(cfg, defaults);
    const RunResult r = run(tc, load_training_data(data_dir), out_dir);
    if (out_report_json) *out_report_json = dup_string(r.report_json);
  });
}

bts_status bts_model_load(const char* checkpoint_path, bts_model** out) {
  return guarded([&] {
    require(checkpoint_path, "checkpoint_path");
    require(out, "out");
    auto m = std::make_unique<bts_model>();
    m->model = load_checkpoint(checkpoint_path).model;
    *out = m.release();
  });
}

bts_status bts_model_simplify(const bts_model* model, const char* sentence, char** out) {
  return guarded([&] {
    require(model, "model");
    require(sentence, "sentence");
    require(out, "out");
    const std::string_view line(sentence);
    if (line.find_first_not_of(" \t\r\n") == std::string_view::npos) {
      *out = dup_string("");
      return;
    }
    const Sentence src = tokenize(line);
    const DecodeOutput d =
        decode_greedy(model->model, src, TranslationDirection::c2s, default_max_len(src.size()));
    *out = dup_string(d.tokens.join());
  });
}

void bts_model_free(bts_model* model) { delete model; }

bts_status bts_score(const bts_config* cfg, const char* data_dir, const char* pairs_path, const char* side_c,
                     char** out_jsonl) {
  return guarded([&] {
    require(cfg, "cfg");
    require(data_dir, "data_dir");
    require(pairs_path, "pairs_path");
    require(side_c, "side");
    require(out_jsonl, "out_jsonl");
    const auto& kv = cfg->kv;
    kv.require_known({"lm_order", "reward_embedding_dim", "frequent_threshold", "sif_a"});
    const Side side = parse_side(side_c);
    const fs::path dir(data_dir);
    const Corpus simple = read_corpus(dir / "simple.txt", ComplexityTag::simple);
    const Corpus complex = read_corpus(dir / "complex.txt", ComplexityTag::complex);
    const Corpus mixed = fs::exists(dir / "embedding.txt") ? read_corpus(dir / "embedding.txt", ComplexityTag::unlabeled)
                                                           : Corpus({}, ComplexityTag::unlabeled);
    const Corpus both[] = {simple, complex};
    const Corpus with_mixed[] = {simple, complex, mixed};
    const std::size_t order = kv.get_uint("lm_order", 3);
    const NGramLM simple_lm = train_lm(simple.sentences(), order);
    const NGramLM complex_lm = train_lm(complex.sentences(), order);
    const EmbeddingTable emb = train_embeddings(with_mixed, kv.get_uint("reward_embedding_dim", 32));
    const Vocabulary vocab =
        build_vocabulary(both, kv.get_uint("frequent_threshold", Vocabulary::kDefaultFrequentThreshold));
    std::vector<Sentence> all = simple.sentences();
    all.insert(all.end(), complex.sentences().begin(), complex.sentences().end());

    RewardScorers scorers;
    scorers.simple_lm = &simple_lm;
    scorers.complex_lm = &complex_lm;
    scorers.embeddings = &emb;
    scorers.vocab = &vocab;
    scorers.fkgl_stats = corpus_fkgl_stats(all);
    scorers.sif_a = kv.get_double("sif_a", kDefaultSifWeight);

    std::string out;
    for (const auto& [input, output] : read_pairs(pairs_path)) {
      const RewardBundle b = total_reward(output, input, side, scorers);
      nlohmann::ordered_json j;
      j["r_f"] = b.r_f;
      j["r_s"] = b.r_s;
      j["r_c"] = b.r_c;
      j["total"] = b.total;
      out += j.dump();
      out.push_back('\n');
    }
    *out_jsonl = dup_string(out);
  });
}

}  // extern "C"
