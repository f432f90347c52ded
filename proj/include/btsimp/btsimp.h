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

#ifndef BTSIMP_BTSIMP_H
#define BTSIMP_BTSIMP_H

/* C interface to the btsimp library. Every function returns a bts_status;
 * on failure the message is available from bts_last_error() on the same
 * thread until the next call. Strings returned through char** outputs are
 * owned by the caller and released with bts_string_free(). */

#include <stddef.h>

#if defined(_WIN32)
#  if defined(BTSIMP_BUILDING_LIBRARY)
#    define BTS_API __declspec(dllexport)
#  else
#    define BTS_API __declspec(dllimport)
#  endif
#else
#  define BTS_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum bts_status {
  BTS_OK = 0,
  BTS_INVALID_ARGUMENT = 1,
  BTS_IO_ERROR = 2,
  BTS_ENCODING_ERROR = 3,
  BTS_PARSE_ERROR = 4,
  BTS_RANGE_ERROR = 5,
  BTS_EMPTY_LINE = 6,
  BTS_EMPTY_CORPUS = 7,
  BTS_DEGENERATE_INPUT = 8,
  BTS_SHAPE_ERROR = 9,
  BTS_CONFIG_ERROR = 10,
  BTS_UNKNOWN_TOKEN = 11,
  BTS_NUMERIC_ERROR = 12,
  BTS_CHECKPOINT_ERROR = 13,
  BTS_NO_RECORDS = 14,
  BTS_INTERNAL_ERROR = 15
} bts_status;

typedef struct bts_config bts_config;
typedef struct bts_rules bts_rules;
typedef struct bts_lm bts_lm;
typedef struct bts_model bts_model;

BTS_API const char* bts_version(void);
BTS_API const char* bts_status_name(bts_status status);
BTS_API const char* bts_last_error(void);
BTS_API void bts_string_free(char* s);

/* Flat key=value configuration; later assignments win. */
BTS_API bts_status bts_config_new(bts_config** out);
BTS_API bts_status bts_config_load(const char* path, bts_config** out);
BTS_API bts_status bts_config_set(bts_config* cfg, const char* key, const char* value);
/* *out is NULL when the key is absent. */
BTS_API bts_status bts_config_get(const bts_config* cfg, const char* key, char** out);
BTS_API bts_status bts_config_to_text(const bts_config* cfg, char** out);
BTS_API void bts_config_free(bts_config* cfg);

/* Toy corpora. Keys: seed (required), n_simple, n_complex, n_pairs,
 * n_parallel, nouns_paired, nouns_shared, verbs_paired, verbs_shared,
 * adjectives_paired, adjectives_shared, filler_clauses, filler_clause_tokens,
 * adjective_prob, min_fillers, max_fillers, rule_score, n_embedding,
 * embedding_mix. */
BTS_API bts_status bts_gen_data(const bts_config* cfg, const char* out_dir);

BTS_API bts_status bts_rules_load(const char* path, double min_score, size_t top_k, bts_rules** out);
BTS_API bts_status bts_rules_dump(const bts_rules* rules, char** out_tsv);
BTS_API size_t bts_rules_key_count(const bts_rules* rules, int reverse);
BTS_API void bts_rules_free(bts_rules* rules);

/* Noises every sentence of a corpus and returns "original<TAB>noised" lines.
 * side is "simple" or "complex". Frequencies come from the corpus plus the
 * optional companion corpus; simple-side donors are drawn from the corpus
 * itself. rules may be NULL. Keys: seed (required), noise_preset, p_rep,
 * p_del, additive_frac_lo, additive_frac_hi, shuffle_k, frequent_threshold. */
BTS_API bts_status bts_noise_corpus(const bts_config* cfg, const char* corpus_path, const char* companion_path,
                                    const bts_rules* rules, const char* side, char** out_tsv);

BTS_API bts_status bts_lm_train(const char* corpus_path, size_t order, bts_lm** out);
BTS_API bts_status bts_lm_load(const char* path, bts_lm** out);
BTS_API bts_status bts_lm_save(const bts_lm* lm, const char* path);
BTS_API bts_status bts_lm_fluency(const bts_lm* lm, const char* sentence, double* out);
BTS_API void bts_lm_free(bts_lm* lm);

/* Corpus-level metrics as JSON with keys sari, f_keep, f_del, f_add, bleu,
 * fkgl in that order. Reference files are parallel to the inputs. */
BTS_API bts_status bts_evaluate(const char* inputs_path, const char* outputs_path, const char* const* ref_paths,
                                size_t n_refs, char** out_json);

/* Training reads data_dir as written by bts_gen_data. defaults selects the
 * base configuration ("standard" or "toy") that cfg overrides. */
BTS_API bts_status bts_pretrain(const bts_config* cfg, const char* defaults, const char* data_dir,
                                const char* out_dir);
BTS_API bts_status bts_train(const bts_config* cfg, const char* defaults, const char* data_dir, const char* out_dir,
                             char** out_report_json);

BTS_API bts_status bts_model_load(const char* checkpoint_path, bts_model** out);
/* Greedy complex-to-simple decode of one whitespace-tokenized line. An empty
 * line yields an empty result. */
BTS_API bts_status bts_model_simplify(const bts_model* model, const char* sentence, char** out);
BTS_API void bts_model_free(bts_model* model);

/* Reward bundles for "input<TAB>output" lines of pairs_path, one JSON object
 * per line. Scorers are trained on data_dir's simple.txt and complex.txt,
 * plus embedding.txt for the embeddings when present.
 * side is the side the outputs are on. Keys: lm_order,
 * reward_embedding_dim, frequent_threshold, sif_a. */
BTS_API bts_status bts_score(const bts_config* cfg, const char* data_dir, const char* pairs_path, const char* side,
                             char** out_jsonl);

#ifdef __cplusplus
}
#endif

#endif /* BTSIMP_BTSIMP_H */
