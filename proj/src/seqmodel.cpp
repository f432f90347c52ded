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

#include "btsimp/seqmodel.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

#include "binary_io.hpp"
#include "btsimp/error.hpp"

namespace btsimp {

namespace {

using Eigen::Index;
using Eigen::MatrixXd;
using Eigen::VectorXd;
using ConstMap = Eigen::Map<const MatrixXd>;
using MutMap = Eigen::Map<MatrixXd>;

template <class Derived>
MatrixXd sigmoid(const Eigen::MatrixBase<Derived>& x) {
  return (1.0 / (1.0 + (-x.array()).exp())).matrix();
}

// Column-wise log-softmax.
MatrixXd log_softmax_cols(const MatrixXd& logits) {
  MatrixXd out(logits.rows(), logits.cols());
  for (Index t = 0; t < logits.cols(); ++t) {
    const double mx = logits.col(t).maxCoeff();
    const double lse = mx + std::log((logits.col(t).array() - mx).exp().sum());
    out.col(t) = logits.col(t).array() - lse;
  }
  return out;
}

VectorXd softmax(const VectorXd& x) {
  const double mx = x.maxCoeff();
  VectorXd e = (x.array() - mx).exp().matrix();
  return e / e.sum();
}

struct GruCache {
  MatrixXd z, r, n, rh, h_prev, h;  // H x T each
};

// pre_x already holds Wx x + b for every step.
void gru_forward(const MatrixXd& pre_x, const ConstMap& uzr, const ConstMap& un, const VectorXd& h0,
                 GruCache& c) {
  const Index hd = un.rows();
  const Index steps = pre_x.cols();
  c.z.resize(hd, steps);
  c.r.resize(hd, steps);
  c.n.resize(hd, steps);
  c.rh.resize(hd, steps);
  c.h_prev.resize(hd, steps);
  c.h.resize(hd, steps);
  VectorXd h = h0;
  for (Index t = 0; t < steps; ++t) {
    c.h_prev.col(t) = h;
    const VectorXd zr = sigmoid(pre_x.col(t).head(2 * hd) + uzr * h);
    c.z.col(t) = zr.head(hd);
    c.r.col(t) = zr.tail(hd);
    c.rh.col(t) = c.r.col(t).cwiseProduct(h);
    c.n.col(t) = (pre_x.col(t).tail(hd) + un * c.rh.col(t)).array().tanh().matrix();
    h = (1.0 - c.z.col(t).array()).matrix().cwiseProduct(c.n.col(t)) + c.z.col(t).cwiseProduct(h);
    c.h.col(t) = h;
  }
}

// dh: gradient w.r.t. each step's output (excluding the recurrent path).
// Fills dpre (3H x T) and accumulates recurrent weight gradients. Returns the
// gradient w.r.t. the initial state.
VectorXd gru_backward(const GruCache& c, const ConstMap& uzr, const ConstMap& un, const MatrixXd& dh_out,
                      MatrixXd& dpre, MutMap duzr, MutMap dun) {
  const Index hd = un.rows();
  const Index steps = dh_out.cols();
  dpre.resize(3 * hd, steps);
  VectorXd carry = VectorXd::Zero(hd);
  VectorXd dzr(2 * hd);
  for (Index t = steps - 1; t >= 0; --t) {
    const VectorXd dh = dh_out.col(t) + carry;
    const auto z = c.z.col(t).array();
    const auto r = c.r.col(t).array();
    const auto n = c.n.col(t).array();
    const auto hp = c.h_prev.col(t).array();
    const VectorXd dn_pre = (dh.array() * (1.0 - z) * (1.0 - n * n)).matrix();
    const VectorXd dz_pre = (dh.array() * (hp - n) * z * (1.0 - z)).matrix();
    dun.noalias() += dn_pre * c.rh.col(t).transpose();
    const VectorXd drh = un.transpose() * dn_pre;
    const VectorXd dr_pre = (drh.array() * hp * r * (1.0 - r)).matrix();
    dzr.head(hd) = dz_pre;
    dzr.tail(hd) = dr_pre;
    duzr.noalias() += dzr * c.h_prev.col(t).transpose();
    carry = (dh.array() * z).matrix() + (drh.array() * r).matrix() + uzr.transpose() * dzr;
    dpre.col(t).head(2 * hd) = dzr;
    dpre.col(t).tail(hd) = dn_pre;
  }
  return carry;
}

struct DecoderBlocks {
  Block wx, uzr, un, b, att, comb, comb_b, init, init_b;
};

DecoderBlocks decoder_blocks(Side side) {
  auto d = [side](Block b) { return ParamLayout::decoder_block(b, side); };
  return {d(Block::dec_s_wx),   d(Block::dec_s_uzr),    d(Block::dec_s_un),
          d(Block::dec_s_b),    d(Block::dec_s_att),    d(Block::dec_s_comb),
          d(Block::dec_s_comb_b), d(Block::dec_s_init), d(Block::dec_s_init_b)};
}

MatrixXd gather_columns(const ConstMap& emb, std::span<const int> ids) {
  MatrixXd x(emb.rows(), static_cast<Index>(ids.size()));
  for (std::size_t i = 0; i < ids.size(); ++i) x.col(static_cast<Index>(i)) = emb.col(ids[i]);
  return x;
}

void scatter_columns(MutMap demb, std::span<const int> ids, const MatrixXd& dx) {
  for (std::size_t i = 0; i < ids.size(); ++i) demb.col(ids[i]) += dx.col(static_cast<Index>(i));
}

struct Encoded {
  MatrixXd x;  // E x n
  GruCache gru;
  const MatrixXd& states() const { return gru.h; }
};

Encoded encode(const DualDecoderModel& m, std::span<const int> source) {
  const auto& L = m.layout;
  const auto& p = m.params;
  Encoded e;
  e.x = gather_columns(L.view(p, Block::embedding), source);
  MatrixXd pre = L.view(p, Block::enc_wx) * e.x;
  pre.colwise() += L.view(p, Block::enc_b).col(0);
  gru_forward(pre, L.view(p, Block::enc_uzr), L.view(p, Block::enc_un),
              VectorXd::Zero(static_cast<Index>(m.shape.hidden_dim)), e.gru);
  return e;
}

// Incremental decoder used for greedy decoding and sampling.
class StepDecoder {
 public:
  StepDecoder(const DualDecoderModel& m, const Encoded& enc, Side side)
      : m_(m), enc_(enc), blocks_(decoder_blocks(side)) {
    const auto& L = m.layout;
    const auto& p = m.params;
    const VectorXd h_last = enc.states().col(enc.states().cols() - 1);
    state_ = (L.view(p, blocks_.init) * h_last + L.view(p, blocks_.init_b).col(0)).array().tanh().matrix();
    keys_ = L.view(p, blocks_.att) * enc.states();
  }

  // Feeds `input` and returns the log-distribution over output ids.
  VectorXd step(int input) {
    const auto& L = m_.layout;
    const auto& p = m_.params;
    const Index hd = static_cast<Index>(m_.shape.hidden_dim);
    const auto emb = L.view(p, Block::embedding);
    const VectorXd pre = L.view(p, blocks_.wx) * emb.col(input) + L.view(p, blocks_.b).col(0);
    const VectorXd zr = sigmoid(pre.head(2 * hd) + L.view(p, blocks_.uzr) * state_);
    const VectorXd rh = zr.tail(hd).cwiseProduct(state_);
    const VectorXd n = (pre.tail(hd) + L.view(p, blocks_.un) * rh).array().tanh().matrix();
    state_ = (1.0 - zr.head(hd).array()).matrix().cwiseProduct(n) + zr.head(hd).cwiseProduct(state_);
    const VectorXd alpha = softmax(keys_.transpose() * state_);
    VectorXd sc(2 * hd);
    sc.head(hd) = state_;
    sc.tail(hd) = enc_.states() * alpha;
    const VectorXd o = (L.view(p, blocks_.comb) * sc + L.view(p, blocks_.comb_b).col(0)).array().tanh().matrix();
    VectorXd logits = L.view(p, Block::out_w) * o + L.view(p, Block::out_b).col(0);
    const double mx = logits.maxCoeff();
    const double lse = mx + std::log((logits.array() - mx).exp().sum());
    return (logits.array() - lse).matrix();
  }

 private:
  const DualDecoderModel& m_;
  const Encoded& enc_;
  DecoderBlocks blocks_;
  VectorXd state_;
  MatrixXd keys_;
};

void check_source(std::span<const int> source) {
  if (source.empty()) fail(ErrorCode::invalid_argument, "source sentence is empty");
}

}  // namespace

std::string_view direction_name(TranslationDirection d) {
  switch (d) {
    case TranslationDirection::s2s: return "s2s";
    case TranslationDirection::c2c: return "c2c";
    case TranslationDirection::s2c: return "s2c";
    case TranslationDirection::c2s: return "c2s";
  }
  return "s2s";
}

Side target_side(TranslationDirection d) {
  return (d == TranslationDirection::s2s || d == TranslationDirection::c2s) ? Side::simple : Side::complex;
}

Side source_side(TranslationDirection d) {
  return (d == TranslationDirection::s2s || d == TranslationDirection::s2c) ? Side::simple : Side::complex;
}

ModelVocabulary::ModelVocabulary(std::vector<Token> words) : words_(std::move(words)) {
  for (std::size_t i = 0; i < words_.size(); ++i) {
    if (!ids_.emplace(words_[i], static_cast<int>(i) + 1).second) {
      fail(ErrorCode::invalid_argument, "duplicate vocabulary entry " + words_[i]);
    }
  }
}

ModelVocabulary ModelVocabulary::from_corpora(std::span<const Corpus> corpora) {
  std::set<Token> types;
  for (const auto& c : corpora) {
    for (const auto& s : c.sentences()) types.insert(s.begin(), s.end());
  }
  return ModelVocabulary(std::vector<Token>(types.begin(), types.end()));
}

int ModelVocabulary::id(std::string_view token) const {
  auto it = ids_.find(token);
  if (it == ids_.end()) fail(ErrorCode::unknown_token, "token '" + std::string(token) + "' is not in the vocabulary");
  return it->second;
}

const Token& ModelVocabulary::word(int id) const {
  if (id < 1 || static_cast<std::size_t>(id) > words_.size()) {
    fail(ErrorCode::invalid_argument, "no word for id " + std::to_string(id));
  }
  return words_[static_cast<std::size_t>(id) - 1];
}

std::vector<int> ModelVocabulary::encode(const Sentence& s) const {
  std::vector<int> ids;
  ids.reserve(s.size());
  for (const auto& t : s) ids.push_back(id(t));
  return ids;
}

Sentence ModelVocabulary::decode(std::span<const int> ids) const {
  std::vector<Token> tokens;
  tokens.reserve(ids.size());
  for (int i : ids) tokens.push_back(word(i));
  return Sentence(std::move(tokens));
}

std::uint64_t ModelVocabulary::hash() const {
  std::uint64_t h = detail::fnv1a("btsimp-vocab");
  for (const auto& w : words_) {
    h = detail::fnv1a(w, h);
    h = detail::fnv1a("\n", h);
  }
  return h;
}

ParamLayout::ParamLayout(std::size_t vocab, const ModelShape& shape) {
  const std::size_t e = shape.embed_dim;
  const std::size_t h = shape.hidden_dim;
  blocks_.resize(static_cast<std::size_t>(Block::count));
  auto set = [&](Block b, std::string name, std::size_t rows, std::size_t cols, double bound) {
    blocks_[static_cast<std::size_t>(b)] = {std::move(name), 0, rows, cols, bound};
  };
  auto fan = [](std::size_t n) { return 1.0 / std::sqrt(static_cast<double>(n)); };
  set(Block::embedding, "embedding", e, vocab + 1, 0.1);
  set(Block::enc_wx, "encoder.wx", 3 * h, e, fan(e));
  set(Block::enc_uzr, "encoder.uzr", 2 * h, h, fan(h));
  set(Block::enc_un, "encoder.un", h, h, fan(h));
  set(Block::enc_b, "encoder.b", 3 * h, 1, 0.0);
  set(Block::out_w, "output.w", vocab, h, fan(h));
  set(Block::out_b, "output.b", vocab, 1, 0.0);
  for (Side side : {Side::simple, Side::complex}) {
    const std::string prefix = side == Side::simple ? "decoder_s." : "decoder_c.";
    auto d = [side](Block b) { return ParamLayout::decoder_block(b, side); };
    set(d(Block::dec_s_wx), prefix + "wx", 3 * h, e, fan(e));
    set(d(Block::dec_s_uzr), prefix + "uzr", 2 * h, h, fan(h));
    set(d(Block::dec_s_un), prefix + "un", h, h, fan(h));
    set(d(Block::dec_s_b), prefix + "b", 3 * h, 1, 0.0);
    set(d(Block::dec_s_att), prefix + "att", h, h, fan(h));
    set(d(Block::dec_s_comb), prefix + "comb", h, 2 * h, fan(2 * h));
    set(d(Block::dec_s_comb_b), prefix + "comb_b", h, 1, 0.0);
    set(d(Block::dec_s_init), prefix + "init", h, h, fan(h));
    set(d(Block::dec_s_init_b), prefix + "init_b", h, 1, 0.0);
  }
  for (auto& b : blocks_) {
    b.offset = total_;
    total_ += b.size();
  }
}

DualDecoderModel init_model(const ModelVocabulary& vocab, const ModelShape& shape, std::uint64_t seed) {
  if (shape.hidden_dim < 4) fail(ErrorCode::config, "hidden dimension must be at least 4");
  if (shape.embed_dim < 1) fail(ErrorCode::config, "embedding dimension must be positive");
  if (vocab.words().empty()) fail(ErrorCode::config, "model vocabulary is empty");
  DualDecoderModel m;
  m.vocab = vocab;
  m.shape = shape;
  m.layout = ParamLayout(vocab.size(), shape);
  m.params = VectorXd::Zero(static_cast<Index>(m.layout.total()));
  RandomSource rng = make_rng(seed, stream_id(StreamKind::init));
  for (const auto& b : m.layout.blocks()) {
    if (b.init_bound == 0.0) continue;
    for (std::size_t i = 0; i < b.size(); ++i) {
      m.params(static_cast<Index>(b.offset + i)) = rng.uniform(-b.init_bound, b.init_bound);
    }
  }
  return m;
}

double DecodeOutput::total_logprob() const {
  double s = 0.0;
  for (double lp : token_logprobs) s += lp;
  return s;
}

double accumulate_sequence_gradient(const DualDecoderModel& m, std::span<const int> source,
                                    std::span<const int> target, bool append_eos, Side side, double scale,
                                    Eigen::VectorXd& grad) {
  check_source(source);
  const auto& L = m.layout;
  const auto& p = m.params;
  const Index hd = static_cast<Index>(m.shape.hidden_dim);
  const DecoderBlocks db = decoder_blocks(side);

  // Decoder inputs are <s> followed by the target; outputs are the target
  // followed by </s> when requested.
  std::vector<int> inputs{m.vocab.bos()};
  inputs.insert(inputs.end(), target.begin(), target.end());
  std::vector<int> outputs(target.begin(), target.end());
  if (append_eos) {
    outputs.push_back(ModelVocabulary::kEos);
  } else {
    inputs.pop_back();
  }
  const Index steps = static_cast<Index>(outputs.size());
  if (steps == 0) return 0.0;

  // Forward.
  const Encoded enc = encode(m, source);
  const MatrixXd& hs = enc.states();
  const Index src_len = hs.cols();
  const VectorXd h_last = hs.col(src_len - 1);
  const VectorXd s0 = (L.view(p, db.init) * h_last + L.view(p, db.init_b).col(0)).array().tanh().matrix();
  const MatrixXd keys = L.view(p, db.att) * hs;

  const MatrixXd x_in = gather_columns(L.view(p, Block::embedding), inputs);
  MatrixXd pre = L.view(p, db.wx) * x_in;
  pre.colwise() += L.view(p, db.b).col(0);
  GruCache dec;
  gru_forward(pre, L.view(p, db.uzr), L.view(p, db.un), s0, dec);
  const MatrixXd& states = dec.h;

  MatrixXd alpha(src_len, steps);
  for (Index t = 0; t < steps; ++t) alpha.col(t) = softmax(keys.transpose() * states.col(t));
  MatrixXd sc(2 * hd, steps);
  sc.topRows(hd) = states;
  sc.bottomRows(hd) = hs * alpha;
  MatrixXd o = L.view(p, db.comb) * sc;
  o.colwise() += L.view(p, db.comb_b).col(0);
  o = o.array().tanh().matrix();
  MatrixXd logits = L.view(p, Block::out_w) * o;
  logits.colwise() += L.view(p, Block::out_b).col(0);
  const MatrixXd logp = log_softmax_cols(logits);

  double nll = 0.0;
  for (Index t = 0; t < steps; ++t) nll -= logp(outputs[static_cast<std::size_t>(t)], t);
  if (scale == 0.0) return nll;

  // Backward.
  MatrixXd dlogits = logp.array().exp().matrix();
  for (Index t = 0; t < steps; ++t) dlogits(outputs[static_cast<std::size_t>(t)], t) -= 1.0;
  dlogits *= scale;

  L.view(grad, Block::out_w).noalias() += dlogits * o.transpose();
  L.view(grad, Block::out_b).col(0) += dlogits.rowwise().sum();
  const MatrixXd dpre_o = ((L.view(p, Block::out_w).transpose() * dlogits).array() * (1.0 - o.array().square())).matrix();
  L.view(grad, db.comb).noalias() += dpre_o * sc.transpose();
  L.view(grad, db.comb_b).col(0) += dpre_o.rowwise().sum();
  const MatrixXd dsc = L.view(p, db.comb).transpose() * dpre_o;

  MatrixXd dstates = dsc.topRows(hd);
  const MatrixXd dctx = dsc.bottomRows(hd);
  MatrixXd dhs = dctx * alpha.transpose();
  const MatrixXd dalpha = hs.transpose() * dctx;
  MatrixXd dscores(src_len, steps);
  for (Index t = 0; t < steps; ++t) {
    const double inner = alpha.col(t).dot(dalpha.col(t));
    dscores.col(t) = (alpha.col(t).array() * (dalpha.col(t).array() - inner)).matrix();
  }
  dstates.noalias() += keys * dscores;
  const MatrixXd dkeys = states * dscores.transpose();
  L.view(grad, db.att).noalias() += dkeys * hs.transpose();
  dhs.noalias() += L.view(p, db.att).transpose() * dkeys;

  MatrixXd dpre_dec;
  const VectorXd ds0 = gru_backward(dec, L.view(p, db.uzr), L.view(p, db.un), dstates, dpre_dec,
                                    L.view(grad, db.uzr), L.view(grad, db.un));
  L.view(grad, db.wx).noalias() += dpre_dec * x_in.transpose();
  L.view(grad, db.b).col(0) += dpre_dec.rowwise().sum();
  scatter_columns(L.view(grad, Block::embedding), inputs, L.view(p, db.wx).transpose() * dpre_dec);

  const VectorXd dinit = (ds0.array() * (1.0 - s0.array().square())).matrix();
  L.view(grad, db.init).noalias() += dinit * h_last.transpose();
  L.view(grad, db.init_b).col(0) += dinit;
  dhs.col(src_len - 1) += L.view(p, db.init).transpose() * dinit;

  MatrixXd dpre_enc;
  gru_backward(enc.gru, L.view(p, Block::enc_uzr), L.view(p, Block::enc_un), dhs, dpre_enc,
               L.view(grad, Block::enc_uzr), L.view(grad, Block::enc_un));
  L.view(grad, Block::enc_wx).noalias() += dpre_enc * enc.x.transpose();
  L.view(grad, Block::enc_b).col(0) += dpre_enc.rowwise().sum();
  scatter_columns(L.view(grad, Block::embedding), source, L.view(p, Block::enc_wx).transpose() * dpre_enc);
  return nll;
}

NllResult nll_and_grad(const DualDecoderModel& model, const Sentence& source, const Sentence& target,
                       TranslationDirection direction) {
  if (target.empty()) fail(ErrorCode::invalid_argument, "target sentence is empty");
  const auto src = model.vocab.encode(source);
  const auto tgt = model.vocab.encode(target);
  NllResult r;
  r.gradient = VectorXd::Zero(model.params.size());
  const double steps = static_cast<double>(tgt.size() + 1);
  r.loss = accumulate_sequence_gradient(model, src, tgt, true, target_side(direction), 1.0 / steps, r.gradient) / steps;
  return r;
}

double sequence_log_prob(const DualDecoderModel& model, const Sentence& source, const Sentence& target,
                         TranslationDirection direction, bool append_eos) {
  const auto src = model.vocab.encode(source);
  const auto tgt = model.vocab.encode(target);
  VectorXd unused;
  return -accumulate_sequence_gradient(model, src, tgt, append_eos, target_side(direction), 0.0, unused);
}

Eigen::MatrixXd step_distributions(const DualDecoderModel& model, const Sentence& source, const Sentence& target,
                                   TranslationDirection direction) {
  const auto src = model.vocab.encode(source);
  check_source(src);
  const auto tgt = model.vocab.encode(target);
  const Encoded enc = encode(model, src);
  StepDecoder dec(model, enc, target_side(direction));
  MatrixXd out(static_cast<Index>(model.vocab.size()), static_cast<Index>(tgt.size() + 1));
  int input = model.vocab.bos();
  for (std::size_t t = 0; t <= tgt.size(); ++t) {
    out.col(static_cast<Index>(t)) = dec.step(input).array().exp().matrix();
    if (t < tgt.size()) input = tgt[t];
  }
  return out;
}

namespace {

template <class Choose>
DecodeOutput run_decoder(const DualDecoderModel& model, const Sentence& source, TranslationDirection direction,
                         std::size_t max_len, std::size_t min_len, Choose choose) {
  if (max_len < 1) fail(ErrorCode::invalid_argument, "max_len must be at least 1");
  const auto src = model.vocab.encode(source);
  check_source(src);
  const Encoded enc = encode(model, src);
  StepDecoder dec(model, enc, target_side(direction));
  DecodeOutput out;
  std::vector<int> ids;
  int input = model.vocab.bos();
  while (true) {
    const VectorXd logp = dec.step(input);
    if (!logp.allFinite()) fail(ErrorCode::numeric, "non-finite output distribution while decoding");
    int next;
    if (ids.size() < min_len) {
      VectorXd masked = logp;
      masked(ModelVocabulary::kEos) = -std::numeric_limits<double>::infinity();
      next = choose(masked);
    } else {
      next = choose(logp);
    }
    out.token_logprobs.push_back(logp(next));
    if (next == ModelVocabulary::kEos) {
      out.ended = true;
      break;
    }
    ids.push_back(next);
    if (ids.size() >= max_len) break;
    input = next;
  }
  out.tokens = model.vocab.decode(ids);
  return out;
}

}  // namespace

DecodeOutput decode_greedy(const DualDecoderModel& model, const Sentence& source, TranslationDirection direction,
                           std::size_t max_len, std::size_t min_len) {
  return run_decoder(model, source, direction, max_len, std::min(min_len, max_len), [](const VectorXd& logp) {
    int best = 0;
    for (Index i = 1; i < logp.size(); ++i) {
      if (logp(i) > logp(best)) best = static_cast<int>(i);
    }
    return best;
  });
}

DecodeOutput decode_sample(const DualDecoderModel& model, const Sentence& source, TranslationDirection direction,
                           RandomSource& rng, std::size_t max_len) {
  return run_decoder(model, source, direction, max_len, 0, [&rng](const VectorXd& logp) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    int last_positive = 0;
    for (Index i = 0; i < logp.size(); ++i) {
      const double p = std::exp(logp(i));
      if (p <= 0.0) continue;
      last_positive = static_cast<int>(i);
      cumulative += p;
      if (u < cumulative) return static_cast<int>(i);
    }
    return last_positive;
  });
}

Eigen::VectorXd pg_grad(const DualDecoderModel& model, const Sentence& source, const DecodeOutput& sample,
                        double advantage, TranslationDirection direction) {
  VectorXd grad = VectorXd::Zero(model.params.size());
  if (advantage == 0.0) return grad;
  const auto src = model.vocab.encode(source);
  const auto tgt = model.vocab.encode(sample.tokens);
  accumulate_sequence_gradient(model, src, tgt, sample.ended, target_side(direction), advantage, grad);
  return grad;
}

AdamState AdamState::for_model(const DualDecoderModel& model) {
  AdamState s;
  s.m = VectorXd::Zero(model.params.size());
  s.v = VectorXd::Zero(model.params.size());
  return s;
}

void adam_step(DualDecoderModel& model, const Eigen::VectorXd& g, AdamState& state, double lr) {
  if (g.size() != model.params.size() || state.m.size() != g.size() || state.v.size() != g.size()) {
    fail(ErrorCode::shape, "gradient and optimizer state must match the parameter vector");
  }
  if (!g.allFinite()) fail(ErrorCode::numeric, "non-finite gradient");
  ++state.step;
  const double b1 = AdamState::kBeta1;
  const double b2 = AdamState::kBeta2;
  state.m = b1 * state.m + (1.0 - b1) * g;
  state.v = b2 * state.v + (1.0 - b2) * g.cwiseProduct(g);
  const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.step));
  const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.step));
  model.params.array() -= lr * (state.m.array() / c1) / ((state.v.array() / c2).sqrt() + AdamState::kEpsilon);
}

}  // namespace btsimp
