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

#include <fstream>

#include "binary_io.hpp"
#include "btsimp/error.hpp"
#include "btsimp/seqmodel.hpp"

// Checkpoint layout (all integers and doubles little-endian):
//   magic "BTSCKPT\0" | u32 version | u64 payload size | payload | u64 FNV-1a(payload)
// payload:
//   u32 embed_dim | u32 hidden_dim | u32 word count | words (u32 length + bytes)
//   u64 vocabulary hash | u64 parameter count | parameters (f64)
//   u64 adam step | adam m (f64) | adam v (f64) | u64 epoch | u64 global step

namespace btsimp {

namespace {

constexpr char kMagic[8] = {'B', 'T', 'S', 'C', 'K', 'P', 'T', '\0'};

}  // namespace

void save_checkpoint(const DualDecoderModel& model, const AdamState& adam, const std::filesystem::path& path,
                     const TrainingProgress& progress) {
  detail::ByteWriter payload;
  payload.put<std::uint32_t>(static_cast<std::uint32_t>(model.shape.embed_dim));
  payload.put<std::uint32_t>(static_cast<std::uint32_t>(model.shape.hidden_dim));
  payload.put<std::uint32_t>(static_cast<std::uint32_t>(model.vocab.words().size()));
  for (const auto& w : model.vocab.words()) payload.put_string(w);
  payload.put<std::uint64_t>(model.vocab.hash());
  payload.put<std::uint64_t>(model.param_count());
  payload.put_doubles(model.params.data(), model.param_count());
  const bool has_adam = adam.m.size() == model.params.size();
  payload.put<std::uint64_t>(adam.step);
  for (int which = 0; which < 2; ++which) {
    const Eigen::VectorXd& vec = which == 0 ? adam.m : adam.v;
    for (std::size_t i = 0; i < model.param_count(); ++i) {
      payload.put<double>(has_adam ? vec(static_cast<Eigen::Index>(i)) : 0.0);
    }
  }
  payload.put<std::uint64_t>(progress.epoch);
  payload.put<std::uint64_t>(progress.global_step);

  detail::ByteWriter file;
  file.put_raw(std::string_view(kMagic, sizeof(kMagic)));
  file.put<std::uint32_t>(kCheckpointVersion);
  file.put<std::uint64_t>(payload.bytes().size());
  file.put_raw(payload.bytes());
  file.put<std::uint64_t>(detail::fnv1a(payload.bytes()));

  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) fail(ErrorCode::checkpoint, "cannot write checkpoint " + path.string());
  out.write(file.bytes().data(), static_cast<std::streamsize>(file.bytes().size()));
  if (!out) fail(ErrorCode::checkpoint, "write failed for checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::string bytes;
  try {
    bytes = read_file(path);
  } catch (const Error& e) {
    fail(ErrorCode::checkpoint, std::string("cannot read checkpoint: ") + e.what());
  }
  const std::string what = "checkpoint " + path.string();
  detail::ByteReader header(bytes, ErrorCode::checkpoint, what);
  if (header.get_raw(sizeof(kMagic)) != std::string_view(kMagic, sizeof(kMagic))) header.corrupt("bad magic");
  const auto version = header.get<std::uint32_t>();
  if (version != kCheckpointVersion) {
    header.corrupt("format version " + std::to_string(version) + ", expected " + std::to_string(kCheckpointVersion));
  }
  const auto payload_size = header.get<std::uint64_t>();
  if (payload_size + sizeof(std::uint64_t) != header.remaining()) header.corrupt("size mismatch (truncated?)");
  const std::string_view payload_bytes = header.get_raw(payload_size);
  if (header.get<std::uint64_t>() != detail::fnv1a(payload_bytes)) header.corrupt("checksum mismatch");

  detail::ByteReader in(payload_bytes, ErrorCode::checkpoint, what);
  ModelShape shape;
  shape.embed_dim = in.get<std::uint32_t>();
  shape.hidden_dim = in.get<std::uint32_t>();
  const auto n_words = in.get<std::uint32_t>();
  std::vector<Token> words;
  words.reserve(n_words);
  for (std::uint32_t i = 0; i < n_words; ++i) words.push_back(in.get_string());

  Checkpoint ck;
  try {
    ck.model.vocab = ModelVocabulary(std::move(words));
  } catch (const Error& e) {
    in.corrupt(e.what());
  }
  if (in.get<std::uint64_t>() != ck.model.vocab.hash()) in.corrupt("vocabulary hash mismatch");
  ck.model.shape = shape;
  ck.model.layout = ParamLayout(ck.model.vocab.size(), shape);
  const auto n_params = in.get<std::uint64_t>();
  if (n_params != ck.model.layout.total()) in.corrupt("parameter count does not match the stored shape");
  ck.model.params.resize(static_cast<Eigen::Index>(n_params));
  in.get_doubles(ck.model.params.data(), n_params);
  ck.adam.step = in.get<std::uint64_t>();
  ck.adam.m.resize(static_cast<Eigen::Index>(n_params));
  ck.adam.v.resize(static_cast<Eigen::Index>(n_params));
  in.get_doubles(ck.adam.m.data(), n_params);
  in.get_doubles(ck.adam.v.data(), n_params);
  ck.progress.epoch = in.get<std::uint64_t>();
  ck.progress.global_step = in.get<std::uint64_t>();
  if (in.remaining() != 0) in.corrupt("trailing bytes in payload");
  return ck;
}

}  // namespace btsimp
