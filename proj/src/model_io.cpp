/*
 * Copyright 2026 gmsg authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *     http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <limits>
#include <vector>

#include "gmsg/errors.hpp"
#include "gmsg/model.hpp"

namespace gmsg {

namespace {

constexpr char kMagic[4] = {'G', 'M', 'S', 'G'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little,
              "model files are little-endian; byte swapping is not implemented");

class Writer {
 public:
  explicit Writer(const std::string& path) : out_(path, std::ios::binary) {
    if (!out_) throw IoError("cannot open model file for writing: " + path);
    path_ = path;
  }

  template <typename T>
  void put(T value) {
    static_assert(std::is_trivially_copyable_v<T>);
    out_.write(reinterpret_cast<const char*>(&value), sizeof(T));
  }

  void put_bytes(const void* data, std::size_t n) {
    out_.write(static_cast<const char*>(data), static_cast<std::streamsize>(n));
  }

  void finish() {
    out_.flush();
    if (!out_) throw IoError("write failure on model file: " + path_);
  }

 private:
  std::ofstream out_;
  std::string path_;
};

class Reader {
 public:
  explicit Reader(const std::string& path) : in_(path, std::ios::binary) {
    if (!in_) throw IoError("cannot open model file: " + path);
  }

  template <typename T>
  T get() {
    static_assert(std::is_trivially_copyable_v<T>);
    T value;
    in_.read(reinterpret_cast<char*>(&value), sizeof(T));
    if (!in_) throw FormatError("truncated model file");
    return value;
  }

  void get_bytes(void* data, std::size_t n) {
    in_.read(static_cast<char*>(data), static_cast<std::streamsize>(n));
    if (!in_) throw FormatError("truncated model file");
  }

  bool at_eof() {
    in_.peek();
    return in_.eof();
  }

 private:
  std::ifstream in_;
};

void write_table(Writer& w, const std::vector<WordMixture>& table, std::uint32_t d) {
  for (const WordMixture& row : table) {
    const std::size_t k = row.components();
    if (k > std::numeric_limits<std::uint16_t>::max()) {
      throw FormatError("component count exceeds the u16 file field");
    }
    w.put<std::uint16_t>(static_cast<std::uint16_t>(k));
    for (double weight : row.weights) w.put<double>(weight);
    for (std::size_t i = 0; i < k * d; ++i) w.put<float>(static_cast<float>(row.mu[i]));
    for (std::size_t i = 0; i < k * d; ++i) w.put<float>(static_cast<float>(row.var[i]));
  }
}

void read_table(Reader& r, std::vector<WordMixture>& table, std::uint32_t vocab_size,
                std::uint32_t d) {
  table.resize(vocab_size);
  for (WordMixture& row : table) {
    const auto k = r.get<std::uint16_t>();
    if (k == 0) throw FormatError("model row with zero components");
    row.weights.resize(k);
    row.mu.resize(static_cast<std::size_t>(k) * d);
    row.var.resize(static_cast<std::size_t>(k) * d);
    for (double& weight : row.weights) weight = r.get<double>();
    for (double& m : row.mu) m = static_cast<double>(r.get<float>());
    for (double& v : row.var) v = static_cast<double>(r.get<float>());
  }
}

}  // namespace

void save_model(const std::string& path, const ModelParams& params,
                const Vocabulary& vocab) {
  if (vocab.size() != params.vocab_size()) {
    throw FormatError("model/vocabulary size mismatch on save");
  }
  Writer w(path);
  w.put_bytes(kMagic, sizeof(kMagic));
  w.put<std::uint32_t>(kVersion);
  w.put<std::uint32_t>(static_cast<std::uint32_t>(vocab.size()));
  w.put<std::uint32_t>(params.d);
  w.put<std::uint8_t>(static_cast<std::uint8_t>(params.mode));
  write_table(w, params.word_table, params.d);
  write_table(w, params.context_table, params.d);
  for (std::size_t i = 0; i < vocab.size(); ++i) {
    const std::string& token = vocab.token(static_cast<WordId>(i));
    w.put<std::uint32_t>(static_cast<std::uint32_t>(token.size()));
    w.put_bytes(token.data(), token.size());
    w.put<std::uint64_t>(vocab.count(static_cast<WordId>(i)));
  }
  w.finish();
}

LoadedModel load_model(const std::string& path) {
  Reader r(path);
  char magic[4];
  r.get_bytes(magic, sizeof(magic));
  if (std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw FormatError("not a model file (bad magic): " + path);
  }
  const auto version = r.get<std::uint32_t>();
  if (version != kVersion) {
    throw FormatError("unsupported model version " + std::to_string(version));
  }
  const auto vocab_size = r.get<std::uint32_t>();
  const auto d = r.get<std::uint32_t>();
  if (vocab_size == 0 || d == 0) throw FormatError("model header with empty dimensions");
  const auto mode_byte = r.get<std::uint8_t>();
  if (mode_byte > static_cast<std::uint8_t>(Mode::Dgmsg)) {
    throw FormatError("unknown model mode byte " + std::to_string(mode_byte));
  }

  LoadedModel loaded;
  loaded.params.d = d;
  loaded.params.mode = static_cast<Mode>(mode_byte);
  read_table(r, loaded.params.word_table, vocab_size, d);
  read_table(r, loaded.params.context_table, vocab_size, d);

  std::vector<std::string> tokens;
  std::vector<std::uint64_t> counts;
  tokens.reserve(vocab_size);
  counts.reserve(vocab_size);
  for (std::uint32_t i = 0; i < vocab_size; ++i) {
    const auto len = r.get<std::uint32_t>();
    std::string token(len, '\0');
    r.get_bytes(token.data(), len);
    tokens.push_back(std::move(token));
    counts.push_back(r.get<std::uint64_t>());
  }
  loaded.vocab = Vocabulary(std::move(tokens), std::move(counts));
  if (!r.at_eof()) throw FormatError("trailing bytes after model payload");
  return loaded;
}

}  // namespace gmsg
