// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#include "twist/data.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <iterator>

#include "twist/errors.hpp"

namespace twist {

Tokenizer parse_tokenizer(const std::string& s) {
  if (s == "chars" || s == "char") return Tokenizer::chars;
  if (s == "bytes" || s == "byte") return Tokenizer::bytes;
  throw Error(Errc::invalid_input, "unknown tokenizer '" + s + "' (chars|bytes)");
}

int Corpus::vocab_size() const {
  if (tokenizer == Tokenizer::bytes) return 256;
  return static_cast<int>(symbols.size()) + (has_unk ? 1 : 0);
}

std::vector<std::int32_t> Corpus::encode(std::string_view text) const {
  std::vector<std::int32_t> out;
  out.reserve(text.size());
  if (tokenizer == Tokenizer::bytes) {
    for (char c : text) out.push_back(static_cast<unsigned char>(c));
    return out;
  }
  std::array<std::int32_t, 256> lut;
  lut.fill(-1);
  for (std::size_t i = 0; i < symbols.size(); ++i) lut[symbols[i]] = static_cast<std::int32_t>(i);
  const auto unk = static_cast<std::int32_t>(symbols.size());
  for (char c : text) {
    std::int32_t id = lut[static_cast<unsigned char>(c)];
    if (id < 0) {
      if (!has_unk)
        throw Error(Errc::invalid_input, "character code " + std::to_string(static_cast<unsigned char>(c)) +
                                             " not in vocabulary");
      id = unk;
    }
    out.push_back(id);
  }
  return out;
}

std::string Corpus::decode(const std::vector<std::int32_t>& ids) const {
  std::string out;
  out.reserve(ids.size());
  for (auto id : ids) {
    if (tokenizer == Tokenizer::bytes)
      out.push_back(static_cast<char>(id));
    else if (id >= 0 && static_cast<std::size_t>(id) < symbols.size())
      out.push_back(static_cast<char>(symbols[static_cast<std::size_t>(id)]));
    else
      out.push_back('?');
  }
  return out;
}

Corpus build_corpus(std::string_view text, Tokenizer tokenizer, int max_vocab) {
  if (text.empty()) throw Error(Errc::invalid_input, "empty corpus");
  const std::size_t n = text.size();
  const std::size_t n_train = n * 98 / 100;
  const std::size_t n_valid = n / 100;
  const auto train_text = text.substr(0, n_train);
  const auto valid_text = text.substr(n_train, n_valid);
  const auto test_text = text.substr(n_train + n_valid);

  Corpus c;
  c.tokenizer = tokenizer;
  if (tokenizer == Tokenizer::chars) {
    std::array<bool, 256> seen{};
    for (char ch : train_text) seen[static_cast<unsigned char>(ch)] = true;
    for (int b = 0; b < 256; ++b)
      if (seen[static_cast<std::size_t>(b)]) c.symbols.push_back(static_cast<unsigned char>(b));
    for (auto part : {valid_text, test_text})
      for (char ch : part)
        if (!seen[static_cast<unsigned char>(ch)]) c.has_unk = true;
  }
  if (c.vocab_size() > max_vocab)
    throw Error(Errc::invalid_input, "vocab overflow: " + std::to_string(c.vocab_size()) + " symbols exceed limit " +
                                         std::to_string(max_vocab));
  c.train = c.encode(train_text);
  c.valid = c.encode(valid_text);
  c.test = c.encode(test_text);
  return c;
}

Corpus load_corpus(const std::string& path, Tokenizer tokenizer, int max_vocab) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::io, "dataset not found: '" + path + "'");
  std::string text((std::istreambuf_iterator<char>(f)), std::istreambuf_iterator<char>());
  if (text.empty()) throw Error(Errc::invalid_input, "dataset '" + path + "' is empty");
  return build_corpus(text, tokenizer, max_vocab);
}

std::vector<std::int64_t> window_starts(std::size_t n_tokens, int seq) {
  if (seq < 1) throw Error(Errc::invalid_input, "sequence length must be >= 1");
  std::vector<std::int64_t> out;
  const auto w = static_cast<std::size_t>(seq);
  for (std::size_t s = 0; s + w + 1 <= n_tokens; s += w) out.push_back(static_cast<std::int64_t>(s));
  return out;
}

TokenBatch make_batch(const std::vector<std::int32_t>& tokens, const std::vector<std::int64_t>& starts, int seq) {
  TokenBatch b;
  b.batch = static_cast<int>(starts.size());
  b.seq = seq;
  b.inputs.reserve(starts.size() * static_cast<std::size_t>(seq));
  b.targets.reserve(starts.size() * static_cast<std::size_t>(seq));
  for (auto s : starts) {
    if (s < 0 || static_cast<std::size_t>(s) + static_cast<std::size_t>(seq) + 1 > tokens.size())
      throw Error(Errc::invalid_input, "window at " + std::to_string(s) + " runs past the token stream");
    b.inputs.insert(b.inputs.end(), tokens.begin() + s, tokens.begin() + s + seq);
    b.targets.insert(b.targets.end(), tokens.begin() + s + 1, tokens.begin() + s + seq + 1);
  }
  return b;
}

}  // namespace twist
