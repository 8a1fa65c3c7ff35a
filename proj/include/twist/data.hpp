// Copyright 2026 The twist Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "twist/model.hpp"

namespace twist {

enum class Tokenizer { chars, bytes };

Tokenizer parse_tokenizer(const std::string& s);

/// Tokenized text with a fixed 98/1/1 contiguous train/valid/test split.
/// Character vocabularies come from the train split only; symbols first seen
/// in valid/test map to a trailing <unk> id.
struct Corpus {
  Tokenizer tokenizer = Tokenizer::chars;
  std::vector<unsigned char> symbols;  // id -> byte (chars mode)
  bool has_unk = false;
  std::vector<std::int32_t> train;
  std::vector<std::int32_t> valid;
  std::vector<std::int32_t> test;

  int vocab_size() const;
  std::vector<std::int32_t> encode(std::string_view text) const;
  std::string decode(const std::vector<std::int32_t>& ids) const;
};

Corpus build_corpus(std::string_view text, Tokenizer tokenizer, int max_vocab = 256);
/// Throws Errc::io for a missing file and Errc::invalid_input for an empty one.
Corpus load_corpus(const std::string& path, Tokenizer tokenizer, int max_vocab = 256);

/// Start offsets of seq+1-token windows stepping by seq, so every token after
/// the first is a target exactly once.
std::vector<std::int64_t> window_starts(std::size_t n_tokens, int seq);

TokenBatch make_batch(const std::vector<std::int32_t>& tokens, const std::vector<std::int64_t>& starts,
                      int seq);

}  // namespace twist
