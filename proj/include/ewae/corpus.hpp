// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Dialogue data model: utterances, context/response pairs, the vocabulary,
// JSONL ingestion and the synthetic multimodal task used for desk-scale runs.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace ewae {

using TokenId = std::uint32_t;
using PairId = std::int64_t;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kUnk = 1;
inline constexpr TokenId kBos = 2;
inline constexpr TokenId kEos = 3;
inline constexpr std::size_t kNumReserved = 4;

struct Utterance {
  std::string raw_text;
  std::vector<std::string> words;  // normalized tokens of raw_text
  std::vector<TokenId> tokens;     // filled by Vocabulary::index
};

struct ContextResponsePair {
  PairId pair_id = 0;
  std::vector<Utterance> context;  // oldest turn first
  Utterance response;
  std::string context_id;  // optional grouping key (synthetic manifest)
};

// Lowercase, split on whitespace, detach ASCII punctuation. Apostrophes
// between letters stay attached ("don't").
std::vector<std::string> tokenize(std::string_view text);
std::string detokenize(std::span<const std::string> words);
Utterance make_utterance(std::string_view text);

struct CorpusLimits {
  std::size_t max_turns = 10;       // oldest turns dropped beyond this
  std::size_t max_utterance_len = 40;
};

class Vocabulary {
 public:
  Vocabulary();  // reserved tokens only

  TokenId id(std::string_view word) const;  // kUnk when absent
  const std::string& word(TokenId id) const;
  std::size_t size() const { return id_to_word_.size(); }
  bool contains(std::string_view word) const;

  std::vector<TokenId> encode(std::span<const std::string> words) const;
  std::vector<std::string> decode(std::span<const TokenId> ids,
                                  bool stop_at_eos = true) const;

  // Fills Utterance::tokens for every utterance and applies the limits.
  void index(std::vector<ContextResponsePair>& pairs,
             const CorpusLimits& limits = {}) const;

  void save(const std::filesystem::path& path) const;
  static Vocabulary load(const std::filesystem::path& path);

  std::size_t embedding_dim = 200;

 private:
  friend Vocabulary build_vocabulary(std::span<const ContextResponsePair>,
                                     std::size_t, std::size_t);
  void append(const std::string& word);

  std::unordered_map<std::string, TokenId> word_to_id_;
  std::vector<std::string> id_to_word_;
};

// Keeps words with count >= min_count, ordered by descending frequency then
// lexicographically, truncated so that size() <= max_size (reserved included).
Vocabulary build_vocabulary(std::span<const ContextResponsePair> pairs,
                            std::size_t min_count, std::size_t max_size);

// One JSON object per line: {"context": [..], "response": "..."} with
// optional "id" (integer) and "context_id" (string).
std::vector<ContextResponsePair> load_jsonl(const std::filesystem::path& path);
std::vector<ContextResponsePair> parse_jsonl(std::string_view text);
void save_jsonl(const std::filesystem::path& path,
                std::span<const ContextResponsePair> pairs);

// ---------------------------------------------------------------------------
// Synthetic multimodal task

struct SyntheticTaskSpec {
  std::size_t n_contexts = 100;
  std::size_t modes_per_context = 3;
  double noise_rate = 0.0;
  std::uint64_t seed = 1;
  std::size_t pairs_per_context = 10;  // split 8:1:1 per context
};

struct SyntheticCorpus {
  std::vector<ContextResponsePair> train, valid, test;
  // context_id -> the normalized response strings that count as gold modes
  std::map<std::string, std::vector<std::string>> manifest;
};

SyntheticCorpus generate_synthetic(const SyntheticTaskSpec& spec);

void save_manifest(const std::filesystem::path& path,
                   const std::map<std::string, std::vector<std::string>>& manifest);
std::map<std::string, std::vector<std::string>> load_manifest(
    const std::filesystem::path& path);

}  // namespace ewae
