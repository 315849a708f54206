// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// BM25 over training contexts. A document is the concatenation of every
// context turn; the query is the last turn of the query context.

#pragma once

#include <cstddef>
#include <filesystem>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "ewae/corpus.hpp"

namespace ewae {

struct Bm25Params {
  double k1 = 1.2;
  double b = 0.75;
};

struct Exemplar {
  std::size_t doc = 0;  // position in the index
  PairId pair_id = 0;
  double score = 0.0;
};

struct ExemplarSet {
  PairId query_pair_id = -1;
  std::vector<Exemplar> exemplars;  // descending score, ties by pair_id
  bool padded = false;              // true if the top hit was repeated to reach k
};

class Bm25Index {
 public:
  static constexpr int kFormatVersion = 1;

  static Bm25Index build(std::vector<ContextResponsePair> pairs, Bm25Params params = {});

  // Lucene-style smoothed idf: ln((N - df + 0.5) / (df + 0.5) + 1), never negative.
  double idf(const std::string& term) const;
  double score(std::span<const std::string> query, std::size_t doc) const;
  // Score of every document for the query (zero where nothing matches).
  std::vector<double> score_all(std::span<const std::string> query) const;

  ExemplarSet retrieve(const ContextResponsePair& query, std::size_t k,
                       bool exclude_self) const;

  std::size_t size() const { return pairs_.size(); }
  const ContextResponsePair& pair(std::size_t doc) const { return pairs_.at(doc); }
  const std::vector<ContextResponsePair>& pairs() const { return pairs_; }
  double avg_doc_length() const { return avgdl_; }
  std::size_t doc_length(std::size_t doc) const { return doc_len_.at(doc); }
  const Bm25Params& params() const { return params_; }
  // Returns the document holding pair_id, or size() when absent.
  std::size_t find(PairId pair_id) const;

  void save(const std::filesystem::path& path) const;
  static Bm25Index load(const std::filesystem::path& path);

 private:
  struct Posting {
    std::size_t doc;
    std::size_t tf;
  };

  std::vector<ContextResponsePair> pairs_;
  std::vector<std::size_t> doc_len_;
  std::unordered_map<std::string, std::vector<Posting>> postings_;
  std::unordered_map<PairId, std::size_t> by_id_;
  double avgdl_ = 0.0;
  Bm25Params params_;
};

// Terms of the indexed document for a context: all turns, oldest first.
std::vector<std::string> document_terms(const ContextResponsePair& p);
// Query terms: the last context turn.
std::vector<std::string> query_terms(const ContextResponsePair& p);

}  // namespace ewae
