// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/retrieval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <numeric>

#include "json.hpp"

#include "ewae/error.hpp"

namespace ewae {

using nlohmann::json;

std::vector<std::string> document_terms(const ContextResponsePair& p) {
  std::vector<std::string> terms;
  for (const auto& u : p.context) terms.insert(terms.end(), u.words.begin(), u.words.end());
  return terms;
}

std::vector<std::string> query_terms(const ContextResponsePair& p) {
  if (p.context.empty()) return {};
  return p.context.back().words;
}

Bm25Index Bm25Index::build(std::vector<ContextResponsePair> pairs, Bm25Params params) {
  if (pairs.empty()) throw DataError("cannot build a BM25 index over an empty corpus");
  if (!(params.k1 > 0.0)) throw ConfigError("bm25 k1 must be > 0");
  if (params.b < 0.0 || params.b > 1.0) throw ConfigError("bm25 b must lie in [0, 1]");

  Bm25Index idx;
  idx.params_ = params;
  idx.pairs_ = std::move(pairs);
  idx.doc_len_.reserve(idx.pairs_.size());
  double total = 0.0;
  for (std::size_t d = 0; d < idx.pairs_.size(); ++d) {
    const auto terms = document_terms(idx.pairs_[d]);
    idx.doc_len_.push_back(terms.size());
    total += static_cast<double>(terms.size());
    std::unordered_map<std::string, std::size_t> tf;
    for (const auto& t : terms) ++tf[t];
    for (auto& [term, n] : tf) idx.postings_[term].push_back({d, n});
    if (!idx.by_id_.emplace(idx.pairs_[d].pair_id, d).second)
      throw DataError("duplicate pair_id " + std::to_string(idx.pairs_[d].pair_id));
  }
  idx.avgdl_ = total / static_cast<double>(idx.pairs_.size());
  return idx;
}

double Bm25Index::idf(const std::string& term) const {
  const auto it = postings_.find(term);
  const double df = it == postings_.end() ? 0.0 : static_cast<double>(it->second.size());
  const double n = static_cast<double>(pairs_.size());
  return std::log((n - df + 0.5) / (df + 0.5) + 1.0);
}

std::vector<double> Bm25Index::score_all(std::span<const std::string> query) const {
  std::vector<double> scores(pairs_.size(), 0.0);
  const double k1 = params_.k1, b = params_.b;
  for (const auto& term : query) {
    const auto it = postings_.find(term);
    if (it == postings_.end()) continue;
    const double w = idf(term);
    for (const Posting& p : it->second) {
      const double tf = static_cast<double>(p.tf);
      const double norm = k1 * (1.0 - b + b * static_cast<double>(doc_len_[p.doc]) / avgdl_);
      scores[p.doc] += w * tf * (k1 + 1.0) / (tf + norm);
    }
  }
  return scores;
}

double Bm25Index::score(std::span<const std::string> query, std::size_t doc) const {
  return score_all(query).at(doc);
}

std::size_t Bm25Index::find(PairId pair_id) const {
  const auto it = by_id_.find(pair_id);
  return it == by_id_.end() ? pairs_.size() : it->second;
}

ExemplarSet Bm25Index::retrieve(const ContextResponsePair& query, std::size_t k,
                                bool exclude_self) const {
  if (k == 0) throw ConfigError("retrieve: k must be >= 1");
  const auto scores = score_all(query_terms(query));
  std::vector<std::size_t> order;
  order.reserve(pairs_.size());
  for (std::size_t d = 0; d < pairs_.size(); ++d) {
    if (exclude_self && pairs_[d].pair_id == query.pair_id) continue;
    order.push_back(d);
  }
  if (order.empty()) throw DataError("retrieve: no candidates left after self-exclusion");
  const std::size_t take = std::min(k, order.size());
  std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(take),
                    order.end(), [&](std::size_t a, std::size_t b) {
                      if (scores[a] != scores[b]) return scores[a] > scores[b];
                      return pairs_[a].pair_id < pairs_[b].pair_id;
                    });
  ExemplarSet set;
  set.query_pair_id = query.pair_id;
  for (std::size_t i = 0; i < take; ++i)
    set.exemplars.push_back({order[i], pairs_[order[i]].pair_id, scores[order[i]]});
  while (set.exemplars.size() < k) {
    set.exemplars.push_back(set.exemplars.front());
    set.padded = true;
  }
  return set;
}

void Bm25Index::save(const std::filesystem::path& path) const {
  json j;
  j["format"] = "ewae-bm25";
  j["version"] = kFormatVersion;
  j["k1"] = params_.k1;
  j["b"] = params_.b;
  j["num_docs"] = pairs_.size();
  j["avg_doc_length"] = avgdl_;
  auto& docs = j["docs"] = json::array();
  for (const auto& p : pairs_) {
    json d;
    d["id"] = p.pair_id;
    if (!p.context_id.empty()) d["context_id"] = p.context_id;
    d["context"] = json::array();
    for (const auto& u : p.context) d["context"].push_back(u.raw_text);
    d["response"] = p.response.raw_text;
    docs.push_back(std::move(d));
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump() << '\n';
}

Bm25Index Bm25Index::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw DataError("bad index file " + path.string() + ": " + e.what());
  }
  if (j.value("format", "") != "ewae-bm25") throw DataError("not a BM25 index: " + path.string());
  if (j.value("version", 0) != kFormatVersion)
    throw DataError("unsupported index version in " + path.string());
  std::vector<ContextResponsePair> pairs;
  for (const auto& d : j["docs"]) {
    ContextResponsePair p;
    p.pair_id = d["id"].get<PairId>();
    p.context_id = d.value("context_id", "");
    for (const auto& t : d["context"]) p.context.push_back(make_utterance(t.get<std::string>()));
    p.response = make_utterance(d["response"].get<std::string>());
    pairs.push_back(std::move(p));
  }
  Bm25Index idx = build(std::move(pairs), {j["k1"].get<double>(), j["b"].get<double>()});
  if (idx.size() != j["num_docs"].get<std::size_t>())
    throw DataError("index document count mismatch in " + path.string());
  return idx;
}

}  // namespace ewae
