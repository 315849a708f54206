// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Automatic response-generation metrics over S sampled responses per context.
// Everything operates on word strings so the metrics are independent of any
// particular vocabulary id assignment.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

namespace ewae {

using Words = std::vector<std::string>;

struct SampleSet {
  std::string context_id;
  std::vector<Words> samples;
  Words reference;
};

// Cumulative BLEU over n = 1..3. Each modified n-gram precision is smoothed by
// adding one to both its numerator and denominator; the brevity penalty is
// exp(1 - |ref| / |hyp|) when the hypothesis is shorter. An empty hypothesis
// scores 0.
inline constexpr std::size_t kBleuMaxOrder = 3;
double sentence_bleu(std::span<const std::string> hyp, std::span<const std::string> ref);

struct BleuPrf {
  double recall = 0.0;     // max over samples
  double precision = 0.0;  // mean over samples
  double f1 = 0.0;
};
BleuPrf bleu_prf(const SampleSet& set);
double harmonic_mean(double a, double b);

// Word vectors for the bag-of-words metrics. Unknown words have no vector and
// are skipped.
class Embeddings {
 public:
  explicit Embeddings(std::size_t dim = 0) : dim_(dim) {}

  // GloVe text format: "word v1 v2 ... vd" per line.
  static Embeddings load_glove(const std::filesystem::path& path);
  // Deterministic random vectors: each word's vector depends only on (seed, word).
  static Embeddings random(std::span<const std::string> words, std::size_t dim,
                           std::uint64_t seed);

  void set(const std::string& word, std::vector<double> v);
  const std::vector<double>* find(const std::string& word) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return table_.size(); }

 private:
  std::size_t dim_;
  std::unordered_map<std::string, std::vector<double>> table_;
};

struct BowScores {
  double greedy = 0.0;
  double extrema = 0.0;
  double average = 0.0;
};
// One hypothesis against the reference. Negative cosines are floored at 0.
// A side with no known words scores 0 on every metric.
BowScores bow_pair(std::span<const std::string> hyp, std::span<const std::string> ref,
                   const Embeddings& emb);
// Per-context score: each metric's max over the samples.
BowScores bow_scores(const SampleSet& set, const Embeddings& emb,
                     std::size_t* unscorable = nullptr);

// |unique n-grams| / |n-grams|; sequences shorter than n score 1.
double distinct_ratio(std::span<const std::string> seq, std::size_t n);

struct DistinctScores {
  double intra1 = 0.0, intra2 = 0.0;
  double inter1 = 0.0, inter2 = 0.0;
};
DistinctScores distinct(const SampleSet& set, std::size_t* short_sequences = nullptr);
// Distinct ratio of every sample's n-grams pooled together.
double pooled_distinct(std::span<const Words> seqs, std::size_t n);

enum class InterDistMode { kPerContext, kPooled };

struct MetricReport {
  double bleu_r = 0.0, bleu_p = 0.0, bleu_f1 = 0.0;
  double bow_greedy = 0.0, bow_extrema = 0.0, bow_average = 0.0;
  double intra_dist1 = 0.0, intra_dist2 = 0.0;
  double inter_dist1 = 0.0, inter_dist2 = 0.0;
  std::size_t n_contexts = 0;
  std::size_t n_samples = 0;
  std::size_t unscorable_samples = 0;  // no known word for the BOW metrics
  std::size_t short_sequences = 0;     // shorter than 2 tokens (distinct convention)

  static std::vector<std::string> csv_columns();
  std::vector<double> csv_values() const;
};

MetricReport evaluate_sets(std::span<const SampleSet> sets, const Embeddings& emb,
                           InterDistMode inter = InterDistMode::kPerContext);

// Lowercased, re-tokenized form used to compare generated text to mode strings.
std::string normalize_text(const std::string& text);
// Number of distinct entries of `modes` that appear among the samples.
std::size_t modes_recovered(std::span<const Words> samples,
                            std::span<const std::string> modes);

}  // namespace ewae
