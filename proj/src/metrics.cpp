// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <set>
#include <sstream>

#include "ewae/corpus.hpp"
#include "ewae/error.hpp"

namespace ewae {

namespace {

using NGram = std::vector<std::string>;

std::map<NGram, std::size_t> ngram_counts(std::span<const std::string> seq, std::size_t n) {
  std::map<NGram, std::size_t> out;
  if (seq.size() < n) return out;
  for (std::size_t i = 0; i + n <= seq.size(); ++i)
    ++out[NGram(seq.begin() + static_cast<std::ptrdiff_t>(i),
                seq.begin() + static_cast<std::ptrdiff_t>(i + n))];
  return out;
}

double cosine(std::span<const double> a, std::span<const double> b) {
  double ab = 0.0, aa = 0.0, bb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    ab += a[i] * b[i];
    aa += a[i] * a[i];
    bb += b[i] * b[i];
  }
  if (aa <= 0.0 || bb <= 0.0) return 0.0;
  return ab / (std::sqrt(aa) * std::sqrt(bb));
}

std::vector<const std::vector<double>*> known(std::span<const std::string> words,
                                              const Embeddings& emb) {
  std::vector<const std::vector<double>*> out;
  for (const auto& w : words)
    if (const auto* v = emb.find(w)) out.push_back(v);
  return out;
}

std::vector<double> mean_vector(const std::vector<const std::vector<double>*>& vs,
                                std::size_t dim) {
  std::vector<double> out(dim, 0.0);
  for (const auto* v : vs)
    for (std::size_t i = 0; i < dim; ++i) out[i] += (*v)[i];
  for (double& x : out) x /= static_cast<double>(vs.size());
  return out;
}

// Per dimension, the entry of largest magnitude (the positive one on ties).
std::vector<double> extrema_vector(const std::vector<const std::vector<double>*>& vs,
                                   std::size_t dim) {
  std::vector<double> hi(dim, -INFINITY), lo(dim, INFINITY);
  for (const auto* v : vs)
    for (std::size_t i = 0; i < dim; ++i) {
      hi[i] = std::max(hi[i], (*v)[i]);
      lo[i] = std::min(lo[i], (*v)[i]);
    }
  std::vector<double> out(dim);
  for (std::size_t i = 0; i < dim; ++i) out[i] = std::abs(lo[i]) > hi[i] ? lo[i] : hi[i];
  return out;
}

double greedy_one_way(const std::vector<const std::vector<double>*>& from,
                      const std::vector<const std::vector<double>*>& to) {
  double total = 0.0;
  for (const auto* a : from) {
    double best = -INFINITY;
    for (const auto* b : to) best = std::max(best, cosine(*a, *b));
    total += best;
  }
  return total / static_cast<double>(from.size());
}

double floor0(double x) { return std::clamp(x, 0.0, 1.0); }

}  // namespace

double sentence_bleu(std::span<const std::string> hyp, std::span<const std::string> ref) {
  if (hyp.empty() || ref.empty()) return 0.0;
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= kBleuMaxOrder; ++n) {
    const auto h = ngram_counts(hyp, n);
    const auto r = ngram_counts(ref, n);
    std::size_t matched = 0, total = 0;
    for (const auto& [g, c] : h) {
      total += c;
      auto it = r.find(g);
      if (it != r.end()) matched += std::min(c, it->second);
    }
    log_sum += std::log((static_cast<double>(matched) + 1.0) /
                        (static_cast<double>(total) + 1.0));
  }
  const double geo = std::exp(log_sum / static_cast<double>(kBleuMaxOrder));
  const double bp =
      hyp.size() >= ref.size()
          ? 1.0
          : std::exp(1.0 - static_cast<double>(ref.size()) / static_cast<double>(hyp.size()));
  return geo * bp;
}

double harmonic_mean(double a, double b) {
  return (a <= 0.0 || b <= 0.0) ? 0.0 : 2.0 * a * b / (a + b);
}

BleuPrf bleu_prf(const SampleSet& set) {
  if (set.samples.empty()) throw std::invalid_argument("bleu_prf: no samples");
  BleuPrf out;
  double sum = 0.0;
  for (const auto& s : set.samples) {
    const double b = sentence_bleu(s, set.reference);
    out.recall = std::max(out.recall, b);
    sum += b;
  }
  out.precision = sum / static_cast<double>(set.samples.size());
  out.f1 = harmonic_mean(out.recall, out.precision);
  return out;
}

// ---------------------------------------------------------------------------

Embeddings Embeddings::load_glove(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open embeddings " + path.string());
  Embeddings out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    std::istringstream ss(line);
    std::string word;
    if (!(ss >> word)) continue;
    std::vector<double> v;
    double x;
    while (ss >> x) v.push_back(x);
    if (v.empty()) throw DataError(path.string() + ":" + std::to_string(lineno) + ": no vector");
    if (out.dim_ == 0) out.dim_ = v.size();
    if (v.size() != out.dim_)
      throw DataError(path.string() + ":" + std::to_string(lineno) + ": expected " +
                      std::to_string(out.dim_) + " values, got " + std::to_string(v.size()));
    out.table_[word] = std::move(v);
  }
  return out;
}

Embeddings Embeddings::random(std::span<const std::string> words, std::size_t dim,
                              std::uint64_t seed) {
  Embeddings out(dim);
  for (const auto& w : words) {
    // FNV-1a of the word rather than std::hash, which differs across libraries.
    std::uint64_t h = 1469598103934665603ULL;
    for (unsigned char c : w) h = (h ^ c) * 1099511628211ULL;
    std::mt19937_64 rng(h ^ (seed * 0x9E3779B97F4A7C15ULL));
    std::normal_distribution<double> nd(0.0, 1.0);
    std::vector<double> v(dim);
    for (double& x : v) x = nd(rng);
    out.table_[w] = std::move(v);
  }
  return out;
}

void Embeddings::set(const std::string& word, std::vector<double> v) {
  if (dim_ == 0) dim_ = v.size();
  if (v.size() != dim_) throw std::invalid_argument("embedding dimension mismatch");
  table_[word] = std::move(v);
}

const std::vector<double>* Embeddings::find(const std::string& word) const {
  auto it = table_.find(word);
  return it == table_.end() ? nullptr : &it->second;
}

BowScores bow_pair(std::span<const std::string> hyp, std::span<const std::string> ref,
                   const Embeddings& emb) {
  const auto h = known(hyp, emb);
  const auto r = known(ref, emb);
  if (h.empty() || r.empty()) return {};
  const std::size_t d = emb.dim();
  BowScores s;
  s.greedy = floor0(0.5 * (greedy_one_way(h, r) + greedy_one_way(r, h)));
  s.extrema = floor0(cosine(extrema_vector(h, d), extrema_vector(r, d)));
  s.average = floor0(cosine(mean_vector(h, d), mean_vector(r, d)));
  return s;
}

BowScores bow_scores(const SampleSet& set, const Embeddings& emb, std::size_t* unscorable) {
  BowScores best;
  for (const auto& s : set.samples) {
    if (unscorable && known(s, emb).empty()) ++*unscorable;
    const BowScores b = bow_pair(s, set.reference, emb);
    best.greedy = std::max(best.greedy, b.greedy);
    best.extrema = std::max(best.extrema, b.extrema);
    best.average = std::max(best.average, b.average);
  }
  return best;
}

// ---------------------------------------------------------------------------

double distinct_ratio(std::span<const std::string> seq, std::size_t n) {
  if (seq.size() < n) return 1.0;
  const auto counts = ngram_counts(seq, n);
  return static_cast<double>(counts.size()) / static_cast<double>(seq.size() - n + 1);
}

double pooled_distinct(std::span<const Words> seqs, std::size_t n) {
  std::set<NGram> unique;
  std::size_t total = 0;
  for (const auto& s : seqs) {
    for (const auto& [g, c] : ngram_counts(s, n)) {
      unique.insert(g);
      total += c;
    }
  }
  return total == 0 ? 1.0 : static_cast<double>(unique.size()) / static_cast<double>(total);
}

DistinctScores distinct(const SampleSet& set, std::size_t* short_sequences) {
  if (set.samples.empty()) throw std::invalid_argument("distinct: no samples");
  DistinctScores d;
  for (const auto& s : set.samples) {
    d.intra1 += distinct_ratio(s, 1);
    d.intra2 += distinct_ratio(s, 2);
    if (short_sequences && s.size() < 2) ++*short_sequences;
  }
  const double S = static_cast<double>(set.samples.size());
  d.intra1 /= S;
  d.intra2 /= S;
  d.inter1 = pooled_distinct(set.samples, 1);
  d.inter2 = pooled_distinct(set.samples, 2);
  return d;
}

// ---------------------------------------------------------------------------

std::vector<std::string> MetricReport::csv_columns() {
  return {"bleu_r",      "bleu_p",      "bleu_f1",     "bow_greedy",  "bow_extrema",
          "bow_average", "intra_dist1", "intra_dist2", "inter_dist1", "inter_dist2"};
}

std::vector<double> MetricReport::csv_values() const {
  return {bleu_r,      bleu_p,      bleu_f1,     bow_greedy,  bow_extrema,
          bow_average, intra_dist1, intra_dist2, inter_dist1, inter_dist2};
}

MetricReport evaluate_sets(std::span<const SampleSet> sets, const Embeddings& emb,
                           InterDistMode inter) {
  if (sets.empty()) throw std::invalid_argument("evaluate_sets: no contexts");
  MetricReport r;
  std::vector<Words> all;
  for (const SampleSet& s : sets) {
    const BleuPrf b = bleu_prf(s);
    r.bleu_r += b.recall;
    r.bleu_p += b.precision;
    const BowScores w = bow_scores(s, emb, &r.unscorable_samples);
    r.bow_greedy += w.greedy;
    r.bow_extrema += w.extrema;
    r.bow_average += w.average;
    const DistinctScores d = distinct(s, &r.short_sequences);
    r.intra_dist1 += d.intra1;
    r.intra_dist2 += d.intra2;
    r.inter_dist1 += d.inter1;
    r.inter_dist2 += d.inter2;
    r.n_samples += s.samples.size();
    if (inter == InterDistMode::kPooled) all.insert(all.end(), s.samples.begin(), s.samples.end());
  }
  const double n = static_cast<double>(sets.size());
  for (double* f : {&r.bleu_r, &r.bleu_p, &r.bow_greedy, &r.bow_extrema, &r.bow_average,
                    &r.intra_dist1, &r.intra_dist2, &r.inter_dist1, &r.inter_dist2})
    *f /= n;
  if (inter == InterDistMode::kPooled) {
    r.inter_dist1 = pooled_distinct(all, 1);
    r.inter_dist2 = pooled_distinct(all, 2);
  }
  // Corpus F1 is the harmonic mean of the corpus-level recall and precision.
  r.bleu_f1 = harmonic_mean(r.bleu_r, r.bleu_p);
  r.n_contexts = sets.size();
  return r;
}

std::string normalize_text(const std::string& text) { return detokenize(tokenize(text)); }

std::size_t modes_recovered(std::span<const Words> samples,
                            std::span<const std::string> modes) {
  std::set<std::string> wanted;
  for (const auto& m : modes) wanted.insert(normalize_text(m));
  std::set<std::string> hit;
  for (const auto& s : samples) {
    const std::string text = normalize_text(detokenize(s));
    if (wanted.count(text)) hit.insert(text);
  }
  return hit.size();
}

}  // namespace ewae
