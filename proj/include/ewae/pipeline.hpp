// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Run orchestration shared by the command-line tool and the experiments:
// vocabulary fitting, a full training run, prior-path sampling, evaluation.

#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "ewae/corpus.hpp"
#include "ewae/curriculum.hpp"
#include "ewae/metrics.hpp"
#include "ewae/model.hpp"
#include "ewae/run_config.hpp"

namespace ewae {

Vocabulary fit_vocabulary(const RunConfig& cfg, std::span<const ContextResponsePair> train);

struct TrainOutcome {
  std::unique_ptr<Model> model;
  TrainState state;
  double final_valid_nll = 0.0;  // per token, posterior mean
};

// Trains on already-indexed pairs. When out_dir is non-empty the log and
// checkpoints are written there (vocab.txt too). With resume set, training
// continues from out_dir/last.ckpt when that file exists; its embedded config
// must match cfg.
TrainOutcome train_run(const RunConfig& cfg, std::span<const ContextResponsePair> train,
                       std::span<const ContextResponsePair> valid, const Vocabulary& vocab,
                       const std::filesystem::path& out_dir = {}, bool resume = false);

// S prior-path greedy samples per pair, one fresh prior draw each.
std::vector<SampleSet> generate_sets(const Model& m, const Vocabulary& vocab,
                                     std::span<const ContextResponsePair> pairs,
                                     std::size_t samples, std::uint64_t seed);

// GloVe file when embedding_file is set, otherwise a random table over the vocabulary.
Embeddings eval_embeddings(const RunConfig& cfg, const Vocabulary& vocab);

std::string report_json(const MetricReport& r, const RunConfig& cfg);
std::string report_csv_header();
std::string report_csv_row(const MetricReport& r, const std::string& label,
                           const RunConfig& cfg);

}  // namespace ewae
