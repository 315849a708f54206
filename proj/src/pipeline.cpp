// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/pipeline.hpp"

#include <cstdio>
#include <fstream>

#include "ewae/error.hpp"
#include "ewae/retrieval.hpp"
#include "json.hpp"

namespace ewae {

Vocabulary fit_vocabulary(const RunConfig& cfg, std::span<const ContextResponsePair> train) {
  Vocabulary v = build_vocabulary(train, cfg.get_size("min_count"), cfg.get_size("max_vocab"));
  v.embedding_dim = cfg.get_size("embedding_dim");
  return v;
}

TrainOutcome train_run(const RunConfig& cfg, std::span<const ContextResponsePair> train,
                       std::span<const ContextResponsePair> valid, const Vocabulary& vocab,
                       const std::filesystem::path& out_dir, bool resume) {
  cfg.validate();
  ModelConfig mc = cfg.model_config();
  mc.vocab_size = vocab.size();
  const std::size_t k = mc.k_exemplars;

  const auto index =
      Bm25Index::build(std::vector<ContextResponsePair>(train.begin(), train.end()), cfg.bm25());
  auto train_ex = attach_exemplars(train, train, index, k, /*exclude_self=*/true);
  auto valid_ex = attach_exemplars(valid, train, index, k, /*exclude_self=*/false);

  TrainOutcome out;
  out.model = std::make_unique<Model>(mc);
  out.model->init();

  TrainConfig tc = cfg.train_config();
  tc.out_dir = out_dir;
  TrainState resumed;
  const bool resuming = resume && !out_dir.empty() && std::filesystem::exists(out_dir / "last.ckpt");
  if (resuming) {
    CheckpointInfo info;
    out.model = load_checkpoint(out_dir / "last.ckpt", &resumed, &info);
    if (info.config_echo != tc.config_echo)
      throw ConfigError("cannot resume: " + (out_dir / "last.ckpt").string() +
                        " was written with a different config");
  }
  Trainer trainer(*out.model, tc, cfg.schedule(), std::move(train_ex), valid_ex);
  if (resuming) trainer.state() = std::move(resumed);
  std::ofstream log;
  if (!out_dir.empty()) {
    std::filesystem::create_directories(out_dir);
    vocab.save(out_dir / "vocab.txt");
    const auto mode = std::ios::binary | (resuming ? std::ios::app : std::ios::trunc);
    log.open(out_dir / "train_log.csv", mode);
    if (!log) throw IoError("cannot write " + (out_dir / "train_log.csv").string());
    trainer.log = &log;
    if (!resuming) trainer.write_log_header();
  }
  trainer.run();
  out.state = std::move(trainer.state());
  if (!valid_ex.empty()) out.final_valid_nll = validation_nll(*out.model, valid_ex);
  return out;
}

std::vector<SampleSet> generate_sets(const Model& m, const Vocabulary& vocab,
                                     std::span<const ContextResponsePair> pairs,
                                     std::size_t samples, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<SampleSet> out;
  out.reserve(pairs.size());
  for (const auto& p : pairs) {
    SampleSet s;
    s.context_id = p.context_id.empty() ? std::to_string(p.pair_id) : p.context_id;
    s.reference = p.response.words;
    for (const auto& toks : sample_responses(m, p.context, samples, rng, /*greedy=*/true))
      s.samples.push_back(vocab.decode(toks));
    out.push_back(std::move(s));
  }
  return out;
}

Embeddings eval_embeddings(const RunConfig& cfg, const Vocabulary& vocab) {
  const auto& file = cfg.get("embedding_file");
  if (!file.empty()) return Embeddings::load_glove(file);
  std::vector<std::string> words;
  for (std::size_t i = kNumReserved; i < vocab.size(); ++i)
    words.push_back(vocab.word(static_cast<TokenId>(i)));
  return Embeddings::random(words, cfg.get_size("eval_embedding_dim"),
                            cfg.get_u64("eval_embedding_seed"));
}

std::string report_json(const MetricReport& r, const RunConfig& cfg) {
  nlohmann::ordered_json j;
  const auto cols = MetricReport::csv_columns();
  const auto vals = r.csv_values();
  for (std::size_t i = 0; i < cols.size(); ++i) j[cols[i]] = vals[i];
  j["n_contexts"] = r.n_contexts;
  j["n_samples"] = r.n_samples;
  j["unscorable_samples"] = r.unscorable_samples;
  j["short_sequences"] = r.short_sequences;
  j["config_hash"] = cfg.hash_hex();
  j["config"] = cfg.values();
  return j.dump(2);
}

std::string report_csv_header() {
  std::string out = "label";
  for (const auto& c : MetricReport::csv_columns()) out += "," + c;
  return out + ",n_contexts,config_hash";
}

std::string report_csv_row(const MetricReport& r, const std::string& label,
                           const RunConfig& cfg) {
  std::string out = label;
  char buf[64];
  for (double v : r.csv_values()) {
    std::snprintf(buf, sizeof buf, ",%.6f", v);
    out += buf;
  }
  return out + "," + std::to_string(r.n_contexts) + "," + cfg.hash_hex();
}

}  // namespace ewae
