// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Flat key=value run configuration. Every key has a default; a config file
// and command-line overrides are merged on top, then the whole thing is
// validated before any compute. The resolved text (sorted "key=value" lines)
// and its hash are echoed into every artifact.

#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include "ewae/corpus.hpp"
#include "ewae/curriculum.hpp"
#include "ewae/metrics.hpp"
#include "ewae/retrieval.hpp"
#include "ewae/seq_model.hpp"

namespace ewae {

inline constexpr const char* kConfigEnvVar = "EWAE_CONFIG";

class RunConfig {
 public:
  RunConfig();  // all defaults

  // Parses "key = value" lines; '#' starts a comment. Unknown keys are errors.
  static RunConfig from_file(const std::filesystem::path& path);
  void merge_text(const std::string& text, const std::string& origin);
  void set(const std::string& key, const std::string& value);
  const std::string& get(const std::string& key) const;
  bool explicitly_set(const std::string& key) const { return explicit_.count(key) > 0; }

  std::size_t get_size(const std::string& key) const;
  double get_double(const std::string& key) const;
  bool get_bool(const std::string& key) const;
  std::uint64_t get_u64(const std::string& key) const;

  // Throws ConfigError naming the first invalid field.
  void validate() const;

  std::string resolved() const;
  std::uint64_t hash() const;
  std::string hash_hex() const;
  const std::map<std::string, std::string>& values() const { return values_; }

  // Typed views (validate() first). vocab_size is left at 0.
  ModelConfig model_config() const;
  CurriculumSchedule schedule() const;
  TrainConfig train_config() const;
  Bm25Params bm25() const;
  CorpusLimits limits() const;
  SyntheticTaskSpec synthetic() const;
  InterDistMode inter_dist_mode() const;
  // Row label for the active ablation flags ("full" if none).
  std::string ablation_label() const;

  static std::vector<std::string> known_keys();

 private:
  std::map<std::string, std::string> values_;
  std::map<std::string, bool> explicit_;
};

std::string hex64(std::uint64_t v);

}  // namespace ewae
