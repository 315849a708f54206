// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/run_config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "ewae/error.hpp"

namespace ewae {

namespace {

enum class Kind { kSize, kDouble, kBool, kU64, kString };

struct KeySpec {
  const char* key;
  const char* default_value;
  Kind kind;
};

// Single source of truth for every accepted key.
constexpr KeySpec kKeys[] = {
    {"seed", "1", Kind::kU64},
    // corpus
    {"min_count", "1", Kind::kSize},
    {"max_vocab", "20000", Kind::kSize},
    {"max_turns", "10", Kind::kSize},
    {"max_utterance_len", "40", Kind::kSize},
    {"synth_contexts", "100", Kind::kSize},
    {"synth_modes", "3", Kind::kSize},
    {"synth_noise", "0", Kind::kDouble},
    {"synth_pairs_per_context", "10", Kind::kSize},
    // retrieval
    {"bm25_k1", "1.2", Kind::kDouble},
    {"bm25_b", "0.75", Kind::kDouble},
    // model
    {"embedding_dim", "200", Kind::kSize},
    {"hidden_size", "300", Kind::kSize},
    {"latent_dim", "200", Kind::kSize},
    {"ffn_hidden", "200", Kind::kSize},
    {"k_exemplars", "4", Kind::kSize},
    {"n_prior_components", "0", Kind::kSize},
    {"max_decode_len", "40", Kind::kSize},
    {"log_var_clamp", "10", Kind::kDouble},
    {"critic_clip", "0.01", Kind::kDouble},
    {"posterior_mode", "weighted-sum", Kind::kString},
    // training
    {"batch_size", "32", Kind::kSize},
    {"critic_steps", "5", Kind::kSize},
    {"grad_clip", "5", Kind::kDouble},
    {"rms_rho", "0.99", Kind::kDouble},
    {"rms_eps", "1e-8", Kind::kDouble},
    {"phase1_epochs", "10", Kind::kSize},
    {"phase2_epochs", "10", Kind::kSize},
    {"phase3_epochs", "30", Kind::kSize},
    {"lr_phase1", "1e-3", Kind::kDouble},
    {"lr_phase2", "1e-3", Kind::kDouble},
    {"lr_phase3", "1e-3", Kind::kDouble},
    {"lr_critic", "5e-5", Kind::kDouble},
    {"patience", "5", Kind::kSize},
    {"skip_phase1", "false", Kind::kBool},
    {"skip_phase2", "false", Kind::kBool},
    {"no_curriculum", "false", Kind::kBool},
    {"no_exemplar", "false", Kind::kBool},
    // evaluation
    {"samples", "10", Kind::kSize},
    {"embedding_file", "", Kind::kString},
    {"eval_embedding_dim", "200", Kind::kSize},
    {"eval_embedding_seed", "7", Kind::kU64},
    {"inter_dist", "per-context", Kind::kString},
};

const KeySpec* find_key(const std::string& key) {
  for (const auto& k : kKeys)
    if (key == k.key) return &k;
  return nullptr;
}

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

bool parse_bool(const std::string& v, bool& out) {
  if (v == "true" || v == "1" || v == "yes" || v == "on") return out = true, true;
  if (v == "false" || v == "0" || v == "no" || v == "off") return out = false, true;
  return false;
}

template <class T>
bool parse_int(const std::string& v, T& out) {
  const char* end = v.data() + v.size();
  auto [p, ec] = std::from_chars(v.data(), end, out);
  return ec == std::errc{} && p == end;
}

bool parse_double(const std::string& v, double& out) {
  if (v.empty()) return false;
  std::istringstream ss(v);
  ss >> out;
  return ss && ss.peek() == std::char_traits<char>::eof() && std::isfinite(out);
}

}  // namespace

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

RunConfig::RunConfig() {
  for (const auto& k : kKeys) values_[k.key] = k.default_value;
}

std::vector<std::string> RunConfig::known_keys() {
  std::vector<std::string> out;
  for (const auto& k : kKeys) out.emplace_back(k.key);
  return out;
}

RunConfig RunConfig::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  RunConfig c;
  c.merge_text(ss.str(), path.string());
  return c;
}

void RunConfig::merge_text(const std::string& text, const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.resize(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
    try {
      set(trim(line.substr(0, eq)), trim(line.substr(eq + 1)));
    } catch (const ConfigError& e) {
      throw ConfigError(origin + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
}

void RunConfig::set(const std::string& key, const std::string& value) {
  if (!find_key(key)) throw ConfigError("unknown config key '" + key + "'");
  values_[key] = value;
  explicit_[key] = true;
}

const std::string& RunConfig::get(const std::string& key) const {
  auto it = values_.find(key);
  if (it == values_.end()) throw ConfigError("unknown config key '" + key + "'");
  return it->second;
}

std::size_t RunConfig::get_size(const std::string& key) const {
  std::size_t v = 0;
  if (!parse_int(get(key), v))
    throw ConfigError(key + " must be a non-negative integer, got '" + get(key) + "'");
  return v;
}

std::uint64_t RunConfig::get_u64(const std::string& key) const {
  std::uint64_t v = 0;
  if (!parse_int(get(key), v))
    throw ConfigError(key + " must be a non-negative integer, got '" + get(key) + "'");
  return v;
}

double RunConfig::get_double(const std::string& key) const {
  double v = 0.0;
  if (!parse_double(get(key), v))
    throw ConfigError(key + " must be a finite number, got '" + get(key) + "'");
  return v;
}

bool RunConfig::get_bool(const std::string& key) const {
  bool v = false;
  if (!parse_bool(get(key), v)) throw ConfigError(key + " must be true or false");
  return v;
}

void RunConfig::validate() const {
  for (const auto& k : kKeys) {
    switch (k.kind) {
      case Kind::kSize: get_size(k.key); break;
      case Kind::kU64: get_u64(k.key); break;
      case Kind::kDouble: get_double(k.key); break;
      case Kind::kBool: get_bool(k.key); break;
      case Kind::kString: break;
    }
  }
  const auto& pm = get("posterior_mode");
  if (pm != "weighted-sum" && pm != "categorical")
    throw ConfigError("posterior_mode must be weighted-sum or categorical");
  const auto& id = get("inter_dist");
  if (id != "per-context" && id != "pooled")
    throw ConfigError("inter_dist must be per-context or pooled");
  const double k1 = get_double("bm25_k1"), b = get_double("bm25_b");
  if (!(k1 > 0.0)) throw ConfigError("bm25_k1 must be positive");
  if (b < 0.0 || b > 1.0) throw ConfigError("bm25_b must lie in [0, 1]");
  if (get_size("samples") == 0) throw ConfigError("samples must be positive");
  if (get_size("max_turns") == 0 || get_size("max_utterance_len") == 0)
    throw ConfigError("max_turns and max_utterance_len must be positive");
  ModelConfig mc = model_config();
  mc.vocab_size = 8;  // placeholder: the real size is known only after indexing
  mc.validate();
  schedule().validate();
  const auto tc = train_config();
  if (tc.batch_size == 0) throw ConfigError("batch_size must be positive");
  if (tc.critic_steps == 0) throw ConfigError("critic_steps must be positive");
  if (tc.grad_clip < 0.0) throw ConfigError("grad_clip must be non-negative");
  if (!(tc.rms_rho > 0.0 && tc.rms_rho < 1.0)) throw ConfigError("rms_rho must lie in (0, 1)");
  if (!(tc.rms_eps > 0.0)) throw ConfigError("rms_eps must be positive");
}

std::string RunConfig::resolved() const {
  std::string out;
  for (const auto& [k, v] : values_) out += k + "=" + v + "\n";
  return out;
}

std::uint64_t RunConfig::hash() const { return fnv1a(resolved()); }
std::string RunConfig::hash_hex() const { return hex64(hash()); }

ModelConfig RunConfig::model_config() const {
  ModelConfig c;
  c.embedding_dim = get_size("embedding_dim");
  c.hidden_size = get_size("hidden_size");
  c.latent_dim = get_size("latent_dim");
  c.ffn_hidden = get_size("ffn_hidden");
  c.k_exemplars = get_size("k_exemplars");
  c.n_prior_components = get_size("n_prior_components");
  c.max_decode_len = get_size("max_decode_len");
  c.log_var_clamp = get_double("log_var_clamp");
  c.critic_clip = get_double("critic_clip");
  c.posterior_mode = get("posterior_mode") == "categorical" ? PosteriorMode::kCategorical
                                                            : PosteriorMode::kWeightedSum;
  c.seed = get_u64("seed");
  if (get_bool("no_exemplar")) {
    // Single-Gaussian posterior; the prior collapses to one component too
    // unless the user pinned it.
    c.k_exemplars = 0;
    if (!explicitly_set("n_prior_components")) c.n_prior_components = 1;
  }
  return c;
}

CurriculumSchedule RunConfig::schedule() const {
  CurriculumSchedule s;
  s.phase1_epochs = get_size("phase1_epochs");
  s.phase2_epochs = get_size("phase2_epochs");
  s.phase3_epochs = get_size("phase3_epochs");
  s.lr_phase1 = get_double("lr_phase1");
  s.lr_phase2 = get_double("lr_phase2");
  s.lr_phase3 = get_double("lr_phase3");
  s.lr_critic = get_double("lr_critic");
  s.patience = get_size("patience");
  s.skip_phase1 = get_bool("skip_phase1");
  s.skip_phase2 = get_bool("skip_phase2");
  s.skip_all_curriculum = get_bool("no_curriculum");
  return s;
}

TrainConfig RunConfig::train_config() const {
  TrainConfig t;
  t.batch_size = get_size("batch_size");
  t.critic_steps = get_size("critic_steps");
  t.grad_clip = get_double("grad_clip");
  t.rms_rho = get_double("rms_rho");
  t.rms_eps = get_double("rms_eps");
  t.seed = get_u64("seed");
  t.config_echo = resolved();
  t.ablation_label = ablation_label();
  return t;
}

Bm25Params RunConfig::bm25() const { return {get_double("bm25_k1"), get_double("bm25_b")}; }

CorpusLimits RunConfig::limits() const {
  return {get_size("max_turns"), get_size("max_utterance_len")};
}

SyntheticTaskSpec RunConfig::synthetic() const {
  SyntheticTaskSpec s;
  s.n_contexts = get_size("synth_contexts");
  s.modes_per_context = get_size("synth_modes");
  s.noise_rate = get_double("synth_noise");
  s.pairs_per_context = get_size("synth_pairs_per_context");
  s.seed = get_u64("seed");
  return s;
}

InterDistMode RunConfig::inter_dist_mode() const {
  return get("inter_dist") == "pooled" ? InterDistMode::kPooled : InterDistMode::kPerContext;
}

std::string RunConfig::ablation_label() const {
  std::vector<std::string> parts;
  if (get_bool("no_exemplar")) parts.emplace_back("w/o examplar");
  if (get_bool("no_curriculum")) {
    parts.emplace_back("w/o Curriculum");
  } else {
    if (get_bool("skip_phase1")) parts.emplace_back("w/o I");
    if (get_bool("skip_phase2")) parts.emplace_back("w/o II");
  }
  if (parts.empty()) return "full";
  std::string out = parts[0];
  for (std::size_t i = 1; i < parts.size(); ++i) out += ", " + parts[i];
  return out;
}

}  // namespace ewae
