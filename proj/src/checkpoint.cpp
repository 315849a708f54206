// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Checkpoint layout:
//   8 bytes   magic "EWAECKPT"
//   u32       format version
//   u64       header length in bytes
//   header    UTF-8 JSON (config echo, model config, state, tensor table)
//   payload   raw little-endian doubles, addressed by offsets in the header

#include <array>
#include <cstring>
#include <fstream>

#include "ewae/curriculum.hpp"
#include "ewae/error.hpp"
#include "json.hpp"

namespace ewae {

using nlohmann::json;

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

constexpr std::array<char, 8> kMagic{'E', 'W', 'A', 'E', 'C', 'K', 'P', 'T'};

json model_config_json(const ModelConfig& c) {
  return {{"vocab_size", c.vocab_size},
          {"embedding_dim", c.embedding_dim},
          {"hidden_size", c.hidden_size},
          {"latent_dim", c.latent_dim},
          {"ffn_hidden", c.ffn_hidden},
          {"k_exemplars", c.k_exemplars},
          {"n_prior_components", c.n_prior_components},
          {"max_decode_len", c.max_decode_len},
          {"log_var_clamp", c.log_var_clamp},
          {"critic_clip", c.critic_clip},
          {"posterior_mode",
           c.posterior_mode == PosteriorMode::kCategorical ? "categorical" : "weighted-sum"},
          {"seed", c.seed}};
}

ModelConfig model_config_from_json(const json& j) {
  ModelConfig c;
  c.vocab_size = j.at("vocab_size").get<std::size_t>();
  c.embedding_dim = j.at("embedding_dim").get<std::size_t>();
  c.hidden_size = j.at("hidden_size").get<std::size_t>();
  c.latent_dim = j.at("latent_dim").get<std::size_t>();
  c.ffn_hidden = j.at("ffn_hidden").get<std::size_t>();
  c.k_exemplars = j.at("k_exemplars").get<std::size_t>();
  c.n_prior_components = j.at("n_prior_components").get<std::size_t>();
  c.max_decode_len = j.at("max_decode_len").get<std::size_t>();
  c.log_var_clamp = j.at("log_var_clamp").get<double>();
  c.critic_clip = j.at("critic_clip").get<double>();
  c.posterior_mode = j.at("posterior_mode").get<std::string>() == "categorical"
                         ? PosteriorMode::kCategorical
                         : PosteriorMode::kWeightedSum;
  c.seed = j.at("seed").get<std::uint64_t>();
  return c;
}

struct PayloadWriter {
  std::vector<double> data;
  json add(const std::vector<double>& v) {
    json e = {{"offset", data.size()}, {"size", v.size()}};
    data.insert(data.end(), v.begin(), v.end());
    return e;
  }
};

std::vector<double> read_slice(const std::vector<double>& payload, const json& e) {
  const auto off = e.at("offset").get<std::size_t>();
  const auto n = e.at("size").get<std::size_t>();
  if (off + n > payload.size()) throw DataError("checkpoint: tensor outside payload");
  return {payload.begin() + static_cast<std::ptrdiff_t>(off),
          payload.begin() + static_cast<std::ptrdiff_t>(off + n)};
}

json optimizer_json(const RmsProp& opt, PayloadWriter& w) {
  json out = json::object();
  for (const auto& [name, ms] : opt.state()) out[name] = w.add(ms);
  return out;
}

void optimizer_from_json(RmsProp& opt, const json& j, const std::vector<double>& payload) {
  opt.state().clear();
  for (const auto& [name, e] : j.items()) opt.state()[name] = read_slice(payload, e);
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const Model& m,
                     const TrainState& s, const std::string& config_echo) {
  PayloadWriter w;
  json tensors = json::array();
  for (const Parameter* p : m.params().all()) {
    json e = w.add(p->value);
    e["name"] = p->name();
    e["rows"] = p->rows();
    e["cols"] = p->cols();
    tensors.push_back(std::move(e));
  }
  json handoffs = json::array();
  for (const Handoff& h : s.handoffs)
    handoffs.push_back({{"from", phase_name(h.from)},
                        {"to", phase_name(h.to)},
                        {"checksum_end", h.checksum_end},
                        {"checksum_start", h.checksum_start}});
  json history = json::array();
  for (const auto& [p, v] : s.valid_history) history.push_back({phase_name(p), v});

  json header = {
      {"format", "ewae-checkpoint"},
      {"config_echo", config_echo},
      {"config_hash", fnv1a(config_echo)},
      {"model", model_config_json(m.config())},
      {"phase", phase_name(s.phase)},
      {"epoch", s.epoch},
      {"global_step", s.global_step},
      {"best_valid", s.best_valid},
      {"has_best", s.has_best},
      {"phase3_start_valid", s.phase3_start_valid},
      {"epochs_since_best", s.epochs_since_best},
      {"stopped_early", s.stopped_early},
      {"in_progress", s.in_progress},
      {"rng", s.rng.serialize()},
      {"shared_checksum", checksum(m.shared_parameters())},
      {"tensors", std::move(tensors)},
      {"optimizer", optimizer_json(s.optimizer, w)},
      {"critic_optimizer", optimizer_json(s.critic_optimizer, w)},
      {"handoffs", std::move(handoffs)},
      {"valid_history", std::move(history)},
  };
  if (s.pending_handoff)
    header["pending_handoff"] = {phase_name(s.pending_handoff->first),
                                 s.pending_handoff->second};

  const std::string text = header.dump();
  // Write to a sibling and rename so a crash never leaves a torn checkpoint.
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write checkpoint " + tmp.string());
    const std::uint32_t version = kCheckpointVersion;
    const std::uint64_t len = text.size();
    out.write(kMagic.data(), kMagic.size());
    out.write(reinterpret_cast<const char*>(&version), sizeof version);
    out.write(reinterpret_cast<const char*>(&len), sizeof len);
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    out.write(reinterpret_cast<const char*>(w.data.data()),
              static_cast<std::streamsize>(w.data.size() * sizeof(double)));
    if (!out) throw IoError("short write on checkpoint " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path, TrainState* state,
                                       CheckpointInfo* info) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open checkpoint " + path.string());
  std::array<char, 8> magic{};
  std::uint32_t version = 0;
  std::uint64_t len = 0;
  in.read(magic.data(), magic.size());
  in.read(reinterpret_cast<char*>(&version), sizeof version);
  in.read(reinterpret_cast<char*>(&len), sizeof len);
  if (!in || magic != kMagic) throw DataError(path.string() + " is not a checkpoint");
  if (version != kCheckpointVersion)
    throw DataError("checkpoint version " + std::to_string(version) + " unsupported");
  std::string text(len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(len));
  if (!in) throw DataError("truncated checkpoint header in " + path.string());
  std::vector<double> payload;
  {
    std::vector<char> rest((std::istreambuf_iterator<char>(in)), {});
    if (rest.size() % sizeof(double) != 0) throw DataError("checkpoint payload misaligned");
    payload.resize(rest.size() / sizeof(double));
    std::memcpy(payload.data(), rest.data(), rest.size());
  }

  json h;
  try {
    h = json::parse(text);
    auto model = std::make_unique<Model>(model_config_from_json(h.at("model")));
    for (const json& e : h.at("tensors")) {
      const auto name = e.at("name").get<std::string>();
      Parameter* p = model->params().find(name);
      if (!p) throw DataError("checkpoint tensor '" + name + "' unknown to this model");
      if (p->rows() != e.at("rows").get<std::size_t>() ||
          p->cols() != e.at("cols").get<std::size_t>())
        throw DataError("checkpoint tensor '" + name + "' has the wrong shape");
      p->value = read_slice(payload, e);
    }
    if (info) {
      info->model = model->config();
      info->phase = phase_from_name(h.at("phase").get<std::string>());
      info->global_step = h.at("global_step").get<std::size_t>();
      info->config_echo = h.at("config_echo").get<std::string>();
      info->config_hash = h.at("config_hash").get<std::uint64_t>();
      info->shared_checksum = h.at("shared_checksum").get<std::uint64_t>();
    }
    if (state) {
      state->phase = phase_from_name(h.at("phase").get<std::string>());
      state->epoch = h.at("epoch").get<std::size_t>();
      state->global_step = h.at("global_step").get<std::size_t>();
      state->best_valid = h.at("best_valid").get<double>();
      state->has_best = h.at("has_best").get<bool>();
      state->phase3_start_valid = h.at("phase3_start_valid").get<double>();
      state->epochs_since_best = h.at("epochs_since_best").get<std::size_t>();
      state->stopped_early = h.at("stopped_early").get<bool>();
      state->in_progress = h.at("in_progress").get<bool>();
      state->rng.deserialize(h.at("rng").get<std::string>());
      optimizer_from_json(state->optimizer, h.at("optimizer"), payload);
      optimizer_from_json(state->critic_optimizer, h.at("critic_optimizer"), payload);
      state->handoffs.clear();
      for (const json& e : h.at("handoffs"))
        state->handoffs.push_back({phase_from_name(e.at("from").get<std::string>()),
                                   phase_from_name(e.at("to").get<std::string>()),
                                   e.at("checksum_end").get<std::uint64_t>(),
                                   e.at("checksum_start").get<std::uint64_t>()});
      state->valid_history.clear();
      for (const json& e : h.at("valid_history"))
        state->valid_history.emplace_back(phase_from_name(e.at(0).get<std::string>()),
                                          e.at(1).get<double>());
      state->pending_handoff.reset();
      if (h.contains("pending_handoff"))
        state->pending_handoff = std::make_pair(
            phase_from_name(h["pending_handoff"].at(0).get<std::string>()),
            h["pending_handoff"].at(1).get<std::uint64_t>());
    }
    return model;
  } catch (const json::exception& e) {
    throw DataError("malformed checkpoint header in " + path.string() + ": " + e.what());
  }
}

}  // namespace ewae
