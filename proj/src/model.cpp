// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/model.hpp"

namespace ewae {

Model::Model(ModelConfig cfg) : cfg_(std::make_unique<ModelConfig>(std::move(cfg))) {
  cfg_->validate();
  seq_ = std::make_unique<SeqModel>(params_, *cfg_);
  latent_ = std::make_unique<LatentNets>(params_, *cfg_);
  critic_ = std::make_unique<Critic>(params_, *cfg_);
}

void Model::init() {
  Rng rng(cfg_->seed);
  seq_->init(rng);
  latent_->init_recognition(rng);
  latent_->init_prior(rng);
  latent_->init_generators(rng);
  critic_->init(rng);
}

void Model::reinit_prior_side(Rng& rng) {
  latent_->init_prior_side(rng);
  critic_->init(rng);
}

std::vector<Parameter*> Model::shared_parameters() const {
  auto out = seq_->parameters();
  for (Parameter* p : latent_->recognition_parameters()) out.push_back(p);
  for (Parameter* p : latent_->q_parameters()) out.push_back(p);
  return out;
}

std::vector<Parameter*> Model::generator_parameters() const {
  auto out = shared_parameters();
  for (Parameter* p : latent_->prior_parameters()) out.push_back(p);
  for (Parameter* p : latent_->g_parameters()) out.push_back(p);
  return out;
}

std::unique_ptr<Model> Model::clone() const {
  auto m = std::make_unique<Model>(*cfg_);
  auto dst = m->params_.all();
  auto src = params_.all();
  for (std::size_t i = 0; i < src.size(); ++i) dst[i]->value = src[i]->value;
  return m;
}

std::vector<std::vector<TokenId>> sample_responses(const Model& m,
                                                   std::span<const Utterance> context,
                                                   std::size_t n_samples, Rng& rng,
                                                   bool greedy) {
  std::vector<std::vector<TokenId>> out;
  out.reserve(n_samples);
  Tape t;
  Var h_c = t.constant(m.seq().encode_context(t, context).value());
  const MixtureSpec prior = m.latent().prior_forward(h_c);
  for (std::size_t s = 0; s < n_samples; ++s) {
    Var z = m.latent().generator_g(sample_prior_noise(prior, rng));
    auto res = m.seq().decode(t, z, h_c, nullptr,
                              greedy ? DecodeMode::kGreedy : DecodeMode::kSampled, &rng);
    out.push_back(std::move(res.tokens));
  }
  return out;
}

}  // namespace ewae
