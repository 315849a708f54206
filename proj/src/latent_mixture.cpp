// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/latent_mixture.hpp"

#include <stdexcept>

#include "ewae/error.hpp"

namespace ewae {

MixtureValues snapshot(const MixtureSpec& m) {
  MixtureValues v;
  for (const auto& c : m.components) {
    v.mu.emplace_back(c.mu.value().begin(), c.mu.value().end());
    v.log_var.emplace_back(c.log_var.value().begin(), c.log_var.value().end());
  }
  v.weights.assign(m.weights.value().begin(), m.weights.value().end());
  return v;
}

LatentNets::LatentNets(ParameterSet& ps, const ModelConfig& cfg) : cfg_(cfg) {
  const std::size_t H = cfg.hidden_size, L = cfg.latent_dim, F = cfg.ffn_hidden;
  rec_body_ = Mlp::make(ps, "rec", {2 * H, F, F}, Activation::kTanh, Activation::kTanh);
  rec_head_ = Linear::make(ps, "rec.head", F, 2 * L);
  pri_body_ = Mlp::make(ps, "pri", {H, F, F}, Activation::kTanh, Activation::kTanh);
  for (std::size_t i = 0; i < cfg.prior_components(); ++i)
    pri_heads_.push_back(Linear::make(ps, "pri.head" + std::to_string(i), F, 1 + 2 * L));
  q_ = Mlp::make(ps, "q", {L, F, F, L}, Activation::kRelu, Activation::kNone);
  g_ = Mlp::make(ps, "g", {L, F, F, L}, Activation::kRelu, Activation::kNone);
}

void LatentNets::init_recognition(Rng& rng) {
  for (const auto& l : rec_body_.layers) init_linear(l, rng);
  init_linear(rec_head_, rng);
}

void LatentNets::init_prior(Rng& rng) {
  for (const auto& l : pri_body_.layers) init_linear(l, rng);
  for (const auto& h : pri_heads_) init_linear(h, rng);
}

void LatentNets::init_generators(Rng& rng) {
  for (const auto& l : q_.layers) init_linear(l, rng);
  for (const auto& l : g_.layers) init_linear(l, rng);
}

void LatentNets::init_prior_side(Rng& rng) {
  init_prior(rng);
  for (const auto& l : g_.layers) init_linear(l, rng);
}

std::vector<GaussianComponent> LatentNets::recognition_forward(Var h_c,
                                                               std::span<const Var> h_r) const {
  const std::size_t H = cfg_.hidden_size, L = cfg_.latent_dim;
  if (h_c.size() != H) throw std::invalid_argument("recognition_forward: h_c dimension");
  std::vector<GaussianComponent> out;
  out.reserve(h_r.size());
  for (const Var& r : h_r) {
    if (r.size() != H) throw std::invalid_argument("recognition_forward: h_r dimension");
    Var head = rec_head_(rec_body_(ad::concat({h_c, r})));
    out.push_back({ad::slice(head, 0, L),
                   ad::clamp(ad::slice(head, L, L), -cfg_.log_var_clamp, cfg_.log_var_clamp)});
  }
  return out;
}

MixtureSpec LatentNets::prior_forward(Var h_c) const {
  const std::size_t L = cfg_.latent_dim;
  if (h_c.size() != cfg_.hidden_size) throw std::invalid_argument("prior_forward: h_c dimension");
  Var body = pri_body_(h_c);
  MixtureSpec m;
  std::vector<Var> alphas;
  for (const auto& head : pri_heads_) {
    Var out = head(body);
    alphas.push_back(ad::slice(out, 0, 1));
    m.components.push_back(
        {ad::slice(out, 1, L),
         ad::clamp(ad::slice(out, 1 + L, L), -cfg_.log_var_clamp, cfg_.log_var_clamp)});
  }
  m.weights = ad::softmax(ad::concat(alphas));
  return m;
}

std::vector<Parameter*> LatentNets::recognition_parameters() const {
  auto out = rec_body_.parameters();
  out.insert(out.end(), {rec_head_.w, rec_head_.b});
  return out;
}

std::vector<Parameter*> LatentNets::prior_parameters() const {
  auto out = pri_body_.parameters();
  for (const auto& h : pri_heads_) out.insert(out.end(), {h.w, h.b});
  return out;
}

// ---------------------------------------------------------------------------

Var posterior_weights(Var h_c, std::span<const Var> h_c_list) {
  if (h_c_list.empty()) throw std::invalid_argument("posterior_weights: empty list");
  std::vector<Var> cos;
  cos.reserve(h_c_list.size());
  try {
    for (const Var& other : h_c_list) cos.push_back(ad::cosine(h_c, other));
  } catch (const std::domain_error& e) {
    throw NumericError(std::string("posterior_weights: ") + e.what());
  }
  return ad::softmax(ad::concat(cos));
}

Var reparameterize(const GaussianComponent& c, std::span<const double> eta) {
  Tape& t = *c.mu.tape();
  Var sigma = ad::exp(ad::scale(c.log_var, 0.5));
  return ad::add(c.mu, ad::mul(sigma, t.constant(eta)));
}

Var sample_posterior_noise(const MixtureSpec& posterior, Rng& rng, PosteriorMode mode,
                           std::vector<double>* noise) {
  const auto& comps = posterior.components;
  if (comps.empty() || posterior.weights.size() != comps.size())
    throw std::invalid_argument("sample_posterior_noise: malformed mixture");
  const std::size_t L = comps[0].mu.size();
  if (noise) noise->clear();

  if (mode == PosteriorMode::kCategorical) {
    const std::size_t j = rng.categorical(posterior.weights.value());
    const auto eta = rng.normal_vector(L);
    if (noise) *noise = eta;
    return reparameterize(comps[j], eta);
  }
  std::vector<Var> draws;
  draws.reserve(comps.size());
  for (const auto& c : comps) {
    const auto eta = rng.normal_vector(L);
    if (noise) noise->insert(noise->end(), eta.begin(), eta.end());
    draws.push_back(reparameterize(c, eta));
  }
  return ad::weighted_sum(draws, posterior.weights);
}

Var sample_prior_noise(const MixtureSpec& prior, Rng& rng, std::vector<double>* noise) {
  const auto& comps = prior.components;
  if (comps.empty() || prior.weights.size() != comps.size())
    throw std::invalid_argument("sample_prior_noise: malformed mixture");
  const std::size_t j = rng.categorical(prior.weights.value());
  const auto eta = rng.normal_vector(comps[j].mu.size());
  if (noise) *noise = eta;
  return reparameterize(comps[j], eta);
}

}  // namespace ewae
