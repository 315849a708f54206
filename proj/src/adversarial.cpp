// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/adversarial.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "ewae/error.hpp"

namespace ewae {

Critic::Critic(ParameterSet& ps, const ModelConfig& cfg) : cfg_(cfg) {
  const std::size_t in = cfg.latent_dim + cfg.hidden_size;
  net_ = Mlp::make(ps, "d", {in, cfg.ffn_hidden, cfg.ffn_hidden, 1}, Activation::kRelu,
                   Activation::kNone);
}

void Critic::init(Rng& rng) {
  // Start inside the clipping box.
  std::uniform_real_distribution<double> dist(-cfg_.critic_clip, cfg_.critic_clip);
  for (Parameter* p : net_.parameters())
    for (double& v : p->value) v = dist(rng.engine());
}

Var Critic::operator()(Var z, Var h_c) const {
  if (z.size() != cfg_.latent_dim || h_c.size() != cfg_.hidden_size)
    throw std::invalid_argument("critic: input dimension mismatch");
  return net_(ad::concat({z, h_c}));
}

void Critic::clip(double bound) const {
  for (Parameter* p : net_.parameters())
    for (double& v : p->value) v = std::clamp(v, -bound, bound);
}

Var disc_loss(const Critic& critic, std::span<const Var> z_post,
              std::span<const Var> z_prior, std::span<const Var> h_c) {
  if (z_post.empty()) throw std::invalid_argument("disc_loss: empty batch");
  if (z_post.size() != z_prior.size() || z_post.size() != h_c.size())
    throw std::invalid_argument("disc_loss: batch sizes differ");
  std::vector<Var> post, prior;
  for (std::size_t i = 0; i < z_post.size(); ++i) {
    post.push_back(critic(z_post[i], h_c[i]));
    prior.push_back(critic(z_prior[i], h_c[i]));
  }
  return ad::sub(ad::mean_n(post), ad::mean_n(prior));
}

Var phase3_loss(Var recon_nll, Var disc) {
  if (!std::isfinite(recon_nll.scalar()) || !std::isfinite(disc.scalar()))
    throw NumericError("phase3_loss: non-finite term");
  return ad::add(recon_nll, disc);
}

}  // namespace ewae
