// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Gaussian-mixture posterior and prior over the latent noise, and the two
// generators that turn noise into latent codes.
//
// Posterior: one component per response (index 0 = gold, 1..k = exemplars),
//   [mu_i; log var_i] = W f([h(c); h(r_i)]) + b with a single shared head,
//   weighted by s = softmax_i cos(h(c), h(c_i)).
// Prior: n components from the context alone,
//   [alpha_i; mu_i; log var_i] = W_i g(h(c)) + b_i with one head per component,
//   weighted by pi = softmax(alpha).
// z_post = Q(eps_post), z_prior = G(eps_prior).

#pragma once

#include <span>
#include <vector>

#include "ewae/autodiff.hpp"
#include "ewae/nn.hpp"
#include "ewae/random.hpp"
#include "ewae/seq_model.hpp"

namespace ewae {

struct GaussianComponent {
  Var mu;
  Var log_var;  // clamped to [-clamp, clamp]
};

struct MixtureSpec {
  std::vector<GaussianComponent> components;
  Var weights;  // simplex, one entry per component
};

enum class LatentSource { kPosterior, kPrior };

struct LatentSample {
  Var z;
  LatentSource source = LatentSource::kPosterior;
  std::vector<double> noise;  // standard-normal draws behind the sample
};

// Value-level snapshot of a mixture, for logging and inspection.
struct MixtureValues {
  std::vector<std::vector<double>> mu, log_var;
  std::vector<double> weights;
};
MixtureValues snapshot(const MixtureSpec& m);

class LatentNets {
 public:
  LatentNets(ParameterSet& ps, const ModelConfig& cfg);

  void init_recognition(Rng& rng);
  void init_prior(Rng& rng);
  void init_generators(Rng& rng);  // Q and G
  void init_prior_side(Rng& rng);  // PriNet and G only

  std::vector<GaussianComponent> recognition_forward(Var h_c,
                                                     std::span<const Var> h_r) const;
  MixtureSpec prior_forward(Var h_c) const;

  Var generator_q(Var eps) const { return q_(eps); }
  Var generator_g(Var eps) const { return g_(eps); }

  std::vector<Parameter*> recognition_parameters() const;
  std::vector<Parameter*> prior_parameters() const;
  std::vector<Parameter*> q_parameters() const { return q_.parameters(); }
  std::vector<Parameter*> g_parameters() const { return g_.parameters(); }

 private:
  const ModelConfig& cfg_;
  Mlp rec_body_;
  Linear rec_head_;
  Mlp pri_body_;
  std::vector<Linear> pri_heads_;
  Mlp q_, g_;
};

// s_i = exp(cos(h_c, h_c_list[i])) / sum_j exp(cos(h_c, h_c_list[j])).
// h_c_list[0] is h(c) itself in the full posterior.
Var posterior_weights(Var h_c, std::span<const Var> h_c_list);

// Weighted-sum mode: eps = sum_i s_i (mu_i + sigma_i * eta_i), eta_i ~ N(0, I).
// Categorical mode: j ~ Cat(s), eps = mu_j + sigma_j * eta.
// `noise` receives the eta draws (all components, or the chosen one).
Var sample_posterior_noise(const MixtureSpec& posterior, Rng& rng, PosteriorMode mode,
                           std::vector<double>* noise = nullptr);
// Single reparameterized draw mu + sigma * eta with eta supplied.
Var reparameterize(const GaussianComponent& c, std::span<const double> eta);
// True mixture draw: j ~ Cat(pi), eps = mu_j + sigma_j * eta.
Var sample_prior_noise(const MixtureSpec& prior, Rng& rng,
                       std::vector<double>* noise = nullptr);

}  // namespace ewae
