// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Context-conditioned WGAN critic D([z; h(c)]) and the matching objective
//
//   L_disc = E[D(Q(eps_post), c)] - E[D(G(eps_prior), c)].
//
// The critic ascends L_disc with its weights clipped to [-clip, clip] after
// every step. Everything else descends L3 = recon NLL + L_disc, which is the
// negation of "maximize log-likelihood minus the Wasserstein estimate".

#pragma once

#include <span>
#include <vector>

#include "ewae/autodiff.hpp"
#include "ewae/nn.hpp"
#include "ewae/seq_model.hpp"

namespace ewae {

class Critic {
 public:
  Critic(ParameterSet& ps, const ModelConfig& cfg);

  void init(Rng& rng);
  Var operator()(Var z, Var h_c) const;
  // Clamp every critic parameter into [-clip, clip].
  void clip(double bound) const;
  std::vector<Parameter*> parameters() const { return net_.parameters(); }
  const Mlp& net() const { return net_; }

 private:
  const ModelConfig& cfg_;
  Mlp net_;
};

// Mean critic score over the posterior batch minus mean over the prior batch.
// All three spans must have the same non-zero length.
Var disc_loss(const Critic& critic, std::span<const Var> z_post,
              std::span<const Var> z_prior, std::span<const Var> h_c);

// L3 = recon_nll + disc. Both must be finite scalars.
Var phase3_loss(Var recon_nll, Var disc);

}  // namespace ewae
