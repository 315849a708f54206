// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// The full exemplar-augmented model: one ParameterSet shared by the sequence
// model, the latent networks and the critic.

#pragma once

#include <memory>
#include <span>
#include <vector>

#include "ewae/adversarial.hpp"
#include "ewae/autodiff.hpp"
#include "ewae/corpus.hpp"
#include "ewae/latent_mixture.hpp"
#include "ewae/seq_model.hpp"

namespace ewae {

class Model {
 public:
  explicit Model(ModelConfig cfg);
  Model(const Model&) = delete;
  Model& operator=(const Model&) = delete;

  // Initializes every parameter from cfg.seed.
  void init();
  // Fresh PriNet, G and critic (phase III start).
  void reinit_prior_side(Rng& rng);

  const ModelConfig& config() const { return *cfg_; }
  ParameterSet& params() { return params_; }
  const ParameterSet& params() const { return params_; }
  const SeqModel& seq() const { return *seq_; }
  const LatentNets& latent() const { return *latent_; }
  const Critic& critic() const { return *critic_; }

  // Parameters trained by reconstruction in phases I and II.
  std::vector<Parameter*> shared_parameters() const;
  // Every non-critic parameter (the phase-III generator side).
  std::vector<Parameter*> generator_parameters() const;
  std::vector<Parameter*> critic_parameters() const { return critic_->parameters(); }

  std::unique_ptr<Model> clone() const;

 private:
  std::unique_ptr<ModelConfig> cfg_;  // stable address for the sub-networks
  ParameterSet params_;
  std::unique_ptr<SeqModel> seq_;
  std::unique_ptr<LatentNets> latent_;
  std::unique_ptr<Critic> critic_;
};

// Prior-path generation: z = G(eps), eps ~ PriNet(c), decoded greedily (or by
// ancestral sampling when greedy is false), one fresh prior draw per sample.
std::vector<std::vector<TokenId>> sample_responses(const Model& m,
                                                   std::span<const Utterance> context,
                                                   std::size_t n_samples, Rng& rng,
                                                   bool greedy = true);

}  // namespace ewae
