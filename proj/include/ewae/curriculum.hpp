// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Three-phase curriculum:
//   I   reconstruct the gold response from a single-Gaussian posterior
//   II  reconstruct each exemplar response from its own posterior component,
//       weighted by context similarity (softmax over exemplars only)
//   III full mixture posterior + mixture prior + critic, minimizing L3
// Phases run in that order; any of I and II can be skipped for ablations.

#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ewae/corpus.hpp"
#include "ewae/model.hpp"
#include "ewae/optimizer.hpp"
#include "ewae/random.hpp"
#include "ewae/retrieval.hpp"

namespace ewae {

enum class Phase { kI = 1, kII = 2, kIII = 3, kDone = 4 };
const char* phase_name(Phase p);
Phase phase_from_name(const std::string& s);

struct CurriculumSchedule {
  std::size_t phase1_epochs = 10;
  std::size_t phase2_epochs = 10;
  std::size_t phase3_epochs = 30;
  double lr_phase1 = 1e-3;
  double lr_phase2 = 1e-3;
  double lr_phase3 = 1e-3;
  double lr_critic = 5e-5;
  bool skip_phase1 = false;
  bool skip_phase2 = false;
  bool skip_all_curriculum = false;
  std::size_t patience = 5;  // phase-III early stopping; 0 disables

  void validate() const;
  bool runs(Phase p) const;
};

struct TrainConfig {
  std::size_t batch_size = 32;
  std::size_t critic_steps = 5;
  double grad_clip = 5.0;  // global L2 norm; 0 disables
  double rms_rho = 0.99;
  double rms_eps = 1e-8;
  std::uint64_t seed = 1;
  std::filesystem::path out_dir;  // checkpoints + log; empty -> nothing written
  std::string config_echo;        // resolved run config, embedded in artifacts
  std::string ablation_label;     // recorded in the log header
};

struct Handoff {
  Phase from, to;
  std::uint64_t checksum_end;    // shared parameters when `from` finished
  std::uint64_t checksum_start;  // shared parameters when `to` began
};

struct TrainState {
  Phase phase = Phase::kI;
  std::size_t epoch = 0;        // within the current phase
  std::size_t global_step = 0;
  Rng rng;
  RmsProp optimizer;
  RmsProp critic_optimizer;
  double best_valid = 0.0;
  bool has_best = false;
  std::vector<Handoff> handoffs;
  // Validation per-token NLL after every epoch, with the phase that produced it.
  std::vector<std::pair<Phase, double>> valid_history;
  double phase3_start_valid = 0.0;
  std::size_t epochs_since_best = 0;
  bool stopped_early = false;  // phase-III patience ran out
  bool in_progress = false;    // current phase has been entered
  // Phase that just finished and its shared-parameter checksum, consumed when
  // the next phase begins.
  std::optional<std::pair<Phase, std::uint64_t>> pending_handoff;
};

// One training instance with its retrieved exemplars resolved to pairs.
struct Example {
  const ContextResponsePair* pair = nullptr;
  std::vector<const ContextResponsePair*> exemplars;
};

// Retrieves k exemplars for every query from the index and resolves them to
// entries of `pool` (matched by pair_id). Self-exclusion as requested.
std::vector<Example> attach_exemplars(std::span<const ContextResponsePair> queries,
                                      std::span<const ContextResponsePair> pool,
                                      const Bm25Index& index, std::size_t k,
                                      bool exclude_self);

// --- Per-example objectives (sequence-summed NLL) ---------------------------

// Single-Gaussian posterior from the gold pair alone, z = Q(eps).
Var phase1_loss(Tape& t, const Model& m, const Example& ex, Rng& rng);
// The same objective routed through the mixture machinery with k = 0.
Var phase1_loss_via_mixture(Tape& t, const Model& m, const Example& ex, Rng& rng);

struct Phase2Terms {
  Var loss;                   // sum_i s_i * nll_i
  std::vector<double> weights;
  std::vector<double> nlls;
};
Phase2Terms phase2_terms(Tape& t, const Model& m, const Example& ex, Rng& rng);

struct Phase3Terms {
  Var recon;  // -log p(r | c, z_post)
  Var disc;   // D(z_post, c) - D(z_prior, c)
  Var total;  // recon + disc
  Var z_post, z_prior, h_c;
};
// h_c enters the critic as a constant (no critic gradient into the encoder).
Phase3Terms phase3_terms(Tape& t, const Model& m, const Example& ex, Rng& rng);

// Teacher-forced NLL under the full posterior evaluated at its mean (eta = 0).
// Returns (sequence NLL, token count including EOS).
std::pair<double, std::size_t> posterior_mean_nll(const Model& m, const Example& ex);
double validation_nll(const Model& m, std::span<const Example> examples);

// --- Training ---------------------------------------------------------------

struct StepStats {
  double recon = 0.0;  // batch-mean sequence NLL
  double disc = 0.0;
  double total = 0.0;
  std::size_t tokens = 0;    // target tokens in the batch (EOS included)
  std::size_t examples = 0;  // batch size
  double recon_per_token() const;
};

class Trainer {
 public:
  Trainer(Model& model, TrainConfig cfg, CurriculumSchedule schedule,
          std::vector<Example> train, std::vector<Example> valid);

  StepStats phase1_step(std::span<const Example> batch);
  StepStats phase2_step(std::span<const Example> batch);
  StepStats phase3_step(std::span<const Example> batch);
  // Critic ascent on L_disc for one batch (one step), followed by clipping.
  double critic_step(std::span<const Example> batch);

  // Runs the remaining phases from state().phase, honoring skip flags.
  void run();
  void run_phase(Phase p);

  TrainState& state() { return state_; }
  const TrainState& state() const { return state_; }
  Model& model() { return model_; }

  // Called after each optimizer step with (phase, epoch, stats).
  std::function<void(Phase, std::size_t, const StepStats&)> on_step;
  // Optional destination for the CSV training log.
  std::ostream* log = nullptr;

  void write_log_header();

 private:
  std::vector<std::vector<const Example*>> make_batches(std::span<const Example> pool);
  void guard(const StepStats& s, Phase p);
  void record_step(Phase p, const StepStats& s);
  void checkpoint(const std::string& tag);

  Model& model_;
  TrainConfig cfg_;
  CurriculumSchedule schedule_;
  std::vector<Example> train_, valid_;
  TrainState state_;
  double wall_start_ = 0.0;
};

// --- Checkpoints ------------------------------------------------------------

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct CheckpointInfo {
  ModelConfig model;
  Phase phase = Phase::kI;
  std::size_t global_step = 0;
  std::string config_echo;
  std::uint64_t config_hash = 0;
  std::uint64_t shared_checksum = 0;
};

void save_checkpoint(const std::filesystem::path& path, const Model& m,
                     const TrainState& s, const std::string& config_echo);
// Loads the model (and, when state is non-null, the training state).
std::unique_ptr<Model> load_checkpoint(const std::filesystem::path& path,
                                       TrainState* state = nullptr,
                                       CheckpointInfo* info = nullptr);

std::uint64_t fnv1a(std::string_view s);

}  // namespace ewae
