// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Recurrent encoders and the latent-conditioned decoder.
//
//   utterance encoder  bidirectional GRU over word embeddings; the two final
//                      states are concatenated and linearly projected to H
//   context encoder    unidirectional GRU over utterance encodings -> h(c)
//   decoder            GRU with h0 = A [z; h(c)] + a; every step reads
//                      [emb(prev); z; h(c)] and emits a softmax over the vocab

#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "ewae/autodiff.hpp"
#include "ewae/corpus.hpp"
#include "ewae/nn.hpp"
#include "ewae/random.hpp"

namespace ewae {

enum class PosteriorMode { kWeightedSum, kCategorical };

struct ModelConfig {
  std::size_t vocab_size = 0;
  std::size_t embedding_dim = 200;
  std::size_t hidden_size = 300;
  std::size_t latent_dim = 200;
  std::size_t ffn_hidden = 200;
  std::size_t k_exemplars = 4;
  std::size_t n_prior_components = 0;  // 0 -> k_exemplars + 1
  std::size_t max_decode_len = 40;
  double log_var_clamp = 10.0;
  double critic_clip = 0.01;
  PosteriorMode posterior_mode = PosteriorMode::kWeightedSum;
  std::uint64_t seed = 1;

  std::size_t prior_components() const {
    return n_prior_components == 0 ? k_exemplars + 1 : n_prior_components;
  }
  // Throws ConfigError naming the first bad field.
  void validate() const;
};

enum class DecodeMode { kTeacherForced, kSampled, kGreedy };

struct DecodeResult {
  std::vector<TokenId> tokens;        // generated (or target) tokens, EOS excluded
  std::vector<double> step_log_probs; // log p of each emitted token, EOS included
  Var nll;                            // teacher-forced only: -sum log p(r|c,z)
};

class SeqModel {
 public:
  SeqModel(ParameterSet& ps, const ModelConfig& cfg);

  void init(Rng& rng);

  Var encode_utterance(Tape& t, const Utterance& u) const;
  Var encode_context(Tape& t, std::span<const Utterance> context) const;

  // Teacher-forced mode requires target; generation modes stop at EOS or
  // max_decode_len. Sampled mode requires rng.
  DecodeResult decode(Tape& t, Var z, Var h_c, const Utterance* target,
                      DecodeMode mode, Rng* rng = nullptr) const;
  Var reconstruction_nll(Tape& t, Var z, Var h_c, const Utterance& target) const;

  std::vector<Parameter*> parameters() const;

 private:
  Var decoder_step(Tape& t, Var& h, TokenId prev, Var zc) const;

  const ModelConfig& cfg_;
  Parameter* embed_;
  GruWeights utt_fwd_, utt_bwd_;
  Linear utt_proj_;
  GruWeights ctx_gru_;
  Linear dec_init_;
  GruWeights dec_gru_;
  Linear dec_out_;
};

}  // namespace ewae
