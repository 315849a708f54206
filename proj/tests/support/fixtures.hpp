// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <string>
#include <vector>

#include "ewae/corpus.hpp"
#include "ewae/curriculum.hpp"
#include "ewae/model.hpp"

namespace ewae::testing {

inline ContextResponsePair make_pair(PairId id, std::vector<std::string> turns,
                                     const std::string& response) {
  ContextResponsePair p;
  p.pair_id = id;
  for (const auto& t : turns) p.context.push_back(make_utterance(t));
  p.response = make_utterance(response);
  return p;
}

// Five short pairs over a small vocabulary.
inline std::vector<ContextResponsePair> toy_pairs() {
  return {
      make_pair(0, {"hello there", "do you like pizza"}, "i love pizza"),
      make_pair(1, {"what about rent"}, "rent is too high"),
      make_pair(2, {"good morning", "any coffee"}, "coffee sounds great"),
      make_pair(3, {"do you play chess"}, "chess is fun"),
      make_pair(4, {"is the train late"}, "the train is late again"),
  };
}

inline ModelConfig tiny_config(std::size_t vocab, std::size_t k = 2) {
  ModelConfig c;
  c.vocab_size = vocab;
  c.embedding_dim = 4;
  c.hidden_size = 5;
  c.latent_dim = 4;
  c.ffn_hidden = 6;
  c.k_exemplars = k;
  c.max_decode_len = 8;
  c.critic_clip = 0.5;
  c.seed = 3;
  return c;
}

// Indexed toy corpus plus its vocabulary.
struct ToyCorpus {
  std::vector<ContextResponsePair> pairs;
  Vocabulary vocab;
};

inline ToyCorpus toy_corpus() {
  ToyCorpus t;
  t.pairs = toy_pairs();
  t.vocab = build_vocabulary(t.pairs, 1, 1000);
  t.vocab.index(t.pairs);
  return t;
}

// Exemplars assigned by hand: pair i borrows pairs (i+1) and (i+2) mod 5.
inline std::vector<Example> toy_examples(const std::vector<ContextResponsePair>& pairs,
                                         std::size_t k) {
  std::vector<Example> out;
  for (std::size_t i = 0; i < pairs.size(); ++i) {
    Example e{&pairs[i], {}};
    for (std::size_t j = 1; j <= k; ++j) e.exemplars.push_back(&pairs[(i + j) % pairs.size()]);
    out.push_back(std::move(e));
  }
  return out;
}

}  // namespace ewae::testing
