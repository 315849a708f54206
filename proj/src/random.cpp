// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/random.hpp"

#include <sstream>

#include "ewae/error.hpp"

namespace ewae {

std::vector<double> Rng::normal_vector(std::size_t n) {
  std::vector<double> out(n);
  for (double& v : out) v = normal();
  return out;
}

std::size_t Rng::categorical(std::span<const double> probs) {
  double u = uniform();
  for (std::size_t i = 0; i < probs.size(); ++i) {
    if (u < probs[i]) return i;
    u -= probs[i];
  }
  // Rounding left a sliver of mass past the end; take the last positive entry.
  for (std::size_t i = probs.size(); i-- > 0;)
    if (probs[i] > 0.0) return i;
  return probs.size() - 1;
}

std::string Rng::serialize() const {
  std::ostringstream out;
  out << engine_ << ' ' << normal_ << ' ' << uniform_;
  return out.str();
}

void Rng::deserialize(const std::string& state) {
  std::istringstream in(state);
  in >> engine_ >> normal_ >> uniform_;
  if (!in) throw DataError("corrupt RNG state");
}

}  // namespace ewae
