// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <span>
#include <string>
#include <vector>

#include "ewae/autodiff.hpp"

namespace ewae {

// RMSprop with one mean-square accumulator per parameter, keyed by name so
// the state survives a checkpoint round trip.
class RmsProp {
 public:
  explicit RmsProp(double rho = 0.99, double eps = 1e-8) : rho_(rho), eps_(eps) {}

  void step(std::span<Parameter* const> params, double lr);

  std::map<std::string, std::vector<double>>& state() { return mean_square_; }
  const std::map<std::string, std::vector<double>>& state() const { return mean_square_; }
  // Drops accumulators for parameters that are being re-initialized.
  void reset(std::span<Parameter* const> params);

 private:
  double rho_, eps_;
  std::map<std::string, std::vector<double>> mean_square_;
};

// Scales the gradients so their joint L2 norm is at most max_norm. Returns the
// norm before scaling.
double clip_grad_norm(std::span<Parameter* const> params, double max_norm);

bool all_finite(std::span<const Parameter* const> params);

}  // namespace ewae
