// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include "ewae/optimizer.hpp"

#include <cmath>

#include "ewae/kernels.hpp"

namespace ewae {

void RmsProp::step(std::span<Parameter* const> params, double lr) {
  const auto& k = kernels::active();
  for (Parameter* p : params) {
    auto& ms = mean_square_[p->name()];
    if (ms.size() != p->size()) ms.assign(p->size(), 0.0);
    k.rmsprop(p->value.data(), p->grad.data(), ms.data(), p->size(), lr, rho_, eps_);
  }
}

void RmsProp::reset(std::span<Parameter* const> params) {
  for (Parameter* p : params) mean_square_.erase(p->name());
}

double clip_grad_norm(std::span<Parameter* const> params, double max_norm) {
  double sq = 0.0;
  for (const Parameter* p : params) sq += kernels::dot(p->grad, p->grad);
  const double norm = std::sqrt(sq);
  if (max_norm > 0.0 && norm > max_norm) {
    const double s = max_norm / norm;
    for (Parameter* p : params)
      for (double& g : p->grad) g *= s;
  }
  return norm;
}

bool all_finite(std::span<const Parameter* const> params) {
  for (const Parameter* p : params)
    for (double v : p->value)
      if (!std::isfinite(v)) return false;
  return true;
}

}  // namespace ewae
