// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0

#include <atomic>
#include <cstdlib>
#include <string>

#include "ewae/kernels.hpp"

namespace ewae::kernels {
namespace {

Backend detect() {
  if (const char* env = std::getenv("EWAE_KERNELS")) {
    const std::string want(env);
    if (want == "scalar") return Backend::kScalar;
    if (want == "avx2" && cpu_has_avx2()) return Backend::kAvx2;
  }
  return cpu_has_avx2() ? Backend::kAvx2 : Backend::kScalar;
}

std::atomic<const KernelTable*> g_table{nullptr};
std::atomic<Backend> g_backend{Backend::kScalar};

}  // namespace

void set_backend(Backend b) {
  g_table.store(b == Backend::kAvx2 ? &avx2_table() : &scalar_table());
  g_backend.store(b);
}

const KernelTable& active() {
  const KernelTable* t = g_table.load(std::memory_order_acquire);
  if (t == nullptr) {
    set_backend(detect());
    t = g_table.load();
  }
  return *t;
}

Backend active_backend() {
  active();
  return g_backend.load();
}

std::string_view backend_name(Backend b) {
  return b == Backend::kAvx2 ? "avx2" : "scalar";
}

}  // namespace ewae::kernels
