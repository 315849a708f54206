// Copyright 2026 The ewae Authors
// SPDX-License-Identifier: Apache-2.0
//
// Minimal reverse-mode differentiation over dense double vectors.
//
// A Tape records one forward pass. Matrix-shaped quantities only exist as
// Parameters; everything flowing through the tape is a vector, and scalars
// are vectors of length one. Parameters live outside the tape and receive
// their gradients by accumulation when Tape::backward runs.

#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

namespace ewae {

class Parameter {
 public:
  Parameter(std::string name, std::size_t rows, std::size_t cols);

  const std::string& name() const { return name_; }
  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return value.size(); }

  std::vector<double> value;
  std::vector<double> grad;

 private:
  std::string name_;
  std::size_t rows_;
  std::size_t cols_;
};

// Owns parameters by canonical name; insertion order is the serialization order.
class ParameterSet {
 public:
  Parameter& add(const std::string& name, std::size_t rows, std::size_t cols);
  Parameter* find(const std::string& name);
  const Parameter* find(const std::string& name) const;
  Parameter& at(const std::string& name);

  std::vector<Parameter*> all();
  std::vector<const Parameter*> all() const;
  // Parameters whose name begins with one of the prefixes.
  std::vector<Parameter*> with_prefix(std::span<const std::string> prefixes);

  void zero_grad();
  std::size_t count() const;

 private:
  std::vector<std::unique_ptr<Parameter>> params_;
};

// FNV-1a over the raw bytes of every value, in order. Used to assert that
// parameters survive hand-offs untouched.
std::uint64_t checksum(std::span<const Parameter* const> params);

class Tape;

class Var {
 public:
  Var() = default;
  Var(Tape* tape, std::size_t id) : tape_(tape), id_(id) {}

  std::span<const double> value() const;
  std::size_t size() const;
  double scalar() const;  // value()[0]; requires size() == 1
  double operator[](std::size_t i) const { return value()[i]; }
  std::span<const double> grad() const;  // empty until backward reaches it

  Tape* tape() const { return tape_; }
  std::size_t id() const { return id_; }
  bool valid() const { return tape_ != nullptr; }

 private:
  Tape* tape_ = nullptr;
  std::size_t id_ = 0;
};

class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  Tape() { nodes_.reserve(1024); }
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  Var constant(std::vector<double> value);
  Var constant(std::span<const double> value);
  Var scalar(double v) { return constant(std::vector<double>{v}); }
  // Leaf mirroring a parameter's values; gradient flows back into p.grad.
  Var param(Parameter& p);

  Var push(std::vector<double> value, Backward backward);

  std::span<const double> value(std::size_t id) const { return nodes_[id].value; }
  std::vector<double>& value_mut(std::size_t id) { return nodes_[id].value; }
  std::span<const double> grad(std::size_t id) const { return nodes_[id].grad; }
  // Gradient slot of a node, allocated (zeroed) on first access.
  std::vector<double>& grad_mut(std::size_t id);
  bool has_grad(std::size_t id) const { return !nodes_[id].grad.empty(); }

  // Seeds d(root)/d(root) = seed (default 1 for scalars) and runs every
  // recorded backward closure in reverse order.
  void backward(Var root, double seed = 1.0);
  void backward(Var root, std::span<const double> seed);

  std::size_t size() const { return nodes_.size(); }

 private:
  struct Node {
    std::vector<double> value;
    std::vector<double> grad;
    Backward backward;
  };
  std::vector<Node> nodes_;
};

// Recurrent cell weights (PyTorch gate layout: reset, update, candidate).
struct GruWeights {
  Parameter* w_input;   // 3H x I
  Parameter* b_input;   // 3H
  Parameter* w_hidden;  // 3H x H
  Parameter* b_hidden;  // 3H
  std::size_t hidden() const { return w_hidden->cols(); }
  std::size_t input() const { return w_input->cols(); }
};

namespace ad {

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var scale(Var a, double c);
// a * s where s is a length-one Var.
Var scale_by(Var a, Var s);
Var add_n(std::span<const Var> xs);
Var mean_n(std::span<const Var> xs);

Var sigmoid(Var a);
Var tanh(Var a);
Var relu(Var a);
Var exp(Var a);
// Elementwise clamp; gradient is zero where the bound is active.
Var clamp(Var a, double lo, double hi);

Var concat(std::span<const Var> xs);
Var concat(std::initializer_list<Var> xs);
Var slice(Var a, std::size_t offset, std::size_t len);

// W x (+ b). W is rows x cols with cols == x.size().
Var matvec(Parameter& w, Var x);
Var affine(Parameter& w, Var x, Parameter& b);
Var embedding(Tape& t, Parameter& table, std::size_t row);
Var gru_cell(const GruWeights& w, Var x, Var h);

Var dot(Var a, Var b);
Var sum(Var a);
// Cosine similarity; throws when either norm is below min_norm.
Var cosine(Var a, Var b, double min_norm = 1e-12);
Var softmax(Var a);
// -log softmax(logits)[target]
Var nll(Var logits, std::size_t target);
// sum_i w[i] * xs[i]; w has xs.size() entries.
Var weighted_sum(std::span<const Var> xs, Var w);

}  // namespace ad
}  // namespace ewae
