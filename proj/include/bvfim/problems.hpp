#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "bvfim/problem.hpp"

namespace bvfim {

/// F = (x - a)^2 + (y - a)^2,  f = sin(x + y). Non-convex lower level with
/// solution set {y : x + y = -pi/2 + 2 pi j}.
Problem make_toy(double a);

/// f = 1/2 |y - A x|^2,  F = 1/2 |x|^2 + 1/2 |y - b|^2.
/// y*(x) = A x,  phi(x) = 1/2 |x|^2 + 1/2 |A x - b|^2.
struct QuadraticProblem {
  Matrix A;  // n x m
  Vec b;     // n
  Problem problem;

  double phi(VecView x) const;
  Vec grad_phi(VecView x) const;
  /// Unique minimizer of phi: (I + A^T A)^{-1} A^T b.
  Vec argmin_phi() const;
};

/// Throws Error(Config) when A and b disagree in their row count.
QuadraticProblem make_quadratic(Matrix A, Vec b);

/// A with iid N(0, 1/n) entries and b with iid N(0, 1) entries.
QuadraticProblem make_random_quadratic(std::size_t n, std::size_t m, std::uint64_t seed);

enum class Arch { Linear, TwoLayer };

std::string to_string(Arch arch);
Arch parse_arch(const std::string& text);

struct Dataset {
  Matrix features;          // samples x d
  std::vector<int> labels;  // observed labels
};

struct HyperCleanOptions {
  std::size_t d = 20;
  std::size_t classes = 3;
  std::size_t n_tr = 300;
  std::size_t n_val = 300;
  std::size_t n_test = 600;
  Arch arch = Arch::Linear;
  std::size_t hidden = 16;
  double separation = 3.0;
  std::uint64_t seed = 0;
};

/// Data hyper-cleaning with per-sample weights sigmoid(x_i) on the
/// training loss:
///   f(x, y) = sum_tr sigmoid(x_i) CE(y; u_i, v_i),   F(x, y) = sum_val CE(y; u, v).
/// Linear:    y = (W: classes x d, bias: classes),   logits = W u + bias.
/// TwoLayer:  y = (W2: classes x hidden, W1: hidden x d),  logits = W2 W1 u.
struct HyperCleanProblem {
  HyperCleanOptions options;
  std::shared_ptr<const Dataset> train;
  std::shared_ptr<const Dataset> val;
  std::shared_ptr<const Dataset> test;
  std::vector<int> clean_train_labels;
  std::vector<bool> corrupted;  // ground truth, never seen by the oracles
  Problem problem;

  double accuracy(VecView y, const Dataset& data) const;
  /// Small seeded Gaussian init (std 0.1); zero is a saddle for TwoLayer.
  Vec initial_y(std::uint64_t seed) const;
};

/// Throws Error(Config) when classes < 2, classes > d, or any size is zero.
HyperCleanProblem make_hyperclean(const HyperCleanOptions& options);

struct DetectionScore {
  double precision = 0.0;
  double recall = 0.0;
  double f1 = 0.0;
};

/// Samples with x_i <= 0 are predicted as corrupted.
DetectionScore detection_f1(VecView x, const std::vector<bool>& mask);

double sigmoid(double t);

}  // namespace bvfim
