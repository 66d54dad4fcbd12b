// Common vocabulary types and error classes for phasehom.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phasehom {

/// Maximum spatial dimension n and number of components N supported.
inline constexpr int kMaxDim = 3;

/// A point of R^n (n <= 3). Fixed max size, no heap allocation.
using Point = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

/// A gradient matrix in R^{N x n} (N, n <= 3).
using Grad = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, 0, kMaxDim, kMaxDim>;

/// Vector of R^N (jump amplitudes).
using Amplitude = Eigen::Matrix<double, Eigen::Dynamic, 1, 0, kMaxDim, 1>;

/// Input outside the domain of an operation (non-finite data, bad constants, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Grid spacing too coarse for the requested cell.
class ResolutionError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// A precondition of a numerical routine does not hold (e.g. a non-homogeneous
/// density passed where a recession density is required).
class PreconditionError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// The recession limit could not be resolved to the requested tolerance below the cap.
class UnresolvedRecessionError : public std::runtime_error {
 public:
  UnresolvedRecessionError(const std::string& what, double achieved_bound)
      : std::runtime_error(what), achieved_bound_(achieved_bound) {}
  double achieved_bound() const noexcept { return achieved_bound_; }

 private:
  double achieved_bound_;
};

/// A linear solve failed (factorisation breakdown or residual too large).
class SolverError : public std::runtime_error {
 public:
  SolverError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}
  double residual() const noexcept { return residual_; }

 private:
  double residual_;
};

inline bool all_finite(const Point& p) { return p.allFinite(); }
inline bool all_finite(const Grad& g) { return g.allFinite(); }

inline Point make_point(std::initializer_list<double> xs) {
  Point p(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) p(i++) = x;
  return p;
}

/// Row vector gradient (N = 1) from a list of partial derivatives.
inline Grad make_grad(std::initializer_list<double> xs) {
  Grad g(1, static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) g(0, i++) = x;
  return g;
}

inline Amplitude make_amplitude(std::initializer_list<double> xs) {
  Amplitude a(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) a(i++) = x;
  return a;
}

/// Pairwise (cascade) summation; fixed reduction order for reproducibility.
template <class It>
double pairwise_sum(It first, It last) {
  const auto count = std::distance(first, last);
  if (count <= 8) {
    double s = 0.0;
    for (; first != last; ++first) s += *first;
    return s;
  }
  It mid = first;
  std::advance(mid, count / 2);
  return pairwise_sum(first, mid) + pairwise_sum(mid, last);
}

inline double pairwise_sum(const std::vector<double>& xs) {
  return pairwise_sum(xs.begin(), xs.end());
}

}  // namespace phasehom
