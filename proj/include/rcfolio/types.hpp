#pragma once

#include <Eigen/Dense>

namespace rcfolio {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

constexpr double kTradingDaysPerYear = 252.0;
constexpr double kSimplexTolerance = 1e-9;

// Non-negative entries summing to one within `tol`.
inline bool on_simplex(const Vector& w, double tol = kSimplexTolerance) {
  if (w.size() == 0) return false;
  for (Eigen::Index i = 0; i < w.size(); ++i) {
    if (!(w[i] >= 0.0)) return false;
  }
  return std::abs(w.sum() - 1.0) <= tol;
}

}  // namespace rcfolio
