#pragma once

// Reference solver for tiny SVM duals: minimize 0.5 a'Qa - e'a subject to
// 0 <= a <= C, y'a = 0, by brute-force enumeration of active sets. Each
// variable is pinned at 0, pinned at C, or free; free variables are solved
// from the KKT equations with a Lagrange multiplier for the equality
// constraint. Exponential in n, intended for n <= 8.

#include <Eigen/Dense>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace oracle {

struct QpSolution {
  Eigen::VectorXd alpha;
  double objective = std::numeric_limits<double>::infinity();
  double bias = 0.0;  // from the stationarity multiplier
};

inline QpSolution solve_box_qp(const Eigen::MatrixXd& q, const std::vector<int>& y, double c) {
  const int n = static_cast<int>(q.rows());
  if (n > 12) throw std::invalid_argument("solve_box_qp: too many variables");
  QpSolution best;

  std::vector<int> state(static_cast<std::size_t>(n), 0);  // 0 = at 0, 1 = at C, 2 = free
  const long total = static_cast<long>(std::pow(3.0, n));
  for (long code = 0; code < total; ++code) {
    long rest = code;
    for (int i = 0; i < n; ++i) {
      state[static_cast<std::size_t>(i)] = static_cast<int>(rest % 3);
      rest /= 3;
    }
    std::vector<int> free_idx;
    Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
    for (int i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == 1) alpha[i] = c;
      if (state[static_cast<std::size_t>(i)] == 2) free_idx.push_back(i);
    }
    const int nf = static_cast<int>(free_idx.size());

    // stationarity for free vars: Q_ff a_f + Q_fp a_p - e + mu * y_f = 0,
    // plus the equality constraint y'a = 0
    Eigen::MatrixXd sys(nf + 1, nf + 1);
    Eigen::VectorXd rhs(nf + 1);
    sys.setZero();
    double pinned_dot = 0.0;
    for (int i = 0; i < n; ++i) {
      if (state[static_cast<std::size_t>(i)] == 1) pinned_dot += y[i] * c;
    }
    for (int r = 0; r < nf; ++r) {
      const int i = free_idx[static_cast<std::size_t>(r)];
      for (int s = 0; s < nf; ++s) sys(r, s) = q(i, free_idx[static_cast<std::size_t>(s)]);
      sys(r, nf) = y[i];
      double fixed = 0.0;
      for (int t = 0; t < n; ++t) {
        if (state[static_cast<std::size_t>(t)] == 1) fixed += q(i, t) * c;
      }
      rhs[r] = 1.0 - fixed;
      sys(nf, r) = y[i];
    }
    rhs[nf] = -pinned_dot;
    if (nf == 0) {
      if (std::abs(pinned_dot) > 1e-9) continue;  // equality constraint violated
    }

    double mu = 0.0;
    if (nf > 0) {
      const Eigen::VectorXd sol = sys.fullPivLu().solve(rhs);
      if (!sol.allFinite()) continue;
      bool ok = true;
      for (int r = 0; r < nf; ++r) {
        alpha[free_idx[static_cast<std::size_t>(r)]] = sol[r];
        if (sol[r] < -1e-9 || sol[r] > c + 1e-9) ok = false;
      }
      if (!ok) continue;
      mu = sol[nf];
    }

    // KKT sign conditions at the bounds (any feasible mu works when nf == 0)
    const Eigen::VectorXd grad = q * alpha - Eigen::VectorXd::Ones(n);
    bool kkt = true;
    if (nf == 0) {
      double lo = -std::numeric_limits<double>::infinity();
      double hi = std::numeric_limits<double>::infinity();
      for (int i = 0; i < n; ++i) {
        // need grad_i + mu y_i >= 0 at the lower bound, <= 0 at the upper
        if (state[static_cast<std::size_t>(i)] == 0) {
          if (y[i] > 0) lo = std::max(lo, -grad[i]); else hi = std::min(hi, grad[i]);
        } else {
          if (y[i] > 0) hi = std::min(hi, -grad[i]); else lo = std::max(lo, grad[i]);
        }
      }
      if (lo > hi + 1e-9) kkt = false;
      mu = 0.5 * (std::max(lo, -1e9) + std::min(hi, 1e9));
    } else {
      for (int i = 0; i < n; ++i) {
        const double slack = grad[i] + mu * y[i];
        if (state[static_cast<std::size_t>(i)] == 0 && slack < -1e-9) kkt = false;
        if (state[static_cast<std::size_t>(i)] == 1 && slack > 1e-9) kkt = false;
      }
    }
    if (!kkt) continue;

    // stationarity G_i + mu y_i = 0 for free i gives decision bias b = mu
    const double obj = 0.5 * alpha.dot(q * alpha) - alpha.sum();
    if (obj < best.objective - 1e-12) {
      best.alpha = alpha;
      best.objective = obj;
      best.bias = mu;
    }
  }
  if (!best.alpha.size()) throw std::runtime_error("solve_box_qp: no KKT point found");
  return best;
}

}  // namespace oracle
