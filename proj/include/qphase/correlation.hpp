#pragma once

#include <cstddef>
#include <stdexcept>

#include "qphase/lanczos.hpp"

namespace qphase {

enum class PauliAxis { X, Y, Z };

// Two-point correlator <sigma^a_i sigma^a_j> averaged with equal weight over
// the ground-subspace basis. The average equals tr(P O)/dim(P) with P the
// subspace projector, so it does not depend on the basis choice within a
// degenerate manifold. Sites are 1-based with 1 <= site_i < site_j <= N.
inline double pair_correlation(const GroundSubspace& gs, PauliAxis axis, int site_i, int site_j) {
  const int n = gs.n_sites;
  if (site_i < 1 || site_j <= site_i || site_j > n) {
    throw std::invalid_argument("pair_correlation: need 1 <= site_i < site_j <= n_sites");
  }
  if (gs.basis.empty()) {
    throw std::invalid_argument("pair_correlation: empty ground subspace");
  }
  const std::size_t bit_i = static_cast<std::size_t>(site_i - 1);
  const std::size_t bit_j = static_cast<std::size_t>(site_j - 1);
  const std::size_t mask = (std::size_t(1) << bit_i) | (std::size_t(1) << bit_j);

  double total = 0.0;
  for (const Eigen::VectorXd& v : gs.basis) {
    const std::size_t dim = static_cast<std::size_t>(v.size());
    double acc = 0.0;
    switch (axis) {
      case PauliAxis::Z:
        for (std::size_t s = 0; s < dim; ++s) {
          const int zi = (s >> bit_i) & 1 ? -1 : 1;
          const int zj = (s >> bit_j) & 1 ? -1 : 1;
          acc += v[s] * v[s] * zi * zj;
        }
        break;
      case PauliAxis::X:
        for (std::size_t s = 0; s < dim; ++s) acc += v[s] * v[s ^ mask];
        break;
      case PauliAxis::Y:
        // <s'|Y_i Y_j|s> with s' = s ^ mask is -1 when bits i and j agree
        // and +1 when they differ.
        for (std::size_t s = 0; s < dim; ++s) {
          const int bi = (s >> bit_i) & 1;
          const int bj = (s >> bit_j) & 1;
          acc += (bi == bj ? -1.0 : 1.0) * v[s] * v[s ^ mask];
        }
        break;
    }
    total += acc;
  }
  return total / static_cast<double>(gs.basis.size());
}

}  // namespace qphase
