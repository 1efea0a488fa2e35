#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace qphase {

// Axial next-nearest-neighbour Ising chain in a transverse field,
//   H = -J sum_j [ Z_j Z_{j+1} - kappa Z_j Z_{j+2} + g X_j ],
// with periodic boundaries. Site j (1-based) maps to bit j-1 of the basis
// index; bit value 0 means spin up (Z eigenvalue +1).
struct ChainConfig {
  int n_sites = 8;
  double kappa = 0.0;
  double g = 0.0;
  double j_coupling = 1.0;

  void validate() const {
    if (n_sites < 4 || n_sites > 14 || n_sites % 2 != 0) {
      throw std::invalid_argument("n_sites must be even and within [4, 14], got " +
                                  std::to_string(n_sites));
    }
    if (kappa < 0.0 || g < 0.0) {
      throw std::invalid_argument("kappa and g must be non-negative");
    }
    if (j_coupling <= 0.0) {
      throw std::invalid_argument("j_coupling must be positive");
    }
  }
};

// Sparse symmetric Hamiltonian in implicit form: the ZZ terms are diagonal in
// the computational basis and stored explicitly; the transverse-field term
// couples each state to its N single-bit flips with constant entry -J*g.
// Each row therefore has at most n_sites + 1 nonzeros.
class HamiltonianMatrix {
 public:
  HamiltonianMatrix(const ChainConfig& config) : config_(config) {
    config.validate();
    const int n = config.n_sites;
    const std::size_t dim = std::size_t(1) << n;
    diag_.resize(dim);
    for (std::size_t s = 0; s < dim; ++s) {
      double zz1 = 0.0, zz2 = 0.0;
      for (int j = 0; j < n; ++j) {
        const int z_j = (s >> j) & 1 ? -1 : 1;
        const int z_j1 = (s >> ((j + 1) % n)) & 1 ? -1 : 1;
        const int z_j2 = (s >> ((j + 2) % n)) & 1 ? -1 : 1;
        zz1 += z_j * z_j1;
        zz2 += z_j * z_j2;
      }
      diag_[s] = -config.j_coupling * (zz1 - config.kappa * zz2);
    }
    flip_ = -config.j_coupling * config.g;
  }

  int n_sites() const { return config_.n_sites; }
  std::size_t dimension() const { return diag_.size(); }
  const ChainConfig& config() const { return config_; }
  const std::vector<double>& diagonal() const { return diag_; }
  double flip_amplitude() const { return flip_; }

  // y = H x
  void apply(const double* x, double* y) const {
    const std::size_t dim = diag_.size();
    const int n = config_.n_sites;
    for (std::size_t s = 0; s < dim; ++s) y[s] = diag_[s] * x[s];
    if (flip_ != 0.0) {
      for (std::size_t s = 0; s < dim; ++s) {
        const double v = flip_ * x[s];
        for (int j = 0; j < n; ++j) y[s ^ (std::size_t(1) << j)] += v;
      }
    }
  }

  // Gershgorin-style bound on the spectral norm.
  double norm_bound() const {
    double dmax = 0.0;
    for (double d : diag_) dmax = std::max(dmax, std::abs(d));
    return dmax + config_.n_sites * std::abs(flip_);
  }

 private:
  ChainConfig config_;
  std::vector<double> diag_;
  double flip_;
};

inline HamiltonianMatrix build_hamiltonian(const ChainConfig& config) {
  return HamiltonianMatrix(config);
}

}  // namespace qphase
