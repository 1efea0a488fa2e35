#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "qphase/rng.hpp"

namespace qphase {

using Complex = std::complex<double>;

// Dense statevector over n qubits. Qubit k maps to bit k of the basis index
// (qubit 0 is the least significant bit); rendered bitstrings put qubit n-1
// leftmost.
struct Statevector {
  int n_qubits = 0;
  std::vector<Complex> amp;

  static Statevector zero(int n) {
    if (n < 1 || n > 10) throw std::invalid_argument("Statevector: n_qubits must be in [1, 10]");
    Statevector s;
    s.n_qubits = n;
    s.amp.assign(std::size_t(1) << n, Complex(0.0, 0.0));
    s.amp[0] = 1.0;
    return s;
  }

  std::size_t dimension() const { return amp.size(); }

  double norm() const {
    double acc = 0.0;
    for (const Complex& a : amp) acc += std::norm(a);
    return std::sqrt(acc);
  }
};

namespace gates {

template <class F>
inline void for_each_pair(Statevector& s, int qubit, F&& f) {
  const std::size_t stride = std::size_t(1) << qubit;
  const std::size_t dim = s.amp.size();
  for (std::size_t base = 0; base < dim; base += 2 * stride) {
    for (std::size_t low = 0; low < stride; ++low) {
      f(s.amp[base + low], s.amp[base + low + stride]);
    }
  }
}

inline void hadamard(Statevector& s, int qubit) {
  static constexpr double inv_sqrt2 = 0.70710678118654752440;
  for_each_pair(s, qubit, [](Complex& a0, Complex& a1) {
    const Complex t0 = a0, t1 = a1;
    a0 = inv_sqrt2 * (t0 + t1);
    a1 = inv_sqrt2 * (t0 - t1);
  });
}

// diag(e^{+i angle}, e^{-i angle}): the action of exp(i * angle * Z)
inline void z_phase(Statevector& s, int qubit, double angle) {
  const Complex up(std::cos(angle), std::sin(angle));
  const Complex dn = std::conj(up);
  for_each_pair(s, qubit, [&](Complex& a0, Complex& a1) {
    a0 *= up;
    a1 *= dn;
  });
}

inline void ry(Statevector& s, int qubit, double theta) {
  const double c = std::cos(0.5 * theta), sn = std::sin(0.5 * theta);
  for_each_pair(s, qubit, [&](Complex& a0, Complex& a1) {
    const Complex t0 = a0, t1 = a1;
    a0 = c * t0 - sn * t1;
    a1 = sn * t0 + c * t1;
  });
}

inline void rz(Statevector& s, int qubit, double theta) {
  const Complex dn(std::cos(0.5 * theta), std::sin(0.5 * theta));
  const Complex up = std::conj(dn);
  for_each_pair(s, qubit, [&](Complex& a0, Complex& a1) {
    a0 *= up;
    a1 *= dn;
  });
}

inline void cnot(Statevector& s, int control, int target) {
  const std::size_t cbit = std::size_t(1) << control;
  const std::size_t tbit = std::size_t(1) << target;
  const std::size_t dim = s.amp.size();
  for (std::size_t i = 0; i < dim; ++i) {
    if ((i & cbit) && !(i & tbit)) std::swap(s.amp[i], s.amp[i | tbit]);
  }
}

}  // namespace gates

struct FeatureMapSpec {
  int n_qubits = 0;
  int reps = 3;

  void validate() const {
    if (n_qubits < 1 || n_qubits > 10) {
      throw std::invalid_argument("FeatureMapSpec: n_qubits must be in [1, 10]");
    }
    if (reps < 1) throw std::invalid_argument("FeatureMapSpec: reps must be >= 1");
  }
};

struct AnsatzSpec {
  int n_qubits = 0;
  int layers = 5;  // entangling layers; rotation layers = layers + 1

  void validate() const {
    if (n_qubits < 1 || n_qubits > 10) {
      throw std::invalid_argument("AnsatzSpec: n_qubits must be in [1, 10]");
    }
    if (layers < 0) throw std::invalid_argument("AnsatzSpec: layers must be >= 0");
  }

  int param_count() const { return 2 * n_qubits * (layers + 1); }
};

// Z feature map: reps repetitions of a Hadamard layer followed by the
// data-dependent phase layer exp(i * 2 x_k * Z_k) on every qubit. Features
// are nominally min-max scaled into [0, 1], but values outside that range
// encode fine (phases simply wrap), so no clipping happens here.
inline Statevector zfeature_map(const Eigen::VectorXd& x, const FeatureMapSpec& spec) {
  spec.validate();
  if (x.size() != spec.n_qubits) {
    throw std::invalid_argument("zfeature_map: feature count must equal n_qubits");
  }
  Statevector s = Statevector::zero(spec.n_qubits);
  for (int rep = 0; rep < spec.reps; ++rep) {
    for (int q = 0; q < spec.n_qubits; ++q) gates::hadamard(s, q);
    for (int q = 0; q < spec.n_qubits; ++q) gates::z_phase(s, q, 2.0 * x[q]);
  }
  return s;
}

// |<a|b>|^2
inline double fidelity_kernel(const Statevector& a, const Statevector& b) {
  if (a.n_qubits != b.n_qubits) {
    throw std::invalid_argument("fidelity_kernel: qubit counts differ");
  }
  Complex overlap(0.0, 0.0);
  for (std::size_t i = 0; i < a.amp.size(); ++i) overlap += std::conj(a.amp[i]) * b.amp[i];
  return std::norm(overlap);
}

namespace detail {

inline Eigen::MatrixXcd encode_rows(const Eigen::MatrixXd& x, const FeatureMapSpec& spec) {
  const Eigen::Index n = x.rows();
  Eigen::MatrixXcd states(Eigen::Index(1) << spec.n_qubits, n);
  for (Eigen::Index r = 0; r < n; ++r) {
    const Statevector s = zfeature_map(x.row(r).transpose(), spec);
    for (std::size_t i = 0; i < s.amp.size(); ++i) states(Eigen::Index(i), r) = s.amp[i];
  }
  return states;
}

}  // namespace detail

// Fidelity-kernel Gram matrix between row sets; each row is encoded exactly
// once. Pass the same matrix object twice (or use the one-argument overload)
// for the symmetric training Gram, which is filled with an exact unit
// diagonal and mirrored entries.
inline Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x_left, const Eigen::MatrixXd& x_right,
                                   const FeatureMapSpec& spec) {
  const bool symmetric = &x_left == &x_right;
  const Eigen::MatrixXcd left = detail::encode_rows(x_left, spec);
  const Eigen::MatrixXcd right = symmetric ? Eigen::MatrixXcd() : detail::encode_rows(x_right, spec);
  const Eigen::MatrixXcd& rhs = symmetric ? left : right;

  Eigen::MatrixXd k(x_left.rows(), x_right.rows());
  const Eigen::Index block = 512;
  for (Eigen::Index r0 = 0; r0 < k.rows(); r0 += block) {
    const Eigen::Index rows = std::min(block, k.rows() - r0);
    k.middleRows(r0, rows).noalias() =
        (left.middleCols(r0, rows).adjoint() * rhs).cwiseAbs2();
  }
  if (symmetric) {
    for (Eigen::Index i = 0; i < k.rows(); ++i) {
      k(i, i) = 1.0;
      for (Eigen::Index j = i + 1; j < k.cols(); ++j) k(j, i) = k(i, j);
    }
  }
  return k;
}

inline Eigen::MatrixXd gram_matrix(const Eigen::MatrixXd& x, const FeatureMapSpec& spec) {
  return gram_matrix(x, x, spec);
}

// Hardware-efficient ansatz: layers+1 rotation layers (RY on every qubit,
// then RZ on every qubit), with a linear CNOT chain (control q, target q+1)
// between consecutive rotation layers. theta is ordered layer by layer:
// [RY q0..q_{n-1}, RZ q0..q_{n-1}] per rotation layer.
inline Statevector apply_ansatz(const Statevector& input, const Eigen::VectorXd& theta,
                                const AnsatzSpec& spec) {
  spec.validate();
  if (input.n_qubits != spec.n_qubits) {
    throw std::invalid_argument("apply_ansatz: state/spec qubit counts differ");
  }
  if (theta.size() != spec.param_count()) {
    throw std::invalid_argument("apply_ansatz: expected " + std::to_string(spec.param_count()) +
                                " parameters, got " + std::to_string(theta.size()));
  }
  Statevector s = input;
  const int n = spec.n_qubits;
  for (int layer = 0; layer <= spec.layers; ++layer) {
    const int base = 2 * n * layer;
    for (int q = 0; q < n; ++q) gates::ry(s, q, theta[base + q]);
    for (int q = 0; q < n; ++q) gates::rz(s, q, theta[base + n + q]);
    if (layer < spec.layers) {
      for (int q = 0; q + 1 < n; ++q) gates::cnot(s, q, q + 1);
    }
  }
  return s;
}

inline std::vector<double> born_probabilities(const Statevector& s) {
  std::vector<double> p(s.amp.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::norm(s.amp[i]);
  return p;
}

inline std::string bitstring_of_index(std::size_t index, int n_qubits) {
  std::string key(n_qubits, '0');
  for (int q = 0; q < n_qubits; ++q) {
    if (index >> q & 1) key[n_qubits - 1 - q] = '1';  // qubit n-1 leftmost
  }
  return key;
}

// Multinomial measurement sampling by CDF inversion; deterministic per seed.
// Returns per-basis-index counts (sums to shots).
inline std::vector<long> sample_index_counts(const Statevector& s, int shots, uint64_t seed) {
  if (shots < 1) throw std::invalid_argument("sample_index_counts: shots must be >= 1");
  const std::vector<double> p = born_probabilities(s);
  std::vector<double> cdf(p.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    acc += p[i];
    cdf[i] = acc;
  }
  Rng rng(seed);
  std::vector<long> counts(p.size(), 0);
  for (int shot = 0; shot < shots; ++shot) {
    const double u = rng.next_double() * acc;
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const std::size_t idx = std::min(p.size() - 1, std::size_t(it - cdf.begin()));
    ++counts[idx];
  }
  return counts;
}

inline std::map<std::string, int> sample_counts(const Statevector& s, int shots, uint64_t seed) {
  const std::vector<long> counts = sample_index_counts(s, shots, seed);
  std::map<std::string, int> out;
  for (std::size_t i = 0; i < counts.size(); ++i) {
    if (counts[i] > 0) out[bitstring_of_index(i, s.n_qubits)] = static_cast<int>(counts[i]);
  }
  return out;
}

}  // namespace qphase
