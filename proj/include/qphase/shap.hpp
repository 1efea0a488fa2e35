#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <numeric>
#include <stdexcept>
#include <utility>
#include <vector>

#include "qphase/parallel.hpp"
#include "qphase/rng.hpp"
#include "qphase/svm.hpp"

namespace qphase {

// Additive explanation of one model output: a base value plus one
// contribution per feature, summing to the explained output.
struct Attribution {
  double phi0 = 0.0;
  Eigen::VectorXd phi;
  double target_output = 0.0;
};

// Black-box model wrapper for masked evaluation. `predict` maps a batch of
// feature rows to one decision value per class (columns). Features outside a
// coalition mask are replaced by background rows and the outputs averaged
// over the background set.
struct MaskingModel {
  std::function<Eigen::MatrixXd(const Eigen::MatrixXd&)> predict;
  Eigen::MatrixXd background;
};

// v(S): expected model output with the features in `mask` taken from x and
// the rest drawn from the background. The full mask short-circuits to
// predict(x) so the all-features value is exact, not a background average.
inline Eigen::VectorXd masked_value(const MaskingModel& model, const Eigen::VectorXd& x,
                                    uint32_t mask) {
  const int m = static_cast<int>(x.size());
  if (m < 1 || m > 31) throw std::invalid_argument("masked_value: need 1 <= features <= 31");
  if (model.background.cols() != m || model.background.rows() < 1) {
    throw std::invalid_argument("masked_value: background/feature dimension mismatch");
  }
  const uint32_t full = (1u << m) - 1;
  if ((mask & full) == full) {
    return model.predict(x.transpose()).row(0).transpose();
  }
  Eigen::MatrixXd h = model.background;
  for (int d = 0; d < m; ++d) {
    if (mask >> d & 1u) h.col(d).setConstant(x[d]);
  }
  return model.predict(h).colwise().mean().transpose();
}

namespace detail {

inline double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return r;
}

// table[w] = product of factors[d] over the set bits d of w; table must hold
// 2^n_bits entries
inline void subset_products(const double* factors, int n_bits, double* table) {
  table[0] = 1.0;
  const uint32_t size = 1u << n_bits;
  for (uint32_t w = 1; w < size; ++w) {
    table[w] = table[w & (w - 1)] * factors[std::countr_zero(w)];
  }
}

inline void subset_products(const double* factors, int n_bits, std::vector<double>& table) {
  subset_products(factors, n_bits, table.data());
}

}  // namespace detail

// Average marginal contribution of feature j over all subsets of the other
// features, weighted |S|!(M-|S|-1)!/M! = 1/(M*C(M-1,|S|)). Exponential cost.
inline double shapley_exact(const MaskingModel& model, const Eigen::VectorXd& x, int j,
                            int output = 0) {
  const int m = static_cast<int>(x.size());
  if (m < 1 || m > 20) throw std::invalid_argument("shapley_exact: need 1 <= features <= 20");
  if (j < 0 || j >= m) throw std::invalid_argument("shapley_exact: feature index out of range");
  const int n_out = static_cast<int>(masked_value(model, x, 0).size());
  if (output < 0 || output >= n_out) {
    throw std::invalid_argument("shapley_exact: output index out of range");
  }
  const uint32_t full = (1u << m) - 1;
  const uint32_t bit = 1u << j;
  double phi = 0.0;
  for (uint32_t s = 0; s <= full; ++s) {
    if (s & bit) continue;
    const double w = 1.0 / (m * detail::binomial(m - 1, std::popcount(s)));
    const Eigen::VectorXd with = masked_value(model, x, s | bit);
    const Eigen::VectorXd without = masked_value(model, x, s);
    phi += w * (with[output] - without[output]);
  }
  return phi;
}

// All features and outputs at once, sharing one table of masked values.
// Returns an (n_features x n_outputs) matrix of attributions.
inline Eigen::MatrixXd shapley_exact_all(const MaskingModel& model, const Eigen::VectorXd& x) {
  const int m = static_cast<int>(x.size());
  if (m < 1 || m > 20) throw std::invalid_argument("shapley_exact_all: need 1 <= features <= 20");
  const uint32_t full = (1u << m) - 1;
  const Eigen::VectorXd v0 = masked_value(model, x, 0);
  const int n_out = static_cast<int>(v0.size());
  Eigen::MatrixXd table(static_cast<Eigen::Index>(full) + 1, n_out);
  table.row(0) = v0.transpose();
  for (uint32_t s = 1; s <= full; ++s) {
    table.row(s) = masked_value(model, x, s).transpose();
  }
  Eigen::MatrixXd phi = Eigen::MatrixXd::Zero(m, n_out);
  for (int j = 0; j < m; ++j) {
    const uint32_t bit = 1u << j;
    for (uint32_t s = 0; s <= full; ++s) {
      if (s & bit) continue;
      const double w = 1.0 / (m * detail::binomial(m - 1, std::popcount(s)));
      phi.row(j) += w * (table.row(s | bit) - table.row(s));
    }
  }
  return phi;
}

// The coalition masks and regression weights a kernel explanation runs over.
// Masks are proper nonempty subsets; the empty and full coalitions enter the
// regression as constraints instead.
struct CoalitionSet {
  int n_features = 0;
  bool exhaustive = false;
  std::vector<uint32_t> masks;
  std::vector<double> weights;
};

// Every proper nonempty mask with the Shapley kernel weight
// (M-1) / (C(M,|z|) * |z| * (M-|z|)).
inline CoalitionSet exhaustive_coalitions(int m) {
  if (m < 1 || m > 14) throw std::invalid_argument("exhaustive_coalitions: need 1 <= m <= 14");
  CoalitionSet cs;
  cs.n_features = m;
  cs.exhaustive = true;
  const uint32_t full = (1u << m) - 1;
  for (uint32_t z = 1; z < full; ++z) {
    const int s = std::popcount(z);
    cs.masks.push_back(z);
    cs.weights.push_back((m - 1) / (detail::binomial(m, s) * s * (m - s)));
  }
  return cs;
}

// Coalitions drawn from the Shapley kernel distribution: sizes with
// probability proportional to (M-1)/(s(M-s)), subsets uniform within a size.
// Duplicates are merged and their multiplicities become regression weights.
inline CoalitionSet sampled_coalitions(int m, long n_coalitions, uint64_t seed) {
  if (m < 2 || m > 31) throw std::invalid_argument("sampled_coalitions: need 2 <= m <= 31");
  if (n_coalitions < m + 2) {
    throw std::invalid_argument("sampled_coalitions: need at least m + 2 coalitions");
  }
  std::vector<double> cum(static_cast<std::size_t>(m) - 1);
  double total = 0.0;
  for (int s = 1; s < m; ++s) {
    total += static_cast<double>(m - 1) / (static_cast<double>(s) * (m - s));
    cum[static_cast<std::size_t>(s) - 1] = total;
  }
  Rng rng(seed);
  std::map<uint32_t, double> multiplicity;
  std::vector<int> idx(static_cast<std::size_t>(m));
  for (long t = 0; t < n_coalitions; ++t) {
    const double u = rng.next_double() * total;
    int s = 1;
    while (s < m - 1 && cum[static_cast<std::size_t>(s) - 1] < u) ++s;
    std::iota(idx.begin(), idx.end(), 0);
    uint32_t z = 0;
    for (int p = 0; p < s; ++p) {
      const int q = p + static_cast<int>(rng.next_below(static_cast<uint64_t>(m - p)));
      std::swap(idx[static_cast<std::size_t>(p)], idx[static_cast<std::size_t>(q)]);
      z |= 1u << idx[static_cast<std::size_t>(p)];
    }
    multiplicity[z] += 1.0;
  }
  CoalitionSet cs;
  cs.n_features = m;
  cs.exhaustive = false;
  for (const auto& [z, w] : multiplicity) {
    cs.masks.push_back(z);
    cs.weights.push_back(w);
  }
  return cs;
}

constexpr long kDefaultSampledCoalitions = 50000;

// n_coalitions <= 0 selects the automatic budget: exhaustive when m <= 14,
// otherwise the default sample size.
inline CoalitionSet resolve_coalitions(int m, long n_coalitions, uint64_t seed) {
  if (n_coalitions <= 0) {
    return m <= 14 ? exhaustive_coalitions(m) : sampled_coalitions(m, kDefaultSampledCoalitions, seed);
  }
  return sampled_coalitions(m, n_coalitions, seed);
}

// Weighted least squares over coalition masks for the additive explanation
// model, with phi0 pinned to v(empty) and the attribution total pinned to
// f(x) - v(empty) by eliminating the last feature. The normal-equation
// matrix depends only on the coalition set, so one factorization serves
// every explained row and output.
class KernelShapSolver {
 public:
  explicit KernelShapSolver(CoalitionSet cs) : cs_(std::move(cs)) {
    const int m = cs_.n_features;
    const int k = m - 1;
    if (m < 1) throw std::invalid_argument("kernel_shap: need at least one feature");
    if (k == 0) return;
    if (cs_.masks.empty()) throw std::runtime_error("kernel_shap: degenerate regression");
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(k, k);
    Eigen::VectorXd a(k);
    for (std::size_t t = 0; t < cs_.masks.size(); ++t) {
      fill_predictors(cs_.masks[t], a);
      h.selfadjointView<Eigen::Lower>().rankUpdate(a, cs_.weights[t]);
    }
    h.triangularView<Eigen::StrictlyUpper>() = h.transpose();
    lu_.compute(h);
    if (!lu_.isInvertible()) throw std::runtime_error("kernel_shap: degenerate regression");
  }

  const CoalitionSet& coalitions() const { return cs_; }

  // v_masks is (n_masks x n_outputs); returns one attribution per output
  std::vector<Attribution> solve(const Eigen::VectorXd& v_empty, const Eigen::VectorXd& v_full,
                                 const Eigen::MatrixXd& v_masks) const {
    const int m = cs_.n_features;
    const int k = m - 1;
    const int n_out = static_cast<int>(v_empty.size());
    if (v_full.size() != n_out || v_masks.cols() != n_out ||
        v_masks.rows() != static_cast<Eigen::Index>(cs_.masks.size())) {
      throw std::invalid_argument("kernel_shap: value-table shape mismatch");
    }
    const Eigen::VectorXd delta = v_full - v_empty;
    Eigen::MatrixXd phi(m, n_out);
    if (k == 0) {
      phi.row(0) = delta.transpose();
    } else {
      Eigen::MatrixXd g = Eigen::MatrixXd::Zero(k, n_out);
      Eigen::VectorXd a(k);
      for (std::size_t t = 0; t < cs_.masks.size(); ++t) {
        const uint32_t z = cs_.masks[t];
        const double zm = static_cast<double>(z >> (m - 1) & 1u);
        fill_predictors(z, a);
        const Eigen::RowVectorXd r =
            v_masks.row(static_cast<Eigen::Index>(t)) - v_empty.transpose() - zm * delta.transpose();
        g.noalias() += cs_.weights[t] * a * r;
      }
      const Eigen::MatrixXd head = lu_.solve(g);
      phi.topRows(k) = head;
      phi.row(k) = delta.transpose() - head.colwise().sum();
    }
    std::vector<Attribution> out(static_cast<std::size_t>(n_out));
    for (int c = 0; c < n_out; ++c) {
      out[static_cast<std::size_t>(c)] = {v_empty[c], phi.col(c), v_full[c]};
    }
    return out;
  }

 private:
  void fill_predictors(uint32_t z, Eigen::VectorXd& a) const {
    const int m = cs_.n_features;
    const double zm = static_cast<double>(z >> (m - 1) & 1u);
    for (int j = 0; j < m - 1; ++j) a[j] = static_cast<double>(z >> j & 1u) - zm;
  }

  CoalitionSet cs_;
  Eigen::FullPivLU<Eigen::MatrixXd> lu_;
};

// Kernel explanation of every output of the model at x.
inline std::vector<Attribution> kernel_shap_all(const MaskingModel& model, const Eigen::VectorXd& x,
                                                long n_coalitions, uint64_t seed) {
  const int m = static_cast<int>(x.size());
  const CoalitionSet cs = resolve_coalitions(m, n_coalitions, seed);
  const KernelShapSolver solver(cs);
  const Eigen::VectorXd v_empty = masked_value(model, x, 0);
  const Eigen::VectorXd v_full = model.predict(x.transpose()).row(0).transpose();
  Eigen::MatrixXd v_masks(static_cast<Eigen::Index>(cs.masks.size()), v_empty.size());
  for (std::size_t t = 0; t < cs.masks.size(); ++t) {
    v_masks.row(static_cast<Eigen::Index>(t)) = masked_value(model, x, cs.masks[t]).transpose();
  }
  return solver.solve(v_empty, v_full, v_masks);
}

inline Attribution kernel_shap(const MaskingModel& model, const Eigen::VectorXd& x,
                               long n_coalitions, uint64_t seed, int output = 0) {
  std::vector<Attribution> all = kernel_shap_all(model, x, n_coalitions, seed);
  if (output < 0 || output >= static_cast<int>(all.size())) {
    throw std::invalid_argument("kernel_shap: output index out of range");
  }
  return std::move(all[static_cast<std::size_t>(output)]);
}

// Global feature importance: mean |phi| over explained rows and outputs,
// with the ranking sorted descending, ties broken by feature index.
struct ShapReport {
  Eigen::VectorXd importance;
  std::vector<int> ranking;
  int n_samples_explained = 0;
};

inline std::vector<int> importance_ranking(const Eigen::VectorXd& importance) {
  std::vector<int> order(static_cast<std::size_t>(importance.size()));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](int a, int b) { return importance[a] > importance[b]; });
  return order;
}

inline ShapReport global_importance(const MaskingModel& model, const Eigen::MatrixXd& x_explain,
                                    long n_coalitions, uint64_t seed, int n_threads = 0) {
  const int m = static_cast<int>(x_explain.cols());
  const int rows = static_cast<int>(x_explain.rows());
  if (rows < 1) throw std::invalid_argument("global_importance: need at least one row");
  const CoalitionSet cs = resolve_coalitions(m, n_coalitions, seed);
  const KernelShapSolver solver(cs);
  std::vector<Eigen::VectorXd> per_row(static_cast<std::size_t>(rows));
  parallel_for(
      static_cast<std::size_t>(rows),
      [&](std::size_t r) {
        const Eigen::VectorXd x = x_explain.row(static_cast<Eigen::Index>(r)).transpose();
        const Eigen::VectorXd v_empty = masked_value(model, x, 0);
        const Eigen::VectorXd v_full = model.predict(x.transpose()).row(0).transpose();
        Eigen::MatrixXd v_masks(static_cast<Eigen::Index>(cs.masks.size()), v_empty.size());
        for (std::size_t t = 0; t < cs.masks.size(); ++t) {
          v_masks.row(static_cast<Eigen::Index>(t)) = masked_value(model, x, cs.masks[t]).transpose();
        }
        const std::vector<Attribution> atts = solver.solve(v_empty, v_full, v_masks);
        Eigen::VectorXd sum = Eigen::VectorXd::Zero(m);
        for (const Attribution& att : atts) sum += att.phi.cwiseAbs();
        per_row[r] = sum / static_cast<double>(atts.size());
      },
      n_threads);
  Eigen::VectorXd importance = Eigen::VectorXd::Zero(m);
  for (const Eigen::VectorXd& s : per_row) importance += s;
  importance /= static_cast<double>(rows);
  return {importance, importance_ranking(importance), rows};
}

inline std::vector<int> select_top_k(const ShapReport& report, int k) {
  const int m = static_cast<int>(report.ranking.size());
  if (k < 1 || k > m) throw std::invalid_argument("select_top_k: k out of range");
  return {report.ranking.begin(), report.ranking.begin() + k};
}

// Signed vote margins of a trained classifier as a masking model.
inline MaskingModel masking_model_from_svm(const SvmModel& model, Eigen::MatrixXd background) {
  MaskingModel mm;
  mm.predict = [model](const Eigen::MatrixXd& rows) { return svm_class_decisions(model, rows); };
  mm.background = std::move(background);
  return mm;
}

// Masked class margins for every explained row and coalition mask, using the
// per-feature product form of the rbf kernel. Present-feature factors come
// from the explained row; absent-feature products are averaged over the
// background once per support vector and reused for every row. Meet-in-the-
// middle tables turn each subset product into two lookups and a multiply.
// result[row] is (n_masks x n_classes), matching svm_class_decisions.
inline std::vector<Eigen::MatrixXd> svm_masked_margins(const SvmModel& model,
                                                       const Eigen::MatrixXd& x_explain,
                                                       const Eigen::MatrixXd& background,
                                                       const CoalitionSet& cs, int n_threads = 0) {
  if (model.kernel.kind != KernelKind::Rbf) {
    throw std::invalid_argument("svm_masked_margins: needs an rbf-kernel model");
  }
  const int m = model.n_features;
  if (m < 2 || m > 20) throw std::invalid_argument("svm_masked_margins: need 2 <= features <= 20");
  if (cs.n_features != m || x_explain.cols() != m || background.cols() != m) {
    throw std::invalid_argument("svm_masked_margins: feature dimension mismatch");
  }
  const int rows = static_cast<int>(x_explain.rows());
  const int n_bg = static_cast<int>(background.rows());
  if (rows < 1 || n_bg < 1) throw std::invalid_argument("svm_masked_margins: empty inputs");
  const std::size_t n_masks = cs.masks.size();
  const int n_cls = static_cast<int>(model.classes.size());
  const uint32_t full = (1u << m) - 1;
  const int h = (m + 1) / 2;
  const int hi_bits = m - h;
  const uint32_t lo_mask = (1u << h) - 1;

  std::vector<uint32_t> pres_lo(n_masks), pres_hi(n_masks), abs_lo(n_masks), abs_hi(n_masks);
  for (std::size_t t = 0; t < n_masks; ++t) {
    const uint32_t z = cs.masks[t];
    if (z == 0 || z >= full) {
      throw std::invalid_argument("svm_masked_margins: masks must be proper nonempty subsets");
    }
    pres_lo[t] = z & lo_mask;
    pres_hi[t] = z >> h;
    const uint32_t absent = ~z & full;
    abs_lo[t] = absent & lo_mask;
    abs_hi[t] = absent >> h;
  }

  // per-class coefficients over the support union: the pair (a, b) with
  // decision d contributes +d to class a and -d to class b
  const int u = static_cast<int>(model.sv_train_indices.size());
  Eigen::MatrixXd cls_coef = Eigen::MatrixXd::Zero(u, n_cls);
  Eigen::VectorXd cls_bias = Eigen::VectorXd::Zero(n_cls);
  for (const PairClassifier& pair : model.pairs) {
    const auto ia = std::lower_bound(model.classes.begin(), model.classes.end(), pair.class_a) -
                    model.classes.begin();
    const auto ib = std::lower_bound(model.classes.begin(), model.classes.end(), pair.class_b) -
                    model.classes.begin();
    for (std::size_t s = 0; s < pair.sv_local.size(); ++s) {
      cls_coef(pair.sv_local[s], ia) += pair.coef[s];
      cls_coef(pair.sv_local[s], ib) -= pair.coef[s];
    }
    cls_bias[ia] += pair.bias;
    cls_bias[ib] -= pair.bias;
  }

  const double gamma = model.kernel.gamma;
  std::vector<std::vector<double>> acc(
      static_cast<std::size_t>(rows),
      std::vector<double>(static_cast<std::size_t>(n_cls) * n_masks, 0.0));

  constexpr int kBlock = 256;
  std::vector<double> g_block;
  for (int s0 = 0; s0 < u; s0 += kBlock) {
    const int bs = std::min(kBlock, u - s0);
    g_block.assign(static_cast<std::size_t>(bs) * n_masks, 0.0);

    parallel_for(
        static_cast<std::size_t>(bs),
        [&](std::size_t si) {
          double* g = g_block.data() + si * n_masks;
          std::vector<double> lo(1u << h), hi(1u << hi_bits), f(static_cast<std::size_t>(m));
          for (int b = 0; b < n_bg; ++b) {
            for (int d = 0; d < m; ++d) {
              const double diff = background(b, d) - model.sv_rows(s0 + static_cast<int>(si), d);
              f[static_cast<std::size_t>(d)] = std::exp(-gamma * diff * diff);
            }
            detail::subset_products(f.data(), h, lo);
            detail::subset_products(f.data() + h, hi_bits, hi);
            for (std::size_t t = 0; t < n_masks; ++t) g[t] += lo[abs_lo[t]] * hi[abs_hi[t]];
          }
          const double inv = 1.0 / n_bg;
          for (std::size_t t = 0; t < n_masks; ++t) g[t] *= inv;
        },
        n_threads);

    parallel_for(
        static_cast<std::size_t>(rows),
        [&](std::size_t r) {
          std::vector<double> lo(1u << h), hi(1u << hi_bits), f(static_cast<std::size_t>(m));
          std::vector<double> prod(n_masks);
          double* acc_r = acc[r].data();
          for (int si = 0; si < bs; ++si) {
            const double* g = g_block.data() + static_cast<std::size_t>(si) * n_masks;
            for (int d = 0; d < m; ++d) {
              const double diff = x_explain(static_cast<Eigen::Index>(r), d) -
                                  model.sv_rows(s0 + si, d);
              f[static_cast<std::size_t>(d)] = std::exp(-gamma * diff * diff);
            }
            detail::subset_products(f.data(), h, lo);
            detail::subset_products(f.data() + h, hi_bits, hi);
            for (std::size_t t = 0; t < n_masks; ++t) {
              prod[t] = lo[pres_lo[t]] * hi[pres_hi[t]] * g[t];
            }
            for (int c = 0; c < n_cls; ++c) {
              const double w = cls_coef(s0 + si, c);
              if (w == 0.0) continue;
              double* dst = acc_r + static_cast<std::size_t>(c) * n_masks;
              for (std::size_t t = 0; t < n_masks; ++t) dst[t] += w * prod[t];
            }
          }
        },
        n_threads);
  }

  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(rows));
  for (int r = 0; r < rows; ++r) {
    Eigen::MatrixXd vm(static_cast<Eigen::Index>(n_masks), n_cls);
    const std::vector<double>& acc_r = acc[static_cast<std::size_t>(r)];
    for (int c = 0; c < n_cls; ++c) {
      for (std::size_t t = 0; t < n_masks; ++t) {
        vm(static_cast<Eigen::Index>(t), c) = acc_r[static_cast<std::size_t>(c) * n_masks + t] +
                                              cls_bias[c];
      }
    }
    out[static_cast<std::size_t>(r)] = std::move(vm);
  }
  return out;
}

// Class-membership probabilities of a calibrated classifier as a masking
// model.
inline MaskingModel masking_model_from_svm_proba(const SvmModel& model, const SvmProbability& prob,
                                                 Eigen::MatrixXd background) {
  MaskingModel mm;
  mm.predict = [model, prob](const Eigen::MatrixXd& rows) {
    return svm_predict_proba(model, prob, rows);
  };
  mm.background = std::move(background);
  return mm;
}

// Masked class probabilities for every explained row and coalition mask.
// Unlike the vote margins, the sigmoid-and-coupling transform is nonlinear,
// so it is applied per background row and the probabilities averaged
// afterwards. The kernel sums reuse the per-feature product form: one pair
// of subset-product tables per (background row, support vector) shared by
// every explained row, and one pair per (explained row, support vector).
// result[row] is (n_masks x n_classes), matching svm_predict_proba columns.
inline std::vector<Eigen::MatrixXd> svm_masked_probabilities(
    const SvmModel& model, const SvmProbability& prob, const Eigen::MatrixXd& x_explain,
    const Eigen::MatrixXd& background, const CoalitionSet& cs, int n_threads = 0) {
  if (model.kernel.kind != KernelKind::Rbf) {
    throw std::invalid_argument("svm_masked_probabilities: needs an rbf-kernel model");
  }
  const int m = model.n_features;
  if (m < 2 || m > 20) {
    throw std::invalid_argument("svm_masked_probabilities: need 2 <= features <= 20");
  }
  if (cs.n_features != m || x_explain.cols() != m || background.cols() != m) {
    throw std::invalid_argument("svm_masked_probabilities: feature dimension mismatch");
  }
  const int rows = static_cast<int>(x_explain.rows());
  const int n_bg = static_cast<int>(background.rows());
  if (rows < 1 || n_bg < 1) throw std::invalid_argument("svm_masked_probabilities: empty inputs");
  const std::size_t n_masks = cs.masks.size();
  const int n_cls = static_cast<int>(model.classes.size());
  const int n_pairs = static_cast<int>(model.pairs.size());
  const uint32_t full = (1u << m) - 1;
  const int h = (m + 1) / 2;
  const int hi_bits = m - h;
  const uint32_t lo_mask = (1u << h) - 1;

  std::vector<uint32_t> pres_lo(n_masks), pres_hi(n_masks), abs_lo(n_masks), abs_hi(n_masks);
  for (std::size_t t = 0; t < n_masks; ++t) {
    const uint32_t z = cs.masks[t];
    if (z == 0 || z >= full) {
      throw std::invalid_argument("svm_masked_probabilities: masks must be proper nonempty subsets");
    }
    pres_lo[t] = z & lo_mask;
    pres_hi[t] = z >> h;
    const uint32_t absent = ~z & full;
    abs_lo[t] = absent & lo_mask;
    abs_hi[t] = absent >> h;
  }

  // per-pair coefficients over the support union
  const int u = static_cast<int>(model.sv_train_indices.size());
  Eigen::MatrixXd pair_coef = Eigen::MatrixXd::Zero(u, n_pairs);
  for (int p = 0; p < n_pairs; ++p) {
    const PairClassifier& pair = model.pairs[static_cast<std::size_t>(p)];
    for (std::size_t s = 0; s < pair.sv_local.size(); ++s) {
      pair_coef(pair.sv_local[s], p) += pair.coef[s];
    }
  }

  const double gamma = model.kernel.gamma;
  const std::size_t lo_size = 1u << h;
  const std::size_t hi_size = 1u << hi_bits;

  // absent-side product tables per (background row, support vector); the
  // dominant memory cost, n_bg * u * 2^ceil(m/2) doubles
  std::vector<double> bg_lo(static_cast<std::size_t>(n_bg) * u * lo_size);
  std::vector<double> bg_hi(static_cast<std::size_t>(n_bg) * u * hi_size);
  parallel_for(
      static_cast<std::size_t>(n_bg),
      [&](std::size_t b) {
        std::vector<double> f(static_cast<std::size_t>(m));
        for (int s = 0; s < u; ++s) {
          for (int d = 0; d < m; ++d) {
            const double diff = background(static_cast<Eigen::Index>(b), d) - model.sv_rows(s, d);
            f[static_cast<std::size_t>(d)] = std::exp(-gamma * diff * diff);
          }
          detail::subset_products(f.data(), h, bg_lo.data() + (b * u + static_cast<std::size_t>(s)) * lo_size);
          detail::subset_products(f.data() + h, hi_bits,
                                  bg_hi.data() + (b * u + static_cast<std::size_t>(s)) * hi_size);
        }
      },
      n_threads);

  std::vector<Eigen::MatrixXd> out(static_cast<std::size_t>(rows));
  parallel_for(
      static_cast<std::size_t>(rows),
      [&](std::size_t r) {
        // pair decision sums per (background row, mask)
        std::vector<double> dec(static_cast<std::size_t>(n_bg) * n_masks * n_pairs, 0.0);
        std::vector<double> lo(lo_size), hi(hi_size), f(static_cast<std::size_t>(m));
        std::vector<double> coef(static_cast<std::size_t>(n_pairs));
        for (int s = 0; s < u; ++s) {
          for (int d = 0; d < m; ++d) {
            const double diff = x_explain(static_cast<Eigen::Index>(r), d) - model.sv_rows(s, d);
            f[static_cast<std::size_t>(d)] = std::exp(-gamma * diff * diff);
          }
          detail::subset_products(f.data(), h, lo);
          detail::subset_products(f.data() + h, hi_bits, hi);
          for (int p = 0; p < n_pairs; ++p) coef[static_cast<std::size_t>(p)] = pair_coef(s, p);
          for (int b = 0; b < n_bg; ++b) {
            const double* bl = bg_lo.data() + (static_cast<std::size_t>(b) * u + static_cast<std::size_t>(s)) * lo_size;
            const double* bh = bg_hi.data() + (static_cast<std::size_t>(b) * u + static_cast<std::size_t>(s)) * hi_size;
            double* dst = dec.data() + static_cast<std::size_t>(b) * n_masks * n_pairs;
            for (std::size_t t = 0; t < n_masks; ++t) {
              const double k = lo[pres_lo[t]] * hi[pres_hi[t]] * bl[abs_lo[t]] * bh[abs_hi[t]];
              for (int p = 0; p < n_pairs; ++p) dst[t * n_pairs + p] += coef[static_cast<std::size_t>(p)] * k;
            }
          }
        }
        Eigen::MatrixXd vm = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n_masks), n_cls);
        Eigen::VectorXd dpair(n_pairs);
        for (int b = 0; b < n_bg; ++b) {
          const double* src = dec.data() + static_cast<std::size_t>(b) * n_masks * n_pairs;
          for (std::size_t t = 0; t < n_masks; ++t) {
            for (int p = 0; p < n_pairs; ++p) {
              dpair[p] = src[t * n_pairs + p] + model.pairs[static_cast<std::size_t>(p)].bias;
            }
            vm.row(static_cast<Eigen::Index>(t)) +=
                svm_class_probabilities_from_pairs(model, prob, dpair).transpose();
          }
        }
        vm /= static_cast<double>(n_bg);
        out[r] = std::move(vm);
      },
      n_threads);
  return out;
}

// Global importance over a calibrated rbf classifier: kernel explanations of
// one class's membership probability, averaged as mean |phi| over the
// explained rows. Matches global_importance on the wrapped probability model
// restricted to that output, up to floating-point association, and is far
// cheaper.
inline ShapReport svm_global_importance(const SvmModel& model, const SvmProbability& prob,
                                        const Eigen::MatrixXd& x_explain,
                                        const Eigen::MatrixXd& background, long n_coalitions,
                                        uint64_t seed, int output_class, int n_threads = 0) {
  const int m = model.n_features;
  const int rows = static_cast<int>(x_explain.rows());
  const int n_cls = static_cast<int>(model.classes.size());
  if (rows < 1) throw std::invalid_argument("svm_global_importance: need at least one row");
  if (output_class < 0 || output_class >= n_cls) {
    throw std::invalid_argument("svm_global_importance: output class out of range");
  }
  const CoalitionSet cs = resolve_coalitions(m, n_coalitions, seed);
  const KernelShapSolver solver(cs);
  const std::vector<Eigen::MatrixXd> values =
      svm_masked_probabilities(model, prob, x_explain, background, cs, n_threads);
  const Eigen::VectorXd v_empty =
      svm_predict_proba(model, prob, background).colwise().mean().transpose();
  const Eigen::MatrixXd v_full = svm_predict_proba(model, prob, x_explain);
  Eigen::VectorXd importance = Eigen::VectorXd::Zero(m);
  for (int r = 0; r < rows; ++r) {
    const std::vector<Attribution> atts =
        solver.solve(v_empty, v_full.row(r).transpose(), values[static_cast<std::size_t>(r)]);
    importance += atts[static_cast<std::size_t>(output_class)].phi.cwiseAbs();
  }
  importance /= static_cast<double>(rows);
  return {importance, importance_ranking(importance), rows};
}

}  // namespace qphase
