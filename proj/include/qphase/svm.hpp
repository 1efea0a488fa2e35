#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

namespace qphase {

inline double rbf_kernel(const Eigen::VectorXd& a, const Eigen::VectorXd& b, double gamma) {
  return std::exp(-gamma * (a - b).squaredNorm());
}

// sklearn-style "scale" default: 1 / (n_features * variance of all entries)
inline double rbf_gamma_scale(const Eigen::MatrixXd& x) {
  const double mean = x.mean();
  const double var = (x.array() - mean).square().mean();
  if (var <= 0.0) return 1.0 / static_cast<double>(x.cols());
  return 1.0 / (static_cast<double>(x.cols()) * var);
}

enum class KernelKind { Rbf, Precomputed };

struct KernelSpec {
  KernelKind kind = KernelKind::Rbf;
  double gamma = 1.0;
};

struct SmoOptions {
  double kkt_tol = 1e-3;
  long max_iterations = 1000000;
  bool track_objective = false;
};

struct SmoResult {
  Eigen::VectorXd alpha;
  double bias = 0.0;
  long iterations = 0;
  // dual objective 0.5 a'Qa - sum(a) after each update (minimization form)
  std::vector<double> objective_history;
};

// Two-class SMO in the libsvm formulation: minimize 0.5 a'Qa - e'a subject to
// 0 <= a <= C and y'a = 0, with Q_ij = y_i y_j K_ij. Second-order working-set
// selection, full gradient updates, stop when the maximal KKT violation
// m(a) - M(a) drops below kkt_tol.
inline SmoResult smo_solve(const Eigen::MatrixXd& kernel, const std::vector<int>& y, double c,
                           const SmoOptions& opt = {}) {
  const int n = static_cast<int>(kernel.rows());
  if (kernel.cols() != n || static_cast<int>(y.size()) != n) {
    throw std::invalid_argument("smo_solve: kernel must be square and match label count");
  }
  for (int label : y) {
    if (label != 1 && label != -1) throw std::invalid_argument("smo_solve: labels must be +/-1");
  }
  constexpr double tau = 1e-12;

  Eigen::VectorXd alpha = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd grad = Eigen::VectorXd::Constant(n, -1.0);  // G = Qa - e
  SmoResult result;

  auto q_entry = [&](int i, int j) { return y[i] * y[j] * kernel(i, j); };

  long it = 0;
  for (;; ++it) {
    // working-set selection
    double m_up = -std::numeric_limits<double>::infinity();
    int i = -1;
    for (int t = 0; t < n; ++t) {
      const bool in_up = (y[t] == 1 && alpha[t] < c) || (y[t] == -1 && alpha[t] > 0);
      if (in_up && -y[t] * grad[t] > m_up) {
        m_up = -y[t] * grad[t];
        i = t;
      }
    }
    double m_low = std::numeric_limits<double>::infinity();
    double best_gain = 0.0;
    int j = -1;
    for (int t = 0; t < n; ++t) {
      const bool in_low = (y[t] == -1 && alpha[t] < c) || (y[t] == 1 && alpha[t] > 0);
      if (!in_low) continue;
      const double neg_yg = -y[t] * grad[t];
      m_low = std::min(m_low, neg_yg);
      const double b_it = m_up - neg_yg;
      if (b_it > 0.0 && i >= 0) {
        double a_it = kernel(i, i) + kernel(t, t) - 2.0 * y[i] * y[t] * kernel(i, t);
        if (a_it <= 0.0) a_it = tau;
        const double gain = b_it * b_it / a_it;
        if (gain > best_gain) {
          best_gain = gain;
          j = t;
        }
      }
    }

    if (i < 0 || j < 0 || m_up - m_low <= opt.kkt_tol) break;
    if (it >= opt.max_iterations) {
      throw std::runtime_error("smo_solve: no convergence within " +
                               std::to_string(opt.max_iterations) + " iterations");
    }

    // two-variable subproblem (libsvm update rules)
    const double old_ai = alpha[i], old_aj = alpha[j];
    if (y[i] != y[j]) {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
      if (quad <= 0.0) quad = tau;
      const double delta = (-grad[i] - grad[j]) / quad;
      const double diff = alpha[i] - alpha[j];
      alpha[i] += delta;
      alpha[j] += delta;
      if (diff > 0.0) {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = diff; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = -diff; }
      }
      if (diff > 0.0) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = c - diff; }
      } else {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = c + diff; }
      }
    } else {
      double quad = kernel(i, i) + kernel(j, j) - 2.0 * kernel(i, j);
      if (quad <= 0.0) quad = tau;
      const double delta = (grad[i] - grad[j]) / quad;
      const double sum = alpha[i] + alpha[j];
      alpha[i] -= delta;
      alpha[j] += delta;
      if (sum > c) {
        if (alpha[i] > c) { alpha[i] = c; alpha[j] = sum - c; }
      } else {
        if (alpha[j] < 0.0) { alpha[j] = 0.0; alpha[i] = sum; }
      }
      if (sum > c) {
        if (alpha[j] > c) { alpha[j] = c; alpha[i] = sum - c; }
      } else {
        if (alpha[i] < 0.0) { alpha[i] = 0.0; alpha[j] = sum; }
      }
    }

    const double d_ai = alpha[i] - old_ai, d_aj = alpha[j] - old_aj;
    for (int t = 0; t < n; ++t) {
      grad[t] += q_entry(t, i) * d_ai + q_entry(t, j) * d_aj;
    }
    if (opt.track_objective) {
      // 0.5 a'Qa - e'a, using a'Qa = a'(G + e)
      double obj = 0.0;
      for (int t = 0; t < n; ++t) obj += alpha[t] * (grad[t] - 1.0);
      result.objective_history.push_back(0.5 * obj);
    }
  }

  // bias: average -y_i G_i over free vectors, else the KKT interval midpoint
  int n_free = 0;
  double sum_free = 0.0;
  double ub = std::numeric_limits<double>::infinity();
  double lb = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < n; ++t) {
    const double yg = y[t] * grad[t];
    if (alpha[t] >= c) {
      if (y[t] == -1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else if (alpha[t] <= 0.0) {
      if (y[t] == 1) ub = std::min(ub, yg); else lb = std::max(lb, yg);
    } else {
      ++n_free;
      sum_free += yg;
    }
  }
  const double rho = n_free > 0 ? sum_free / n_free : 0.5 * (ub + lb);
  result.alpha = alpha;
  result.bias = -rho;
  result.iterations = it;
  return result;
}

// One-vs-one multiclass SVM. In Rbf mode `x` holds feature rows and the
// model stores the union of support-vector rows; in Precomputed mode `x` is
// the full training Gram matrix and the model stores training-set indices so
// the caller can supply matching kernel columns at prediction time.
struct PairClassifier {
  int class_a = 0;  // decision > 0 votes class_a
  int class_b = 0;
  std::vector<int> sv_local;  // indices into the support union
  std::vector<double> coef;   // alpha_i * y_i
  double bias = 0.0;
};

struct SvmModel {
  KernelSpec kernel;
  double c = 1.0;
  std::vector<int> classes;
  std::vector<int> sv_train_indices;  // union, ascending, into the training set
  Eigen::MatrixXd sv_rows;            // Rbf mode only: rows of the union
  std::vector<PairClassifier> pairs;
  int n_train = 0;
  int n_features = 0;  // Rbf mode only
};

inline SvmModel svm_train(const Eigen::MatrixXd& x, const std::vector<int>& labels,
                          const KernelSpec& kernel, double c = 1.0, const SmoOptions& opt = {}) {
  const int n = static_cast<int>(x.rows());
  if (static_cast<int>(labels.size()) != n) {
    throw std::invalid_argument("svm_train: row/label count mismatch");
  }
  if (kernel.kind == KernelKind::Precomputed && x.cols() != n) {
    throw std::invalid_argument("svm_train: precomputed kernel must be square");
  }
  if (c <= 0.0) throw std::invalid_argument("svm_train: C must be positive");

  SvmModel model;
  model.kernel = kernel;
  model.c = c;
  model.n_train = n;
  model.n_features = kernel.kind == KernelKind::Rbf ? static_cast<int>(x.cols()) : 0;
  const std::set<int> class_set(labels.begin(), labels.end());
  model.classes.assign(class_set.begin(), class_set.end());
  if (model.classes.size() < 2) throw std::invalid_argument("svm_train: need at least two classes");

  struct RawPair {
    int class_a, class_b;
    std::vector<int> sv_global;
    std::vector<double> coef;
    double bias;
  };
  std::vector<RawPair> raw_pairs;

  for (std::size_t a = 0; a < model.classes.size(); ++a) {
    for (std::size_t b = a + 1; b < model.classes.size(); ++b) {
      std::vector<int> subset;
      std::vector<int> y;
      for (int t = 0; t < n; ++t) {
        if (labels[t] == model.classes[a]) {
          subset.push_back(t);
          y.push_back(1);
        } else if (labels[t] == model.classes[b]) {
          subset.push_back(t);
          y.push_back(-1);
        }
      }
      const int m = static_cast<int>(subset.size());
      Eigen::MatrixXd k(m, m);
      if (kernel.kind == KernelKind::Precomputed) {
        for (int r = 0; r < m; ++r) {
          for (int s = 0; s < m; ++s) k(r, s) = x(subset[r], subset[s]);
        }
      } else {
        for (int r = 0; r < m; ++r) {
          k(r, r) = 1.0;
          for (int s = r + 1; s < m; ++s) {
            k(r, s) = k(s, r) = rbf_kernel(x.row(subset[r]).transpose(),
                                           x.row(subset[s]).transpose(), kernel.gamma);
          }
        }
      }
      SmoResult smo = smo_solve(k, y, c, opt);
      RawPair pair{model.classes[a], model.classes[b], {}, {}, smo.bias};
      for (int r = 0; r < m; ++r) {
        if (smo.alpha[r] > 1e-12) {
          pair.sv_global.push_back(subset[r]);
          pair.coef.push_back(smo.alpha[r] * y[r]);
        }
      }
      raw_pairs.push_back(std::move(pair));
    }
  }

  std::set<int> union_set;
  for (const auto& pair : raw_pairs) union_set.insert(pair.sv_global.begin(), pair.sv_global.end());
  model.sv_train_indices.assign(union_set.begin(), union_set.end());
  std::vector<int> local_of(static_cast<std::size_t>(n), -1);
  for (std::size_t u = 0; u < model.sv_train_indices.size(); ++u) {
    local_of[static_cast<std::size_t>(model.sv_train_indices[u])] = static_cast<int>(u);
  }
  if (kernel.kind == KernelKind::Rbf) {
    model.sv_rows.resize(static_cast<Eigen::Index>(model.sv_train_indices.size()), x.cols());
    for (std::size_t u = 0; u < model.sv_train_indices.size(); ++u) {
      model.sv_rows.row(static_cast<Eigen::Index>(u)) = x.row(model.sv_train_indices[u]);
    }
  }
  for (auto& pair : raw_pairs) {
    PairClassifier pc{pair.class_a, pair.class_b, {}, pair.coef, pair.bias};
    pc.sv_local.reserve(pair.sv_global.size());
    for (int g : pair.sv_global) pc.sv_local.push_back(local_of[static_cast<std::size_t>(g)]);
    model.pairs.push_back(std::move(pc));
  }
  return model;
}

namespace detail {

// kernel values of one input row against the model's support union
inline Eigen::VectorXd kernel_against_union(const SvmModel& model, const Eigen::VectorXd& row) {
  const std::size_t u = model.sv_train_indices.size();
  Eigen::VectorXd k(static_cast<Eigen::Index>(u));
  if (model.kernel.kind == KernelKind::Rbf) {
    if (row.size() != model.sv_rows.cols()) {
      throw std::invalid_argument("svm: feature dimension mismatch");
    }
    for (std::size_t i = 0; i < u; ++i) {
      k[static_cast<Eigen::Index>(i)] =
          rbf_kernel(row, model.sv_rows.row(static_cast<Eigen::Index>(i)).transpose(),
                     model.kernel.gamma);
    }
  } else {
    // row holds precomputed kernel values against the full training set
    if (row.size() != model.n_train) {
      throw std::invalid_argument("svm: precomputed kernel row must span the training set");
    }
    for (std::size_t i = 0; i < u; ++i) {
      k[static_cast<Eigen::Index>(i)] = row[model.sv_train_indices[i]];
    }
  }
  return k;
}

}  // namespace detail

// Signed one-vs-one vote margins per class: the pair (a, b) with raw decision
// d contributes +d to class a and -d to class b.
inline Eigen::VectorXd svm_class_decisions_from_kernel(const SvmModel& model,
                                                       const Eigen::VectorXd& kernel_vs_union) {
  Eigen::VectorXd margins = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.classes.size()));
  for (const auto& pair : model.pairs) {
    double d = pair.bias;
    for (std::size_t s = 0; s < pair.sv_local.size(); ++s) {
      d += pair.coef[s] * kernel_vs_union[pair.sv_local[s]];
    }
    const auto ia = std::lower_bound(model.classes.begin(), model.classes.end(), pair.class_a) -
                    model.classes.begin();
    const auto ib = std::lower_bound(model.classes.begin(), model.classes.end(), pair.class_b) -
                    model.classes.begin();
    margins[ia] += d;
    margins[ib] -= d;
  }
  return margins;
}

inline int svm_predict_from_kernel(const SvmModel& model, const Eigen::VectorXd& kernel_vs_union) {
  std::vector<int> votes(model.classes.size(), 0);
  for (const auto& pair : model.pairs) {
    double d = pair.bias;
    for (std::size_t s = 0; s < pair.sv_local.size(); ++s) {
      d += pair.coef[s] * kernel_vs_union[pair.sv_local[s]];
    }
    const auto ia = std::lower_bound(model.classes.begin(), model.classes.end(), pair.class_a) -
                    model.classes.begin();
    const auto ib = std::lower_bound(model.classes.begin(), model.classes.end(), pair.class_b) -
                    model.classes.begin();
    ++votes[d > 0.0 ? static_cast<std::size_t>(ia) : static_cast<std::size_t>(ib)];
  }
  // ties resolve to the lowest class index
  int best = 0;
  for (std::size_t i = 1; i < votes.size(); ++i) {
    if (votes[i] > votes[static_cast<std::size_t>(best)]) best = static_cast<int>(i);
  }
  return model.classes[static_cast<std::size_t>(best)];
}

// In Rbf mode x holds feature rows; in Precomputed mode x holds kernel rows
// against the full training set (n_test x n_train).
inline std::vector<int> svm_predict(const SvmModel& model, const Eigen::MatrixXd& x) {
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(x.rows()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out.push_back(
        svm_predict_from_kernel(model, detail::kernel_against_union(model, x.row(r).transpose())));
  }
  return out;
}

inline Eigen::MatrixXd svm_class_decisions(const SvmModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(model.classes.size()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out.row(r) =
        svm_class_decisions_from_kernel(model, detail::kernel_against_union(model, x.row(r).transpose()))
            .transpose();
  }
  return out;
}

// Raw decision value of every one-vs-one pair, one column per entry of
// model.pairs. Positive values vote for the pair's class_a.
inline Eigen::MatrixXd svm_pair_decisions(const SvmModel& model, const Eigen::MatrixXd& x) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(model.pairs.size()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    const Eigen::VectorXd k = detail::kernel_against_union(model, x.row(r).transpose());
    for (std::size_t p = 0; p < model.pairs.size(); ++p) {
      const PairClassifier& pair = model.pairs[p];
      double d = pair.bias;
      for (std::size_t s = 0; s < pair.sv_local.size(); ++s) {
        d += pair.coef[s] * k[pair.sv_local[s]];
      }
      out(r, static_cast<Eigen::Index>(p)) = d;
    }
  }
  return out;
}

// Sigmoid calibration of a raw decision value d into P(positive | d) =
// 1 / (1 + exp(a*d + b)).
struct SigmoidFit {
  double a = 0.0;
  double b = 0.0;
};

inline double sigmoid_probability(const SigmoidFit& s, double decision) {
  const double f = decision * s.a + s.b;
  return f >= 0.0 ? std::exp(-f) / (1.0 + std::exp(-f)) : 1.0 / (1.0 + std::exp(f));
}

// Maximum-likelihood sigmoid fit with regularized targets drawn from the
// class priors, solved by Newton iteration with backtracking line search.
// targets holds +1/-1; decisions the corresponding raw decision values.
inline SigmoidFit fit_decision_sigmoid(const std::vector<double>& decisions,
                                       const std::vector<int>& targets) {
  const std::size_t l = decisions.size();
  if (l == 0 || targets.size() != l) {
    throw std::invalid_argument("fit_decision_sigmoid: need matching nonempty inputs");
  }
  int prior1 = 0, prior0 = 0;
  for (int v : targets) (v > 0 ? prior1 : prior0)++;
  const double t_hi = (prior1 + 1.0) / (prior1 + 2.0);
  const double t_lo = 1.0 / (prior0 + 2.0);
  std::vector<double> t(l);
  for (std::size_t i = 0; i < l; ++i) t[i] = targets[i] > 0 ? t_hi : t_lo;

  SigmoidFit fit{0.0, std::log((prior0 + 1.0) / (prior1 + 1.0))};
  const auto objective = [&](double a, double b) {
    double f = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      const double fApB = decisions[i] * a + b;
      f += fApB >= 0 ? t[i] * fApB + std::log1p(std::exp(-fApB))
                     : (t[i] - 1.0) * fApB + std::log1p(std::exp(fApB));
    }
    return f;
  };
  double fval = objective(fit.a, fit.b);
  for (int it = 0; it < 100; ++it) {
    double h11 = 1e-12, h22 = 1e-12, h21 = 0.0, g1 = 0.0, g2 = 0.0;
    for (std::size_t i = 0; i < l; ++i) {
      const double p = sigmoid_probability(fit, decisions[i]);
      const double pq = p * (1.0 - p);
      h11 += decisions[i] * decisions[i] * pq;
      h22 += pq;
      h21 += decisions[i] * pq;
      const double d = t[i] - p;
      g1 += decisions[i] * d;
      g2 += d;
    }
    if (std::abs(g1) < 1e-5 && std::abs(g2) < 1e-5) break;
    const double det = h11 * h22 - h21 * h21;
    const double da = -(h22 * g1 - h21 * g2) / det;
    const double db = -(-h21 * g1 + h11 * g2) / det;
    const double gd = g1 * da + g2 * db;
    double step = 1.0;
    while (step >= 1e-10) {
      const double na = fit.a + step * da;
      const double nb = fit.b + step * db;
      const double nf = objective(na, nb);
      if (nf < fval + 1e-4 * step * gd) {
        fit.a = na;
        fit.b = nb;
        fval = nf;
        break;
      }
      step *= 0.5;
    }
  }
  return fit;
}

// Per-pair sigmoid calibration of a trained one-vs-one classifier. The
// sigmoids are fit on the training decision values of each pair's two
// classes, so the fit is deterministic given the model and training data.
struct SvmProbability {
  std::vector<SigmoidFit> pair_sigmoids;
};

inline SvmProbability svm_fit_probability(const SvmModel& model, const Eigen::MatrixXd& x,
                                          const std::vector<int>& labels) {
  if (static_cast<Eigen::Index>(labels.size()) != x.rows()) {
    throw std::invalid_argument("svm_fit_probability: row/label count mismatch");
  }
  const Eigen::MatrixXd dec = svm_pair_decisions(model, x);
  SvmProbability prob;
  prob.pair_sigmoids.reserve(model.pairs.size());
  for (std::size_t p = 0; p < model.pairs.size(); ++p) {
    const PairClassifier& pair = model.pairs[p];
    std::vector<double> d;
    std::vector<int> t;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (labels[i] != pair.class_a && labels[i] != pair.class_b) continue;
      d.push_back(dec(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(p)));
      t.push_back(labels[i] == pair.class_a ? 1 : -1);
    }
    prob.pair_sigmoids.push_back(fit_decision_sigmoid(d, t));
  }
  return prob;
}

// Pairwise coupling of binary probabilities into class probabilities:
// minimizes sum_ij (r_ji p_i - r_ij p_j)^2 over the simplex by the iterative
// fixed-point scheme on the quadratic form. r(i, j) = P(class i | i or j).
inline Eigen::VectorXd couple_pair_probabilities(const Eigen::MatrixXd& r) {
  const int k = static_cast<int>(r.rows());
  if (k < 2 || r.cols() != k) {
    throw std::invalid_argument("couple_pair_probabilities: need a square matrix, k >= 2");
  }
  Eigen::MatrixXd q(k, k);
  for (int i = 0; i < k; ++i) {
    q(i, i) = 0.0;
    for (int j = 0; j < k; ++j) {
      if (i == j) continue;
      q(i, i) += r(j, i) * r(j, i);
      q(i, j) = -r(j, i) * r(i, j);
    }
  }
  Eigen::VectorXd p = Eigen::VectorXd::Constant(k, 1.0 / k);
  Eigen::VectorXd qp(k);
  for (int it = 0; it < 100; ++it) {
    double pqp = 0.0;
    for (int i = 0; i < k; ++i) {
      qp[i] = q.row(i).dot(p);
      pqp += p[i] * qp[i];
    }
    double max_err = 0.0;
    for (int i = 0; i < k; ++i) max_err = std::max(max_err, std::abs(qp[i] - pqp));
    if (max_err < 1e-7) break;
    for (int i = 0; i < k; ++i) {
      const double diff = (-qp[i] + pqp) / q(i, i);
      p[i] += diff;
      pqp = (pqp + diff * (diff * q(i, i) + 2.0 * qp[i])) / (1.0 + diff) / (1.0 + diff);
      for (int j = 0; j < k; ++j) {
        qp[j] = (qp[j] + diff * q(i, j)) / (1.0 + diff);
        p[j] /= (1.0 + diff);
      }
    }
  }
  return p;
}

// Class probabilities from one row of pair decision values, in
// model.classes order. Pairwise sigmoid outputs are clamped away from 0 and
// 1 before coupling.
inline Eigen::VectorXd svm_class_probabilities_from_pairs(const SvmModel& model,
                                                          const SvmProbability& prob,
                                                          const Eigen::VectorXd& pair_decisions) {
  const int k = static_cast<int>(model.classes.size());
  if (prob.pair_sigmoids.size() != model.pairs.size() ||
      pair_decisions.size() != static_cast<Eigen::Index>(model.pairs.size())) {
    throw std::invalid_argument("svm_class_probabilities_from_pairs: pair count mismatch");
  }
  constexpr double kMin = 1e-7;
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(k, k);
  for (std::size_t p = 0; p < model.pairs.size(); ++p) {
    const PairClassifier& pair = model.pairs[p];
    const auto ia = std::lower_bound(model.classes.begin(), model.classes.end(), pair.class_a) -
                    model.classes.begin();
    const auto ib = std::lower_bound(model.classes.begin(), model.classes.end(), pair.class_b) -
                    model.classes.begin();
    const double v = std::min(
        std::max(sigmoid_probability(prob.pair_sigmoids[p], pair_decisions[static_cast<Eigen::Index>(p)]),
                 kMin),
        1.0 - kMin);
    r(ia, ib) = v;
    r(ib, ia) = 1.0 - v;
  }
  return couple_pair_probabilities(r);
}

// Class-membership probabilities, one column per entry of model.classes.
inline Eigen::MatrixXd svm_predict_proba(const SvmModel& model, const SvmProbability& prob,
                                         const Eigen::MatrixXd& x) {
  const Eigen::MatrixXd dec = svm_pair_decisions(model, x);
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(model.classes.size()));
  for (Eigen::Index r = 0; r < x.rows(); ++r) {
    out.row(r) = svm_class_probabilities_from_pairs(model, prob, dec.row(r).transpose()).transpose();
  }
  return out;
}

inline double accuracy(const std::vector<int>& predicted, const std::vector<int>& truth) {
  if (predicted.size() != truth.size() || predicted.empty()) {
    throw std::invalid_argument("accuracy: size mismatch or empty input");
  }
  std::size_t hits = 0;
  for (std::size_t i = 0; i < predicted.size(); ++i) hits += predicted[i] == truth[i];
  return static_cast<double>(hits) / static_cast<double>(predicted.size());
}

}  // namespace qphase
