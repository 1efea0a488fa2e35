#pragma once

#include <Eigen/Dense>
#include <stdexcept>

namespace qphase {

// Per-column min-max normalization, fitted on training data only.
struct ScalerParams {
  Eigen::VectorXd min;
  Eigen::VectorXd max;
};

inline ScalerParams fit_scaler(const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw std::invalid_argument("fit_scaler: need at least one row");
  return {x.colwise().minCoeff(), x.colwise().maxCoeff()};
}

// (x - min) / (max - min). Constant training columns map to 0. Values outside
// the fitted range land outside [0, 1]; they are intentionally not clipped.
inline Eigen::MatrixXd apply_scaler(const ScalerParams& params, const Eigen::MatrixXd& x) {
  if (x.cols() != params.min.size()) {
    throw std::invalid_argument("apply_scaler: column count does not match fitted parameters");
  }
  Eigen::MatrixXd out(x.rows(), x.cols());
  for (Eigen::Index c = 0; c < x.cols(); ++c) {
    const double span = params.max[c] - params.min[c];
    if (span == 0.0) {
      out.col(c).setZero();
    } else {
      out.col(c) = (x.col(c).array() - params.min[c]) / span;
    }
  }
  return out;
}

}  // namespace qphase
