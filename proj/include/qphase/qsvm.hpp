#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <vector>

#include "qphase/statevector.hpp"
#include "qphase/svm.hpp"

namespace qphase {

// Quantum-kernel SVM: the Gram matrix comes from statevector fidelities of
// the feature map, everything after that is the precomputed-kernel SVM.
struct QsvmModel {
  FeatureMapSpec feature_map;
  Eigen::MatrixXd train_rows;  // scaled selected-feature rows, Gram order
  SvmModel svm;
};

inline QsvmModel qsvm_train(const Eigen::MatrixXd& train, const std::vector<int>& labels,
                            const FeatureMapSpec& spec, double c = 1.0,
                            const SmoOptions& opt = {}) {
  spec.validate();
  if (train.cols() != spec.n_qubits) {
    throw std::invalid_argument("qsvm_train: one qubit per feature column required");
  }
  if (train.rows() != static_cast<Eigen::Index>(labels.size())) {
    throw std::invalid_argument("qsvm_train: row/label count mismatch");
  }
  QsvmModel model;
  model.feature_map = spec;
  model.train_rows = train;
  const Eigen::MatrixXd gram = gram_matrix(train, spec);
  model.svm = svm_train(gram, labels, {KernelKind::Precomputed, 0.0}, c, opt);
  return model;
}

inline std::vector<int> qsvm_predict(const QsvmModel& model, const Eigen::MatrixXd& x_test) {
  if (x_test.cols() != model.feature_map.n_qubits) {
    throw std::invalid_argument("qsvm_predict: feature count must match the feature map");
  }
  // fidelities are only needed against the support union
  const std::vector<int>& sv = model.svm.sv_train_indices;
  Eigen::MatrixXd sv_rows(static_cast<Eigen::Index>(sv.size()), model.train_rows.cols());
  for (std::size_t i = 0; i < sv.size(); ++i) {
    sv_rows.row(static_cast<Eigen::Index>(i)) = model.train_rows.row(sv[i]);
  }
  const Eigen::MatrixXd k_union = gram_matrix(x_test, sv_rows, model.feature_map);
  std::vector<int> out;
  out.reserve(static_cast<std::size_t>(x_test.rows()));
  for (Eigen::Index r = 0; r < x_test.rows(); ++r) {
    out.push_back(svm_predict_from_kernel(model.svm, k_union.row(r).transpose()));
  }
  return out;
}

}  // namespace qphase
