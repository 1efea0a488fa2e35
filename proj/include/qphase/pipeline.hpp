#pragma once

#include <algorithm>
#include <chrono>
#include <cstdint>
#include <filesystem>
#include <map>
#include <fstream>
#include <iostream>
#include <json.hpp>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qphase/dataset.hpp"
#include "qphase/qsvm.hpp"
#include "qphase/scaler.hpp"
#include "qphase/shap.hpp"
#include "qphase/split.hpp"
#include "qphase/svm.hpp"
#include "qphase/vqc.hpp"

namespace qphase {

using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Configuration
// ---------------------------------------------------------------------------

// One config drives every command; flag overrides are applied by the CLI.
// Every output artifact embeds the resolved config, and a config fully
// determines every output byte except the *_timing.json sidecars.
struct ExperimentConfig {
  int n_sites = 8;
  double grid_step = 0.01;
  std::string algorithm = "qsvm";  // svc | qsvm | vqc
  int k_features = 5;
  double test_fraction = 0.3;

  uint64_t seed_split = 1;
  uint64_t seed_shap = 2;
  uint64_t seed_vqc = 3;

  double svm_c = 1.0;
  double svm_gamma = 0.0;  // <= 0: use the 1/(d*var) heuristic

  int feature_map_reps = 3;
  int ansatz_layers = 5;
  int shots = 600;
  int spsa_iterations = 100;

  int shap_background_rows = 100;
  int shap_explain_rows = 200;
  long shap_coalition_samples = 0;  // 0: exhaustive if M <= 14, else 50,000
  int shap_explain_label = 2;       // explanation points come from this class; -1 = all rows
  int shap_output_label = 0;        // the class whose membership probability is explained

  int threads = 0;  // 0 = hardware concurrency

  std::string out_dir = "artifacts";
  std::string dataset_path;  // empty: <out_dir>/dataset_n<N>.csv
  std::string report_path;   // empty: <out_dir>/shap_report_n<N>.json
  std::string model_path;    // empty: <out_dir>/model_<alg>_n<N>_k<K>.json

  void validate() const {
    if (n_sites < 4 || n_sites > 14 || n_sites % 2 != 0) {
      throw std::invalid_argument("config: n_sites must be even and in [4, 14]");
    }
    if (grid_step <= 0.0 || grid_step > 0.5) {
      throw std::invalid_argument("config: grid_step must lie in (0, 0.5]");
    }
    if (algorithm != "svc" && algorithm != "qsvm" && algorithm != "vqc") {
      throw std::invalid_argument("config: algorithm must be svc, qsvm, or vqc");
    }
    if (k_features < 1) throw std::invalid_argument("config: k_features must be >= 1");
    if (test_fraction <= 0.0 || test_fraction >= 1.0) {
      throw std::invalid_argument("config: test_fraction must lie in (0, 1)");
    }
    if (svm_c <= 0.0) throw std::invalid_argument("config: svm C must be positive");
    if (feature_map_reps < 1) throw std::invalid_argument("config: feature_map_reps must be >= 1");
    if (ansatz_layers < 0) throw std::invalid_argument("config: ansatz_layers must be >= 0");
    if (spsa_iterations < 1) throw std::invalid_argument("config: spsa_iterations must be >= 1");
    if (shap_background_rows < 1 || shap_explain_rows < 1) {
      throw std::invalid_argument("config: shap row budgets must be >= 1");
    }
    if (shap_coalition_samples < 0) {
      throw std::invalid_argument("config: shap_coalition_samples must be >= 0");
    }
    if (threads < 0) throw std::invalid_argument("config: threads must be >= 0");
    if (out_dir.empty()) throw std::invalid_argument("config: out_dir must not be empty");
  }

  std::string resolved_dataset_path() const {
    if (!dataset_path.empty()) return dataset_path;
    return out_dir + "/dataset_n" + std::to_string(n_sites) + ".csv";
  }
  std::string resolved_report_path() const {
    if (!report_path.empty()) return report_path;
    return out_dir + "/shap_report_n" + std::to_string(n_sites) + ".json";
  }
  std::string resolved_model_path() const {
    if (!model_path.empty()) return model_path;
    return out_dir + "/model_" + algorithm + "_n" + std::to_string(n_sites) + "_k" +
           std::to_string(k_features) + ".json";
  }
  std::string run_tag() const {
    return algorithm + "_n" + std::to_string(n_sites) + "_k" + std::to_string(k_features);
  }
};

namespace detail {

template <class T>
void read_field(const Json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

inline void reject_unknown_keys(const Json& j, const std::set<std::string>& known,
                                const std::string& where) {
  for (const auto& item : j.items()) {
    if (!known.count(item.key())) {
      throw std::invalid_argument("config: unknown key '" + item.key() + "' in " + where);
    }
  }
}

}  // namespace detail

inline Json config_to_json(const ExperimentConfig& c) {
  Json j;
  j["n_sites"] = c.n_sites;
  j["grid_step"] = c.grid_step;
  j["algorithm"] = c.algorithm;
  j["k_features"] = c.k_features;
  j["test_fraction"] = c.test_fraction;
  j["seeds"] = Json{{"split", c.seed_split}, {"shap", c.seed_shap}, {"vqc", c.seed_vqc}};
  j["svm"] = Json{{"c", c.svm_c}, {"gamma", c.svm_gamma}};
  j["quantum"] = Json{{"feature_map_reps", c.feature_map_reps},
                      {"ansatz_layers", c.ansatz_layers},
                      {"shots", c.shots},
                      {"spsa_iterations", c.spsa_iterations}};
  j["shap"] = Json{{"background_rows", c.shap_background_rows},
                   {"explain_rows", c.shap_explain_rows},
                   {"coalition_samples", c.shap_coalition_samples},
                   {"explain_label", c.shap_explain_label},
                   {"output_label", c.shap_output_label}};
  j["threads"] = c.threads;
  j["paths"] = Json{{"out_dir", c.out_dir},
                    {"dataset", c.dataset_path},
                    {"report", c.report_path},
                    {"model", c.model_path}};
  return j;
}

inline ExperimentConfig config_from_json(const Json& j) {
  ExperimentConfig c;
  detail::reject_unknown_keys(j,
                              {"n_sites", "grid_step", "algorithm", "k_features", "test_fraction",
                               "seeds", "svm", "quantum", "shap", "threads", "paths"},
                              "top level");
  detail::read_field(j, "n_sites", c.n_sites);
  detail::read_field(j, "grid_step", c.grid_step);
  detail::read_field(j, "algorithm", c.algorithm);
  detail::read_field(j, "k_features", c.k_features);
  detail::read_field(j, "test_fraction", c.test_fraction);
  if (j.contains("seeds")) {
    const Json& s = j.at("seeds");
    detail::reject_unknown_keys(s, {"split", "shap", "vqc"}, "seeds");
    detail::read_field(s, "split", c.seed_split);
    detail::read_field(s, "shap", c.seed_shap);
    detail::read_field(s, "vqc", c.seed_vqc);
  }
  if (j.contains("svm")) {
    const Json& s = j.at("svm");
    detail::reject_unknown_keys(s, {"c", "gamma"}, "svm");
    detail::read_field(s, "c", c.svm_c);
    detail::read_field(s, "gamma", c.svm_gamma);
  }
  if (j.contains("quantum")) {
    const Json& q = j.at("quantum");
    detail::reject_unknown_keys(q, {"feature_map_reps", "ansatz_layers", "shots", "spsa_iterations"},
                                "quantum");
    detail::read_field(q, "feature_map_reps", c.feature_map_reps);
    detail::read_field(q, "ansatz_layers", c.ansatz_layers);
    detail::read_field(q, "shots", c.shots);
    detail::read_field(q, "spsa_iterations", c.spsa_iterations);
  }
  if (j.contains("shap")) {
    const Json& s = j.at("shap");
    detail::reject_unknown_keys(s,
                                {"background_rows", "explain_rows", "coalition_samples",
                                 "explain_label", "output_label"},
                                "shap");
    detail::read_field(s, "background_rows", c.shap_background_rows);
    detail::read_field(s, "explain_rows", c.shap_explain_rows);
    detail::read_field(s, "coalition_samples", c.shap_coalition_samples);
    detail::read_field(s, "explain_label", c.shap_explain_label);
    detail::read_field(s, "output_label", c.shap_output_label);
  }
  detail::read_field(j, "threads", c.threads);
  if (j.contains("paths")) {
    const Json& p = j.at("paths");
    detail::reject_unknown_keys(p, {"out_dir", "dataset", "report", "model"}, "paths");
    detail::read_field(p, "out_dir", c.out_dir);
    detail::read_field(p, "dataset", c.dataset_path);
    detail::read_field(p, "report", c.report_path);
    detail::read_field(p, "model", c.model_path);
  }
  c.validate();
  return c;
}

inline ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("load_config: cannot open " + path);
  Json j;
  in >> j;
  return config_from_json(j);
}

// ---------------------------------------------------------------------------
// JSON helpers for artifacts
// ---------------------------------------------------------------------------

namespace detail {

inline Json json_from_vector(const Eigen::VectorXd& v) {
  Json arr = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(v[i]);
  return arr;
}

inline Eigen::VectorXd vector_from_json(const Json& arr) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(arr.size()));
  for (std::size_t i = 0; i < arr.size(); ++i) v[static_cast<Eigen::Index>(i)] = arr[i].get<double>();
  return v;
}

inline Json json_from_matrix(const Eigen::MatrixXd& m) {
  Json rows = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) rows.push_back(json_from_vector(m.row(r).transpose()));
  return rows;
}

inline Eigen::MatrixXd matrix_from_json(const Json& rows, Eigen::Index cols_hint = -1) {
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  if (nr == 0) return Eigen::MatrixXd(0, cols_hint < 0 ? 0 : cols_hint);
  const Eigen::Index nc = static_cast<Eigen::Index>(rows[0].size());
  Eigen::MatrixXd m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    if (static_cast<Eigen::Index>(rows[static_cast<std::size_t>(r)].size()) != nc) {
      throw std::runtime_error("artifact: ragged matrix rows");
    }
    m.row(r) = vector_from_json(rows[static_cast<std::size_t>(r)]).transpose();
  }
  return m;
}

inline void write_json_file(const Json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path + " for writing");
  out << j.dump(2) << '\n';
  if (!out) throw std::runtime_error("write failed for " + path);
}

inline Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  Json j;
  in >> j;
  return j;
}

inline void ensure_parent_dir(const std::string& path) {
  const std::filesystem::path parent = std::filesystem::path(path).parent_path();
  if (!parent.empty()) std::filesystem::create_directories(parent);
}

inline Json pairs_to_json(const std::vector<PairClassifier>& pairs) {
  Json arr = Json::array();
  for (const PairClassifier& p : pairs) {
    arr.push_back(Json{{"class_a", p.class_a},
                       {"class_b", p.class_b},
                       {"sv_local", p.sv_local},
                       {"coef", p.coef},
                       {"bias", p.bias}});
  }
  return arr;
}

inline std::vector<PairClassifier> pairs_from_json(const Json& arr) {
  std::vector<PairClassifier> pairs;
  for (const Json& pj : arr) {
    PairClassifier p;
    p.class_a = pj.at("class_a").get<int>();
    p.class_b = pj.at("class_b").get<int>();
    p.sv_local = pj.at("sv_local").get<std::vector<int>>();
    p.coef = pj.at("coef").get<std::vector<double>>();
    p.bias = pj.at("bias").get<double>();
    pairs.push_back(std::move(p));
  }
  return pairs;
}

}  // namespace detail

// Serialized kernel SVM (feature-space mode: stores gamma and the support rows).
inline Json svm_to_json(const SvmModel& m) {
  if (m.kernel.kind != KernelKind::Rbf) {
    throw std::invalid_argument("svm_to_json: expected a feature-space kernel model");
  }
  Json j;
  j["kernel"] = "rbf";
  j["gamma"] = m.kernel.gamma;
  j["c"] = m.c;
  j["classes"] = m.classes;
  j["n_train"] = m.n_train;
  j["n_features"] = m.n_features;
  j["sv_train_indices"] = m.sv_train_indices;
  j["sv_rows"] = detail::json_from_matrix(m.sv_rows);
  j["pairs"] = detail::pairs_to_json(m.pairs);
  return j;
}

inline SvmModel svm_from_json(const Json& j) {
  if (j.at("kernel").get<std::string>() != "rbf") {
    throw std::runtime_error("svm_from_json: unsupported kernel tag");
  }
  SvmModel m;
  m.kernel = {KernelKind::Rbf, j.at("gamma").get<double>()};
  m.c = j.at("c").get<double>();
  m.classes = j.at("classes").get<std::vector<int>>();
  m.n_train = j.at("n_train").get<int>();
  m.n_features = j.at("n_features").get<int>();
  m.sv_train_indices = j.at("sv_train_indices").get<std::vector<int>>();
  m.sv_rows = detail::matrix_from_json(j.at("sv_rows"), m.n_features);
  m.pairs = detail::pairs_from_json(j.at("pairs"));
  return m;
}

// Serialized quantum-kernel SVM. Only the support-vector union rows are kept;
// on load the union becomes the stored training set, so every index is
// remapped to 0..U-1.
inline Json qsvm_to_json(const QsvmModel& m) {
  Json j;
  j["feature_map"] = Json{{"n_qubits", m.feature_map.n_qubits}, {"reps", m.feature_map.reps}};
  j["c"] = m.svm.c;
  j["classes"] = m.svm.classes;
  j["n_train"] = m.svm.n_train;
  Eigen::MatrixXd union_rows(static_cast<Eigen::Index>(m.svm.sv_train_indices.size()),
                             m.train_rows.cols());
  for (std::size_t u = 0; u < m.svm.sv_train_indices.size(); ++u) {
    union_rows.row(static_cast<Eigen::Index>(u)) = m.train_rows.row(m.svm.sv_train_indices[u]);
  }
  j["union_rows"] = detail::json_from_matrix(union_rows);
  j["pairs"] = detail::pairs_to_json(m.svm.pairs);
  return j;
}

inline QsvmModel qsvm_from_json(const Json& j) {
  QsvmModel m;
  m.feature_map.n_qubits = j.at("feature_map").at("n_qubits").get<int>();
  m.feature_map.reps = j.at("feature_map").at("reps").get<int>();
  m.train_rows = detail::matrix_from_json(j.at("union_rows"), m.feature_map.n_qubits);
  m.svm.kernel = {KernelKind::Precomputed, 0.0};
  m.svm.c = j.at("c").get<double>();
  m.svm.classes = j.at("classes").get<std::vector<int>>();
  m.svm.n_train = j.at("n_train").get<int>();
  m.svm.pairs = detail::pairs_from_json(j.at("pairs"));
  m.svm.sv_train_indices.resize(static_cast<std::size_t>(m.train_rows.rows()));
  for (std::size_t u = 0; u < m.svm.sv_train_indices.size(); ++u) {
    m.svm.sv_train_indices[u] = static_cast<int>(u);
  }
  return m;
}

inline Json vqc_to_json(const VqcModel& m) {
  Json j;
  j["feature_map"] = Json{{"n_qubits", m.feature_map.n_qubits}, {"reps", m.feature_map.reps}};
  j["ansatz"] = Json{{"n_qubits", m.ansatz.n_qubits}, {"layers", m.ansatz.layers}};
  j["theta"] = detail::json_from_vector(m.theta);
  j["class_count"] = m.class_count;
  j["shots"] = m.shots;
  j["seed"] = m.seed;
  return j;
}

inline VqcModel vqc_from_json(const Json& j) {
  VqcModel m;
  m.feature_map.n_qubits = j.at("feature_map").at("n_qubits").get<int>();
  m.feature_map.reps = j.at("feature_map").at("reps").get<int>();
  m.ansatz.n_qubits = j.at("ansatz").at("n_qubits").get<int>();
  m.ansatz.layers = j.at("ansatz").at("layers").get<int>();
  m.theta = detail::vector_from_json(j.at("theta"));
  m.class_count = j.at("class_count").get<int>();
  m.shots = j.at("shots").get<int>();
  m.seed = j.at("seed").get<uint64_t>();
  return m;
}

inline Json scaler_to_json(const ScalerParams& s) {
  return Json{{"min", detail::json_from_vector(s.min)}, {"max", detail::json_from_vector(s.max)}};
}

inline ScalerParams scaler_from_json(const Json& j) {
  return {detail::vector_from_json(j.at("min")), detail::vector_from_json(j.at("max"))};
}

// ---------------------------------------------------------------------------
// Shared training plumbing
// ---------------------------------------------------------------------------

namespace detail {

inline Dataset load_dataset_checked(const ExperimentConfig& cfg) {
  const std::string path = cfg.resolved_dataset_path();
  Dataset ds = read_csv(path);
  if (ds.n_sites != cfg.n_sites) {
    throw std::runtime_error("dataset " + path + " holds n_sites=" + std::to_string(ds.n_sites) +
                             " but the config requests n_sites=" + std::to_string(cfg.n_sites));
  }
  if (ds.rows.empty()) throw std::runtime_error("dataset " + path + " has no rows");
  return ds;
}

inline Eigen::MatrixXd select_columns(const Eigen::MatrixXd& x, const std::vector<int>& cols) {
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(cols.size()));
  for (std::size_t c = 0; c < cols.size(); ++c) {
    out.col(static_cast<Eigen::Index>(c)) = x.col(cols[c]);
  }
  return out;
}

inline Eigen::MatrixXd select_rows(const Eigen::MatrixXd& x, const std::vector<int>& rows) {
  Eigen::MatrixXd out(static_cast<Eigen::Index>(rows.size()), x.cols());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    out.row(static_cast<Eigen::Index>(r)) = x.row(rows[r]);
  }
  return out;
}

inline std::vector<int> select_labels(const std::vector<int>& y, const std::vector<int>& rows) {
  std::vector<int> out;
  out.reserve(rows.size());
  for (int r : rows) out.push_back(y[static_cast<std::size_t>(r)]);
  return out;
}

}  // namespace detail

// Feature indices used for training: the identity when k equals the feature
// count, otherwise the top k of the ranking stored in the report file.
inline std::vector<int> selected_feature_indices(const ExperimentConfig& cfg, const Dataset& ds) {
  const int m = ds.feature_count();
  if (cfg.k_features > m) {
    throw std::invalid_argument("k_features=" + std::to_string(cfg.k_features) + " exceeds the " +
                                std::to_string(m) + " dataset features");
  }
  if (cfg.k_features == m) {
    std::vector<int> all(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i) all[static_cast<std::size_t>(i)] = i;
    return all;
  }
  const std::string path = cfg.resolved_report_path();
  if (!std::filesystem::exists(path)) {
    throw std::runtime_error("feature report " + path + " is required when k_features < " +
                             std::to_string(m) + "; run the rank command first");
  }
  const Json report = detail::read_json_file(path);
  const auto names = report.at("feature_names").get<std::vector<std::string>>();
  if (names != ds.feature_names) {
    throw std::runtime_error("feature report " + path + " does not match the dataset's features");
  }
  const auto ranking = report.at("ranking").get<std::vector<int>>();
  if (static_cast<int>(ranking.size()) != m) {
    throw std::runtime_error("feature report " + path + " has a ranking of the wrong length");
  }
  return std::vector<int>(ranking.begin(), ranking.begin() + cfg.k_features);
}

struct TrainingOutcome {
  std::string algorithm;
  std::vector<int> selected;  // feature column indices
  ScalerParams scaler;
  std::vector<int> class_ids;  // sorted distinct labels of the full dataset
  int train_rows = 0;
  int test_rows = 0;
  double accuracy = 0.0;
  std::vector<std::vector<long>> confusion;  // [true][predicted] in class_ids order
  double gamma_used = 0.0;                   // svc only
  SvmModel svc;
  QsvmModel qsvm;
  VqcModel vqc;
  std::vector<double> vqc_loss_history;
  double vqc_spsa_a = 0.0;
};

inline TrainingOutcome run_training(const ExperimentConfig& cfg, const Dataset& ds,
                                    const std::vector<int>& selected) {
  TrainingOutcome out;
  out.algorithm = cfg.algorithm;
  out.selected = selected;

  const Eigen::MatrixXd x_all = detail::select_columns(ds.feature_matrix(), selected);
  const std::vector<int> y_all = ds.labels();
  const std::set<int> class_set(y_all.begin(), y_all.end());
  out.class_ids.assign(class_set.begin(), class_set.end());

  const SplitIndices split =
      train_test_split(static_cast<int>(x_all.rows()), {cfg.test_fraction, cfg.seed_split, true});
  const Eigen::MatrixXd x_train_raw = detail::select_rows(x_all, split.train);
  const Eigen::MatrixXd x_test_raw = detail::select_rows(x_all, split.test);
  const std::vector<int> y_train = detail::select_labels(y_all, split.train);
  const std::vector<int> y_test = detail::select_labels(y_all, split.test);
  out.train_rows = static_cast<int>(split.train.size());
  out.test_rows = static_cast<int>(split.test.size());

  out.scaler = fit_scaler(x_train_raw);
  const Eigen::MatrixXd x_train = apply_scaler(out.scaler, x_train_raw);
  const Eigen::MatrixXd x_test = apply_scaler(out.scaler, x_test_raw);

  std::vector<int> predictions;
  if (cfg.algorithm == "svc") {
    out.gamma_used = cfg.svm_gamma > 0.0 ? cfg.svm_gamma : rbf_gamma_scale(x_train);
    out.svc = svm_train(x_train, y_train, {KernelKind::Rbf, out.gamma_used}, cfg.svm_c);
    predictions = svm_predict(out.svc, x_test);
  } else if (cfg.algorithm == "qsvm") {
    const FeatureMapSpec spec{static_cast<int>(selected.size()), cfg.feature_map_reps};
    out.qsvm = qsvm_train(x_train, y_train, spec, cfg.svm_c);
    predictions = qsvm_predict(out.qsvm, x_test);
  } else if (cfg.algorithm == "vqc") {
    int class_count = 0;
    for (int cls : out.class_ids) class_count = std::max(class_count, cls + 1);
    const FeatureMapSpec fm{static_cast<int>(selected.size()), cfg.feature_map_reps};
    const AnsatzSpec ansatz{static_cast<int>(selected.size()), cfg.ansatz_layers};
    SpsaConfig spsa;
    spsa.iterations = cfg.spsa_iterations;
    spsa.seed = cfg.seed_vqc;
    const VqcTrainResult trained = vqc_train(x_train, y_train, fm, ansatz, spsa, class_count,
                                             cfg.shots, cfg.seed_vqc, cfg.threads);
    out.vqc = trained.model;
    out.vqc_loss_history = trained.loss_history;
    out.vqc_spsa_a = trained.spsa_a;
    predictions = vqc_predict(out.vqc, x_test, cfg.threads);
  } else {
    throw std::invalid_argument("run_training: unknown algorithm " + cfg.algorithm);
  }

  const int n_cls = static_cast<int>(out.class_ids.size());
  out.confusion.assign(static_cast<std::size_t>(n_cls),
                       std::vector<long>(static_cast<std::size_t>(n_cls), 0));
  std::map<int, int> index_of;
  for (int i = 0; i < n_cls; ++i) index_of[out.class_ids[static_cast<std::size_t>(i)]] = i;
  long correct = 0;
  for (std::size_t r = 0; r < y_test.size(); ++r) {
    const auto ti = index_of.find(y_test[r]);
    const auto pi = index_of.find(predictions[r]);
    if (ti == index_of.end() || pi == index_of.end()) {
      throw std::runtime_error("run_training: prediction outside the dataset's label set");
    }
    ++out.confusion[static_cast<std::size_t>(ti->second)][static_cast<std::size_t>(pi->second)];
    if (y_test[r] == predictions[r]) ++correct;
  }
  out.accuracy = static_cast<double>(correct) / static_cast<double>(y_test.size());
  return out;
}

// ---------------------------------------------------------------------------
// Commands
// ---------------------------------------------------------------------------

struct GenerateOutput {
  std::string dataset_path;
  int rows = 0;
  int features = 0;
  double wall_seconds = 0.0;
};

inline GenerateOutput cmd_generate(const ExperimentConfig& cfg) {
  cfg.validate();
  const std::string path = cfg.resolved_dataset_path();
  detail::ensure_parent_dir(path);
  std::filesystem::create_directories(cfg.out_dir);
  if (std::filesystem::exists(path)) {
    std::cerr << "warning: overwriting existing dataset " << path << "\n";
  }
  const auto start = std::chrono::steady_clock::now();
  GenerateOptions opt;
  opt.grid_step = cfg.grid_step;
  opt.n_threads = static_cast<unsigned>(cfg.threads);
  const Dataset ds = generate_dataset(cfg.n_sites, opt);
  write_csv(ds, path);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  return {path, static_cast<int>(ds.rows.size()), ds.feature_count(), elapsed.count()};
}

struct RankOutput {
  std::string report_path;
  std::string plot_csv_path;
  ShapReport report;
  std::vector<std::string> feature_names;
  double wall_seconds = 0.0;
};

inline RankOutput cmd_rank(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = detail::load_dataset_checked(cfg);
  const Eigen::MatrixXd x_all = ds.feature_matrix();
  const std::vector<int> y_all = ds.labels();

  const SplitIndices split =
      train_test_split(static_cast<int>(x_all.rows()), {cfg.test_fraction, cfg.seed_split, true});
  Eigen::MatrixXd x_train = detail::select_rows(x_all, split.train);
  const std::vector<int> y_train = detail::select_labels(y_all, split.train);
  const ScalerParams scaler = fit_scaler(x_train);
  x_train = apply_scaler(scaler, x_train);

  const double gamma = cfg.svm_gamma > 0.0 ? cfg.svm_gamma : rbf_gamma_scale(x_train);
  const SvmModel base = svm_train(x_train, y_train, {KernelKind::Rbf, gamma}, cfg.svm_c);
  const SvmProbability base_prob = svm_fit_probability(base, x_train, y_train);

  const auto output_it = std::find(base.classes.begin(), base.classes.end(), cfg.shap_output_label);
  if (output_it == base.classes.end()) {
    throw std::runtime_error("rank: output label " + std::to_string(cfg.shap_output_label) +
                             " absent from the training labels");
  }
  const int output_class = static_cast<int>(output_it - base.classes.begin());

  const int n_train = static_cast<int>(x_train.rows());
  const std::vector<int> bg_rows =
      sample_row_indices(n_train, std::min(cfg.shap_background_rows, n_train),
                         derive_seed({cfg.seed_shap, 0xb6u}));
  // Explanation points come from one class: the features that move a sample
  // of the competing ordered phase toward or away from the reference phase
  // carry the ranking signal. The sampled indices address that class pool.
  std::vector<int> explain_pool;
  for (int i = 0; i < n_train; ++i) {
    if (cfg.shap_explain_label < 0 || y_train[static_cast<std::size_t>(i)] == cfg.shap_explain_label) {
      explain_pool.push_back(i);
    }
  }
  if (explain_pool.empty()) {
    throw std::runtime_error("rank: explain label " + std::to_string(cfg.shap_explain_label) +
                             " absent from the training labels");
  }
  const std::vector<int> pool_picks = sample_row_indices(
      static_cast<int>(explain_pool.size()),
      std::min(cfg.shap_explain_rows, static_cast<int>(explain_pool.size())),
      derive_seed({cfg.seed_shap, 0xe1u}));
  std::vector<int> explain_rows;
  explain_rows.reserve(pool_picks.size());
  for (int p : pool_picks) explain_rows.push_back(explain_pool[static_cast<std::size_t>(p)]);
  const Eigen::MatrixXd background = detail::select_rows(x_train, bg_rows);
  const Eigen::MatrixXd x_explain = detail::select_rows(x_train, explain_rows);

  RankOutput out;
  out.report = svm_global_importance(base, base_prob, x_explain, background,
                                     cfg.shap_coalition_samples,
                                     derive_seed({cfg.seed_shap, 0xc0u}), output_class, cfg.threads);
  out.feature_names = ds.feature_names;

  Json j;
  j["kind"] = "feature_importance_report";
  j["n_sites"] = cfg.n_sites;
  j["feature_names"] = ds.feature_names;
  j["importance"] = detail::json_from_vector(out.report.importance);
  j["ranking"] = out.report.ranking;
  Json ranked_names = Json::array();
  for (int idx : out.report.ranking) ranked_names.push_back(ds.feature_names[static_cast<std::size_t>(idx)]);
  j["ranked_features"] = ranked_names;
  j["n_samples_explained"] = out.report.n_samples_explained;
  j["background_rows"] = static_cast<int>(bg_rows.size());
  j["coalition_samples"] = cfg.shap_coalition_samples;
  j["explained_output"] = Json{{"kind", "class_probability"},
                               {"output_label", cfg.shap_output_label},
                               {"explain_label", cfg.shap_explain_label}};
  j["base_model"] = Json{{"algorithm", "svc"},
                         {"c", cfg.svm_c},
                         {"gamma", gamma},
                         {"support_vectors", static_cast<int>(base.sv_train_indices.size())}};
  j["config"] = config_to_json(cfg);

  out.report_path = cfg.resolved_report_path();
  detail::ensure_parent_dir(out.report_path);
  detail::write_json_file(j, out.report_path);

  out.plot_csv_path = cfg.out_dir + "/shap_importance_n" + std::to_string(cfg.n_sites) + ".csv";
  detail::ensure_parent_dir(out.plot_csv_path);
  {
    std::ofstream csv(out.plot_csv_path);
    if (!csv) throw std::runtime_error("cannot open " + out.plot_csv_path);
    csv << "rank,feature,importance\n";
    for (std::size_t i = 0; i < out.report.ranking.size(); ++i) {
      const int idx = out.report.ranking[i];
      csv << (i + 1) << ',' << ds.feature_names[static_cast<std::size_t>(idx)] << ','
          << detail::format_value(out.report.importance[idx]) << '\n';
    }
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  out.wall_seconds = elapsed.count();
  return out;
}

struct TrainOutput {
  std::string result_path;
  std::string model_path;
  std::string loss_csv_path;  // vqc only
  TrainingOutcome outcome;
  double wall_seconds = 0.0;
};

inline TrainOutput cmd_train(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = detail::load_dataset_checked(cfg);
  const std::vector<int> selected = selected_feature_indices(cfg, ds);

  TrainOutput out;
  out.outcome = run_training(cfg, ds, selected);
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  out.wall_seconds = elapsed.count();

  std::filesystem::create_directories(cfg.out_dir);

  // model artifact
  Json model;
  model["kind"] = "phase_classifier";
  model["algorithm"] = cfg.algorithm;
  model["n_sites"] = cfg.n_sites;
  model["feature_names_all"] = ds.feature_names;
  model["selected_features"] = out.outcome.selected;
  Json sel_names = Json::array();
  for (int idx : out.outcome.selected) sel_names.push_back(ds.feature_names[static_cast<std::size_t>(idx)]);
  model["selected_feature_names"] = sel_names;
  model["scaler"] = scaler_to_json(out.outcome.scaler);
  model["classes"] = out.outcome.class_ids;
  Json class_names = Json::array();
  for (int cls : out.outcome.class_ids) class_names.push_back(to_string(static_cast<PhaseLabel>(cls)));
  model["class_names"] = class_names;
  if (cfg.algorithm == "svc") {
    model["svm"] = svm_to_json(out.outcome.svc);
  } else if (cfg.algorithm == "qsvm") {
    model["qsvm"] = qsvm_to_json(out.outcome.qsvm);
  } else {
    Json vj = vqc_to_json(out.outcome.vqc);
    vj["spsa"] = Json{{"iterations", cfg.spsa_iterations},
                      {"a_used", out.outcome.vqc_spsa_a},
                      {"seed", cfg.seed_vqc}};
    model["vqc"] = vj;
  }
  model["config"] = config_to_json(cfg);
  out.model_path = cfg.resolved_model_path();
  detail::ensure_parent_dir(out.model_path);
  detail::write_json_file(model, out.model_path);

  // vqc convergence trace
  if (cfg.algorithm == "vqc") {
    out.loss_csv_path = cfg.out_dir + "/loss_" + cfg.run_tag() + ".csv";
    std::ofstream csv(out.loss_csv_path);
    if (!csv) throw std::runtime_error("cannot open " + out.loss_csv_path);
    csv << "iteration,loss\n";
    for (std::size_t i = 0; i < out.outcome.vqc_loss_history.size(); ++i) {
      csv << i << ',' << detail::format_value(out.outcome.vqc_loss_history[i]) << '\n';
    }
  }

  // run result
  Json run;
  run["kind"] = "run_result";
  run["config"] = config_to_json(cfg);
  run["accuracy"] = out.outcome.accuracy;
  run["classes"] = out.outcome.class_ids;
  run["class_names"] = class_names;
  run["confusion"] = out.outcome.confusion;
  run["train_rows"] = out.outcome.train_rows;
  run["test_rows"] = out.outcome.test_rows;
  Json artifacts;
  artifacts["model"] = out.model_path;
  if (!out.loss_csv_path.empty()) artifacts["loss_history"] = out.loss_csv_path;
  run["artifacts"] = artifacts;
  out.result_path = cfg.out_dir + "/run_" + cfg.run_tag() + ".json";
  detail::write_json_file(run, out.result_path);

  // wall time lives in a sidecar so the primary outputs stay reproducible
  detail::write_json_file(Json{{"wall_seconds", out.wall_seconds}},
                          cfg.out_dir + "/run_" + cfg.run_tag() + "_timing.json");
  return out;
}

struct SweepRow {
  std::string algorithm;
  int k = 0;
  double accuracy = 0.0;
};

struct SweepOutput {
  std::string csv_path;
  std::vector<SweepRow> rows;
  double wall_seconds = 0.0;
};

// Accuracy of both quantum algorithms for every k in [k_min, k_max], using
// the same ranking report for feature selection throughout.
inline SweepOutput cmd_sweep(const ExperimentConfig& cfg, int k_min, int k_max) {
  cfg.validate();
  if (k_min < 1 || k_max < k_min) {
    throw std::invalid_argument("sweep: need 1 <= k_min <= k_max");
  }
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = detail::load_dataset_checked(cfg);

  SweepOutput out;
  for (const char* algorithm : {"qsvm", "vqc"}) {
    for (int k = k_min; k <= k_max; ++k) {
      ExperimentConfig sub = cfg;
      sub.algorithm = algorithm;
      sub.k_features = k;
      const std::vector<int> selected = selected_feature_indices(sub, ds);
      const TrainingOutcome res = run_training(sub, ds, selected);
      out.rows.push_back({algorithm, k, res.accuracy});
    }
  }

  std::filesystem::create_directories(cfg.out_dir);
  out.csv_path = cfg.out_dir + "/sweep_n" + std::to_string(cfg.n_sites) + "_k" +
                 std::to_string(k_min) + "_" + std::to_string(k_max) + ".csv";
  std::ofstream csv(out.csv_path);
  if (!csv) throw std::runtime_error("cannot open " + out.csv_path);
  csv << "algorithm,k,accuracy\n";
  for (const SweepRow& row : out.rows) {
    csv << row.algorithm << ',' << row.k << ',' << detail::format_value(row.accuracy) << '\n';
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  out.wall_seconds = elapsed.count();
  return out;
}

struct DiagramOutput {
  std::string csv_path;
  long total = 0;
  long misclassified = 0;
  double wall_seconds = 0.0;
};

// Predicts every grid point with a stored model and writes the plot-ready
// phase diagram including the analytic boundary curves.
inline DiagramOutput cmd_diagram(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto start = std::chrono::steady_clock::now();
  const Dataset ds = detail::load_dataset_checked(cfg);
  const std::string model_path = cfg.resolved_model_path();
  const Json artifact = detail::read_json_file(model_path);
  if (artifact.value("kind", "") != "phase_classifier") {
    throw std::runtime_error("model artifact " + model_path + " is not a phase classifier");
  }
  const auto names_all = artifact.at("feature_names_all").get<std::vector<std::string>>();
  if (names_all != ds.feature_names) {
    throw std::runtime_error("model artifact " + model_path + " does not match the dataset");
  }
  const auto selected = artifact.at("selected_features").get<std::vector<int>>();
  const ScalerParams scaler = scaler_from_json(artifact.at("scaler"));
  const std::string algorithm = artifact.at("algorithm").get<std::string>();

  const Eigen::MatrixXd x =
      apply_scaler(scaler, detail::select_columns(ds.feature_matrix(), selected));
  std::vector<int> predictions;
  if (algorithm == "svc") {
    predictions = svm_predict(svm_from_json(artifact.at("svm")), x);
  } else if (algorithm == "qsvm") {
    predictions = qsvm_predict(qsvm_from_json(artifact.at("qsvm")), x);
  } else if (algorithm == "vqc") {
    predictions = vqc_predict(vqc_from_json(artifact.at("vqc")), x, cfg.threads);
  } else {
    throw std::runtime_error("model artifact " + model_path + " has unknown algorithm " + algorithm);
  }

  DiagramOutput out;
  std::filesystem::create_directories(cfg.out_dir);
  out.csv_path = cfg.out_dir + "/diagram_" + algorithm + "_n" + std::to_string(cfg.n_sites) + ".csv";
  std::ofstream csv(out.csv_path);
  if (!csv) throw std::runtime_error("cannot open " + out.csv_path);
  csv << "kappa,g,predicted,true,g_ising,g_bkt\n";
  for (std::size_t r = 0; r < ds.rows.size(); ++r) {
    const DatasetRow& row = ds.rows[r];
    csv << detail::format_value(row.kappa) << ',' << detail::format_value(row.g) << ','
        << to_string(static_cast<PhaseLabel>(predictions[r])) << ',' << to_string(row.label) << ',';
    if (row.kappa <= 0.5) csv << detail::format_value(ising_boundary(row.kappa));
    csv << ',';
    if (row.kappa > 0.5) csv << detail::format_value(bkt_boundary(row.kappa));
    csv << '\n';
    ++out.total;
    if (predictions[r] != static_cast<int>(row.label)) ++out.misclassified;
  }
  const std::chrono::duration<double> elapsed = std::chrono::steady_clock::now() - start;
  out.wall_seconds = elapsed.count();
  return out;
}

}  // namespace qphase
