#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "qphase/correlation.hpp"
#include "qphase/lanczos.hpp"
#include "qphase/parallel.hpp"
#include "qphase/phase.hpp"
#include "qphase/rng.hpp"
#include "qphase/spin_chain.hpp"

namespace qphase {

struct DatasetRow {
  double kappa = 0.0;
  double g = 0.0;
  std::vector<double> features;
  PhaseLabel label = PhaseLabel::Paramagnetic;
};

struct Dataset {
  int n_sites = 0;
  std::vector<std::string> feature_names;
  std::vector<DatasetRow> rows;

  int feature_count() const { return static_cast<int>(feature_names.size()); }

  Eigen::MatrixXd feature_matrix() const {
    Eigen::MatrixXd m(static_cast<Eigen::Index>(rows.size()), feature_count());
    for (std::size_t r = 0; r < rows.size(); ++r) {
      for (int c = 0; c < feature_count(); ++c) {
        m(static_cast<Eigen::Index>(r), c) = rows[r].features[static_cast<std::size_t>(c)];
      }
    }
    return m;
  }

  std::vector<int> labels() const {
    std::vector<int> y;
    y.reserve(rows.size());
    for (const auto& row : rows) y.push_back(static_cast<int>(row.label));
    return y;
  }
};

// Feature layout: <sigma^a_1 sigma^a_j> for a in {x, y, z} (in that order)
// and j = 2 .. N/2 + 1, giving 3 * N/2 features named like "zz_1_4".
inline std::vector<std::string> correlation_feature_names(int n_sites) {
  static const char* kAxes[] = {"xx", "yy", "zz"};
  std::vector<std::string> names;
  names.reserve(3 * static_cast<std::size_t>(n_sites) / 2);
  for (const char* axis : kAxes) {
    for (int j = 2; j <= n_sites / 2 + 1; ++j) {
      names.push_back(std::string(axis) + "_1_" + std::to_string(j));
    }
  }
  return names;
}

inline std::vector<double> correlation_features(const GroundSubspace& gs) {
  static const PauliAxis kAxes[] = {PauliAxis::X, PauliAxis::Y, PauliAxis::Z};
  std::vector<double> features;
  features.reserve(3 * static_cast<std::size_t>(gs.n_sites) / 2);
  for (PauliAxis axis : kAxes) {
    for (int j = 2; j <= gs.n_sites / 2 + 1; ++j) {
      features.push_back(pair_correlation(gs, axis, 1, j));
    }
  }
  return features;
}

struct GenerateOptions {
  double grid_step = 0.01;
  double degeneracy_tol = 1e-8;
  uint64_t seed = 0x1c0ffee5u;
  unsigned n_threads = 0;  // 0 = hardware concurrency
  LanczosOptions lanczos{};
};

// Sweeps the (kappa, g) grid {0, step, ..., 1 - step}^2, solving the chain at
// every point. Rows are ordered by kappa then g. Each kappa row is processed
// with g ascending so the previous ground vector can warm-start the next
// point; rows are independent, so the grid parallelizes across kappa without
// affecting results.
inline Dataset generate_dataset(int n_sites, const GenerateOptions& opt = {}) {
  if (opt.grid_step <= 0.0 || opt.grid_step > 0.5) {
    throw std::invalid_argument("generate_dataset: grid_step must lie in (0, 0.5]");
  }
  ChainConfig{n_sites, 0.0, 0.0}.validate();
  const std::size_t count = static_cast<std::size_t>(std::lround(1.0 / opt.grid_step));

  Dataset ds;
  ds.n_sites = n_sites;
  ds.feature_names = correlation_feature_names(n_sites);
  ds.rows.resize(count * count);

  parallel_for(count, [&](std::size_t ik) {
    const double kappa = static_cast<double>(ik) * opt.grid_step;
    Eigen::VectorXd warm;
    for (std::size_t jg = 0; jg < count; ++jg) {
      const double g = static_cast<double>(jg) * opt.grid_step;
      const ChainConfig config{n_sites, kappa, g};
      const HamiltonianMatrix h = build_hamiltonian(config);
      LanczosOptions lopt = opt.lanczos;
      lopt.seed = derive_seed({opt.seed, static_cast<uint64_t>(n_sites), ik, jg});
      GroundSubspace gs;
      try {
        gs = ground_subspace(h, opt.degeneracy_tol, lopt, warm.size() > 0 ? &warm : nullptr);
      } catch (const std::exception& e) {
        throw std::runtime_error("generate_dataset: point kappa=" + std::to_string(kappa) +
                                 " g=" + std::to_string(g) + ": " + e.what());
      }
      warm = gs.basis.front();
      DatasetRow& row = ds.rows[ik * count + jg];
      row.kappa = kappa;
      row.g = g;
      row.features = correlation_features(gs);
      row.label = phase_label(kappa, g);
    }
  }, opt.n_threads);

  return ds;
}

namespace detail {

inline std::string format_value(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream in(line);
  while (std::getline(in, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace detail

inline void write_csv(const Dataset& ds, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_csv: cannot open " + path);
  out << "kappa,g";
  for (const auto& name : ds.feature_names) out << ',' << name;
  out << ",label\n";
  for (const auto& row : ds.rows) {
    out << detail::format_value(row.kappa) << ',' << detail::format_value(row.g);
    for (double f : row.features) out << ',' << detail::format_value(f);
    out << ',' << to_string(row.label) << '\n';
  }
  if (!out) throw std::runtime_error("write_csv: write failed for " + path);
}

inline Dataset read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("read_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("read_csv: empty file " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  const auto header = detail::split_csv_line(line);
  if (header.size() < 4 || header[0] != "kappa" || header[1] != "g" || header.back() != "label") {
    throw std::runtime_error("read_csv: unexpected header in " + path);
  }

  Dataset ds;
  ds.feature_names.assign(header.begin() + 2, header.end() - 1);
  // infer n_sites from the feature layout (3 correlators times N/2 each)
  ds.n_sites = static_cast<int>(2 * ds.feature_names.size() / 3);

  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != header.size()) {
      throw std::runtime_error("read_csv: bad field count at line " + std::to_string(line_no) +
                               " of " + path);
    }
    DatasetRow row;
    row.kappa = std::stod(fields[0]);
    row.g = std::stod(fields[1]);
    row.features.reserve(ds.feature_names.size());
    for (std::size_t i = 2; i + 1 < fields.size(); ++i) row.features.push_back(std::stod(fields[i]));
    row.label = parse_phase_label(fields.back());
    ds.rows.push_back(std::move(row));
  }
  return ds;
}

}  // namespace qphase
