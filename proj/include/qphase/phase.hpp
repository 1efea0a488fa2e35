#pragma once

#include <cmath>
#include <stdexcept>
#include <string>

namespace qphase {

enum class PhaseLabel { Ferromagnetic = 0, Paramagnetic = 1, Antiphase = 2 };

// Critical transverse field of the ferromagnet/paramagnet transition for
// kappa in [0, 0.5]:
//   g_I(kappa) = ((1-k)/k) * (1 - sqrt((1-3k+4k^2)/(1-k))),
// rewritten as 2(1-2k)/(1 + sqrt((1-3k+4k^2)/(1-k))) which is algebraically
// identical but removes the 0/0 limit at k = 0 (value 1) and is exact at
// k = 0.5 (value 0).
inline double ising_boundary(double kappa) {
  if (kappa < 0.0 || kappa > 0.5) {
    throw std::invalid_argument("ising_boundary: kappa must lie in [0, 0.5]");
  }
  const double ratio = (1.0 - 3.0 * kappa + 4.0 * kappa * kappa) / (1.0 - kappa);
  return 2.0 * (1.0 - 2.0 * kappa) / (1.0 + std::sqrt(ratio));
}

// Berezinskii-Kosterlitz-Thouless line separating the antiphase from the
// paramagnet for kappa > 0.5:
//   g_BKT(kappa) = 1.05 * sqrt((kappa - 0.5) * (kappa - 0.1)).
inline double bkt_boundary(double kappa) {
  if (!(kappa > 0.5)) {
    throw std::invalid_argument("bkt_boundary: kappa must exceed 0.5");
  }
  return 1.05 * std::sqrt((kappa - 0.5) * (kappa - 0.1));
}

inline PhaseLabel phase_label(double kappa, double g) {
  if (kappa < 0.0 || g < 0.0) {
    throw std::invalid_argument("phase_label: kappa and g must be non-negative");
  }
  if (kappa <= 0.5) {
    return g < ising_boundary(kappa) ? PhaseLabel::Ferromagnetic : PhaseLabel::Paramagnetic;
  }
  return g < bkt_boundary(kappa) ? PhaseLabel::Antiphase : PhaseLabel::Paramagnetic;
}

inline const char* to_string(PhaseLabel label) {
  switch (label) {
    case PhaseLabel::Ferromagnetic: return "ferromagnetic";
    case PhaseLabel::Paramagnetic: return "paramagnetic";
    case PhaseLabel::Antiphase: return "antiphase";
  }
  throw std::logic_error("to_string: bad phase label");
}

inline PhaseLabel parse_phase_label(const std::string& text) {
  if (text == "ferromagnetic") return PhaseLabel::Ferromagnetic;
  if (text == "paramagnetic") return PhaseLabel::Paramagnetic;
  if (text == "antiphase") return PhaseLabel::Antiphase;
  throw std::invalid_argument("parse_phase_label: unknown label '" + text + "'");
}

}  // namespace qphase
