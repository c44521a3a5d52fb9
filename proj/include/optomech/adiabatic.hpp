#pragma once

// Closed-form results of the adiabatic solution: decay exponent of the dark
// mode, mean transfer amplitude, fidelity factors F1, F2 and the
// mechanical-noise estimate fs.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "optomech/model.hpp"
#include "optomech/quadrature.hpp"

namespace optomech {

enum class ExpansionRegime {
  Valid,     // f(0,T) <= 0.1
  Marginal,  // 0.1 < f(0,T) < 0.3
  Outside,   // f(0,T) >= 0.3, first-order expansion not trustworthy
};

inline const char* to_string(ExpansionRegime r) {
  switch (r) {
    case ExpansionRegime::Valid: return "valid";
    case ExpansionRegime::Marginal: return "marginal";
    case ExpansionRegime::Outside: return "outside";
  }
  return "?";
}

struct TransferReport {
  double f0T = 0.0;
  double fs = 0.0;
  double F1 = 1.0;
  double F2 = 1.0;
  double F = 1.0;
  cplx mean_ratio{1.0, 0.0};
  ExpansionRegime regime = ExpansionRegime::Valid;
  /// Set when r != 0: F2 then uses y(alpha, 0) = 2|alpha|^2 as a stand-in.
  bool f2_approximate = false;
  std::vector<std::string> notes;
};

/// Decay rate of the dark mode, -Im(lambda1) = (kappa2 g1^2 + kappa1 g2^2) / 2 g0^2.
inline double dark_mode_decay_rate(const SystemParams& p, const CouplingSample& c) {
  const double g0sq = c.g1 * c.g1 + c.g2 * c.g2;
  return (p.kappa2 * c.g1 * c.g1 + p.kappa1 * c.g2 * c.g2) / (2.0 * g0sq);
}

/// f(t, T) = i * integral_t^T lambda1 dt'.
inline double f_integral(const SystemParams& p, const CouplingSchedule& s, double t, double T) {
  if (!(t <= T)) throw DomainError("f_integral requires t <= T");
  if (p.kappa1 == 0.0 && p.kappa2 == 0.0) return 0.0;
  auto integrand = [&](double x) {
    const auto c = s.at(x);
    if (c.g1 == 0.0 && c.g2 == 0.0) {
      std::ostringstream os;
      os << "g0 vanishes at t = " << x << " inside the decay integral";
      throw NumericError(os.str(), x);
    }
    return dark_mode_decay_rate(p, c);
  };
  return adaptive_simpson(integrand, t, T, 1e-10);
}

inline cplx mean_transfer_amplitude(cplx alpha0, const SystemParams& p, const CouplingSchedule& s, double T) {
  return std::exp(-f_integral(p, s, 0.0, T)) * alpha0;
}

/// Minimum of g0 over `n` uniform interior samples of (0, T).
inline double min_g0(const CouplingSchedule& s, double T, std::size_t n = 1001) {
  double g0_min = std::numeric_limits<double>::infinity();
  for (std::size_t k = 1; k <= n; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(n + 1);
    g0_min = std::min(g0_min, s.at(t).g0());
  }
  return g0_min;
}

/// Upper estimate of the mechanical-noise contribution,
///   fs ~ gamma_m (2 n_th + 1) T [(kappa1 - kappa2) / 4 g0]^2,
/// with g0 replaced by its minimum over the schedule.
inline double fs_bound(const SystemParams& p, const CouplingSchedule& s, double T) {
  const double dk = p.kappa1 - p.kappa2;
  if (p.gamma_m == 0.0 || dk == 0.0) return 0.0;
  const double g0 = min_g0(s, T);
  if (!(g0 > 0.0)) throw NumericError("g0 vanishes on the schedule interior; fs bound undefined");
  const double x = dk / (4.0 * g0);
  return p.gamma_m * (2.0 * p.n_th + 1.0) * T * x * x;
}

/// First-order fidelity factors
///   F1 = 1 - f (cosh 2r - 1) - fs cosh 2r
///   F2 = 1 - f^2 y(alpha, r) / 2,  y(alpha, 0) = 2 |alpha|^2.
/// Throws NumericError if either factor leaves [0, 1].
inline TransferReport analytic_fidelity(cplx alpha, double r, double phi, const SystemParams& p,
                                        const CouplingSchedule& s, double T) {
  (void)phi;  // enters only through y(alpha, r) for r != 0, which is not available in closed form
  if (r < 0.0) throw ParameterError("squeezing parameter r must be >= 0");
  TransferReport rep;
  rep.f0T = f_integral(p, s, 0.0, T);
  rep.fs = fs_bound(p, s, T);
  rep.mean_ratio = std::exp(-rep.f0T);

  if (rep.f0T >= 0.3) {
    rep.regime = ExpansionRegime::Outside;
    rep.notes.emplace_back("f(0,T) >= 0.3: outside the first-order expansion regime");
  } else if (rep.f0T > 0.1) {
    rep.regime = ExpansionRegime::Marginal;
    rep.notes.emplace_back("f(0,T) > 0.1: first-order expansion is marginal");
  }

  const double ch = std::cosh(2.0 * r);
  rep.F1 = 1.0 - rep.f0T * (ch - 1.0) - rep.fs * ch;
  const double y = 2.0 * std::norm(alpha);
  rep.F2 = 1.0 - rep.f0T * rep.f0T * y / 2.0;
  if (r != 0.0) {
    rep.f2_approximate = true;
    rep.notes.emplace_back("F2 approximate: y(alpha, r) unavailable for r != 0, used 2|alpha|^2");
  }
  if (rep.F1 < 0.0 || rep.F1 > 1.0 || rep.F2 < 0.0 || rep.F2 > 1.0) {
    std::ostringstream os;
    os << "first-order fidelity expansion broke down (F1 = " << rep.F1 << ", F2 = " << rep.F2
       << "); use the numeric moment integrator instead";
    throw NumericError(os.str());
  }
  rep.F = rep.F1 * rep.F2;
  return rep;
}

}  // namespace optomech
