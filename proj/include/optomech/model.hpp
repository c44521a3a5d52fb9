#pragma once

// Three-mode linearized optomechanical network in the interaction picture:
// cavity a1, mechanical mode b_m, cavity a2, both cavities pumped on the red
// sideband so the couplings are beam-splitter type.
//
// All rates are in units of a per-scenario reference rate g_ref, times in
// units of 1/g_ref.

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <type_traits>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Dense>

#include "optomech/errors.hpp"

namespace optomech {

using cplx = std::complex<double>;
using Mat3 = Eigen::Matrix3cd;
using Vec3 = Eigen::Vector3cd;

inline constexpr cplx kI{0.0, 1.0};

/// Damping rates and bath data. The interaction-picture model only uses
/// kappa1, gamma_m, kappa2 and n_th; the optional sideband data is checked
/// by validate() and never enters the dynamics.
struct SystemParams {
  double kappa1 = 0.0;
  double kappa2 = 0.0;
  double gamma_m = 0.0;
  double n_th = 0.0;
  std::optional<double> omega_m;
  std::optional<double> detuning1;
  std::optional<double> detuning2;

  bool operator==(const SystemParams&) const = default;

  /// Throws ParameterError on a hard violation, returns human readable
  /// warnings for soft ones (damping not well below omega_m).
  std::vector<std::string> validate() const {
    auto nonneg = [](double v, const char* name) {
      if (!(v >= 0.0) || !std::isfinite(v)) {
        throw ParameterError(std::string(name) + " must be finite and >= 0");
      }
    };
    nonneg(kappa1, "kappa1");
    nonneg(kappa2, "kappa2");
    nonneg(gamma_m, "gamma_m");
    nonneg(n_th, "n_th");

    std::vector<std::string> warnings;
    if (omega_m) {
      const double wm = *omega_m;
      if (!(wm > 0.0)) throw ParameterError("omega_m must be > 0");
      for (auto [v, name] : {std::pair{kappa1, "kappa1"}, std::pair{kappa2, "kappa2"},
                             std::pair{gamma_m, "gamma_m"}}) {
        if (!(v < wm)) {
          throw ParameterError(std::string(name) + " must be < omega_m (resolved sideband)");
        }
        if (v > wm / 10.0) {
          warnings.push_back(std::string(name) + " exceeds omega_m/10; rotating wave approximation is marginal");
        }
      }
    }
    if (detuning1 || detuning2) {
      if (!omega_m) throw ParameterError("detunings given without omega_m");
      if (!detuning1 || !detuning2) throw ParameterError("both detunings must be given");
      if (*detuning1 != -*omega_m || *detuning2 != -*omega_m) {
        throw ParameterError("only two-photon red-sideband resonance detuning1 = detuning2 = -omega_m is supported");
      }
    }
    return warnings;
  }
};

/// Instantaneous couplings and their time derivatives.
struct CouplingSample {
  double g1 = 0.0;
  double g2 = 0.0;
  double dg1 = 0.0;
  double dg2 = 0.0;

  double g0() const { return std::hypot(g1, g2); }
};

namespace schedule {

struct Constant {
  double g1 = 0.0;
  double g2 = 0.0;
  double duration = 1.0;
  bool operator==(const Constant&) const = default;
};

/// g1 = A sin(pi t / 2T), g2 = -A cos(pi t / 2T). With A = 5, T = pi/2 this is
/// g1 = 5 sin t, g2 = -5 cos t.
struct Trig {
  double amplitude = 5.0;
  double duration = std::numbers::pi / 2.0;
  bool operator==(const Trig&) const = default;
};

struct Breakpoint {
  double t = 0.0;
  double g1 = 0.0;
  double g2 = 0.0;
  bool operator==(const Breakpoint&) const = default;
};

/// Linear interpolation between breakpoints; the first breakpoint must sit at
/// t = 0 and the last one defines the duration.
struct PiecewiseLinear {
  std::vector<Breakpoint> points;
  bool operator==(const PiecewiseLinear&) const = default;
};

/// Smooth counter-intuitive ramp: s(t) = (1 + tanh((t - center)/width))/2,
/// g1 = g_max s, g2 = -g_max (1 - s).
struct TanhRamp {
  double g_max = 5.0;
  double center = 0.5;
  double width = 0.1;
  double duration = 1.0;
  bool operator==(const TanhRamp&) const = default;
};

}  // namespace schedule

/// Time-dependent couplings (g1(t), g2(t)) on [0, duration()].
class CouplingSchedule {
 public:
  using Variant = std::variant<schedule::Constant, schedule::Trig, schedule::PiecewiseLinear,
                               schedule::TanhRamp>;

  template <typename S>
    requires std::is_constructible_v<Variant, S>
  CouplingSchedule(S s) : v_(std::move(s)) {  // NOLINT(google-explicit-constructor)
    check();
  }

  static CouplingSchedule constant(double g1, double g2, double duration) {
    return schedule::Constant{g1, g2, duration};
  }
  static CouplingSchedule trig(double amplitude, double duration) {
    return schedule::Trig{amplitude, duration};
  }
  static CouplingSchedule piecewise(std::vector<schedule::Breakpoint> pts) {
    return schedule::PiecewiseLinear{std::move(pts)};
  }
  static CouplingSchedule tanh_ramp(double g_max, double center, double width, double duration) {
    return schedule::TanhRamp{g_max, center, width, duration};
  }

  const Variant& variant() const { return v_; }
  bool operator==(const CouplingSchedule&) const = default;

  double duration() const {
    return std::visit(
        [](const auto& s) -> double {
          using S = std::decay_t<decltype(s)>;
          if constexpr (std::is_same_v<S, schedule::PiecewiseLinear>) {
            return s.points.back().t;
          } else {
            return s.duration;
          }
        },
        v_);
  }

  bool is_constant() const { return std::holds_alternative<schedule::Constant>(v_); }

  /// Couplings and derivatives at t. Throws DomainError outside [0, T].
  CouplingSample at(double t) const {
    const double T = duration();
    // Allow a rounding-level overshoot from accumulated time steps.
    const double slack = 1e-12 * std::max(1.0, T);
    if (!(t >= -slack && t <= T + slack)) {
      std::ostringstream os;
      os << "time " << t << " outside schedule domain [0, " << T << "]";
      throw DomainError(os.str());
    }
    t = std::clamp(t, 0.0, T);
    return std::visit([t](const auto& s) { return eval(s, t); }, v_);
  }

 private:
  static CouplingSample eval(const schedule::Constant& s, double) { return {s.g1, s.g2, 0.0, 0.0}; }

  static CouplingSample eval(const schedule::Trig& s, double t) {
    const double w = std::numbers::pi / (2.0 * s.duration);
    const double c = std::cos(w * t);
    const double sn = std::sin(w * t);
    return {s.amplitude * sn, -s.amplitude * c, s.amplitude * w * c, s.amplitude * w * sn};
  }

  static CouplingSample eval(const schedule::PiecewiseLinear& s, double t) {
    const auto& p = s.points;
    // Segment [p[k], p[k+1]] with p[k].t <= t; at an interior breakpoint the
    // slope of the following segment is used (one-sided difference).
    auto it = std::upper_bound(p.begin(), p.end(), t,
                               [](double x, const schedule::Breakpoint& b) { return x < b.t; });
    std::size_t k = (it == p.begin()) ? 0 : static_cast<std::size_t>(it - p.begin()) - 1;
    if (k + 1 >= p.size()) k = p.size() - 2;
    const auto& a = p[k];
    const auto& b = p[k + 1];
    const double dt = b.t - a.t;
    const double s1 = (b.g1 - a.g1) / dt;
    const double s2 = (b.g2 - a.g2) / dt;
    return {a.g1 + s1 * (t - a.t), a.g2 + s2 * (t - a.t), s1, s2};
  }

  static CouplingSample eval(const schedule::TanhRamp& s, double t) {
    const double th = std::tanh((t - s.center) / s.width);
    const double sv = 0.5 * (1.0 + th);
    const double ds = 0.5 * (1.0 - th * th) / s.width;
    return {s.g_max * sv, -s.g_max * (1.0 - sv), s.g_max * ds, s.g_max * ds};
  }

  void check() const {
    std::visit(
        [](const auto& s) {
          using S = std::decay_t<decltype(s)>;
          auto finite = [](double v) { return std::isfinite(v); };
          if constexpr (std::is_same_v<S, schedule::PiecewiseLinear>) {
            if (s.points.size() < 2) throw ParameterError("piecewise schedule needs at least 2 breakpoints");
            if (s.points.front().t != 0.0) throw ParameterError("piecewise schedule must start at t = 0");
            for (std::size_t i = 0; i < s.points.size(); ++i) {
              const auto& b = s.points[i];
              if (!finite(b.t) || !finite(b.g1) || !finite(b.g2)) {
                throw ParameterError("piecewise breakpoint is not finite");
              }
              if (i > 0 && !(b.t > s.points[i - 1].t)) {
                throw ParameterError("piecewise breakpoints must have strictly increasing times");
              }
            }
          } else {
            if (!(s.duration > 0.0) || !finite(s.duration)) {
              throw ParameterError("schedule duration must be > 0");
            }
            if constexpr (std::is_same_v<S, schedule::TanhRamp>) {
              if (!(s.width > 0.0)) throw ParameterError("tanh ramp width must be > 0");
            }
          }
        },
        v_);
  }

  Variant v_;
};

/// M(t) together with the damping matrix K = diag(kappa1, gamma_m, kappa2).
struct DynamicMatrix {
  Mat3 entries;
  double time_tag = 0.0;
  Eigen::Vector3d damping;  // diagonal of K

  Eigen::Matrix3d K() const { return damping.asDiagonal(); }
  Eigen::Matrix3d sqrtK() const { return damping.cwiseSqrt().asDiagonal(); }
  double g1() const { return entries(0, 1).real(); }
  double g2() const { return entries(1, 2).real(); }
  double g0() const { return std::hypot(g1(), g2()); }
};

inline DynamicMatrix build_dynamic_matrix(const SystemParams& p, double g1, double g2, double t = 0.0) {
  DynamicMatrix m;
  m.entries.setZero();
  m.entries(0, 0) = cplx(0.0, -0.5 * p.kappa1);
  m.entries(1, 1) = cplx(0.0, -0.5 * p.gamma_m);
  m.entries(2, 2) = cplx(0.0, -0.5 * p.kappa2);
  m.entries(0, 1) = m.entries(1, 0) = g1;
  m.entries(1, 2) = m.entries(2, 1) = g2;
  m.time_tag = t;
  m.damping = Eigen::Vector3d(p.kappa1, p.gamma_m, p.kappa2);
  return m;
}

inline DynamicMatrix build_dynamic_matrix(const SystemParams& p, const CouplingSchedule& s, double t) {
  const auto c = s.at(t);
  return build_dynamic_matrix(p, c.g1, c.g2, t);
}

/// Maximum over a uniform interior grid of |dg/dt| / g0^2, with |dg/dt| the
/// Euclidean norm of (dg1/dt, dg2/dt). Values much below 1 indicate the
/// adiabatic regime.
inline double adiabaticity(const CouplingSchedule& s, std::size_t n_samples = 1001) {
  if (n_samples == 0) throw ParameterError("adiabaticity needs at least one sample");
  const double T = s.duration();
  double worst = 0.0;
  for (std::size_t k = 1; k <= n_samples; ++k) {
    const double t = T * static_cast<double>(k) / static_cast<double>(n_samples + 1);
    const auto c = s.at(t);
    const double g0sq = c.g1 * c.g1 + c.g2 * c.g2;
    if (g0sq == 0.0) {
      std::ostringstream os;
      os << "g0 vanishes at t = " << t;
      throw NumericError(os.str(), t);
    }
    worst = std::max(worst, std::hypot(c.dg1, c.dg2) / g0sq);
  }
  return worst;
}

}  // namespace optomech
