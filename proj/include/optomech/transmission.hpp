#pragma once

// Input-output theory of the three-mode network with constant couplings:
// transmission matrix, resonant transmission and half-width, pulse fidelity,
// and pulse propagation in the frequency and time domains.
//
// Fourier convention: v(omega) = int dt/sqrt(2 pi) v(t) e^{+i omega t}, so
// v_out(omega) = T(omega) v_in(omega) with
//   T(omega) = I - i sqrt(K) (omega I - M)^-1 sqrt(K).

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include "optomech/model.hpp"
#include "optomech/spectral.hpp"

namespace optomech {

inline Mat3 transmission_matrix(const SystemParams& p, double g1, double g2, double omega) {
  if (p.kappa1 == 0.0 && p.kappa2 == 0.0 && p.gamma_m == 0.0) return Mat3::Identity();
  const auto dm = build_dynamic_matrix(p, g1, g2);
  const Mat3 a = omega * Mat3::Identity() - dm.entries;
  const double scale = a.cwiseAbs().maxCoeff();
  if (std::abs(a.determinant()) <= 1e-300 + 1e-15 * scale * scale * scale) {
    std::ostringstream os;
    os << "omega I - M is singular at omega = " << omega;
    throw NumericError(os.str());
  }
  const Mat3 sk = dm.sqrtK().cast<cplx>();
  return Mat3::Identity() - kI * sk * detail::inverse3(a) * sk;
}

inline cplx t31(const SystemParams& p, double g1, double g2, double omega) {
  return transmission_matrix(p, g1, g2, omega)(2, 0);
}

struct TransmissionSpectrum {
  std::vector<double> omegas;
  std::vector<Mat3> matrices;
};

inline TransmissionSpectrum transmission_spectrum(const SystemParams& p, double g1, double g2,
                                                  const std::vector<double>& omegas) {
  if (!std::is_sorted(omegas.begin(), omegas.end())) throw ParameterError("frequency grid must be sorted");
  TransmissionSpectrum s;
  s.omegas = omegas;
  s.matrices.reserve(omegas.size());
  for (double w : omegas) s.matrices.push_back(transmission_matrix(p, g1, g2, w));
  return s;
}

inline std::vector<double> linspace(double lo, double hi, std::size_t n) {
  std::vector<double> v(n);
  if (n == 1) {
    v[0] = lo;
    return v;
  }
  for (std::size_t i = 0; i < n; ++i) {
    v[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  }
  return v;
}

struct ResonantTransmission {
  double value = 0.0;
  bool optimal = false;  // g1^2 kappa2 == g2^2 kappa1 within 1e-9 relative
};

/// T31(0) = 8 g1 g2 sqrt(kappa1 kappa2) / (4 g1^2 kappa2 + 4 g2^2 kappa1 + gamma_m kappa1 kappa2).
inline ResonantTransmission t31_resonant(const SystemParams& p, double g1, double g2) {
  const double den = 4.0 * g1 * g1 * p.kappa2 + 4.0 * g2 * g2 * p.kappa1 + p.gamma_m * p.kappa1 * p.kappa2;
  if (!(den > 0.0)) throw NumericError("resonant transmission denominator is zero");
  ResonantTransmission r;
  r.value = 8.0 * g1 * g2 * std::sqrt(p.kappa1 * p.kappa2) / den;
  const double lhs = g1 * g1 * p.kappa2;
  const double rhs = g2 * g2 * p.kappa1;
  r.optimal = std::abs(lhs - rhs) <= 1e-9 * std::max(std::abs(lhs), std::abs(rhs));
  return r;
}

struct HalfWidth {
  double analytic = 0.0;
  double numeric = 0.0;
};

/// Half-width where |T31| drops to half its resonant value. Analytic:
///   sqrt(3) (g1^2 kappa2 + g2^2 kappa1 + gamma_m kappa1 kappa2 / 4) / (2 (g1^2 + g2^2)).
/// Numeric: smallest positive crossing in (0, g0/2], refined by bisection.
inline HalfWidth half_width(const SystemParams& p, double g1, double g2) {
  if (!(p.kappa1 > 0.0 && p.kappa2 > 0.0)) throw ParameterError("half width needs kappa1, kappa2 > 0");
  const double g0sq = g1 * g1 + g2 * g2;
  HalfWidth hw;
  hw.analytic = std::sqrt(3.0) * (g1 * g1 * p.kappa2 + g2 * g2 * p.kappa1 + p.gamma_m * p.kappa1 * p.kappa2 / 4.0) /
                (2.0 * g0sq);

  const double target = 0.5 * std::abs(t31(p, g1, g2, 0.0));
  auto f = [&](double w) { return std::abs(t31(p, g1, g2, w)) - target; };
  const double hi_end = 0.5 * std::sqrt(g0sq);
  const int n_scan = 4000;
  double lo = 0.0;
  double hi = -1.0;
  for (int k = 1; k <= n_scan; ++k) {
    const double w = hi_end * k / n_scan;
    if (f(w) <= 0.0) {
      hi = w;
      break;
    }
    lo = w;
  }
  if (hi < 0.0) throw NumericError("no half-width crossing of |T31| in (0, g0/2]");
  while (hi - lo > 1e-10) {
    const double mid = 0.5 * (lo + hi);
    (f(mid) > 0.0 ? lo : hi) = mid;
  }
  hw.numeric = 0.5 * (lo + hi);
  return hw;
}

/// Complex mean amplitude on a uniform time grid.
class Pulse {
 public:
  Pulse(double t0, double dt, std::vector<cplx> amplitudes) : t0_(t0), dt_(dt), amp_(std::move(amplitudes)) {
    if (!(dt_ > 0.0)) throw ParameterError("pulse grid spacing must be > 0");
    if (amp_.size() < 2) throw ParameterError("pulse needs at least two samples");
  }

  /// A exp(-sigma^2 (t - tc)^2 / 2) on [0, 16/sigma] with tc = 8/sigma.
  static Pulse gaussian(double sigma_omega, double amplitude = 1.0, std::size_t samples = 4096) {
    if (!(sigma_omega > 0.0)) throw ParameterError("sigma_omega must be > 0");
    const double span = 16.0 / sigma_omega;
    const double dt = span / static_cast<double>(samples - 1);
    const double tc = 8.0 / sigma_omega;
    std::vector<cplx> a(samples);
    for (std::size_t i = 0; i < samples; ++i) {
      const double x = sigma_omega * (dt * static_cast<double>(i) - tc);
      a[i] = amplitude * std::exp(-0.5 * x * x);
    }
    return Pulse(0.0, dt, std::move(a));
  }

  double t0() const { return t0_; }
  double dt() const { return dt_; }
  std::size_t size() const { return amp_.size(); }
  double time(std::size_t i) const { return t0_ + dt_ * static_cast<double>(i); }
  double t_end() const { return time(size() - 1); }
  const std::vector<cplx>& amplitudes() const { return amp_; }
  cplx operator[](std::size_t i) const { return amp_[i]; }

  /// Linear interpolation; zero outside the grid.
  cplx at(double t) const {
    const double x = (t - t0_) / dt_;
    if (x < 0.0 || x > static_cast<double>(size() - 1)) return 0.0;
    const auto i = std::min(static_cast<std::size_t>(x), size() - 2);
    const double w = x - static_cast<double>(i);
    return (1.0 - w) * amp_[i] + w * amp_[i + 1];
  }

  double max_abs() const {
    double m = 0.0;
    for (const auto& a : amp_) m = std::max(m, std::abs(a));
    return m;
  }

  double norm_sq() const {
    double s = 0.0;
    for (std::size_t i = 0; i < size(); ++i) s += (i == 0 || i + 1 == size() ? 0.5 : 1.0) * std::norm(amp_[i]);
    return s * dt_;
  }

  bool same_grid(const Pulse& o) const {
    return size() == o.size() && std::abs(t0_ - o.t0_) <= 1e-12 * std::max(1.0, std::abs(t0_)) &&
           std::abs(dt_ - o.dt_) <= 1e-12 * dt_;
  }

  Pulse resampled_like(const Pulse& grid) const {
    std::vector<cplx> a(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) a[i] = at(grid.time(i));
    return Pulse(grid.t0(), grid.dt(), std::move(a));
  }

 private:
  double t0_;
  double dt_;
  std::vector<cplx> amp_;
};

/// Fp = |int a_in a_out^*|^2 / (int |a_in|^2 int |a_out|^2), trapezoid rule.
inline double pulse_fidelity(const Pulse& in, const Pulse& out) {
  const Pulse o = out.same_grid(in) ? out : out.resampled_like(in);
  const double n1 = in.norm_sq();
  const double n2 = o.norm_sq();
  if (!(n1 > 0.0) || !(n2 > 0.0)) throw NumericError("pulse fidelity undefined for a zero-norm pulse");
  cplx overlap = 0.0;
  for (std::size_t i = 0; i < in.size(); ++i) {
    const double w = (i == 0 || i + 1 == in.size()) ? 0.5 : 1.0;
    overlap += w * in[i] * std::conj(o[i]);
  }
  overlap *= in.dt();
  const double f = std::norm(overlap) / (n1 * n2);
  return std::clamp(f, 0.0, 1.0);
}

struct TransmittedPulse {
  Pulse output;
  double energy_ratio = 0.0;  // int |a_out|^2 / int |a_in|^2
};

/// a_out^(2)(omega) = T31(omega) a_in^(1)(omega) by FFT with x4 zero padding
/// (rounded up to a power of two).
inline TransmittedPulse transmit_pulse_freq(const Pulse& in, const SystemParams& p, double g1, double g2) {
  const double peak = in.max_abs();
  const double edge = std::max(std::abs(in[0]), std::abs(in[in.size() - 1]));
  if (!(peak > 0.0)) throw NumericError("input pulse is identically zero");
  if (edge > 1e-6 * peak) {
    std::ostringstream os;
    os << "input pulse not decayed at window edges (edge/peak = " << edge / peak << ")";
    throw NumericError(os.str());
  }
  std::size_t n_pad = 1;
  while (n_pad < 4 * in.size()) n_pad <<= 1;

  std::vector<cplx> x(n_pad, cplx(0.0));
  std::copy(in.amplitudes().begin(), in.amplitudes().end(), x.begin());
  Eigen::FFT<double> fft;
  std::vector<cplx> spec;
  fft.fwd(spec, x);
  // fwd uses e^{-i w t}; bin k therefore holds the spectrum at omega = -w_k.
  const double dw = 2.0 * std::numbers::pi / (static_cast<double>(n_pad) * in.dt());
  for (std::size_t k = 0; k < n_pad; ++k) {
    const auto kk = static_cast<double>(k);
    const double w = (k < n_pad / 2) ? kk * dw : (kk - static_cast<double>(n_pad)) * dw;
    spec[k] *= t31(p, g1, g2, -w);
  }
  std::vector<cplx> y;
  fft.inv(y, spec);
  y.resize(in.size());
  Pulse out(in.t0(), in.dt(), std::move(y));
  const double ratio = out.norm_sq() / in.norm_sq();
  return {std::move(out), ratio};
}

/// Drives the mean field with a_in^(1)(t) and integrates
///   d<v>/dt = -i M(t) <v> + sqrt(K) (a_in^(1), 0, 0)
/// by RK4 (linear interpolation of the input between samples). Output is
/// a_out^(2) = -sqrt(kappa2) <a2>, sampled on the input grid.
inline Pulse transmit_pulse_time(const Pulse& in, const SystemParams& p, const CouplingSchedule& s) {
  if (std::abs(in.t0()) > 1e-12) throw DomainError("input pulse must start at t = 0");
  if (in.t_end() > s.duration() * (1.0 + 1e-12)) {
    std::ostringstream os;
    os << "schedule duration " << s.duration() << " does not cover the pulse window [0, " << in.t_end() << "]";
    throw DomainError(os.str());
  }
  double rate = std::max({p.kappa1, p.kappa2, p.gamma_m});
  for (std::size_t i = 0; i < in.size(); i += std::max<std::size_t>(1, in.size() / 1000)) {
    const auto c = s.at(in.time(i));
    rate = std::max({rate, std::abs(c.g1), std::abs(c.g2)});
  }
  double h_max = 0.01;
  if (rate > 0.0) h_max = std::min(h_max, 0.1 / rate);
  const auto sub = static_cast<std::size_t>(std::ceil(in.dt() / h_max));
  const double h = in.dt() / static_cast<double>(sub);

  const double sk1 = std::sqrt(p.kappa1);
  const double sk2 = std::sqrt(p.kappa2);
  auto rhs = [&](double t, const Vec3& v) {
    Vec3 d = -kI * (build_dynamic_matrix(p, s, t).entries * v);
    d(0) += sk1 * in.at(t);
    return d;
  };

  std::vector<cplx> out(in.size());
  Vec3 v = Vec3::Zero();
  out[0] = -sk2 * v(2);
  for (std::size_t i = 0; i + 1 < in.size(); ++i) {
    for (std::size_t j = 0; j < sub; ++j) {
      const double t = in.time(i) + h * static_cast<double>(j);
      const Vec3 k1 = rhs(t, v);
      const Vec3 k2 = rhs(t + 0.5 * h, v + 0.5 * h * k1);
      const Vec3 k3 = rhs(t + 0.5 * h, v + 0.5 * h * k2);
      const Vec3 k4 = rhs(std::min(t + h, s.duration()), v + h * k3);
      v += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    out[i + 1] = -sk2 * v(2);
  }
  return Pulse(in.t0(), in.dt(), std::move(out));
}

/// ||a - b|| / ||b|| over a common grid.
inline double relative_l2(const Pulse& a, const Pulse& b) {
  if (!a.same_grid(b)) throw ParameterError("relative_l2 needs pulses on the same grid");
  double num = 0.0;
  double den = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    num += std::norm(a[i] - b[i]);
    den += std::norm(b[i]);
  }
  if (!(den > 0.0)) throw NumericError("reference pulse has zero norm");
  return std::sqrt(num / den);
}

}  // namespace optomech
