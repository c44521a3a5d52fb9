#pragma once

// Eigen-analysis of the 3x3 dynamic matrix: closed-form eigenvalues,
// eigenvectors by inverse iteration, the mechanical dark mode (exact and
// first-order perturbative) and the non-adiabatic coupling (dU^-1/dt) U.

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>

#include "optomech/model.hpp"

namespace optomech {

struct Eigensystem {
  Vec3 lambdas;
  Mat3 vectors;  // columns are the eigenmodes (U)
  Mat3 inverse;  // U^-1
};

struct DarkMode {
  Vec3 vector;
  cplx lambda1;
  double mechanical_weight = 0.0;
  std::optional<std::string> warning;
};

namespace detail {

inline double frobenius(const Mat3& m) { return m.norm(); }

/// Adjugate inverse of a 3x3 matrix; throws when the determinant is
/// numerically zero relative to the entry scale.
inline Mat3 inverse3(const Mat3& u) {
  Mat3 adj;
  adj(0, 0) = u(1, 1) * u(2, 2) - u(1, 2) * u(2, 1);
  adj(0, 1) = u(0, 2) * u(2, 1) - u(0, 1) * u(2, 2);
  adj(0, 2) = u(0, 1) * u(1, 2) - u(0, 2) * u(1, 1);
  adj(1, 0) = u(1, 2) * u(2, 0) - u(1, 0) * u(2, 2);
  adj(1, 1) = u(0, 0) * u(2, 2) - u(0, 2) * u(2, 0);
  adj(1, 2) = u(0, 2) * u(1, 0) - u(0, 0) * u(1, 2);
  adj(2, 0) = u(1, 0) * u(2, 1) - u(1, 1) * u(2, 0);
  adj(2, 1) = u(0, 1) * u(2, 0) - u(0, 0) * u(2, 1);
  adj(2, 2) = u(0, 0) * u(1, 1) - u(0, 1) * u(1, 0);
  const cplx det = u(0, 0) * adj(0, 0) + u(0, 1) * adj(1, 0) + u(0, 2) * adj(2, 0);
  const double scale = u.cwiseAbs().maxCoeff();
  if (std::abs(det) <= 1e-13 * scale * scale * scale) {
    throw NumericError("eigenvector matrix is singular (defective dynamic matrix)");
  }
  return adj / det;
}

/// Unit norm, largest-modulus component real and positive. The first index
/// within 1e-9 of the maximum modulus wins so near-ties stay deterministic.
inline Vec3 fix_phase(Vec3 v) {
  v.normalize();
  const double mx = v.cwiseAbs().maxCoeff();
  int k = 0;
  for (int i = 0; i < 3; ++i) {
    if (std::abs(v(i)) >= mx * (1.0 - 1e-9)) {
      k = i;
      break;
    }
  }
  return v * (std::conj(v(k)) / std::abs(v(k)));
}

/// Characteristic polynomial det(lambda I - M) = lambda^3 + a lambda^2 + b lambda + c.
inline std::array<cplx, 3> char_poly(const Mat3& m) {
  const cplx a = -m.trace();
  const cplx b = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0) + m(0, 0) * m(2, 2) - m(0, 2) * m(2, 0) +
                 m(1, 1) * m(2, 2) - m(1, 2) * m(2, 1);
  const cplx c = -m.determinant();
  return {a, b, c};
}

inline std::array<cplx, 3> cardano(const std::array<cplx, 3>& coef) {
  const auto [a, b, c] = coef;
  const cplx p = b - a * a / 3.0;
  const cplx q = 2.0 * a * a * a / 27.0 - a * b / 3.0 + c;
  const cplx disc = q * q / 4.0 + p * p * p / 27.0;
  const cplx sq = std::sqrt(disc);
  // Larger-modulus branch avoids cancellation in -q/2 +- sqrt(disc).
  const cplx w = (std::abs(-q / 2.0 + sq) >= std::abs(-q / 2.0 - sq)) ? -q / 2.0 + sq : -q / 2.0 - sq;
  const cplx u = (w == cplx(0.0)) ? cplx(0.0) : std::pow(w, 1.0 / 3.0);
  const cplx v = (u == cplx(0.0)) ? cplx(0.0) : -p / (3.0 * u);
  const cplx om(-0.5, std::sqrt(3.0) / 2.0);
  const cplx om2 = std::conj(om);
  return {u + v - a / 3.0, om * u + om2 * v - a / 3.0, om2 * u + om * v - a / 3.0};
}

inline cplx newton_polish(const std::array<cplx, 3>& coef, cplx x) {
  const auto [a, b, c] = coef;
  const cplx f = ((x + a) * x + b) * x + c;
  const cplx df = (3.0 * x + 2.0 * a) * x + b;
  // Repeated roots: derivative vanishes with the function, skip the step.
  if (std::abs(df) <= 1e-12 * (1.0 + std::abs(x) * std::abs(x))) return x;
  const cplx step = f / df;
  return std::isfinite(step.real()) && std::isfinite(step.imag()) ? x - step : x;
}

inline Vec3 inverse_iteration(const Mat3& m, cplx lambda, const Vec3& start, const Mat3& previous,
                              int n_previous, double scale) {
  // The tiny shift keeps (M - mu) invertible while staying far closer to
  // lambda than to any other eigenvalue.
  const cplx mu = lambda + cplx(1e-11, 0.7e-11) * scale;
  const Eigen::FullPivLU<Mat3> lu(m - mu * Mat3::Identity());
  Vec3 x = start.normalized();
  for (int it = 0; it < 4; ++it) {
    x = lu.solve(x);
    for (int j = 0; j < n_previous; ++j) {
      const Vec3 q = previous.col(j);
      x -= q * q.dot(x);
    }
    const double n = x.norm();
    if (!(n > 0.0) || !std::isfinite(n)) break;
    x /= n;
  }
  return x;
}

}  // namespace detail

/// Eigenvalues from the characteristic cubic (Cardano, then one Newton
/// step), eigenvectors by inverse iteration. Modes are sorted by ascending
/// Re(lambda), ties by ascending Im(lambda).
inline Eigensystem eigensystem(const Mat3& m) {
  const double fro = detail::frobenius(m);
  const double scale = fro > 0.0 ? fro : 1.0;
  const auto coef = detail::char_poly(m);
  auto roots = detail::cardano(coef);
  for (auto& r : roots) r = detail::newton_polish(coef, r);

  std::array<int, 3> order{0, 1, 2};
  const double tie = 1e-12 * scale;
  std::sort(order.begin(), order.end(), [&](int i, int j) {
    if (std::abs(roots[i].real() - roots[j].real()) > tie) return roots[i].real() < roots[j].real();
    return roots[i].imag() < roots[j].imag();
  });

  Eigensystem es;
  for (int k = 0; k < 3; ++k) es.lambdas(k) = roots[order[k]];

  const std::array<Vec3, 3> starts{Vec3(cplx(1.0, 0.1), cplx(0.7, -0.2), cplx(0.5, 0.3)),
                                   Vec3(cplx(0.2, 0.4), cplx(1.0, 0.0), cplx(-0.6, 0.1)),
                                   Vec3(cplx(-0.3, 0.2), cplx(0.4, -0.5), cplx(1.0, 0.2))};
  const double cluster = 1e-8 * scale;
  for (int k = 0; k < 3; ++k) {
    // Earlier vectors that share (numerically) the same eigenvalue span part
    // of the eigenspace; project them out so degenerate modes stay distinct.
    Mat3 prev = Mat3::Zero();
    int n_prev = 0;
    for (int j = 0; j < k; ++j) {
      if (std::abs(es.lambdas(j) - es.lambdas(k)) <= cluster) {
        Vec3 q = es.vectors.col(j);
        for (int i = 0; i < n_prev; ++i) q -= prev.col(i) * prev.col(i).dot(q);
        prev.col(n_prev++) = q.normalized();
      }
    }
    Vec3 v = detail::inverse_iteration(m, es.lambdas(k), starts[k], prev, n_prev, scale);
    es.vectors.col(k) = detail::fix_phase(v);
  }

  for (int k = 0; k < 3; ++k) {
    const double res = (m * es.vectors.col(k) - es.lambdas(k) * es.vectors.col(k)).norm();
    if (!(res <= 1e-10 * fro)) {
      std::ostringstream os;
      os << "eigenvector residual " << res << " exceeds tolerance (defective matrix?)";
      throw NumericError(os.str());
    }
  }
  es.inverse = detail::inverse3(es.vectors);
  return es;
}

inline Eigensystem eigensystem(const DynamicMatrix& m) { return eigensystem(m.entries); }

/// Reorders the modes of `next` to maximise the summed overlap with `prev`
/// (continuity tracking along a sweep). Returns the smallest matched overlap.
inline double match_ordering(const Eigensystem& prev, Eigensystem& next) {
  std::array<int, 3> perm{0, 1, 2};
  std::array<int, 3> best = perm;
  double best_sum = -1.0;
  double best_min = 0.0;
  do {
    double sum = 0.0;
    double mn = 1.0;
    for (int i = 0; i < 3; ++i) {
      const double o = std::abs(prev.vectors.col(i).dot(next.vectors.col(perm[i])));
      sum += o;
      mn = std::min(mn, o);
    }
    if (sum > best_sum) {
      best_sum = sum;
      best = perm;
      best_min = mn;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));

  Eigensystem out;
  for (int i = 0; i < 3; ++i) {
    out.lambdas(i) = next.lambdas(best[i]);
    out.vectors.col(i) = next.vectors.col(best[i]);
  }
  out.inverse = detail::inverse3(out.vectors);
  next = out;
  return best_min;
}

/// Rotates each mode of `next` so its overlap with the matching mode of
/// `prev` is real and positive. Breaks the largest-component convention on
/// purpose; only meant for finite differencing along a sweep.
inline void align_phases(const Eigensystem& prev, Eigensystem& next) {
  for (int i = 0; i < 3; ++i) {
    const cplx o = prev.vectors.col(i).dot(next.vectors.col(i));
    if (std::abs(o) > 0.0) next.vectors.col(i) *= std::conj(o) / std::abs(o);
  }
  next.inverse = detail::inverse3(next.vectors);
}

/// Eigenmode with maximal overlap with the ideal dark mode [-g2, 0, g1]/g0.
inline DarkMode dark_mode_exact(const DynamicMatrix& m) {
  const double g0 = m.g0();
  if (!(g0 > 0.0)) throw DomainError("dark mode undefined for g0 = 0");
  const Vec3 ideal(-m.g2() / g0, 0.0, m.g1() / g0);
  const auto es = eigensystem(m);
  std::array<double, 3> ov{};
  for (int i = 0; i < 3; ++i) ov[i] = std::abs(ideal.dot(es.vectors.col(i)));
  std::array<int, 3> idx{0, 1, 2};
  std::sort(idx.begin(), idx.end(), [&](int a, int b) { return ov[a] > ov[b]; });
  if (ov[idx[0]] - ov[idx[1]] < 1e-6) {
    throw NumericError("ambiguous dark-mode selection: two modes overlap equally with the ideal dark mode");
  }
  DarkMode d;
  d.vector = es.vectors.col(idx[0]);
  d.lambda1 = es.lambdas(idx[0]);
  d.mechanical_weight = std::norm(d.vector(1));
  return d;
}

/// First-order perturbative dark mode in the damping rates:
///   psi1 = [-g2/g0, -i (kappa1 - kappa2) g1 g2 / (2 g0^3), g1/g0]
///   lambda1 = -i (kappa2 g1^2 + kappa1 g2^2) / (2 g0^2)
inline DarkMode dark_mode_perturbative(const SystemParams& p, double g1, double g2) {
  const double g0 = std::hypot(g1, g2);
  if (!(g0 > 0.0)) throw DomainError("dark mode undefined for g0 = 0");
  DarkMode d;
  const double g03 = g0 * g0 * g0;
  Vec3 v(-g2 / g0, cplx(0.0, -(p.kappa1 - p.kappa2) * g1 * g2 / (2.0 * g03)), g1 / g0);
  d.vector = detail::fix_phase(v);
  d.lambda1 = cplx(0.0, -(p.kappa2 * g1 * g1 + p.kappa1 * g2 * g2) / (2.0 * g0 * g0));
  d.mechanical_weight = std::norm(d.vector(1));
  const double ratio = std::max({p.kappa1, p.kappa2, p.gamma_m}) / g0;
  if (ratio > 0.2) {
    std::ostringstream os;
    os << "damping/g0 = " << ratio << " > 0.2; first-order dark mode is unreliable";
    d.warning = os.str();
  }
  return d;
}

/// max_ij |[(dU^-1/dt) U]_ij| at time t, by central differences with step
/// 1e-5 T and continuity-tracked, phase-aligned eigenvectors.
inline double adiabatic_correction_norm(const CouplingSchedule& s, const SystemParams& p, double t) {
  const double T = s.duration();
  const double h = 1e-5 * T;
  if (!(t - h >= 0.0 && t + h <= T)) throw DomainError("adiabatic_correction_norm needs an interior time");
  const auto c = s.at(t);
  if (!(c.g0() > 0.0)) throw NumericError("g0 vanishes", t);

  const auto e0 = eigensystem(build_dynamic_matrix(p, s, t));
  auto em = eigensystem(build_dynamic_matrix(p, s, t - h));
  auto ep = eigensystem(build_dynamic_matrix(p, s, t + h));
  for (auto* e : {&em, &ep}) {
    const double ov = match_ordering(e0, *e);
    if (ov < 0.9) {
      std::ostringstream os;
      os << "eigenvector tracking failed across finite-difference step (overlap " << ov << ")";
      throw NumericError(os.str(), t);
    }
    align_phases(e0, *e);
  }
  const Mat3 d_inv = (ep.inverse - em.inverse) / (2.0 * h);
  return (d_inv * e0.vectors).cwiseAbs().maxCoeff();
}

}  // namespace optomech
