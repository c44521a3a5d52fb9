#pragma once

// Gaussian states of the three-mode network and their exact evolution under
// the linear Langevin dynamics, through first and second moments.
//
// Second moments are stored normal ordered and central:
//   N[j][k] = <v_j^dag v_k> - <v_j>^* <v_k>
//   A[j][k] = <v_j v_k> - <v_j><v_k>
// The beam-splitter dynamics never mixes v with v^dag, so these two 3x3
// blocks close on themselves. Quadratures use x = a + a^dag,
// p = -i (a - a^dag), so the vacuum covariance is the identity.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <optional>
#include <sstream>
#include <vector>

#include <Eigen/Dense>

#include "optomech/model.hpp"

namespace optomech {

struct SingleModeGaussian {
  cplx mean{0.0, 0.0};
  double n_ex = 0.0;  // central <a^dag a>
  cplx m_an{0.0, 0.0};  // central <a a>

  bool operator==(const SingleModeGaussian&) const = default;

  bool is_physical(double tol = 1e-10) const {
    return n_ex >= -tol && n_ex * (n_ex + 1.0) >= std::norm(m_an) - tol;
  }

  /// 2x2 symmetrized quadrature covariance, vacuum = identity.
  Eigen::Matrix2d covariance() const {
    Eigen::Matrix2d s;
    s(0, 0) = 1.0 + 2.0 * n_ex + 2.0 * m_an.real();
    s(1, 1) = 1.0 + 2.0 * n_ex - 2.0 * m_an.real();
    s(0, 1) = s(1, 0) = 2.0 * m_an.imag();
    return s;
  }

  Eigen::Vector2d quadrature_mean() const { return {2.0 * mean.real(), 2.0 * mean.imag()}; }
};

/// D(alpha) S(eps)|0> with S(eps) = exp((eps^* a^2 - eps a^dag^2)/2), eps = r e^{2 i phi}.
inline SingleModeGaussian make_squeezed_coherent(cplx alpha, double r, double phi) {
  if (!(r >= 0.0)) throw ParameterError("squeezing parameter r must be >= 0");
  SingleModeGaussian s;
  s.mean = alpha;
  const double sh = std::sinh(r);
  s.n_ex = sh * sh;
  s.m_an = -std::polar(1.0, 2.0 * phi) * sh * std::cosh(r);
  return s;
}

inline SingleModeGaussian make_thermal(double n) { return {cplx(0.0), n, cplx(0.0)}; }

struct ThreeModeGaussianState {
  Vec3 mean = Vec3::Zero();
  Mat3 normal = Mat3::Zero();
  Mat3 anomalous = Mat3::Zero();

  ThreeModeGaussianState& operator+=(const ThreeModeGaussianState& o) {
    mean += o.mean;
    normal += o.normal;
    anomalous += o.anomalous;
    return *this;
  }
  friend ThreeModeGaussianState operator+(ThreeModeGaussianState a, const ThreeModeGaussianState& b) {
    return a += b;
  }
  friend ThreeModeGaussianState operator*(double h, ThreeModeGaussianState a) {
    a.mean *= h;
    a.normal *= h;
    a.anomalous *= h;
    return a;
  }

  void symmetrize() {
    normal = 0.5 * (normal + normal.adjoint()).eval();
    anomalous = 0.5 * (anomalous + anomalous.transpose()).eval();
  }

  /// 6x6 quadrature covariance in the order (x1, p1, xm, pm, x2, p2).
  Eigen::Matrix<double, 6, 6> covariance() const {
    Eigen::Matrix<double, 6, 6> s;
    for (int j = 0; j < 3; ++j) {
      for (int k = 0; k < 3; ++k) {
        const cplx sum = normal(j, k) + anomalous(j, k);
        const cplx dif = normal(j, k) - anomalous(j, k);
        const double d = (j == k) ? 1.0 : 0.0;
        s(2 * j, 2 * k) = d + 2.0 * sum.real();
        s(2 * j + 1, 2 * k + 1) = d + 2.0 * dif.real();
        s(2 * j, 2 * k + 1) = 2.0 * (anomalous(j, k).imag() + normal(j, k).imag());
        s(2 * j + 1, 2 * k) = 2.0 * (anomalous(j, k).imag() - normal(j, k).imag());
      }
    }
    return 0.5 * (s + s.transpose());
  }

  /// Smallest eigenvalue of sigma + i Omega; >= 0 for a physical state.
  double uncertainty_margin() const {
    Eigen::Matrix<cplx, 6, 6> h = covariance().cast<cplx>();
    for (int j = 0; j < 3; ++j) {
      h(2 * j, 2 * j + 1) += kI;
      h(2 * j + 1, 2 * j) -= kI;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix<cplx, 6, 6>> es(h, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
  }

  double hermiticity_error() const {
    return std::max((normal - normal.adjoint()).cwiseAbs().maxCoeff(),
                    (anomalous - anomalous.transpose()).cwiseAbs().maxCoeff());
  }
};

/// Mode a1 carries `s`, the mechanical mode is thermal, a2 is vacuum.
inline ThreeModeGaussianState embed_initial(const SingleModeGaussian& s, double mech_occupation) {
  if (!(mech_occupation >= 0.0)) throw ParameterError("mechanical occupation must be >= 0");
  ThreeModeGaussianState st;
  st.mean(0) = s.mean;
  st.normal(0, 0) = s.n_ex;
  st.normal(1, 1) = mech_occupation;
  st.anomalous(0, 0) = s.m_an;
  return st;
}

/// Mode index is 1-based: 1 = a1, 2 = b_m, 3 = a2.
inline SingleModeGaussian reduce_to_mode(const ThreeModeGaussianState& st, int index) {
  if (index < 1 || index > 3) throw DomainError("mode index must be 1, 2 or 3");
  const int i = index - 1;
  return {st.mean(i), st.normal(i, i).real(), st.anomalous(i, i)};
}

/// Moment equations of i dv/dt = M v + i sqrt(K) v_in with zero-temperature
/// cavity baths and a mechanical bath at occupation n_th:
///   d<v>/dt = -i M <v>
///   dN/dt   = i M^* N - i N M + diag(0, gamma_m n_th, 0)
///   dA/dt   = -i (M A + A M)
inline ThreeModeGaussianState moment_rhs(const ThreeModeGaussianState& st, const Mat3& m, double gamma_m,
                                         double n_th) {
  ThreeModeGaussianState d;
  d.mean = -kI * (m * st.mean);
  d.normal = kI * (m.conjugate() * st.normal) - kI * (st.normal * m);
  d.normal(1, 1) += gamma_m * n_th;
  d.anomalous = -kI * (m * st.anomalous + st.anomalous * m);
  return d;
}

inline ThreeModeGaussianState moment_rhs(double t, const ThreeModeGaussianState& st, const SystemParams& p,
                                         const CouplingSchedule& s) {
  return moment_rhs(st, build_dynamic_matrix(p, s, t).entries, p.gamma_m, p.n_th);
}

struct StepControl {
  std::optional<double> max_step;  // overrides the default step rule when smaller
  std::size_t sample_every = 1;    // keep every n-th step in the trajectory
  double physicality_tol = 1e-8;
};

struct TrajectoryPoint {
  double t = 0.0;
  ThreeModeGaussianState state;
};

using Trajectory = std::vector<TrajectoryPoint>;

namespace detail {

inline double max_coupling(const CouplingSchedule& s, double t_final) {
  double g = 0.0;
  const int n = 1000;
  for (int k = 0; k <= n; ++k) {
    const auto c = s.at(t_final * k / n);
    g = std::max({g, std::abs(c.g1), std::abs(c.g2)});
  }
  return g;
}

inline void check_physical(const ThreeModeGaussianState& st, double t, double tol) {
  const double margin = st.uncertainty_margin();
  const bool diag_ok = st.normal(0, 0).real() >= -tol && st.normal(1, 1).real() >= -tol &&
                       st.normal(2, 2).real() >= -tol;
  if (!(margin >= -tol) || !diag_ok) {
    std::ostringstream os;
    os << "unphysical Gaussian state at t = " << t << " (uncertainty margin " << margin << ")";
    throw NumericError(os.str(), t);
  }
}

}  // namespace detail

/// Fixed step for the moment integrator: min(T/2000, 0.01, 0.1/max rate),
/// in units of 1/g_ref.
inline double default_step(const SystemParams& p, const CouplingSchedule& s, double t_final) {
  const double rate = std::max({p.kappa1, p.kappa2, p.gamma_m, detail::max_coupling(s, t_final)});
  double h = std::min(t_final / 2000.0, 0.01);
  if (rate > 0.0) h = std::min(h, 0.1 / rate);
  return h;
}

/// Classic RK4 with a fixed step that lands exactly on t_final. The returned
/// trajectory always includes both endpoints.
inline Trajectory integrate(const ThreeModeGaussianState& state0, const SystemParams& p,
                            const CouplingSchedule& s, double t_final, const StepControl& ctl = {}) {
  if (!(t_final > 0.0)) throw DomainError("t_final must be > 0");
  if (t_final > s.duration() * (1.0 + 1e-12)) throw DomainError("t_final exceeds the schedule duration");
  double h = default_step(p, s, t_final);
  if (ctl.max_step) h = std::min(h, *ctl.max_step);
  const auto n_steps = static_cast<std::size_t>(std::ceil(t_final / h - 1e-9));
  h = t_final / static_cast<double>(n_steps);
  const std::size_t every = std::max<std::size_t>(ctl.sample_every, 1);

  detail::check_physical(state0, 0.0, ctl.physicality_tol);
  Trajectory traj;
  traj.reserve(n_steps / every + 2);
  traj.push_back({0.0, state0});

  ThreeModeGaussianState y = state0;
  for (std::size_t i = 0; i < n_steps; ++i) {
    const double t = h * static_cast<double>(i);
    const double tn = (i + 1 == n_steps) ? t_final : h * static_cast<double>(i + 1);
    const Mat3 m0 = build_dynamic_matrix(p, s, t).entries;
    const Mat3 mh = build_dynamic_matrix(p, s, t + 0.5 * h).entries;
    const Mat3 m1 = build_dynamic_matrix(p, s, tn).entries;
    const auto k1 = moment_rhs(y, m0, p.gamma_m, p.n_th);
    const auto k2 = moment_rhs(y + (0.5 * h) * k1, mh, p.gamma_m, p.n_th);
    const auto k3 = moment_rhs(y + (0.5 * h) * k2, mh, p.gamma_m, p.n_th);
    const auto k4 = moment_rhs(y + h * k3, m1, p.gamma_m, p.n_th);
    y += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    y.symmetrize();

    const bool last = (i + 1 == n_steps);
    if (last || (i + 1) % every == 0) {
      detail::check_physical(y, tn, ctl.physicality_tol);
      traj.push_back({tn, y});
    }
  }
  return traj;
}

/// Uhlmann fidelity of two single-mode Gaussian states:
///   F = 2 exp(-d^T (s1 + s2)^-1 d / 2) / (sqrt(D + L) - sqrt(L))
/// with D = det(s1 + s2), L = (det s1 - 1)(det s2 - 1), d the quadrature mean
/// difference.
inline double gaussian_fidelity(const SingleModeGaussian& a, const SingleModeGaussian& b) {
  const Eigen::Matrix2d s1 = a.covariance();
  const Eigen::Matrix2d s2 = b.covariance();
  const Eigen::Matrix2d sum = s1 + s2;
  const double delta = sum.determinant();
  if (!(delta > 1e-14)) throw NumericError("singular covariance sum in Gaussian fidelity");
  const double lam = std::max(0.0, (s1.determinant() - 1.0) * (s2.determinant() - 1.0));
  const Eigen::Vector2d d = a.quadrature_mean() - b.quadrature_mean();
  const double expo = d.dot(sum.inverse() * d);
  const double f = 2.0 * std::exp(-0.5 * expo) / (std::sqrt(delta + lam) - std::sqrt(lam));
  return std::clamp(f, 0.0, 1.0);
}

}  // namespace optomech
