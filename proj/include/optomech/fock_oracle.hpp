#pragma once

// Number-basis reference for single-mode Gaussian fidelities. Builds the
// density matrix D(alpha) S(xi) rho_thermal S(xi)^dag D(alpha)^dag by
// exponentiating the truncated generators and evaluates the Uhlmann
// fidelity with dense linear algebra. Slow, but shares nothing with the
// covariance-matrix formula it is meant to check.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <sstream>

#include <Eigen/Dense>

#include "optomech/gaussian.hpp"

namespace optomech {

namespace fock {

using MatX = Eigen::MatrixXcd;
using VecX = Eigen::VectorXcd;

inline MatX lowering(int dim) {
  MatX a = MatX::Zero(dim, dim);
  for (int n = 1; n < dim; ++n) a(n - 1, n) = std::sqrt(static_cast<double>(n));
  return a;
}

/// exp(G) for anti-Hermitian G, via the eigendecomposition of iG.
inline MatX expm_antihermitian(const MatX& g) {
  const MatX h = kI * g;
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (h + h.adjoint()));
  const VecX phases = (-kI * es.eigenvalues().cast<cplx>()).array().exp();
  return es.eigenvectors() * phases.asDiagonal() * es.eigenvectors().adjoint();
}

/// Decomposition of a single-mode Gaussian into thermal occupation,
/// squeezing xi = r e^{i theta} and displacement.
struct Williamson {
  double n_thermal = 0.0;
  double r = 0.0;
  double theta = 0.0;
};

inline Williamson decompose(const SingleModeGaussian& s) {
  Williamson w;
  const double a = 2.0 * s.n_ex + 1.0;
  const double m = std::abs(s.m_an);
  const double nu = std::sqrt(std::max(1.0, a * a - 4.0 * m * m));
  w.n_thermal = std::max(0.0, 0.5 * (nu - 1.0));
  if (m > 0.0) {
    w.r = 0.5 * std::asinh(2.0 * m / nu);
    w.theta = std::arg(-s.m_an);
  }
  return w;
}

struct TruncatedState {
  int cutoff = 0;
  bool pure = false;
  VecX psi;  // valid when pure
  MatX rho;  // cutoff x cutoff
  double trace_deficit = 1.0;
};

inline TruncatedState build_state(const SingleModeGaussian& s, int cutoff) {
  const int dim = 2 * cutoff;  // working space; results are cropped to `cutoff`
  const auto w = decompose(s);
  const MatX a = lowering(dim);
  const MatX ad = a.adjoint();
  const cplx xi = std::polar(w.r, w.theta);
  const MatX sq = expm_antihermitian(0.5 * (std::conj(xi) * a * a - xi * ad * ad));
  const MatX disp = expm_antihermitian(s.mean * ad - std::conj(s.mean) * a);
  const MatX u = disp * sq;

  TruncatedState out;
  out.cutoff = cutoff;
  out.pure = (w.n_thermal < 1e-13);
  if (out.pure) {
    const VecX full = u.col(0);
    out.psi = full.head(cutoff);
    out.rho = out.psi * out.psi.adjoint();
    out.trace_deficit = 1.0 - out.psi.squaredNorm();
  } else {
    const double n = w.n_thermal;
    VecX p(dim);
    for (int k = 0; k < dim; ++k) p(k) = std::pow(n / (n + 1.0), k) / (n + 1.0);
    const MatX full = u * p.asDiagonal() * u.adjoint();
    out.rho = full.topLeftCorner(cutoff, cutoff);
    out.trace_deficit = 1.0 - out.rho.trace().real();
  }
  return out;
}

inline MatX sqrt_psd(const MatX& rho) {
  Eigen::SelfAdjointEigenSolver<MatX> es(0.5 * (rho + rho.adjoint()));
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return es.eigenvectors() * ev.cast<cplx>().asDiagonal() * es.eigenvectors().adjoint();
}

}  // namespace fock

/// Initial cutoff: 4 (|alpha|^2 + 10|alpha| + 20 sinh^2 r + 10 n_ex), at least 16.
inline int fock_start_cutoff(const SingleModeGaussian& s) {
  const double al = std::abs(s.mean);
  const double r = fock::decompose(s).r;
  const double sh = std::sinh(r);
  const double c = 4.0 * (al * al + 10.0 * al + 20.0 * sh * sh + 10.0 * s.n_ex);
  return std::max(16, static_cast<int>(std::ceil(c)));
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho1) rho2 sqrt(rho1)))^2 in a truncated
/// number basis. The cutoff doubles from `cutoff` (or the start rule when 0)
/// until both states lose less than 1e-10 of their trace.
inline double fock_oracle_fidelity(const SingleModeGaussian& s1, const SingleModeGaussian& s2, int cutoff = 0) {
  if (!s1.is_physical() || !s2.is_physical()) throw ParameterError("fock oracle needs physical states");
  int c = cutoff > 0 ? cutoff : std::max(fock_start_cutoff(s1), fock_start_cutoff(s2));
  constexpr int kMaxCutoff = 4096;
  for (;;) {
    if (c > kMaxCutoff) {
      std::ostringstream os;
      os << "fock oracle: trace deficit above 1e-10 at cutoff " << kMaxCutoff;
      throw NumericError(os.str());
    }
    const auto r1 = fock::build_state(s1, c);
    const auto r2 = fock::build_state(s2, c);
    if (std::abs(r1.trace_deficit) < 1e-10 && std::abs(r2.trace_deficit) < 1e-10) {
      double f = 0.0;
      if (r1.pure) {
        f = (r1.psi.adjoint() * r2.rho * r1.psi)(0, 0).real();
      } else if (r2.pure) {
        f = (r2.psi.adjoint() * r1.rho * r2.psi)(0, 0).real();
      } else {
        // Tr sqrt(sqrt(r1) r2 sqrt(r1)) is the trace norm of sqrt(r1) sqrt(r2).
        const fock::MatX prod = fock::sqrt_psd(r1.rho) * fock::sqrt_psd(r2.rho);
        Eigen::BDCSVD<fock::MatX> svd(prod);
        const double tn = svd.singularValues().sum();
        f = tn * tn;
      }
      return std::clamp(f, 0.0, 1.0);
    }
    c *= 2;
  }
}

}  // namespace optomech
