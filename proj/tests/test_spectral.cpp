#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Eigenvalues>

#include "optomech/spectral.hpp"

using namespace optomech;

namespace {

constexpr double kPi = std::numbers::pi;

// Independent route to the spectrum: Faddeev-LeVerrier coefficients of the
// characteristic polynomial, then the eigenvalues of its companion matrix
// by Eigen's QR-based solver.
std::vector<cplx> companion_roots(const Mat3& m) {
  const Mat3 id = Mat3::Identity();
  const Mat3 m1 = m;
  const cplx c2 = -m1.trace();
  const Mat3 m2 = m * (m1 + c2 * id);
  const cplx c1 = -m2.trace() / 2.0;
  const Mat3 m3 = m * (m2 + c1 * id);
  const cplx c0 = -m3.trace() / 3.0;
  Mat3 comp = Mat3::Zero();
  comp(1, 0) = 1.0;
  comp(2, 1) = 1.0;
  comp(0, 2) = -c0;
  comp(1, 2) = -c1;
  comp(2, 2) = -c2;
  Eigen::ComplexEigenSolver<Mat3> es(comp, false);
  std::vector<cplx> r(es.eigenvalues().data(), es.eigenvalues().data() + 3);
  return r;
}

// Greedy matching distance between two root sets.
double set_distance(std::vector<cplx> a, std::vector<cplx> b) {
  double worst = 0.0;
  for (const auto& x : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](cplx p, cplx q) { return std::abs(p - x) < std::abs(q - x); });
    worst = std::max(worst, std::abs(*it - x));
    b.erase(it);
  }
  return worst;
}

std::vector<cplx> as_vector(const Vec3& v) { return {v(0), v(1), v(2)}; }

SystemParams damping(double k1, double k2, double gm) {
  SystemParams p;
  p.kappa1 = k1;
  p.kappa2 = k2;
  p.gamma_m = gm;
  return p;
}

}  // namespace

TEST(Eigensystem, ZeroDampingSpectrum) {
  const auto es = eigensystem(build_dynamic_matrix(SystemParams{}, 3.0, 4.0));
  EXPECT_NEAR(std::abs(es.lambdas(0) - cplx(-5.0)), 0.0, 1e-12 * 5);
  EXPECT_NEAR(std::abs(es.lambdas(1) - cplx(0.0)), 0.0, 1e-12 * 5);
  EXPECT_NEAR(std::abs(es.lambdas(2) - cplx(5.0)), 0.0, 1e-12 * 5);
}

TEST(Eigensystem, DiagonalMatrix) {
  const auto es = eigensystem(build_dynamic_matrix(damping(0.1, 0.2, 0.3), 0.0, 0.0));
  const std::vector<cplx> expected{cplx(0, -0.05), cplx(0, -0.15), cplx(0, -0.1)};
  EXPECT_LT(set_distance(as_vector(es.lambdas), expected), 1e-15);
  // Eigenvectors are the unit vectors.
  EXPECT_LT((es.vectors.cwiseAbs() * Eigen::Vector3d::Ones() - Eigen::Vector3d::Ones()).norm(), 1e-12);
}

TEST(Eigensystem, FullyDegenerateZeroMatrix) {
  const auto es = eigensystem(build_dynamic_matrix(SystemParams{}, 0.0, 0.0));
  EXPECT_LT((es.vectors * es.inverse - Mat3::Identity()).norm(), 1e-10);
}

TEST(Eigensystem, MatchesCompanionMatrixOracle) {
  const auto m = build_dynamic_matrix(damping(0.064, 0.036, 0.0002), 4.0, 3.0);
  const auto es = eigensystem(m);
  EXPECT_LT(set_distance(as_vector(es.lambdas), companion_roots(m.entries)), 1e-10);
}

TEST(Eigensystem, InvariantsOnRandomDraws) {
  std::mt19937 rng(5);
  std::uniform_real_distribution<double> rate(0.0, 1.0);
  std::uniform_real_distribution<double> g(-6.0, 6.0);
  for (int i = 0; i < 200; ++i) {
    const auto m = build_dynamic_matrix(damping(rate(rng), rate(rng), rate(rng)), g(rng), g(rng));
    const auto es = eigensystem(m);
    const double fro = m.entries.norm();
    for (int k = 0; k < 3; ++k) {
      const Vec3 v = es.vectors.col(k);
      EXPECT_LT((m.entries * v - es.lambdas(k) * v).norm(), 1e-10 * fro);
      EXPECT_NEAR(v.norm(), 1.0, 1e-12);
      int big = 0;
      v.cwiseAbs().maxCoeff(&big);
      EXPECT_NEAR(v(big).imag(), 0.0, 1e-9);
      EXPECT_GT(v(big).real(), 0.0);
    }
    EXPECT_LT((es.vectors * es.inverse - Mat3::Identity()).norm(), 1e-10);
    // Trace identity.
    const cplx trace(0.0, -(m.damping.sum()) / 2.0);
    EXPECT_LT(std::abs(es.lambdas.sum() - trace), 1e-12 * std::max(1.0, std::abs(trace)) + 1e-13 * fro);
    EXPECT_LT(set_distance(as_vector(es.lambdas), companion_roots(m.entries)), 1e-10 * fro);
  }
}

TEST(Eigensystem, ZeroDampingSpectrumOnRandomDraws) {
  std::mt19937 rng(8);
  std::uniform_real_distribution<double> g(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    const double g1 = g(rng);
    const double g2 = g(rng);
    const double g0 = std::hypot(g1, g2);
    const auto es = eigensystem(build_dynamic_matrix(SystemParams{}, g1, g2));
    EXPECT_LT(set_distance(as_vector(es.lambdas), {cplx(-g0), cplx(0.0), cplx(g0)}), 1e-12 * g0);
  }
}

TEST(Eigensystem, ExceptionalPointIsRejected) {
  // a1-b_m block at its exceptional point: g1 = kappa1 / 4, gamma_m = 0.
  EXPECT_THROW(eigensystem(build_dynamic_matrix(damping(1.0, 0.3, 0.0), 0.25, 0.0)), NumericError);
}

TEST(Eigensystem, ContinuityTrackingAlongTrig) {
  const auto s = CouplingSchedule::trig(5.0, kPi / 2);
  const SystemParams p;
  auto prev = eigensystem(build_dynamic_matrix(p, s, 0.0));
  const int n = 1000;
  for (int k = 1; k < n; ++k) {
    auto next = eigensystem(build_dynamic_matrix(p, s, s.duration() * k / (n - 1)));
    const double ov = match_ordering(prev, next);
    EXPECT_GT(ov, 0.99) << "step " << k;
    prev = next;
  }
}

TEST(DarkMode, ExactAtTransferEndpoints) {
  const auto d0 = dark_mode_exact(build_dynamic_matrix(SystemParams{}, 0.0, -5.0));
  EXPECT_LT((d0.vector - Vec3(1, 0, 0)).norm(), 1e-12);
  EXPECT_NEAR(std::abs(d0.lambda1), 0.0, 1e-12);
  const auto d1 = dark_mode_exact(build_dynamic_matrix(SystemParams{}, 5.0, 0.0));
  EXPECT_LT((d1.vector - Vec3(0, 0, 1)).norm(), 1e-12);
}

TEST(DarkMode, ExactMechanicalWeightFollowsFirstOrderFormula) {
  const double g1 = 1.0;
  const double g2 = 1.0;
  const double g0 = std::hypot(g1, g2);
  const auto d = dark_mode_exact(build_dynamic_matrix(damping(0.1, 0.02, 0.0), g1, g2));
  const double amp = (0.1 - 0.02) * g1 * g2 / (2 * g0 * g0 * g0);
  // amp^2 = 2.0e-4; second-order corrections are O((kappa/g0)^2) relative.
  EXPECT_NEAR(d.mechanical_weight, amp * amp, 0.05 * amp * amp);
}

TEST(DarkMode, PerturbativeExamples) {
  const auto eq = dark_mode_perturbative(damping(0.3, 0.3, 0.1), 2.0, -1.0);
  EXPECT_EQ(eq.vector(1), cplx(0.0));
  EXPECT_EQ(eq.mechanical_weight, 0.0);

  const auto d = dark_mode_perturbative(damping(0.2, 0.0, 0.0), 1.0, 1.0);
  EXPECT_NEAR(d.lambda1.real(), 0.0, 0.0);
  EXPECT_NEAR(d.lambda1.imag(), -0.05, 1e-15);
  const auto exact = dark_mode_exact(build_dynamic_matrix(damping(0.2, 0.0, 0.0), 1.0, 1.0));
  EXPECT_LT(std::abs(exact.lambda1 - d.lambda1), 5 * 0.2 * 0.2 / 2.0);

  const auto dec = dark_mode_perturbative(damping(0.5, 0.1, 0.0), 0.0, -3.0);
  EXPECT_NEAR(dec.lambda1.imag(), -0.25, 1e-15);
  EXPECT_LT((dec.vector - Vec3(1, 0, 0)).norm(), 1e-15);
  EXPECT_FALSE(dec.warning.has_value());

  EXPECT_TRUE(dark_mode_perturbative(damping(0.5, 0.1, 0.0), 1.0, 1.0).warning.has_value());
  EXPECT_THROW(dark_mode_perturbative(damping(0.5, 0.1, 0.0), 0.0, 0.0), DomainError);
  EXPECT_THROW(dark_mode_exact(build_dynamic_matrix(SystemParams{}, 0.0, 0.0)), DomainError);
}

TEST(DarkMode, PerturbativeAgreesToSecondOrder) {
  std::mt19937 rng(13);
  std::uniform_real_distribution<double> g(-6.0, 6.0);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int i = 0; i < 200; ++i) {
    const double g1 = g(rng);
    const double g2 = g(rng);
    const double g0 = std::hypot(g1, g2);
    if (g0 < 0.5) continue;
    const double kmax = 0.1 * g0 * u(rng);
    const auto p = damping(kmax * u(rng), kmax * u(rng), kmax * u(rng));
    const double ratio = std::max({p.kappa1, p.kappa2, p.gamma_m}) / g0;
    const auto pert = dark_mode_perturbative(p, g1, g2);
    const auto exact = dark_mode_exact(build_dynamic_matrix(p, g1, g2));
    EXPECT_LE(std::abs(pert.lambda1 - exact.lambda1), 5 * ratio * ratio * g0 + 1e-13);
    const cplx ph = pert.vector.dot(exact.vector);
    const Vec3 aligned = pert.vector * (ph / std::abs(ph));
    EXPECT_LE((aligned - exact.vector).norm(), 5 * ratio * ratio + 1e-12);
  }
}

TEST(AdiabaticCorrection, ConstantScheduleVanishes) {
  const auto s = CouplingSchedule::constant(4.0, 3.0, 2.0);
  EXPECT_LT(adiabatic_correction_norm(s, damping(0.1, 0.05, 0.01), 1.0), 1e-8);
}

TEST(AdiabaticCorrection, ScalesWithCouplingRate) {
  const SystemParams p;
  const double v5 = adiabatic_correction_norm(CouplingSchedule::trig(5.0, kPi / 2), p, kPi / 4);
  EXPECT_GT(v5, 0.2);
  EXPECT_LT(v5, 5.0);
  const double v50 = adiabatic_correction_norm(CouplingSchedule::trig(50.0, kPi / 2), p, kPi / 4);
  EXPECT_LE(v50 / 50.0, 0.05);
  // Same mixing-angle rate, so the matrix itself does not change; relative to
  // g0 it shrinks by the coupling ratio.
  EXPECT_NEAR(v50 / 50.0, (v5 / 5.0) / 10.0, 1e-6);
}

TEST(AdiabaticCorrection, RequiresInteriorTime) {
  EXPECT_THROW(adiabatic_correction_norm(CouplingSchedule::trig(5.0, 1.0), SystemParams{}, 0.0), DomainError);
}
