#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "optomech/model.hpp"

using namespace optomech;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST(DynamicMatrix, ZeroDampingIsRealSymmetric) {
  const auto m = build_dynamic_matrix(SystemParams{}, 3.0, 4.0);
  Mat3 expected;
  expected << 0, 3, 0, 3, 0, 4, 0, 4, 0;
  EXPECT_EQ(m.entries, expected);
}

TEST(DynamicMatrix, FigureTwoDiagonal) {
  SystemParams p;
  p.kappa1 = 0.096;
  p.kappa2 = 0.054;
  p.gamma_m = 0.0002;
  const auto m = build_dynamic_matrix(p, 4.0, 3.0);
  EXPECT_DOUBLE_EQ(m.entries(0, 0).imag(), -0.048);
  EXPECT_DOUBLE_EQ(m.entries(1, 1).imag(), -0.0001);
  EXPECT_DOUBLE_EQ(m.entries(2, 2).imag(), -0.027);
  EXPECT_EQ(m.entries(0, 1), cplx(4.0));
  EXPECT_EQ(m.entries(1, 2), cplx(3.0));
  EXPECT_DOUBLE_EQ(m.K()(0, 0), 0.096);
  EXPECT_DOUBLE_EQ(m.sqrtK()(2, 2), std::sqrt(0.054));
}

TEST(DynamicMatrix, StructureOnRandomDraws) {
  std::mt19937 rng(7);
  std::uniform_real_distribution<double> rate(0.0, 2.0);
  std::uniform_real_distribution<double> g(-10.0, 10.0);
  for (int i = 0; i < 100; ++i) {
    SystemParams p;
    p.kappa1 = rate(rng);
    p.kappa2 = rate(rng);
    p.gamma_m = rate(rng);
    const auto m = build_dynamic_matrix(p, g(rng), g(rng));
    EXPECT_EQ(m.entries, m.entries.transpose());
    EXPECT_EQ(m.entries(0, 2), cplx(0.0));
    EXPECT_EQ(m.entries(2, 0), cplx(0.0));
    for (int j = 0; j < 3; ++j) {
      EXPECT_EQ(m.entries(j, j).real(), 0.0);
      for (int k = 0; k < 3; ++k) {
        if (j != k) {
          EXPECT_EQ(m.entries(j, k).imag(), 0.0);
        }
      }
    }
    EXPECT_DOUBLE_EQ(m.entries(0, 0).imag(), -p.kappa1 / 2);
    EXPECT_DOUBLE_EQ(m.entries(1, 1).imag(), -p.gamma_m / 2);
    EXPECT_DOUBLE_EQ(m.entries(2, 2).imag(), -p.kappa2 / 2);
  }
}

TEST(CouplingSchedule, TrigEndpoints) {
  const auto s = CouplingSchedule::trig(5.0, kPi / 2);
  const auto c0 = s.at(0.0);
  EXPECT_NEAR(c0.g1, 0.0, 1e-15);
  EXPECT_NEAR(c0.g2, -5.0, 1e-15);
  EXPECT_NEAR(c0.dg1, 5.0, 1e-14);
  EXPECT_NEAR(c0.dg2, 0.0, 1e-15);
  const auto c1 = s.at(kPi / 2);
  EXPECT_NEAR(c1.g1, 5.0, 1e-14);
  EXPECT_NEAR(c1.g2, 0.0, 1e-14);
  EXPECT_NEAR(c1.dg1, 0.0, 1e-14);
  EXPECT_NEAR(c1.dg2, 5.0, 1e-14);
}

TEST(CouplingSchedule, TrigMatchesFigureOneForm) {
  const auto s = CouplingSchedule::trig(5.0, kPi / 2);
  for (double t : {0.1, 0.4, 0.9, 1.3}) {
    EXPECT_NEAR(s.at(t).g1, 5.0 * std::sin(t), 1e-14);
    EXPECT_NEAR(s.at(t).g2, -5.0 * std::cos(t), 1e-14);
  }
}

TEST(CouplingSchedule, Constant) {
  const auto s = CouplingSchedule::constant(4.0, 3.0, 10.0);
  for (double t : {0.0, 2.5, 10.0}) {
    const auto c = s.at(t);
    EXPECT_EQ(c.g1, 4.0);
    EXPECT_EQ(c.g2, 3.0);
    EXPECT_EQ(c.dg1, 0.0);
    EXPECT_EQ(c.dg2, 0.0);
  }
}

TEST(CouplingSchedule, OutsideDomainThrows) {
  const auto s = CouplingSchedule::trig(5.0, 1.0);
  EXPECT_THROW(s.at(-0.1), DomainError);
  EXPECT_THROW(s.at(1.1), DomainError);
}

TEST(CouplingSchedule, DerivativesMatchFiniteDifferences) {
  std::mt19937 rng(11);
  const double gA = 5.0;
  const std::vector<CouplingSchedule> smooth{CouplingSchedule::trig(gA, 2.0),
                                             CouplingSchedule::tanh_ramp(gA, 1.0, 0.3, 2.0)};
  std::uniform_real_distribution<double> u(0.01, 1.99);
  const double h = 1e-5;
  for (const auto& s : smooth) {
    for (int i = 0; i < 100; ++i) {
      const double t = u(rng);
      const auto c = s.at(t);
      const auto cp = s.at(t + h);
      const auto cm = s.at(t - h);
      EXPECT_NEAR(c.dg1, (cp.g1 - cm.g1) / (2 * h), 1e-6 * gA);
      EXPECT_NEAR(c.dg2, (cp.g2 - cm.g2) / (2 * h), 1e-6 * gA);
    }
  }
}

TEST(CouplingSchedule, PiecewiseLinearUsesFollowingSegmentAtBreakpoints) {
  const auto s = CouplingSchedule::piecewise({{0.0, 0.0, -2.0}, {1.0, 1.0, -1.0}, {3.0, 2.0, 0.0}});
  EXPECT_DOUBLE_EQ(s.duration(), 3.0);
  const auto mid = s.at(0.5);
  EXPECT_DOUBLE_EQ(mid.g1, 0.5);
  EXPECT_DOUBLE_EQ(mid.g2, -1.5);
  const auto bp = s.at(1.0);
  EXPECT_DOUBLE_EQ(bp.g1, 1.0);
  EXPECT_DOUBLE_EQ(bp.dg1, 0.5);
  EXPECT_DOUBLE_EQ(bp.dg2, 0.5);
  const auto end = s.at(3.0);
  EXPECT_DOUBLE_EQ(end.g1, 2.0);
  EXPECT_DOUBLE_EQ(end.dg1, 0.5);
}

TEST(CouplingSchedule, InvalidDescriptionsRejected) {
  EXPECT_THROW(CouplingSchedule::piecewise({{0.0, 1.0, 1.0}}), ParameterError);
  EXPECT_THROW(CouplingSchedule::piecewise({{0.5, 1.0, 1.0}, {1.0, 1.0, 1.0}}), ParameterError);
  EXPECT_THROW(CouplingSchedule::piecewise({{0.0, 1.0, 1.0}, {0.0, 1.0, 1.0}}), ParameterError);
  EXPECT_THROW(CouplingSchedule::trig(5.0, 0.0), ParameterError);
  EXPECT_THROW(CouplingSchedule::tanh_ramp(5.0, 0.5, 0.0, 1.0), ParameterError);
}

TEST(Adiabaticity, TrigValues) {
  EXPECT_NEAR(adiabaticity(CouplingSchedule::trig(5.0, kPi / 2)), 0.2, 1e-12);
  EXPECT_NEAR(adiabaticity(CouplingSchedule::trig(50.0, kPi / 2)), 0.02, 1e-12);
  EXPECT_EQ(adiabaticity(CouplingSchedule::constant(4.0, 3.0, 1.0)), 0.0);
}

TEST(Adiabaticity, TrigClosedFormOnRandomDraws) {
  std::mt19937 rng(3);
  std::uniform_real_distribution<double> amp(0.5, 100.0);
  std::uniform_real_distribution<double> dur(0.1, 50.0);
  for (int i = 0; i < 50; ++i) {
    const double gA = amp(rng);
    const double T = dur(rng);
    const double expected = (kPi / (2 * T)) / gA;
    EXPECT_NEAR(adiabaticity(CouplingSchedule::trig(gA, T), 101), expected, 1e-12 * expected);
  }
}

TEST(Adiabaticity, VanishingCouplingReported) {
  // Both couplings cross zero at t = 1, which is an interior sample.
  const auto s = CouplingSchedule::piecewise({{0.0, -1.0, -1.0}, {1.0, 0.0, 0.0}, {2.0, 1.0, 1.0}});
  try {
    adiabaticity(s, 1);
    FAIL() << "expected NumericError";
  } catch (const NumericError& e) {
    EXPECT_DOUBLE_EQ(e.time(), 1.0);
  }
}

TEST(SystemParams, Validation) {
  SystemParams p;
  p.kappa1 = -0.1;
  EXPECT_THROW(p.validate(), ParameterError);

  p = {};
  p.kappa1 = 0.5;
  p.omega_m = 1.0;
  auto w = p.validate();
  EXPECT_EQ(w.size(), 1u);

  p.kappa1 = 1.0;
  EXPECT_THROW(p.validate(), ParameterError);

  p = {};
  p.kappa1 = 0.01;
  p.omega_m = 1.0;
  EXPECT_TRUE(p.validate().empty());
  p.detuning1 = -1.0;
  p.detuning2 = -1.0;
  EXPECT_TRUE(p.validate().empty());
  p.detuning2 = -0.9;
  EXPECT_THROW(p.validate(), ParameterError);
  p.omega_m.reset();
  EXPECT_THROW(p.validate(), ParameterError);
}
