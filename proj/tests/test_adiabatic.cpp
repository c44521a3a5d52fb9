#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "optomech/adiabatic.hpp"
#include "optomech/conversion.hpp"

using namespace optomech;

namespace {

constexpr double kPi = std::numbers::pi;

SystemParams fig1(double kappa1, double gamma_m = 0.0, double n_th = 0.0) {
  SystemParams p;
  p.kappa1 = kappa1;
  p.gamma_m = gamma_m;
  p.n_th = n_th;
  return p;
}

const CouplingSchedule kFig1 = CouplingSchedule::trig(5.0, kPi / 2);

}  // namespace

TEST(FIntegral, ZeroDampingVanishes) {
  EXPECT_EQ(f_integral(fig1(0.0), kFig1, 0.0, kPi / 2), 0.0);
}

TEST(FIntegral, FigureOneClosedForm) {
  EXPECT_NEAR(f_integral(fig1(0.2), kFig1, 0.0, kPi / 2), 0.2 * kPi / 8, 1e-10);
  EXPECT_NEAR(f_integral(fig1(0.2), kFig1, 0.0, kPi / 2), 0.0785398, 1e-7);
}

TEST(FIntegral, EqualDampingCollapses) {
  SystemParams p;
  p.kappa1 = p.kappa2 = 0.3;
  for (const auto& s : {kFig1, CouplingSchedule::tanh_ramp(4.0, 0.7, 0.2, 1.5),
                        CouplingSchedule::constant(4.0, 3.0, 2.0)}) {
    const double T = s.duration();
    EXPECT_NEAR(f_integral(p, s, 0.0, T), 0.3 * T / 2, 1e-10);
  }
}

TEST(FIntegral, PartialIntervalsAdd) {
  const auto p = fig1(0.4);
  const double whole = f_integral(p, kFig1, 0.0, kPi / 2);
  const double parts = f_integral(p, kFig1, 0.0, 0.6) + f_integral(p, kFig1, 0.6, kPi / 2);
  EXPECT_NEAR(whole, parts, 1e-10);
  EXPECT_THROW(f_integral(p, kFig1, 1.0, 0.5), DomainError);
}

TEST(MeanTransferAmplitude, Examples) {
  EXPECT_EQ(mean_transfer_amplitude(1.0, fig1(0.0), kFig1, kPi / 2), cplx(1.0));
  EXPECT_NEAR(std::abs(mean_transfer_amplitude(1.0, fig1(0.2), kFig1, kPi / 2)), 0.92446, 1e-5);
  EXPECT_EQ(mean_transfer_amplitude(0.0, fig1(0.7), kFig1, kPi / 2), cplx(0.0));
}

TEST(MeanTransferAmplitude, MatchesIntegratorInAdiabaticLimit) {
  // Adiabaticity 0.02 and kappa/g0 = 0.05.
  const auto s = CouplingSchedule::trig(50.0, kPi / 2);
  SystemParams p;
  p.kappa1 = 2.5;
  p.kappa2 = 1.0;
  const cplx expected = mean_transfer_amplitude(1.0, p, s, kPi / 2);
  const auto traj = integrate(embed_initial(make_squeezed_coherent(1.0, 0.0, 0.0), 0.0), p, s, kPi / 2);
  const cplx numeric = traj.back().state.mean(2);
  EXPECT_LT(std::abs(numeric - expected) / std::abs(expected), 0.01);
}

TEST(FsBound, Examples) {
  SystemParams p = fig1(1.0, 2e-4, 100.0);
  EXPECT_NEAR(fs_bound(p, kFig1, kPi / 2), 2e-4 * 201 * (kPi / 2) / 400.0, 1e-9);
  EXPECT_NEAR(fs_bound(p, kFig1, kPi / 2), 1.579e-4, 1e-7);
  p.kappa2 = 1.0;
  EXPECT_EQ(fs_bound(p, kFig1, kPi / 2), 0.0);
  EXPECT_EQ(fs_bound(fig1(1.0), kFig1, kPi / 2), 0.0);
}

TEST(AnalyticFidelity, ZeroDampingIsPerfect) {
  const auto rep = analytic_fidelity(1.0, 0.0, 0.0, fig1(0.0), kFig1, kPi / 2);
  EXPECT_EQ(rep.F1, 1.0);
  EXPECT_EQ(rep.F2, 1.0);
  EXPECT_EQ(rep.F, 1.0);
  EXPECT_EQ(rep.regime, ExpansionRegime::Valid);
}

TEST(AnalyticFidelity, FigureOneExamples) {
  const auto coh = analytic_fidelity(1.0, 0.0, 0.0, fig1(0.2), kFig1, kPi / 2);
  EXPECT_NEAR(coh.F1, 1.0, 1e-15);
  EXPECT_NEAR(coh.F2, 0.99383, 1e-5);
  EXPECT_NEAR(coh.F, 0.99383, 1e-5);
  EXPECT_FALSE(coh.f2_approximate);

  const auto sq = analytic_fidelity(1.0, 0.4, 0.0, fig1(0.2), kFig1, kPi / 2);
  EXPECT_NEAR(sq.F1, 0.97350, 1e-5);
  EXPECT_TRUE(sq.f2_approximate);
}

TEST(AnalyticFidelity, RegimeFlags) {
  EXPECT_EQ(analytic_fidelity(1.0, 0.0, 0.0, fig1(0.2), kFig1, kPi / 2).regime, ExpansionRegime::Valid);
  EXPECT_EQ(analytic_fidelity(1.0, 0.0, 0.0, fig1(0.6), kFig1, kPi / 2).regime, ExpansionRegime::Marginal);
  const auto out = analytic_fidelity(1.0, 0.0, 0.0, fig1(1.0), kFig1, kPi / 2);
  EXPECT_EQ(out.regime, ExpansionRegime::Outside);
  EXPECT_FALSE(out.notes.empty());
  EXPECT_THROW(analytic_fidelity(1.0, -0.1, 0.0, fig1(0.2), kFig1, kPi / 2), ParameterError);
  // Far outside the expansion F2 turns negative.
  EXPECT_THROW(analytic_fidelity(3.0, 0.0, 0.0, fig1(8.0), kFig1, kPi / 2), NumericError);
}

TEST(AnalyticFidelity, DecreasesWithDamping) {
  double prev = 2.0;
  for (double k : {0.0, 0.1, 0.2, 0.4, 0.6, 0.8, 1.0}) {
    const double F = analytic_fidelity(1.0, 0.0, 0.0, fig1(k), kFig1, kPi / 2).F;
    EXPECT_LT(F, prev);
    prev = F;
  }
}

// The first-order expansion against the numeric integrator, on a schedule
// slow enough that non-adiabatic leakage stays below the 2 f^2 allowance.
TEST(AnalyticFidelity, AgreesWithNumericWhenAdiabatic) {
  const auto s = CouplingSchedule::trig(50.0, kPi / 2);
  const auto coherent = make_squeezed_coherent(1.0, 0.0, 0.0);
  for (double k : {0.01, 0.05, 0.1, 0.2}) {
    const auto rep = analytic_fidelity(1.0, 0.0, 0.0, fig1(k), s, kPi / 2);
    ASSERT_LE(rep.f0T, 0.1);
    const double Fn = numeric_conversion(coherent, 0.0, fig1(k), s).fidelity;
    EXPECT_LE(std::abs(Fn - rep.F), 2 * rep.f0T * rep.f0T) << "kappa1 = " << k;
  }
}

TEST(NumericFidelity, DecreasesWithDamping) {
  const auto coherent = make_squeezed_coherent(1.0, 0.0, 0.0);
  double prev = 2.0;
  for (double k : {0.0, 0.2, 0.5, 1.0}) {
    const double F = numeric_conversion(coherent, 0.0, fig1(k), kFig1).fidelity;
    EXPECT_LT(F, prev);
    prev = F;
  }
}
