#include "phasehom/homogenise.hpp"

#include <gtest/gtest.h>

#include <atomic>

using namespace phasehom;

namespace {

const Point e1 = make_point({1, 0});
const Point e2 = make_point({0, 1});

RandomIntegrandModel cb(std::uint64_t seed = 1) { return make_checkerboard(seed, 1, 2, euclid()); }

}  // namespace

TEST(Executor, OrderIsIndependentOfJobs) {
  auto f = [](std::size_t i) { return static_cast<double>(i * i) + 0.5; };
  const auto a = Executor(1).map(17, f), b = Executor(4).map(17, f);
  EXPECT_EQ(a, b);
  for (std::size_t i = 0; i < a.size(); ++i) EXPECT_EQ(a[i], f(i));
}

TEST(Executor, RunsEveryIndexOnce) {
  std::atomic<int> calls{0};
  const auto out = Executor(3).map(10, [&](std::size_t i) {
    ++calls;
    return static_cast<int>(i);
  });
  EXPECT_EQ(calls.load(), 10);
  EXPECT_EQ(out.size(), 10u);
}

TEST(Executor, PropagatesExceptions) {
  auto boom = [](std::size_t i) -> int {
    if (i == 2) throw std::runtime_error("boom");
    return 0;
  };
  EXPECT_THROW(Executor(2).map(4, boom), std::runtime_error);
}

TEST(Schedule, Validation) {
  Schedule s = Schedule::standard(2, {8, 4});
  EXPECT_THROW(s.validate(2), DomainError);
  s = Schedule::standard(2, {});
  EXPECT_THROW(s.validate(2), DomainError);
  s = Schedule::standard(2, {4, 8});
  s.h_values = {0.25};
  EXPECT_THROW(s.validate(2), DomainError);
  EXPECT_THROW(Schedule::standard(2, {4}).validate(1), DomainError);
}

TEST(FHom, EuclidIsScaleFree) {
  const HomEstimate e = estimate_f_hom(euclid(), make_grad({1, 0}), Schedule::standard(2, {4, 8}), {});
  ASSERT_EQ(e.scaled_values.size(), 2u);
  for (double v : e.scaled_values) EXPECT_NEAR(v, 1.0, 1e-3);
  EXPECT_LT(e.cauchy_gap, 1e-3);
  EXPECT_TRUE(e.warnings.empty());
  EXPECT_EQ(e.quantity, Quantity::f_hom);
}

TEST(FHom, AreaIsExactForEveryXi) {
  for (const Grad& xi : {make_grad({0, 0}), make_grad({1, 1}), make_grad({-2, 0.5})}) {
    const HomEstimate e = estimate_f_hom(area(), xi, Schedule::standard(2, {4, 8}), {});
    for (double v : e.scaled_values) EXPECT_NEAR(v, std::sqrt(1 + xi.squaredNorm()), 1e-3);
  }
}

TEST(FHom, CheckerboardBetweenCoercivityAndAffineCompetitor) {
  const Integrand g = cb().integrand();
  const Schedule s = Schedule::standard(2, {4, 8});
  const HomEstimate e = estimate_f_hom(g, make_grad({1, 0}), s, {});
  for (std::size_t i = 0; i < s.r.size(); ++i) {
    const double r = s.r[i];
    const CellDomain cell = make_cell(Point::Zero(2), r, e2, 1, s.h);
    const double affine = bulk_energy(cell, g, affine_datum(cell, make_grad({1, 0}))) / cell.volume();
    EXPECT_GE(e.scaled_values[i], 1.0);
    EXPECT_LE(e.scaled_values[i], affine + 1e-12);
    EXPECT_LE(affine, 2.0);
  }
}

TEST(FHom, IndependenceOfTheCentreForPeriodicDensity) {
  const Integrand g = laminate(1, 2, 1, 0, euclid());
  Schedule s = Schedule::standard(2, {16});
  const HomEstimate a = estimate_f_hom(g, make_grad({1, 0}), s, {});
  s.center = make_point({0.37, -1.2});
  const HomEstimate b = estimate_f_hom(g, make_grad({1, 0}), s, {});
  EXPECT_NEAR(a.extrapolated, b.extrapolated, 2 * s.tol_r);
}

TEST(FHom, ElongatedCellUsesTheElongatedVolume) {
  Schedule s = Schedule::standard(2, {4});
  s.k = 2;
  const HomEstimate e = estimate_f_hom(euclid(), make_grad({0, 3}), s, {});
  EXPECT_NEAR(e.scaled_values[0], 3.0, 3e-3);
  EXPECT_NEAR(e.raw_values[0], 3.0 * 2 * 16, 0.1);
}

TEST(FInfHom, EuclidRoutesAgree) {
  const Schedule s = Schedule::standard(2, {4});
  const Grad xi = make_grad({1, 1});
  const HomEstimate a = estimate_f_inf_hom(euclid(), xi, RecessionRoute::hom_of_recession, s, {});
  const HomEstimate b = estimate_f_inf_hom(euclid(), xi, RecessionRoute::recession_of_hom, s, {});
  EXPECT_NEAR(a.extrapolated, std::sqrt(2.0), 1e-3);
  EXPECT_NEAR(b.extrapolated, std::sqrt(2.0), 1e-3);
  EXPECT_EQ(a.route, RecessionRoute::hom_of_recession);
  EXPECT_EQ(b.t_values, (std::vector<double>{8, 32, 128}));
}

TEST(FInfHom, AreaRoutes) {
  const Schedule s = Schedule::standard(2, {4});
  const HomEstimate a = estimate_f_inf_hom(area(), make_grad({1, 0}), RecessionRoute::hom_of_recession, s, {});
  EXPECT_NEAR(a.extrapolated, 1.0, 1e-3);
  const HomEstimate b = estimate_f_inf_hom(area(), make_grad({1, 0}), RecessionRoute::recession_of_hom, s, {});
  // f_hom(t xi)/t = sqrt(1 + t^2)/t at t = 128.
  EXPECT_NEAR(b.extrapolated, std::sqrt(1 + 128.0 * 128.0) / 128.0, 1e-3);
  EXPECT_NEAR(b.extrapolated, a.extrapolated, 2e-2);
}

TEST(FInfHom, RejectsBadTSchedule) {
  const Schedule s = Schedule::standard(2, {4});
  EXPECT_THROW(estimate_f_inf_hom(euclid(), make_grad({1, 0}), RecessionRoute::recession_of_hom, s, {}, {}),
               DomainError);
  EXPECT_THROW(estimate_f_inf_hom(euclid(), make_grad({1, 0}), RecessionRoute::recession_of_hom, s, {}, {8, 4}),
               DomainError);
  EXPECT_THROW(estimate_f_inf_hom(euclid(), make_grad({1, 0}), RecessionRoute::none, s, {}), DomainError);
}

TEST(GHom, ZeroJump) {
  const HomEstimate e = estimate_g_hom(euclid(), make_amplitude({0}), e2, Schedule::standard(2, {4, 8}), {});
  for (double v : e.scaled_values) EXPECT_EQ(v, 0.0);
}

TEST(GHom, IsotropicBandAndTiling) {
  const Schedule s = Schedule::standard(2, {8, 16});
  const HomEstimate e = estimate_g_hom(euclid(), make_amplitude({1}), e2, s, {});
  for (double v : e.scaled_values) EXPECT_NEAR(v, 2.0 / 3.0, 0.15 * 2.0 / 3.0);
  EXPECT_LE(e.scaled_values[1], e.scaled_values[0] * 1.02);
  EXPECT_EQ(e.cauchy_gap, std::abs(e.scaled_values[1] - e.scaled_values[0]));
  for (const CellResult& r : e.per_r_results) EXPECT_LE(r.value, r.initial_energy);
}

TEST(GHom, SymmetryUnderReflection) {
  const Schedule s = Schedule::standard(2, {8});
  const HomEstimate a = estimate_g_hom(euclid(), make_amplitude({1}), e2, s, {});
  const HomEstimate b = estimate_g_hom(euclid(), make_amplitude({-1}), Point(-e2), s, {});
  EXPECT_NEAR(a.extrapolated, b.extrapolated, 0.02 * a.extrapolated);
}

TEST(GHom, LipschitzInZeta) {
  const Schedule s = Schedule::standard(2, {8});
  const HomEstimate a = estimate_g_hom(euclid(), make_amplitude({0.5}), e1, s, {});
  const HomEstimate b = estimate_g_hom(euclid(), make_amplitude({1.5}), e1, s, {});
  EXPECT_LE(std::abs(a.extrapolated - b.extrapolated), 1.1 * 1 * 4 * 1.0);
  EXPECT_LT(a.extrapolated, b.extrapolated);
}

TEST(GHom, OneDimensionalCohesiveLaw) {
  Schedule s = Schedule::standard(1, {16}, 0.05);
  const HomEstimate e = estimate_g_hom(euclid(), make_amplitude({1}), make_point({1}), s, {});
  EXPECT_NEAR(e.extrapolated, 2.0 / 3.0, 0.02 * 2.0 / 3.0);
}

TEST(GHom, RequiresHomogeneousDensity) {
  EXPECT_THROW(estimate_g_hom(area(), make_amplitude({1}), e2, Schedule::standard(2, {4}), {}), PreconditionError);
}

TEST(MonteCarlo, DegenerateModelHasZeroSpread) {
  const RandomIntegrandModel m = make_checkerboard(0, 1.5, 1.5, euclid());
  QuantitySpec q;
  q.xi = make_grad({1, 0});
  const HomEstimate e = mc_expectation(m, q, {1, 2, 3}, 4, {});
  ASSERT_TRUE(e.ensemble);
  EXPECT_EQ(e.ensemble->sample_std, 0.0);
  EXPECT_EQ(e.ensemble->spread, 0.0);
  EXPECT_EQ(e.ensemble->half_width, 0.0);
  EXPECT_NEAR(e.ensemble->mean, 1.5, 1.5e-3);
}

TEST(MonteCarlo, PerSeedValuesInTheCoefficientRange) {
  QuantitySpec q;
  q.xi = make_grad({1, 0});
  const std::vector<std::uint64_t> seeds{11, 12, 13, 14};
  const HomEstimate e = mc_expectation(cb(), q, seeds, 4, {});
  ASSERT_TRUE(e.ensemble);
  EXPECT_EQ(e.ensemble->seeds, seeds);
  double lo = 1e300, hi = -1e300;
  for (double v : e.ensemble->values) {
    EXPECT_GE(v, 1.0);
    EXPECT_LE(v, 2.0);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_GE(e.ensemble->mean, lo);
  EXPECT_LE(e.ensemble->mean, hi);
  EXPECT_GT(e.ensemble->sample_std, 0.0);
  EXPECT_NEAR(e.ensemble->half_width, 1.96 * e.ensemble->sample_std / 2.0, 1e-15);
}

TEST(MonteCarlo, SeedValueMatchesADirectRun) {
  QuantitySpec q;
  q.xi = make_grad({1, 0});
  const HomEstimate e = mc_expectation(cb(), q, {5, 6}, 4, {});
  const HomEstimate d = estimate_f_hom(cb(6).integrand(), q.xi, Schedule::standard(2, {4}), {});
  EXPECT_EQ(e.ensemble->values[1], d.extrapolated);
}

TEST(MonteCarlo, NeedsTwoSeeds) {
  QuantitySpec q;
  q.xi = make_grad({1, 0});
  EXPECT_THROW(mc_expectation(cb(), q, {1}, 4, {}), DomainError);
}

TEST(Process, MultiplierForRationalNormals) {
  EXPECT_EQ(integral_multiplier(rotation_for_normal(e2), 64), 1);
  EXPECT_EQ(integral_multiplier(rotation_for_normal(make_point({0.6, 0.8})), 64), 5);
  EXPECT_FALSE(integral_multiplier(rotation_for_normal(make_point({std::cos(1.0), std::sin(1.0)})), 64));
}

TEST(Process, UnsupportedNormal) {
  const Point nu = make_point({std::cos(1.0), std::sin(1.0)});
  EXPECT_THROW(subadditive_process_eval(cb(), make_amplitude({1}), nu, {{0}, {1}}, {}), UnsupportedNormalError);
  EXPECT_THROW(process_shift(nu, {1}), UnsupportedNormalError);
}

TEST(Process, ShiftVectors) {
  EXPECT_TRUE(process_shift(e2, {1}).isApprox(make_point({1, 0})));
  EXPECT_TRUE(process_shift(e1, {1}).isApprox(make_point({0, 1})));
}

TEST(Process, UnitBoxIsBounded) {
  const ProcessValue pv = subadditive_process(cb(), make_amplitude({1}), e2, {{0}, {1}}, {});
  EXPECT_EQ(pv.multiplier, 1);
  EXPECT_GE(pv.value, 0.0);
  EXPECT_LE(pv.value, cb().declared_C() * 1.0 * kCutoffSlopeMax * 1.0);
  EXPECT_LE(pv.result.value, pv.result.initial_energy);
}

TEST(Process, ZeroJump) {
  EXPECT_EQ(subadditive_process_eval(cb(), make_amplitude({0}), e2, {{0}, {1}}, {}), 0.0);
}

TEST(Process, HalvingSplitIsSubadditive) {
  const double whole = subadditive_process_eval(cb(), make_amplitude({1}), e2, {{0}, {2}}, {});
  const double a = subadditive_process_eval(cb(), make_amplitude({1}), e2, {{0}, {1}}, {});
  const double b = subadditive_process_eval(cb(), make_amplitude({1}), e2, {{1}, {2}}, {});
  EXPECT_LE(whole, 1.05 * (a + b));
}

TEST(Process, LatticeShiftStationarity) {
  for (const Point& nu : {e2, e1}) {
    const Point z = process_shift(nu, {1});
    const double shifted_model = subadditive_process_eval(shift(cb(), z), make_amplitude({1}), nu, {{0}, {1}}, {});
    const double shifted_box = subadditive_process_eval(cb(), make_amplitude({1}), nu, {{1}, {2}}, {});
    EXPECT_NEAR(shifted_model, shifted_box, 1e-9 * (1 + shifted_box));
  }
}

TEST(Process, BoxValidation) {
  EXPECT_THROW(subadditive_process_eval(cb(), make_amplitude({1}), e2, {{1}, {1}}, {}), DomainError);
  EXPECT_THROW(subadditive_process_eval(cb(), make_amplitude({1}), e2, {{0, 0}, {1, 1}}, {}), DomainError);
  EXPECT_THROW(subadditive_process_eval(cb(), make_amplitude({1}), make_point({1}), {{}, {}}, {}), DomainError);
}
