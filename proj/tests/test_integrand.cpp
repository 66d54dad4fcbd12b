#include "phasehom/integrand.hpp"

#include "oracles.hpp"

#include <gtest/gtest.h>

#include <random>

using namespace phasehom;

TEST(Integrand, EuclidIsTheNorm) {
  EXPECT_DOUBLE_EQ(euclid()(make_point({0, 0}), make_grad({3, 4})), 5.0);
}

TEST(Integrand, AreaAtZeroGradient) {
  EXPECT_DOUBLE_EQ(area()(make_point({0.3, -7}), make_grad({0, 0})), 1.0);
}

TEST(Integrand, LaminatePiecewiseCoefficient) {
  const Integrand g = laminate(1, 2, 2, 0, euclid());
  EXPECT_DOUBLE_EQ(g(make_point({1.5, 0}), make_grad({1, 0})), 2.0);
  EXPECT_DOUBLE_EQ(g(make_point({0.5, 0}), make_grad({1, 0})), 1.0);
  EXPECT_DOUBLE_EQ(g(make_point({-0.5, 3}), make_grad({1, 0})), 2.0);
  EXPECT_DOUBLE_EQ(g.C(), 2.0);
}

TEST(Integrand, EvalDensityRejectsNonFinite) {
  EXPECT_THROW(eval_density(euclid(), make_point({NAN, 0}), make_grad({1, 0})), DomainError);
  EXPECT_THROW(eval_density(euclid(), make_point({0, 0}), make_grad({INFINITY, 0})), DomainError);
}

TEST(Integrand, ConstantsAreValidated) {
  auto f = [](const Point&, const Grad& xi) { return xi.norm(); };
  EXPECT_THROW(Integrand::generic("bad", f, {0.0, 0.5, true}), DomainError);
  EXPECT_THROW(Integrand::generic("bad", f, {1.0, 1.0, true}), DomainError);
}

TEST(Recession, AreaTendsToOne) {
  EXPECT_NEAR(eval_recession(area(), make_point({0, 0}), make_grad({1, 0}), 1e-6), 1.0, 1e-6);
}

TEST(Recession, EuclidIsItsOwnRecession) {
  EXPECT_DOUBLE_EQ(eval_recession(euclid(), make_point({1, 2}), make_grad({0, 2}), 1.0), 2.0);
}

TEST(Recession, NumericalLimitMatchesRichardson) {
  // No closed form registered: forces the numerical route.
  const Integrand g = Integrand::generic(
      "norm_plus_sqrt", [](const Point&, const Grad& xi) { return xi.norm() + std::sqrt(xi.norm()); },
      {2.0, 0.5, false});
  ASSERT_FALSE(g.has_closed_recession());
  const Point x = make_point({0, 0});
  const Grad xi = make_grad({1, 0});
  auto q = [&](double t) { return g(x, Grad(t * xi)) / t; };
  const double r1 = oracle::richardson(q(1e3), q(1e4), 10.0, 0.5);
  const double r2 = oracle::richardson(q(1e4), q(1e5), 10.0, 0.5);
  EXPECT_NEAR(r1, r2, 1e-9);
  EXPECT_NEAR(eval_recession(g, x, xi, 1e-3), r2, 1e-3);
}

TEST(Recession, UnresolvedBelowCapThrows) {
  const Integrand g = Integrand::generic(
      "slow", [](const Point&, const Grad& xi) { return xi.norm() + std::pow(xi.norm(), 0.9); }, {2.0, 0.1, false});
  try {
    eval_recession(g, make_point({0, 0}), make_grad({1, 0}), 1e-9, 1e4);
    FAIL() << "expected UnresolvedRecessionError";
  } catch (const UnresolvedRecessionError& e) {
    EXPECT_GT(e.achieved_bound(), 1e-9);
  }
}

TEST(Recession, IntegrandOfRadialDensityIsLinear) {
  const Integrand rec = recession_integrand(sqrtsum().without_recession());
  EXPECT_TRUE(rec.positively_homogeneous());
  EXPECT_NEAR(rec(make_point({0, 0}), make_grad({3, 4})), 5.0, 5e-3);
}

TEST(Validation, EuclidPassesWithZeroMargins) {
  const ValidationReport rep = validate_admissibility(euclid(), {});
  EXPECT_TRUE(rep.passed);
  EXPECT_NEAR(rep.recession_homogeneity_margin, 0.0, 1e-12);
}

TEST(Validation, AreaPasses) {
  const ValidationReport rep = validate_admissibility(area(), {});
  EXPECT_TRUE(rep.passed);
  for (double m : rep.f4_margins) EXPECT_LT(m, 0.0);
}

TEST(Validation, MisdeclaredConstantFails) {
  const Integrand bad = Integrand::generic(
      "euclid_c05", [](const Point&, const Grad& xi) { return xi.norm(); }, {0.5, 0.5, true});
  const ValidationReport rep = validate_admissibility(bad, {});
  EXPECT_FALSE(rep.passed);
  EXPECT_GT(rep.growth_upper_margin, 0.0);
}

TEST(Validation, CatalogPasses) {
  for (const Integrand& g : {sqrtsum(), laminate(1, 2, 1, 0, area()), make_checkerboard(3, 1, 2, euclid()).integrand()})
    EXPECT_TRUE(validate_admissibility(g, {}).passed) << g.id();
}

TEST(Checkerboard, DegenerateIntervalIsEuclid) {
  const Integrand g = make_checkerboard(7, 1, 1, euclid()).integrand();
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-50, 50);
  for (int i = 0; i < 50; ++i) {
    const Point x = make_point({u(rng), u(rng)});
    const Grad xi = make_grad({u(rng), u(rng)});
    EXPECT_DOUBLE_EQ(g(x, xi), xi.norm());
  }
}

TEST(Checkerboard, CoefficientIsReproducible) {
  const auto m = make_checkerboard(7, 1, 2, euclid());
  const double a = m.coefficient(make_point({0.5, 0.5}));
  for (int i = 0; i < 5; ++i) EXPECT_EQ(m.coefficient(make_point({0.5, 0.5})), a);
  EXPECT_EQ(make_checkerboard(7, 1, 2, euclid()).coefficient(make_point({0.1, 0.9})), a);
}

TEST(Checkerboard, SeedsGiveDifferentFields) {
  const auto m7 = make_checkerboard(7, 1, 2, euclid()), m8 = make_checkerboard(8, 1, 2, euclid());
  int differ = 0;
  for (int i = 0; i < 10; ++i)
    for (int j = 0; j < 10; ++j) {
      const Point x = make_point({i + 0.5, j - 4.5});
      if (m7.coefficient(x) != m8.coefficient(x)) ++differ;
    }
  EXPECT_GE(differ, 1);
}

TEST(Checkerboard, CoefficientsStayInRange) {
  const auto m = make_checkerboard(11, 1, 2, euclid());
  for (int i = -20; i < 20; ++i)
    for (int j = -20; j < 20; ++j) {
      const double a = m.coefficient(make_point({i + 0.5, j + 0.5}));
      EXPECT_GE(a, 1.0);
      EXPECT_LE(a, 2.0);
    }
}

TEST(Shift, GroupLaw) {
  const auto m = make_checkerboard(5, 1, 2, euclid());
  const Point z = make_point({3, -2}), w = make_point({-1, 4});
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int i = 0; i < 100; ++i) {
    const Point x = make_point({u(rng), u(rng)});
    const Grad xi = make_grad({u(rng), u(rng)});
    EXPECT_EQ(shift(m, make_point({0, 0}))(x, xi), m(x, xi));
    EXPECT_EQ(shift(shift(m, z), Point(-z))(x, xi), m(x, xi));
    EXPECT_EQ(shift(shift(m, z), w)(x, xi), shift(m, Point(z + w))(x, xi));
    EXPECT_EQ(shift(m, z)(x, xi), m(Point(x + z), xi));
  }
}

TEST(Shift, RejectsNonLatticeVectors) {
  EXPECT_THROW(shift(make_checkerboard(1, 1, 2, euclid()), make_point({0.5, 0})), DomainError);
}

TEST(Catalog, ParsesIds) {
  EXPECT_EQ(parse_integrand("euclid").integrand().id(), "euclid");
  EXPECT_EQ(parse_integrand("laminate:1,2,1").integrand().id(), laminate(1, 2, 1, 0, euclid()).id());
  const CatalogEntry cb = parse_integrand("checkerboard:4,1,2");
  ASSERT_TRUE(cb.random.has_value());
  EXPECT_EQ(cb.random->master_seed(), 4u);
  EXPECT_THROW(parse_integrand("nope"), DomainError);
  EXPECT_THROW(parse_integrand("laminate:1"), DomainError);
}
