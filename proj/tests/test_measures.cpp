#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fgl/measures.hpp"

using namespace fgl;

namespace {

// The dual ball of sqrt(a y0² + b y1²) + β·y is the ellipse {ξ : |ξ - β|_{Q⁻¹} ≤ 1}
// (area π√(ab)); the primal ball is its polar, an ellipse of area π/(√(ab)(1-|β|²)^{3/2}).
double randers_primal_area(double a, double b, Vec2 beta) {
    const double bb = beta[0] * beta[0] / a + beta[1] * beta[1] / b;
    return kPi / (std::sqrt(a * b) * std::pow(1.0 - bb, 1.5));
}

double randers_dual_area(double a, double b) { return kPi * std::sqrt(a * b); }

}  // namespace

TEST(UnitBallVolume, Examples) {
    EXPECT_NEAR(unit_ball_volume(FinslerNorm::quadratic(4.0, 1.0), {}, false), kPi / 2, 1e-12);
    EXPECT_NEAR(unit_ball_volume(FinslerNorm::quadratic(1.0, 1.0), {}, false), kPi, 1e-12);
    const double v = unit_ball_volume(FinslerNorm::randers(1.0, 1.0, Vec2(0.5, 0.0)), {}, false);
    EXPECT_NEAR(v, kPi * std::pow(0.75, -1.5), 1e-8 * v);
    EXPECT_NEAR(v, 4.8368, 1e-4);
}

TEST(UnitBallVolume, RandersMatchesEllipseAreas) {
    const std::vector<std::pair<Vec2, Vec2>> cases = {
        {Vec2(1.0, 1.0), Vec2(0.5, 0.0)}, {Vec2(2.0, 0.7), Vec2(-0.4, 0.3)}, {Vec2(0.5, 3.0), Vec2(0.1, -1.2)}};
    for (const auto& [ab, beta] : cases) {
        const FinslerNorm n = FinslerNorm::randers(ab[0], ab[1], beta);
        const double p = unit_ball_volume(n, {}, false), d = unit_ball_volume(n, {}, true);
        EXPECT_NEAR(p, randers_primal_area(ab[0], ab[1], beta), 1e-8 * p);
        EXPECT_NEAR(d, randers_dual_area(ab[0], ab[1]), 1e-8 * d);
    }
}

TEST(UnitBallVolume, AngularRefinementConverged) {
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(0.2, 5.0);
    for (int k = 0; k < 20; ++k) {
        const MinkowskiNorm m = FinslerNorm::quadratic(u(rng), u(rng)).at({});
        for (bool dual : {false, true}) {
            const double v1 = unit_ball_volume(m, dual, 2048), v2 = unit_ball_volume(m, dual, 4096);
            EXPECT_LT(std::abs(v1 - v2), 1e-9 * v2);
        }
    }
}

TEST(Densities, Examples) {
    const FinslerNorm q41 = FinslerNorm::quadratic(4.0, 1.0);
    const FinslerNorm q11 = FinslerNorm::quadratic(1.0, 1.0);
    const FinslerNorm r = FinslerNorm::randers(1.0, 1.0, Vec2(0.5, 0.0));
    EXPECT_NEAR(bh_density(q41, {}), 2.0, 1e-12);
    EXPECT_NEAR(bh_density(q11, {}), 1.0, 1e-12);
    EXPECT_NEAR(ht_density(q41, {}), 2.0, 1e-12);
    EXPECT_NEAR(ht_density(q11, {}), 1.0, 1e-12);
    EXPECT_NEAR(bh_density(r, {}), std::pow(0.75, 1.5), 1e-9);
    EXPECT_NEAR(ht_density(r, {}), 1.0, 1e-9);
    EXPECT_GT(std::abs(bh_density(r, {}) - ht_density(r, {})), 0.3);
}

TEST(Densities, BusemannHausdorffEqualsHolmesThompsonForQuadratic) {
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> coef(0.2, 5.0), amp(-0.9, 0.9), ang(0.0, kTwoPi);
    using S = CoefficientProfile::Shape;
    for (int k = 0; k < 100; ++k) {
        const double a0 = coef(rng), b0 = coef(rng);
        const FinslerNorm n = FinslerNorm::quadratic(CoefficientProfile::make(S::cos_theta, a0, amp(rng) * a0),
                                                     CoefficientProfile::make(S::cos_theta_cos_phi, b0, amp(rng) * b0));
        const TorusPoint x(ang(rng), ang(rng));
        const double bh = bh_density(n, x), ht = ht_density(n, x);
        const double ref = std::sqrt(n.a()(x) * n.b()(x));
        EXPECT_NEAR(bh, ref, 1e-8 * ref);
        EXPECT_NEAR(ht, ref, 1e-8 * ref);
    }
}

TEST(MeasureDensity, CachedFieldMatchesPointEvaluation) {
    using S = CoefficientProfile::Shape;
    const FinslerNorm n = FinslerNorm::randers(CoefficientProfile::make(S::cos_phi, 2.0, 0.5),
                                               CoefficientProfile::constant(1.0), Vec2(0.2, 0.1));
    const PeriodicGrid g(16, 24);
    for (MeasureKind kind : {MeasureKind::busemann_hausdorff, MeasureKind::holmes_thompson}) {
        const MeasureDensity d(n, kind);
        const RealField& s = d.on(g);
        EXPECT_EQ(&s, &d.on(g));
        for (int i = 0; i < g.n_theta(); ++i)
            for (int j = 0; j < g.n_phi(); ++j) {
                EXPECT_GT(s(i, j), 0.0);
                EXPECT_DOUBLE_EQ(s(i, j), d(g.point(i, j)));
            }
    }
}

TEST(Integrate, Examples) {
    const PeriodicGrid g(64, 64);
    const RealField one(g, 1.0);
    const MeasureDensity euclid(FinslerNorm::quadratic(1.0, 1.0), MeasureKind::busemann_hausdorff);
    const MeasureDensity aniso(FinslerNorm::quadratic(2.0, 1.0), MeasureKind::holmes_thompson);
    EXPECT_NEAR(integrate(euclid, one), kTwoPi * kTwoPi, 1e-12 * kTwoPi * kTwoPi);
    EXPECT_NEAR(integrate(aniso, one), kTwoPi * kTwoPi * std::sqrt(2.0), 1e-11);
    const RealField c2 = RealField::sample(g, [](double t, double) { return std::cos(t) * std::cos(t); });
    EXPECT_NEAR(integrate(euclid, c2), 2.0 * kPi * kPi, 1e-10);
}

TEST(Integrate, LinearAndMonotone) {
    const PeriodicGrid g(32, 32);
    const MeasureDensity d(FinslerNorm::randers(1.5, 1.0, Vec2(0.3, 0.0)), MeasureKind::busemann_hausdorff);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    RealField f(g), h(g), comb(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        f[k] = u(rng);
        h[k] = u(rng) - 0.5;
        comb[k] = 2.5 * f[k] - 0.75 * h[k];
    }
    EXPECT_GE(integrate(d, f), 0.0);
    EXPECT_NEAR(integrate(d, comb), 2.5 * integrate(d, f) - 0.75 * integrate(d, h), 1e-12);
}

TEST(Integrate, RejectsGridMismatch) {
    const RealField sigma(PeriodicGrid(16, 16), 1.0);
    const RealField f(PeriodicGrid(16, 18), 1.0);
    EXPECT_THROW(integrate(sigma, f), GridMismatch);
}

TEST(MeasureNames, RoundTrip) {
    for (MeasureKind k : {MeasureKind::busemann_hausdorff, MeasureKind::holmes_thompson})
        EXPECT_EQ(parse_measure_kind(measure_name(k)), k);
    EXPECT_THROW(parse_measure_kind("lebesgue"), ConstructionError);
}
