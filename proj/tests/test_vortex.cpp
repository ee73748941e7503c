#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "fgl/io.hpp"
#include "fgl/solver.hpp"
#include "fgl/vortex.hpp"

using namespace fgl;

namespace {

ScalarField plane_wave(const PeriodicGrid& g, int m, int n) {
    return ScalarField::sample(g, [&](double t, double p) { return std::polar(1.0, m * t + n * p); });
}

// ∫ J over the nodes within distance r of c.
double disk_integral(const RealField& j, const TorusPoint& c, double r) {
    const PeriodicGrid& g = j.grid();
    double s = 0.0;
    for (int a = 0; a < g.n_theta(); ++a)
        for (int b = 0; b < g.n_phi(); ++b)
            if (torus_distance(g.point(a, b), c) <= r) s += j(a, b);
    return s * g.cell_area();
}

InitialState pair(const PeriodicGrid& g, double eps, double sep = kPi) {
    Sector s;
    s.kind = SectorKind::vortex_pair;
    s.separation = sep;
    return init_winding(g, s, eps, 0.0, 0);
}

}  // namespace

TEST(DetectVortices, UniformAndPlaneWavesHaveNone) {
    const PeriodicGrid g(32, 32);
    EXPECT_TRUE(detect_vortices(ScalarField(g, 1.0)).empty());
    EXPECT_TRUE(detect_vortices(plane_wave(g, 3, -1)).empty());
}

TEST(DetectVortices, SyntheticPairAndPlaquetteSum) {
    const PeriodicGrid g(48, 40);
    const InitialState st = pair(g, 0.3, 2.5);
    const VortexSet v = detect_vortices(st.psi);
    ASSERT_EQ(v.size(), 2u);
    EXPECT_EQ(v.total_degree(), 0);
    const GridField<int> deg = plaquette_degrees(st.psi);
    int sum = 0, nonzero = 0;
    for (int d : deg.values()) {
        sum += d;
        nonzero += d != 0;
    }
    EXPECT_EQ(sum, 0);
    EXPECT_EQ(nonzero, 2);
}

TEST(DetectVortices, DegreeTwoAndExactZeroAtNode) {
    const PeriodicGrid g(32, 32);
    // z = sin θ + i sin φ vanishes at the four half-period nodes; z² has degree ±2 at each.
    const ScalarField psi = ScalarField::sample(g, [](double t, double p) {
        const Complex z(std::sin(t), std::sin(p));
        return z * z;
    });
    const VortexSet v = detect_vortices(psi);
    EXPECT_EQ(v.total_degree(), 0);
    int positive = 0;
    for (const Vortex& x : v.vortices) {
        EXPECT_EQ(std::abs(x.degree), 2);
        positive += x.degree > 0;
    }
    EXPECT_EQ(v.size(), 4u);
    EXPECT_EQ(positive, 2);
}

TEST(CycleWindings, Examples) {
    const PeriodicGrid g(32, 24);
    EXPECT_EQ(cycle_windings(plane_wave(g, 1, 0)), std::make_pair(1, 0));
    EXPECT_EQ(cycle_windings(plane_wave(g, 2, -3)), std::make_pair(2, -3));
    const GaugeFunction chi{RealField::sample(g, [](double t, double p) { return 2.0 * std::sin(t) + std::cos(2 * p); }), false};
    const auto [psi2, a2] = gauge_transform(plane_wave(g, 2, -3), OneFormField(g), chi);
    EXPECT_EQ(cycle_windings(psi2), std::make_pair(2, -3));
}

TEST(CycleWindings, ShiftsAwayFromZerosAndFailsWhenNoCycleIsClean) {
    const PeriodicGrid g(16, 16);
    ScalarField psi = plane_wave(g, 1, 1);
    psi(0, 0) = 0.0;
    EXPECT_EQ(cycle_windings(psi), std::make_pair(1, 1));
    EXPECT_THROW(cycle_windings(ScalarField(g, 0.0)), DomainError);
}

TEST(Jacobian, PlaneWaveHasNoVorticity) {
    const PeriodicGrid g(32, 32);
    const JacobianField j = jacobian_field(plane_wave(g, 1, 0), OneFormField(g));
    EXPECT_LT(max_abs(j.density), 1e-12);
    EXPECT_EQ(std::count(j.masked.begin(), j.masked.end(), 1), 0);
}

TEST(Jacobian, UniformModulusGivesMinusHalfCurlOfA) {
    const PeriodicGrid g(32, 32);
    const OneFormField a(RealField::sample(g, [](double, double p) { return std::sin(p); }),
                         RealField::sample(g, [](double t, double) { return 0.5 * std::cos(t); }));
    const JacobianField j = jacobian_field(ScalarField(g, 1.0), a);
    const RealField c = curl(a);
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(j.density[k], -0.5 * c[k], 1e-14);
}

TEST(Jacobian, VortexPairIntegratesToPlusMinusPi) {
    const double eps = 0.25;
    const int n = 202;  // h ≤ ε/8
    const PeriodicGrid g(n, n);
    const InitialState st = pair(g, eps);
    const JacobianField j = jacobian_field(st.psi, st.a);
    const double plus = disk_integral(j.density, st.cores[0], 1.0);
    const double minus = disk_integral(j.density, st.cores[1], 1.0);
    EXPECT_NEAR(plus, kPi, 0.05 * kPi);
    EXPECT_NEAR(minus, -kPi, 0.05 * kPi);
    double total = 0.0;
    for (double v : j.density.values()) total += v;
    EXPECT_NEAR(total * g.cell_area(), 0.0, 1e-10);
}

TEST(GammaLimit, CountingConvention) {
    const FinslerNorm n = FinslerNorm::randers(2.0, 1.0, Vec2(0.3, 0.0));
    EXPECT_EQ(gamma_limit_energy(n, {}), 0.0);
    const VortexSet pm{{{TorusPoint(1, 1), 1}, {TorusPoint(2, 2), -1}}};
    const VortexSet two{{{TorusPoint(3, 3), 2}}};
    EXPECT_NEAR(gamma_limit_energy(n, pm), 2 * kPi, 1e-15);
    EXPECT_NEAR(gamma_limit_energy(n, two), 2 * kPi, 1e-15);
    VortexSet all = pm;
    all.vortices.insert(all.vortices.end(), two.vortices.begin(), two.vortices.end());
    EXPECT_NEAR(gamma_limit_energy(n, all), gamma_limit_energy(n, pm) + gamma_limit_energy(n, two), 1e-14);
}

TEST(FinslerLength, Examples) {
    const PolylineCurrent seg({Vec2(0, 0), Vec2(1, 0)}, false);
    EXPECT_NEAR(finsler_length(FinslerNorm::quadratic(4.0, 1.0), seg), 2.0, 1e-14);
    std::vector<Vec2> circle;
    for (int k = 0; k <= 64; ++k) circle.emplace_back(kTwoPi * k / 64, 0.3);
    EXPECT_NEAR(finsler_length(FinslerNorm::quadratic(1.0, 1.0), PolylineCurrent(circle, true)), kTwoPi, 1e-12);
    const FinslerNorm r = FinslerNorm::randers(1.0, 1.0, Vec2(0.5, 0.0));
    EXPECT_NEAR(finsler_length(r, seg), 1.5, 1e-14);
    EXPECT_NEAR(finsler_length(r, seg.reversed()), 0.5, 1e-14);
    EXPECT_NEAR(finsler_length(r, PolylineCurrent({Vec2(0, 0), Vec2(1, 0)}, false, 1, -1)), 0.5, 1e-14);
    EXPECT_NEAR(finsler_length(r, PolylineCurrent({Vec2(0, 0), Vec2(1, 0)}, false, -3)), 1.5, 1e-14);
}

TEST(FinslerLength, VertexInsertionAndQuadratureRefinement) {
    using S = CoefficientProfile::Shape;
    const FinslerNorm n = FinslerNorm::randers(CoefficientProfile::make(S::cos_theta_cos_phi, 2.0, 0.5),
                                               CoefficientProfile::make(S::cos_theta, 1.0, 0.3), Vec2(0.2, -0.1));
    const FinslerNorm flat = FinslerNorm::randers(2.0, 1.0, Vec2(0.2, -0.1));
    const Vec2 a(0.2, 0.1), b(1.0, 0.7), c(1.4, -0.2);
    EXPECT_NEAR(finsler_length(flat, PolylineCurrent({a, b}, false)),
                finsler_length(flat, PolylineCurrent({a, 0.3 * a + 0.7 * b, b}, false)), 1e-12);
    auto refined = [&](int m) {
        std::vector<Vec2> v;
        for (int k = 0; k <= m; ++k) v.push_back(a + (b - a) * (double(k) / m));
        for (int k = 1; k <= m; ++k) v.push_back(b + (c - b) * (double(k) / m));
        return finsler_length(n, PolylineCurrent(v, false));
    };
    EXPECT_NEAR(refined(8), refined(64), 1e-10);
}

TEST(FinslerLength, TriangleInequality) {
    const FinslerNorm n = FinslerNorm::randers(1.0, 3.0, Vec2(0.4, 0.5));
    const Vec2 a(0, 0), c(2.0, 1.0);
    for (int k = 0; k < 50; ++k) {
        const Vec2 b(std::cos(0.37 * k) * 2.0, std::sin(0.91 * k) * 1.5);
        EXPECT_GE(finsler_length(n, PolylineCurrent({a, b, c}, false)) + 1e-12,
                  finsler_length(n, PolylineCurrent({a, c}, false)));
    }
}

TEST(PolylineCurrent, ValidatesAndRoundTripsThroughCsv) {
    EXPECT_THROW(PolylineCurrent({Vec2(0, 0), Vec2(1, 0)}, true), ConstructionError);
    EXPECT_THROW(finsler_length(FinslerNorm::quadratic(1, 1), PolylineCurrent({Vec2(1, 1), Vec2(1, 1)}, false)),
                 ConstructionError);
    const PolylineCurrent p({Vec2(0, 0), Vec2(kTwoPi, 0.5), Vec2(kTwoPi, kTwoPi), Vec2(0, 0) + Vec2(kTwoPi, kTwoPi)}, true,
                            3, -1);
    std::stringstream ss;
    write_polyline_csv(ss, p);
    const PolylineCurrent q = read_polyline_csv(ss);
    EXPECT_EQ(q.multiplicity(), 3);
    EXPECT_EQ(q.orientation(), -1);
    EXPECT_TRUE(q.closed());
    ASSERT_EQ(q.vertices().size(), p.vertices().size());
    for (std::size_t k = 0; k < q.vertices().size(); ++k) EXPECT_EQ(q.vertices()[k], p.vertices()[k]);
    std::stringstream bad("theta,phi\n1,2\n");
    EXPECT_THROW(read_polyline_csv(bad), ConfigError);
}

TEST(VortexCsv, Columns) {
    const VortexSet v{{{TorusPoint(1.5, 2.5), 1}, {TorusPoint(0.25, 0.5), -1}}};
    std::ostringstream os;
    write_vortex_csv(os, v);
    EXPECT_EQ(os.str(), "theta,phi,degree\n1.5,2.5,1\n0.25,0.5,-1\n");
}
