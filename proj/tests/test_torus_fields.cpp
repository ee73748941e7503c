#include <gtest/gtest.h>

#include <cmath>
#include <random>
#include <sstream>

#include "fgl/io.hpp"
#include "fgl/operators.hpp"

using namespace fgl;

namespace {

const Complex I(0.0, 1.0);

double max_err(const RealField& f, double (*ref)(double, double)) {
    double m = 0.0;
    const PeriodicGrid& g = f.grid();
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j) m = std::max(m, std::abs(f(i, j) - ref(g.theta(i), g.phi(j))));
    return m;
}

// Sum of a few low Fourier modes with random coefficients.
RealField smooth_field(const PeriodicGrid& g, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    double c[3][3][2];
    for (auto& a : c)
        for (auto& b : a)
            for (double& v : b) v = u(rng);
    return RealField::sample(g, [&](double t, double p) {
        double s = 0.0;
        for (int m = 0; m < 3; ++m)
            for (int n = 0; n < 3; ++n) s += c[m][n][0] * std::cos(m * t + n * p) + c[m][n][1] * std::sin(m * t - n * p);
        return s;
    });
}

}  // namespace

TEST(PeriodicGrid, RejectsSmallOrOddCounts) {
    EXPECT_THROW(PeriodicGrid(6, 8), ConstructionError);
    EXPECT_THROW(PeriodicGrid(8, 9), ConstructionError);
    const PeriodicGrid g(8, 12);
    EXPECT_EQ(g.index(-1, 12), g.index(7, 0));
    EXPECT_EQ(g.index(17, -25), g.index(1, 11));
}

TEST(ExteriorD, SineAndConstant) {
    const PeriodicGrid g(64, 64);
    const OneFormField d = exterior_d(RealField::sample(g, [](double t, double) { return std::sin(t); }));
    EXPECT_LT(max_err(d.theta, [](double t, double) { return std::cos(t); }), 1e-5);
    EXPECT_LT(max_abs(d.phi), 1e-13);
    const OneFormField dc = exterior_d(RealField(g, 3.7));
    EXPECT_EQ(max_abs(dc.theta), 0.0);
    EXPECT_EQ(max_abs(dc.phi), 0.0);
}

TEST(ExteriorD, FourthOrderOnComplexExponential) {
    auto err = [](int n) {
        const PeriodicGrid g(n, n);
        const ScalarField u = ScalarField::sample(g, [](double t, double) { return std::polar(1.0, t); });
        const ComplexOneForm d = exterior_d(u);
        double m = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) m = std::max(m, std::abs(d.theta(i, j) - I * std::polar(1.0, g.theta(i))));
        return m;
    };
    const double order = std::log2(err(64) / err(128));
    EXPECT_GE(order, 3.9);
}

TEST(ExteriorD, CurlOfGradientVanishesToRounding) {
    const PeriodicGrid g(48, 40);
    const RealField u = smooth_field(g, 11);
    EXPECT_LT(max_abs(curl(exterior_d(u))), 1e-12);
}

TEST(CovariantDerivative, Examples) {
    const PeriodicGrid g(64, 64);
    const ScalarField e = ScalarField::sample(g, [](double t, double) { return std::polar(1.0, t); });
    const ComplexOneForm d1 = covariant_derivative(e, OneFormField(RealField(g, 1.0), RealField(g, 0.0)));
    double m = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) m = std::max({m, std::abs(d1.theta[k]), std::abs(d1.phi[k])});
    EXPECT_LT(m, 1e-5);

    const double c = 0.8;
    const ComplexOneForm d2 = covariant_derivative(ScalarField(g, 1.0), OneFormField(RealField(g, c), RealField(g, 0.0)));
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_EQ(d2.theta[k], Complex(0.0, -c));
        EXPECT_EQ(d2.phi[k], Complex(0.0, 0.0));
    }

    const int mw = 3;
    const ScalarField em = ScalarField::sample(g, [&](double t, double) { return std::polar(1.0, mw * t); });
    const ComplexOneForm d3 = covariant_derivative(em, OneFormField(g));
    for (std::size_t k = 0; k < g.size(); ++k) EXPECT_NEAR(std::abs(d3.theta[k]), mw, 1e-3);
}

TEST(CovariantDerivative, RejectsGridMismatch) {
    EXPECT_THROW(covariant_derivative(ScalarField(PeriodicGrid(8, 8)), OneFormField(PeriodicGrid(8, 10))), GridMismatch);
}

TEST(Curl, AnalyticExamples) {
    const PeriodicGrid g(64, 64);
    const RealField chi = RealField::sample(g, [](double t, double p) { return std::sin(t) * std::cos(p); });
    EXPECT_LT(max_abs(curl(exterior_d(chi))), 1e-12);

    OneFormField a1(g);
    a1.phi = RealField::sample(g, [](double t, double) { return std::sin(t); });
    EXPECT_LT(max_err(curl(a1), [](double t, double) { return std::cos(t); }), 1e-5);

    const OneFormField a2(RealField::sample(g, [](double, double p) { return -std::sin(p); }),
                          RealField::sample(g, [](double t, double) { return std::sin(t); }));
    EXPECT_LT(max_err(curl(a2), [](double t, double p) { return std::cos(t) + std::cos(p); }), 1e-5);
}

TEST(GaugeTransform, Examples) {
    const PeriodicGrid g(16, 16);
    const ScalarField psi = ScalarField::sample(g, [](double t, double p) { return Complex(std::cos(t), std::sin(p)); });
    const OneFormField a(smooth_field(g, 1), smooth_field(g, 2));
    const auto [p0, a0] = gauge_transform(psi, a, GaugeFunction{RealField(g), true});
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_EQ(p0[k], psi[k]);
        EXPECT_EQ(a0.theta[k], a.theta[k]);
    }
    const double c = 0.6;
    const auto [p1, a1] = gauge_transform(ScalarField(g, 1.0), OneFormField(g), GaugeFunction{RealField(g, c), false});
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(std::abs(p1[k] - std::polar(1.0, c)), 0.0, 1e-15);
        EXPECT_EQ(a1.theta[k], 0.0);
        EXPECT_EQ(a1.phi[k], 0.0);
    }
}

TEST(Coulomb, PureGaugeRemoved) {
    const PeriodicGrid g(64, 64);
    const RealField chi0 = RealField::sample(g, [](double t, double) { return std::sin(t); });
    const CoulombDecomposition c = coulomb_project(exterior_d(chi0), RealField(g, 1.0));
    EXPECT_LT(std::max(max_abs(c.coulomb.theta), max_abs(c.coulomb.phi)), 1e-10);
    double m = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k) m = std::max(m, std::abs(c.chi.values[k] - chi0[k]));
    EXPECT_LT(m, 1e-10);
    EXPECT_TRUE(c.chi.mean_zero);
    EXPECT_LT(std::abs(grid_mean(c.chi.values)), 1e-12);
}

TEST(Coulomb, HarmonicFormsUnchanged) {
    const PeriodicGrid g(32, 32);
    const CoulombDecomposition c = coulomb_project(OneFormField(RealField(g, 0.3), RealField(g, -1.1)), RealField(g, 1.0));
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_NEAR(c.coulomb.theta[k], 0.3, 1e-15);
        EXPECT_NEAR(c.coulomb.phi[k], -1.1, 1e-15);
        EXPECT_NEAR(c.chi.values[k], 0.0, 1e-15);
    }
    EXPECT_NEAR(c.harmonic_theta, 0.3, 1e-15);
    EXPECT_NEAR(c.harmonic_phi, -1.1, 1e-15);
}

TEST(Coulomb, DivergenceFreeAndIdempotent) {
    const PeriodicGrid g(40, 48);
    const OneFormField a(smooth_field(g, 5), smooth_field(g, 6));
    const RealField flat(g, std::sqrt(2.0));
    const RealField bumpy = RealField::sample(g, [](double t, double p) { return 1.5 + 0.4 * std::cos(t) * std::sin(p); });
    for (const RealField* sigma : {&flat, &bumpy}) {
        const CoulombDecomposition c1 = coulomb_project(a, *sigma);
        EXPECT_LE(max_abs(divergence(c1.coulomb, *sigma)), 1e-10);
        EXPECT_NEAR(c1.harmonic_theta, grid_mean(a.theta), 1e-14);
        EXPECT_NEAR(grid_mean(c1.coulomb.theta), grid_mean(a.theta), 1e-12);
        EXPECT_NEAR(grid_mean(c1.coulomb.phi), grid_mean(a.phi), 1e-12);
        const CoulombDecomposition c2 = coulomb_project(c1.coulomb, *sigma);
        for (std::size_t k = 0; k < g.size(); ++k) {
            EXPECT_NEAR(c2.coulomb.theta[k], c1.coulomb.theta[k], 1e-10);
            EXPECT_NEAR(c2.coulomb.phi[k], c1.coulomb.phi[k], 1e-10);
        }
        if (sigma == &bumpy) {
            EXPECT_GT(c1.cg_iterations, 0);
        } else {
            EXPECT_EQ(c1.cg_iterations, 0);
        }
    }
}

TEST(Coulomb, GaugeTransformThenProjectRecoversRepresentative) {
    const PeriodicGrid g(32, 32);
    const RealField sigma(g, 1.0);
    const OneFormField a = coulomb_project(OneFormField(smooth_field(g, 8), smooth_field(g, 9)), sigma).coulomb;
    const ScalarField psi = ScalarField::sample(g, [](double t, double p) { return std::polar(1.0 + 0.2 * std::cos(p), t); });
    const GaugeFunction chi{smooth_field(g, 10), false};
    const auto [psi2, a2] = gauge_transform(psi, a, chi);
    const CoulombDecomposition c = coulomb_project(a2, sigma);
    double m = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        m = std::max({m, std::abs(c.coulomb.theta[k] - a.theta[k]), std::abs(c.coulomb.phi[k] - a.phi[k])});
    EXPECT_LT(m, 1e-8);
    // Undo the gauge on ψ with the recovered χ; only a constant phase may remain.
    const Complex ph = std::exp(-I * c.chi.values[0]) * psi2[0] / psi[0];
    double dev = 0.0;
    for (std::size_t k = 0; k < g.size(); ++k)
        dev = std::max(dev, std::abs(std::exp(-I * c.chi.values[k]) * psi2[k] - ph * psi[k]));
    EXPECT_LT(dev, 1e-8);
}

TEST(Coulomb, RejectsNonPositiveDensity) {
    const PeriodicGrid g(8, 8);
    EXPECT_THROW(coulomb_project(OneFormField(g), RealField(g, 0.0)), ConstructionError);
}

TEST(IntegrationByParts, ExactForConstantDensity) {
    const PeriodicGrid g(32, 40);
    const RealField u = smooth_field(g, 21);
    const VectorField x(smooth_field(g, 22), smooth_field(g, 23));
    const RealField sigma(g, 1.7);
    const OneFormField du = exterior_d(u);
    const RealField dv = divergence(x, sigma);
    RealField lhs(g), rhs(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        lhs[k] = du.theta[k] * x.theta[k] + du.phi[k] * x.phi[k];
        rhs[k] = -u[k] * dv[k];
    }
    const double l = integrate(sigma, lhs), r = integrate(sigma, rhs);
    EXPECT_NEAR(l, r, 1e-10 * std::max(1.0, std::abs(l)));
}

TEST(IntegrationByParts, DiscreteDivergenceConvergesForVaryingDensity) {
    // The discrete pairing is exact; the discrete divergence approaches the
    // continuum one at fourth order for a smooth σ.
    auto err = [](int n) {
        const PeriodicGrid g(n, n);
        const RealField sigma = RealField::sample(g, [](double t, double) { return 2.0 + std::cos(t); });
        const VectorField y(RealField::sample(g, [](double t, double) { return std::sin(t); }), RealField(g, 0.0));
        const RealField d = divergence(y, sigma);
        double m = 0.0;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) {
                const double t = g.theta(i);
                const double exact = (-std::sin(t) * std::sin(t) + (2.0 + std::cos(t)) * std::cos(t)) / (2.0 + std::cos(t));
                m = std::max(m, std::abs(d(i, j) - exact));
            }
        return m;
    };
    EXPECT_GE(std::log2(err(32) / err(64)), 3.5);
}

TEST(GridDump, RoundTripsAllKinds) {
    const PeriodicGrid g(8, 10);
    const RealField r = smooth_field(g, 31);
    const ScalarField s = ScalarField::sample(g, [](double t, double p) { return Complex(std::cos(t), std::sin(2 * p)); });
    const OneFormField a(smooth_field(g, 32), smooth_field(g, 33));
    std::stringstream ss;
    write_dump(ss, to_dump(r));
    write_dump(ss, to_dump(s));
    write_dump(ss, to_dump(a));
    const std::string bytes = ss.str();
    EXPECT_EQ(bytes.substr(0, 4), "FGL1");
    EXPECT_EQ(bytes.size(), 3 * 16 + 80 * 8 * 5);
    const RealField r2 = real_from_dump(read_dump(ss));
    const ScalarField s2 = scalar_from_dump(read_dump(ss));
    const OneFormField a2 = one_form_from_dump(read_dump(ss));
    for (std::size_t k = 0; k < g.size(); ++k) {
        EXPECT_EQ(r2[k], r[k]);
        EXPECT_EQ(s2[k], s[k]);
        EXPECT_EQ(a2.theta[k], a.theta[k]);
        EXPECT_EQ(a2.phi[k], a.phi[k]);
    }
    std::stringstream bad("FGL2xxxxxxxxxxxx");
    EXPECT_THROW(read_dump(bad), ConfigError);
}
