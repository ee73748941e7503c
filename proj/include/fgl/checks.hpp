#pragma once

#include <cmath>
#include <cstdio>
#include <cstdint>
#include <string>
#include <vector>

#include "fgl/energy.hpp"
#include "fgl/finsler_norm.hpp"
#include "fgl/measures.hpp"
#include "fgl/operators.hpp"
#include "fgl/solver.hpp"

namespace fgl {

/// Outcome of one property suite: the worst measured value against its bound.
struct SuiteResult {
    std::string name;
    bool passed = false;
    double measured = 0.0;
    double tolerance = 0.0;
    std::string detail;
};

namespace detail {

/// Uniform draws in [lo, hi) from a seeded 64-bit Mersenne twister.
class Uniform {
public:
    explicit Uniform(std::uint64_t seed) : rng_(seed) {}
    double operator()(double lo = 0.0, double hi = 1.0) {
        return lo + (hi - lo) * static_cast<double>(rng_() >> 11) * 0x1.0p-53;
    }

private:
    std::mt19937_64 rng_;
};

/// Σ over a few low Fourier modes with random coefficients in [-1, 1].
inline RealField smooth_random(const PeriodicGrid& g, Uniform& u, int modes = 3) {
    std::vector<std::array<double, 4>> c;
    for (int p = 0; p <= modes; ++p)
        for (int q = 0; q <= modes; ++q) c.push_back({u(-1, 1), u(-1, 1), static_cast<double>(p), static_cast<double>(q)});
    return RealField::sample(g, [&](double t, double f) {
        double s = 0.0;
        for (const auto& k : c) {
            const double w = 1.0 / (1.0 + k[2] * k[2] + k[3] * k[3]);
            s += w * (k[0] * std::cos(k[2] * t + k[3] * f) + k[1] * std::sin(k[2] * t - k[3] * f));
        }
        return s;
    });
}

/// ψ = ρ e^{iϑ} with smooth ρ ∈ [0.3, 1] and smooth ϑ (no zeros).
inline ScalarField smooth_nonvanishing(const PeriodicGrid& g, Uniform& u) {
    const RealField r = smooth_random(g, u);
    const RealField th = smooth_random(g, u);
    const double rmax = max_abs(r);
    ScalarField psi(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        const double rho = 0.65 + 0.35 * r[k] / rmax;
        psi[k] = std::polar(rho, 2.0 * th[k]);
    }
    return psi;
}

inline SuiteResult verdict(std::string name, double measured, double tol, bool pass, std::string detail = {}) {
    return SuiteResult{std::move(name), pass, measured, tol, std::move(detail)};
}

}  // namespace detail

/// Reference norms used by the suites next to the configured one.
inline std::vector<std::pair<std::string, FinslerNorm>> reference_norms() {
    using S = CoefficientProfile::Shape;
    return {
        {"quadratic(2,1)", FinslerNorm::quadratic(2.0, 1.0)},
        {"quadratic(cos_theta)", FinslerNorm::quadratic(CoefficientProfile::make(S::cos_theta, 2.0, 0.5),
                                                        CoefficientProfile::make(S::cos_phi, 1.0, 0.3))},
        {"randers(1,1,0.5)", FinslerNorm::randers(1.0, 1.0, Vec2(0.5, 0.0))},
        {"randers(cos_theta_cos_phi)",
         FinslerNorm::randers(CoefficientProfile::make(S::cos_theta_cos_phi, 1.5, 0.4), CoefficientProfile::constant(1.0),
                              Vec2(0.3, -0.2))},
    };
}

/// Legendre round trip, F*(L(y)) = F(y), and the Fenchel–Young gap.
inline std::vector<SuiteResult> check_duality(const FinslerNorm& norm, std::uint64_t seed, int samples = 10000) {
    detail::Uniform u(seed);
    double roundtrip = 0.0, dual_consistency = 0.0, min_gap = 0.0, graph_gap = 0.0;
    for (int s = 0; s < samples; ++s) {
        const TorusPoint x(u(0, kTwoPi), u(0, kTwoPi));
        const MinkowskiNorm m = norm.at(x);
        const double r = std::exp(u(std::log(0.1), std::log(10.0)));
        const double w = u(0, kTwoPi);
        const Vec2 y(r * std::cos(w), r * std::sin(w));
        const Vec2 xi = m.legendre(y);
        const double fy = m.value(y);
        roundtrip = std::max(roundtrip, (m.legendre_inverse(xi) - y).norm() / y.norm());
        dual_consistency = std::max(dual_consistency, std::abs(m.dual(xi) - fy) / fy);
        graph_gap = std::max(graph_gap, std::abs(fenchel_gap(norm, TangentVector(x, y), CotangentVector(x, xi))) / (fy * fy));
        const double r2 = std::exp(u(std::log(0.1), std::log(10.0)));
        const double w2 = u(0, kTwoPi);
        const Vec2 eta(r2 * std::cos(w2), r2 * std::sin(w2));
        const double gap = fenchel_gap(norm, TangentVector(x, y), CotangentVector(x, eta));
        const double scale = fy * fy + m.dual(eta) * m.dual(eta);
        min_gap = std::min(min_gap, gap / scale);
    }
    return {
        detail::verdict("legendre-roundtrip", roundtrip, 1e-9, roundtrip <= 1e-9),
        detail::verdict("dual-of-legendre", dual_consistency, 1e-9, dual_consistency <= 1e-9),
        detail::verdict("fenchel-young-gap", min_gap, -1e-10, min_gap >= -1e-10),
        detail::verdict("fenchel-young-equality", graph_gap, 1e-10, graph_gap <= 1e-10),
    };
}

/// BH = HT = √(ab) for quadratic norms; BH ≠ HT for Randers β = (0.5, 0).
inline std::vector<SuiteResult> check_measures(std::uint64_t seed, int pairs = 100) {
    detail::Uniform u(seed);
    double worst = 0.0;
    for (int k = 0; k < pairs; ++k) {
        const double a = std::exp(u(std::log(0.2), std::log(5.0)));
        const double b = std::exp(u(std::log(0.2), std::log(5.0)));
        const FinslerNorm n = FinslerNorm::quadratic(a, b);
        const double s = std::sqrt(a * b);
        worst = std::max({worst, std::abs(bh_density(n, {}) - s) / s, std::abs(ht_density(n, {}) - s) / s});
    }
    const FinslerNorm r = FinslerNorm::randers(1.0, 1.0, Vec2(0.5, 0.0));
    const double gap = std::abs(bh_density(r, {}) - ht_density(r, {}));
    return {
        detail::verdict("measure-quadratic-identity", worst, 1e-8, worst <= 1e-8),
        detail::verdict("measure-randers-separation", gap, 1e-3, gap >= 1e-3),
    };
}

/// Worst relative mismatch between ⟨∇E, v⟩ and central differences of E
/// along `directions` random smooth directions.
inline double gradient_fd_mismatch(const FinslerNorm& norm, MeasureKind measure, const PeriodicGrid& g,
                                   std::uint64_t seed, int directions = 20) {
    detail::Uniform u(seed);
    const MeasureDensity dens(norm, measure);
    const GLParams params(0.7, 0.4);
    const GLFunctional f(norm, dens, params, g);
    const ScalarField psi = detail::smooth_nonvanishing(g, u);
    const OneFormField a(detail::smooth_random(g, u), detail::smooth_random(g, u));
    GLGradient grad;
    f.energy_and_gradient(psi, a, grad);
    double worst = 0.0;
    for (int d = 0; d < directions; ++d) {
        const RealField vr = detail::smooth_random(g, u), vi = detail::smooth_random(g, u);
        const OneFormField va(detail::smooth_random(g, u), detail::smooth_random(g, u));
        ScalarField vp(g);
        for (std::size_t k = 0; k < g.size(); ++k) vp[k] = Complex(vr[k], vi[k]);
        const double analytic = f.inner(grad.psi, grad.a, vp, va);
        auto energy_at = [&](double t) {
            ScalarField p = psi;
            OneFormField q = a;
            for (std::size_t k = 0; k < g.size(); ++k) {
                p[k] += t * vp[k];
                q.theta[k] += t * va.theta[k];
                q.phi[k] += t * va.phi[k];
            }
            return f.energy(p, q).total;
        };
        // Fourth-order central difference in t.
        const double t = 1e-3;
        const double fd =
            (8.0 * (energy_at(t) - energy_at(-t)) - (energy_at(2 * t) - energy_at(-2 * t))) / (12.0 * t);
        worst = std::max(worst, std::abs(fd - analytic) / std::max(std::abs(analytic), 1e-300));
    }
    return worst;
}

inline SuiteResult check_gradient(std::uint64_t seed) {
    double worst = 0.0;
    std::string where;
    for (const auto& [name, norm] : reference_norms()) {
        const double e = gradient_fd_mismatch(norm, MeasureKind::busemann_hausdorff, PeriodicGrid(16, 16), seed);
        if (e > worst) {
            worst = e;
            where = name;
        }
    }
    return detail::verdict("gradient-finite-difference", worst, 1e-6, worst <= 1e-6, "worst norm " + where);
}

/// Diamagnetic residual against its slack on three grids: the residual must
/// stay above -δ_h and δ_h must shrink at least linearly.
struct DiamagneticStudy {
    std::vector<int> n;
    std::vector<double> min_margin;  ///< min over nodes of residual + slack
    std::vector<double> max_slack;
};

inline DiamagneticStudy diamagnetic_study(const FinslerNorm& norm, std::uint64_t seed, std::vector<int> ns = {32, 64, 128}) {
    DiamagneticStudy s;
    for (int n : ns) {
        const PeriodicGrid g(n, n);
        detail::Uniform u(seed);  // same continuum fields on every grid
        const ScalarField psi = detail::smooth_nonvanishing(g, u);
        const OneFormField a(detail::smooth_random(g, u), detail::smooth_random(g, u));
        const DiamagneticReport rep = diamagnetic_residual(norm, psi, a);
        double margin = std::numeric_limits<double>::infinity();
        for (std::size_t k = 0; k < g.size(); ++k) margin = std::min(margin, rep.residual[k] + rep.slack[k]);
        s.n.push_back(n);
        s.min_margin.push_back(margin);
        s.max_slack.push_back(rep.max_slack);
    }
    return s;
}

/// One verdict per reference norm. The inequality relies on F*(-ξ) = F*(ξ);
/// for Randers norms it fails in the continuum (ψ = -|ψ| with d|ψ| pointing
/// against the drift), so those rows are expected to fail.
inline std::vector<SuiteResult> check_diamagnetic(std::uint64_t seed) {
    std::vector<SuiteResult> out;
    for (const auto& [name, norm] : reference_norms()) {
        const DiamagneticStudy s = diamagnetic_study(norm, seed);
        double margin = std::numeric_limits<double>::infinity();
        for (double m : s.min_margin) margin = std::min(margin, m);
        double ratio = 0.0;
        for (std::size_t k = 1; k < s.n.size(); ++k)
            ratio = std::max(ratio, s.max_slack[k] / s.max_slack[k - 1] * (double(s.n[k]) / s.n[k - 1]));
        // ratio ≤ 1 means δ_h decays at least like h.
        char buf[160];
        std::snprintf(buf, sizeof buf, "min residual+slack %.3g -> %.3g -> %.3g, slack decay ratio %.3g (<=1 is linear)",
                      s.min_margin[0], s.min_margin[1], s.min_margin[2], ratio);
        out.push_back(detail::verdict("diamagnetic[" + name + "]", margin, 0.0, margin >= 0.0 && ratio <= 1.0, buf));
    }
    return out;
}

/// Σ w ⟨dχ, X⟩ + Σ w χ div_σ X = 0 with nonconstant σ.
inline SuiteResult check_integration_by_parts(std::uint64_t seed) {
    const PeriodicGrid g(48, 40);
    detail::Uniform u(seed);
    const FinslerNorm norm = reference_norms()[1].second;
    const MeasureDensity dens(norm, MeasureKind::holmes_thompson);
    const RealField& sigma = dens.on(g);
    const RealField chi = detail::smooth_random(g, u, 6);
    const VectorField x(detail::smooth_random(g, u, 6), detail::smooth_random(g, u, 6));
    const OneFormField dchi = exterior_d(chi);
    const RealField div = divergence(x, sigma);
    const double lhs = grid_sum(g, [&](int i, int j) {
        return sigma(i, j) * (dchi.theta(i, j) * x.theta(i, j) + dchi.phi(i, j) * x.phi(i, j));
    });
    const double rhs = grid_sum(g, [&](int i, int j) { return sigma(i, j) * chi(i, j) * div(i, j); });
    const double scale = grid_sum(g, [&](int i, int j) {
        return sigma(i, j) * (std::abs(dchi.theta(i, j) * x.theta(i, j)) + std::abs(dchi.phi(i, j) * x.phi(i, j)));
    });
    const double err = std::abs(lhs + rhs) / scale;
    return detail::verdict("integration-by-parts", err, 1e-12, err <= 1e-12);
}

/// |E(gauge-transformed) - E| on refining grids; observed order must be ≥ 3.
inline std::vector<double> gauge_defects(const FinslerNorm& norm, std::uint64_t seed, const std::vector<int>& ns) {
    std::vector<double> out;
    const MeasureDensity dens(norm, MeasureKind::busemann_hausdorff);
    for (int n : ns) {
        const PeriodicGrid g(n, n);
        detail::Uniform u(seed);
        const ScalarField psi = detail::smooth_nonvanishing(g, u);
        const OneFormField a(detail::smooth_random(g, u), detail::smooth_random(g, u));
        const GaugeFunction chi{detail::smooth_random(g, u), false};
        const auto [p2, a2] = gauge_transform(psi, a, chi);
        const GLFunctional f(norm, dens, GLParams(1.0, 0.5), g);
        out.push_back(std::abs(f.energy(p2, a2).total - f.energy(psi, a).total));
    }
    return out;
}

/// Only quadratic norms are gauge invariant in the continuum: for a Randers
/// norm F*(Re η)² + F*(Im η)² is not preserved by η -> e^{ic}η. Their defect
/// does not vanish under refinement and is reported, not graded.
inline SuiteResult check_gauge_refinement(std::uint64_t seed) {
    const std::vector<int> ns{32, 64};
    double worst = std::numeric_limits<double>::infinity();
    std::string info;
    for (const auto& [name, norm] : reference_norms()) {
        const std::vector<double> d = gauge_defects(norm, seed, ns);
        if (norm.kind() == NormKind::quadratic) {
            worst = std::min(worst, std::log2(d[0] / d[1]));
        } else {
            char buf[160];
            std::snprintf(buf, sizeof buf, "%s%s defect %.3g -> %.3g (not invariant)", info.empty() ? "" : "; ",
                          name.c_str(), d[0], d[1]);
            info += buf;
        }
    }
    return detail::verdict("gauge-invariance-refinement", worst, 3.0, worst >= 3.0,
                           "observed order over quadratic norms; " + info);
}

/// All suites; the configured norm joins the duality checks.
inline std::vector<SuiteResult> run_property_suites(const FinslerNorm& configured, std::uint64_t seed) {
    std::vector<SuiteResult> out;
    auto add = [&](std::vector<SuiteResult> v, const std::string& tag) {
        for (auto& r : v) {
            r.name += tag;
            out.push_back(std::move(r));
        }
    };
    add(check_duality(configured, seed), "[configured]");
    for (const auto& [name, norm] : reference_norms()) add(check_duality(norm, seed), "[" + name + "]");
    add(check_measures(seed), "");
    out.push_back(check_gradient(seed));
    add(check_diamagnetic(seed), "");
    out.push_back(check_integration_by_parts(seed));
    out.push_back(check_gauge_refinement(seed));
    return out;
}

}  // namespace fgl
