#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "fgl/error.hpp"
#include "fgl/finsler_norm.hpp"
#include "fgl/grid.hpp"
#include "fgl/measures.hpp"
#include "fgl/numerics.hpp"
#include "fgl/operators.hpp"

namespace fgl {

/// Background co-metric γ* for the Maxwell term. Only the Euclidean co-metric
/// of the flat torus is supported.
struct EuclideanCometric {};

struct GLParams {
    double lambda = 1.0;   ///< Maxwell coupling, enters as 1/(2λ)
    double epsilon = 1.0;  ///< coherence length, enters as 1/(4ε²)

    GLParams() = default;
    GLParams(double l, double e) : lambda(l), epsilon(e) {
        if (!(l > 0.0) || !std::isfinite(l)) throw ConstructionError("GL parameter lambda must be > 0");
        if (!(e > 0.0) || !std::isfinite(e)) throw ConstructionError("GL parameter epsilon must be > 0");
    }
};

struct EnergyBreakdown {
    double kinetic = 0.0;
    double maxwell = 0.0;
    double potential = 0.0;
    double total = 0.0;
};

struct ComplexCotangentVector {
    TorusPoint base;
    Complex theta;
    Complex phi;
};

/// ‖η‖²_{F*} = F*(Re η)² + F*(Im η)².
inline double complex_conorm_sq(const FinslerNorm& norm, const ComplexCotangentVector& eta) {
    const MinkowskiNorm m = norm.at(eta.base);
    const double r = m.dual(Vec2(eta.theta.real(), eta.phi.real()));
    const double i = m.dual(Vec2(eta.theta.imag(), eta.phi.imag()));
    return r * r + i * i;
}

/// Below this magnitude a covector is treated as zero: its Legendre preimage is 0.
inline constexpr double kZeroCovector = 1e-14;

/// Riesz representative of the first variation in L²(dμ_F).
struct GLGradient {
    ScalarField psi;
    OneFormField a;
};

/// Discrete GL functional on one grid: nodal norms, σ and quadrature weights
/// are sampled once, then energy and gradient evaluations reuse them.
class GLFunctional {
public:
    GLFunctional(const FinslerNorm& norm, const MeasureDensity& density, const GLParams& params,
                 const PeriodicGrid& grid)
        : grid_(grid), params_(params), sigma_(density.on(grid)), local_(grid.size()), weight_(grid.size()) {
        for_each_node(grid, [&](int i, int j) { local_[grid.index(i, j)] = norm.at(grid.point(i, j)); });
        for (std::size_t k = 0; k < grid.size(); ++k) weight_[k] = sigma_[k] * grid.cell_area();
    }

    const PeriodicGrid& grid() const { return grid_; }
    const GLParams& params() const { return params_; }
    const RealField& sigma() const { return sigma_; }
    double weight(std::size_t k) const { return weight_[k]; }

    EnergyBreakdown energy(const ScalarField& psi, const OneFormField& a) const { return evaluate(psi, a, nullptr); }

    EnergyBreakdown energy_and_gradient(const ScalarField& psi, const OneFormField& a, GLGradient& grad) const {
        return evaluate(psi, a, &grad);
    }

    /// sqrt(Σ w (|gψ|² + |gA|²)).
    double gradient_norm(const GLGradient& g) const {
        return std::sqrt(grid_sum(grid_, [&](int i, int j) {
            const std::size_t k = grid_.index(i, j);
            return weight_[k] * (std::norm(g.psi[k]) + g.a.theta[k] * g.a.theta[k] + g.a.phi[k] * g.a.phi[k]);
        }));
    }

    /// Weighted inner product of two (ψ, A) directions.
    double inner(const ScalarField& p1, const OneFormField& a1, const ScalarField& p2, const OneFormField& a2) const {
        return grid_sum(grid_, [&](int i, int j) {
            const std::size_t k = grid_.index(i, j);
            return weight_[k] * ((std::conj(p1[k]) * p2[k]).real() + a1.theta[k] * a2.theta[k] + a1.phi[k] * a2.phi[k]);
        });
    }

private:
    EnergyBreakdown evaluate(const ScalarField& psi, const OneFormField& a, GLGradient* grad) const {
        require_same_grid(grid_, psi.grid(), "gl energy (psi)");
        require_same_grid(grid_, a.grid(), "gl energy (A)");
        const PeriodicGrid& g = grid_;
        const std::size_t n = g.size();
        const double inv_lambda = 1.0 / params_.lambda;
        const double inv_eps2 = 1.0 / (params_.epsilon * params_.epsilon);

        // Weighted co-state fields: w·L⁻¹(Re ξ), w·L⁻¹(Im ξ), w·curl/λ.
        RealField pt(g), pp(g), qt(g), qp(g), c(g);
        std::vector<double> kin(n), mag(n), pot(n);

        for_each_node(g, [&](int i, int j) {
            const std::size_t k = g.index(i, j);
            const Complex p = psi[k];
            const Complex xt = diff_theta(psi, i, j) - Complex(0.0, a.theta[k]) * p;
            const Complex xp = diff_phi(psi, i, j) - Complex(0.0, a.phi[k]) * p;
            const Vec2 re(xt.real(), xp.real());
            const Vec2 im(xt.imag(), xp.imag());
            const MinkowskiNorm& m = local_[k];
            const double w = weight_[k];
            kin[k] = w * (m.half_dual_sq(re) + m.half_dual_sq(im));
            const double cu = diff_theta(a.phi, i, j) - diff_phi(a.theta, i, j);
            mag[k] = w * 0.5 * inv_lambda * cu * cu;
            const double d = 1.0 - std::norm(p);
            pot[k] = w * 0.25 * inv_eps2 * d * d;
            if (grad) {
                const Vec2 lr = re.norm() < kZeroCovector ? Vec2::Zero() : m.legendre_inverse(re);
                const Vec2 li = im.norm() < kZeroCovector ? Vec2::Zero() : m.legendre_inverse(im);
                pt[k] = w * lr[0];
                pp[k] = w * lr[1];
                qt[k] = w * li[0];
                qp[k] = w * li[1];
                c[k] = w * inv_lambda * cu;
            }
        });

        EnergyBreakdown e;
        e.kinetic = row_total(kin);
        e.maxwell = row_total(mag);
        e.potential = row_total(pot);
        e.total = e.kinetic + e.maxwell + e.potential;

        if (grad) {
            grad->psi = ScalarField(g);
            grad->a = OneFormField(g);
            for_each_node(g, [&](int i, int j) {
                const std::size_t k = g.index(i, j);
                const double w = weight_[k];
                const double at = a.theta[k], ap = a.phi[k];
                const double pr = psi[k].real(), pi = psi[k].imag();
                const double d = 1.0 - std::norm(psi[k]);
                // Dᵀ = -D for the antisymmetric stencil.
                const double g_re = -diff_theta(pt, i, j) - diff_phi(pp, i, j) - (qt[k] * at + qp[k] * ap)
                                    - w * d * pr * inv_eps2;
                const double g_im = -diff_theta(qt, i, j) - diff_phi(qp, i, j) + (pt[k] * at + pp[k] * ap)
                                    - w * d * pi * inv_eps2;
                const double g_at = (pt[k] * pi - qt[k] * pr) + diff_phi(c, i, j);
                const double g_ap = (pp[k] * pi - qp[k] * pr) - diff_theta(c, i, j);
                grad->psi[k] = Complex(g_re, g_im) / w;
                grad->a.theta[k] = g_at / w;
                grad->a.phi[k] = g_ap / w;
            });
        }
        return e;
    }

    double row_total(const std::vector<double>& v) const {
        return grid_sum(grid_, [&](int i, int j) { return v[grid_.index(i, j)]; });
    }

    PeriodicGrid grid_;
    GLParams params_;
    RealField sigma_;
    std::vector<MinkowskiNorm> local_;
    std::vector<double> weight_;
};

inline EnergyBreakdown gl_energy(const FinslerNorm& norm, const MeasureDensity& density, EuclideanCometric,
                                 const GLParams& params, const ScalarField& psi, const OneFormField& a) {
    require_same_grid(psi.grid(), a.grid(), "gl_energy");
    return GLFunctional(norm, density, params, psi.grid()).energy(psi, a);
}

inline GLGradient gl_gradient(const FinslerNorm& norm, const MeasureDensity& density, EuclideanCometric,
                              const GLParams& params, const ScalarField& psi, const OneFormField& a) {
    require_same_grid(psi.grid(), a.grid(), "gl_gradient");
    GLGradient g;
    GLFunctional(norm, density, params, psi.grid()).energy_and_gradient(psi, a, g);
    return g;
}

/// ∇_F u = L⁻¹(du) at every node; L⁻¹(0) = 0.
inline VectorField finsler_gradient_field(const FinslerNorm& norm, const RealField& u) {
    const PeriodicGrid& g = u.grid();
    VectorField out(g);
    for_each_node(g, [&](int i, int j) {
        const Vec2 du(diff_theta(u, i, j), diff_phi(u, i, j));
        const Vec2 y = du.norm() < kZeroCovector ? Vec2::Zero() : norm.at(g.point(i, j)).legendre_inverse(du);
        out.theta(i, j) = y[0];
        out.phi(i, j) = y[1];
    });
    return out;
}

/// Δ_F u = div_σ(∇_F u).
inline RealField finsler_laplacian(const FinslerNorm& norm, const MeasureDensity& density, const RealField& u) {
    return divergence(finsler_gradient_field(norm, u), density.on(u.grid()));
}

/// ½ Σ F*(du)² σ h_θ h_φ.
inline double dirichlet_energy(const FinslerNorm& norm, const MeasureDensity& density, const RealField& u) {
    const PeriodicGrid& g = u.grid();
    const RealField& sigma = density.on(g);
    return grid_sum(g, [&](int i, int j) {
               const Vec2 du(diff_theta(u, i, j), diff_phi(u, i, j));
               return norm.at(g.point(i, j)).half_dual_sq(du) * sigma(i, j);
           }) *
           g.cell_area();
}

struct DiamagneticReport {
    RealField residual;  ///< ‖D_Aψ‖_{F*} - F*(d|ψ|)
    RealField slack;     ///< local truncation-error bound δ_h
    double min_residual = 0.0;
    double max_slack = 0.0;
};

/// Pointwise diamagnetic residual. The slack δ_h bounds the error of the
/// fourth-order derivatives by their distance to the second-order ones, scaled
/// by the norm-equivalence constant c₂.
inline DiamagneticReport diamagnetic_residual(const FinslerNorm& norm, const ScalarField& psi, const OneFormField& a) {
    require_same_grid(psi.grid(), a.grid(), "diamagnetic_residual");
    const PeriodicGrid& g = psi.grid();
    RealField mod(g);
    for (std::size_t k = 0; k < g.size(); ++k) mod[k] = std::abs(psi[k]);
    const ComplexOneForm dpsi = covariant_derivative(psi, a);
    const double c2 = norm.equivalence_upper();

    DiamagneticReport rep{RealField(g), RealField(g), 0.0, 0.0};
    for_each_node(g, [&](int i, int j) {
        const MinkowskiNorm m = norm.at(g.point(i, j));
        const Complex xt = dpsi.theta(i, j), xp = dpsi.phi(i, j);
        const double fr = m.dual(Vec2(xt.real(), xp.real()));
        const double fi = m.dual(Vec2(xt.imag(), xp.imag()));
        const double cov = std::sqrt(fr * fr + fi * fi);
        const Vec2 dmod(diff_theta(mod, i, j), diff_phi(mod, i, j));
        rep.residual(i, j) = cov - m.dual(dmod);

        auto d2t = [&](const auto& f) { return (f(i + 1, j) - f(i - 1, j)) / (2.0 * g.h_theta()); };
        auto d2p = [&](const auto& f) { return (f(i, j + 1) - f(i, j - 1)) / (2.0 * g.h_phi()); };
        const double e_mod = std::hypot(dmod[0] - d2t(mod), dmod[1] - d2p(mod));
        const double e_psi = std::sqrt(std::norm(diff_theta(psi, i, j) - d2t(psi)) + std::norm(diff_phi(psi, i, j) - d2p(psi)));
        rep.slack(i, j) = c2 * (e_mod + e_psi);
    });
    rep.min_residual = *std::min_element(rep.residual.values().begin(), rep.residual.values().end());
    rep.max_slack = *std::max_element(rep.slack.values().begin(), rep.slack.values().end());
    return rep;
}

}  // namespace fgl
