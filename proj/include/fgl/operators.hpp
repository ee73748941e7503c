#pragma once

#include <algorithm>
#include <cmath>
#include <optional>

#include "fgl/error.hpp"
#include "fgl/grid.hpp"
#include "fgl/numerics.hpp"
#include "fgl/spectral.hpp"

namespace fgl {

// Fourth-order central differences with periodic wraparound. The stencil is
// antisymmetric, so under the plain nodal sum D_kᵀ = -D_k.

template <class T>
T diff_theta(const GridField<T>& f, int i, int j) {
    const double h = f.grid().h_theta();
    return (8.0 * (f(i + 1, j) - f(i - 1, j)) - (f(i + 2, j) - f(i - 2, j))) / (12.0 * h);
}

template <class T>
T diff_phi(const GridField<T>& f, int i, int j) {
    const double h = f.grid().h_phi();
    return (8.0 * (f(i, j + 1) - f(i, j - 1)) - (f(i, j + 2) - f(i, j - 2))) / (12.0 * h);
}

template <class T>
GridField<T> apply_diff_theta(const GridField<T>& f) {
    GridField<T> out(f.grid());
    for_each_node(f.grid(), [&](int i, int j) { out(i, j) = diff_theta(f, i, j); });
    return out;
}

template <class T>
GridField<T> apply_diff_phi(const GridField<T>& f) {
    GridField<T> out(f.grid());
    for_each_node(f.grid(), [&](int i, int j) { out(i, j) = diff_phi(f, i, j); });
    return out;
}

/// du, componentwise.
template <class T>
OneForm<T> exterior_d(const GridField<T>& u) {
    return OneForm<T>(apply_diff_theta(u), apply_diff_phi(u));
}

inline OneFormField exterior_d(const GaugeFunction& chi) { return exterior_d(chi.values); }

/// D_Aψ = dψ - iAψ.
inline ComplexOneForm covariant_derivative(const ScalarField& psi, const OneFormField& a) {
    require_same_grid(psi.grid(), a.grid(), "covariant_derivative");
    ComplexOneForm out(psi.grid());
    const Complex I(0.0, 1.0);
    for_each_node(psi.grid(), [&](int i, int j) {
        const Complex p = psi(i, j);
        out.theta(i, j) = diff_theta(psi, i, j) - I * a.theta(i, j) * p;
        out.phi(i, j) = diff_phi(psi, i, j) - I * a.phi(i, j) * p;
    });
    return out;
}

/// Coefficient of dA = (∂_θ A_φ - ∂_φ A_θ) dθ∧dφ.
inline RealField curl(const OneFormField& a) {
    RealField out(a.grid());
    for_each_node(a.grid(), [&](int i, int j) { out(i, j) = diff_theta(a.phi, i, j) - diff_phi(a.theta, i, j); });
    return out;
}

/// div_σ X = (1/σ) Σ_k D_k(σ X^k). This is minus the adjoint of exterior_d in
/// the σ-weighted nodal inner product, so summation by parts is exact.
inline RealField divergence(const VectorField& x, const RealField& sigma) {
    require_same_grid(x.grid(), sigma.grid(), "divergence");
    const PeriodicGrid& g = x.grid();
    RealField st(g), sp(g);
    for (std::size_t k = 0; k < g.size(); ++k) {
        st[k] = sigma[k] * x.theta[k];
        sp[k] = sigma[k] * x.phi[k];
    }
    RealField out(g);
    for_each_node(g, [&](int i, int j) {
        out(i, j) = (diff_theta(st, i, j) + diff_phi(sp, i, j)) / sigma(i, j);
    });
    return out;
}

/// (e^{iχ}ψ, A + dχ).
inline std::pair<ScalarField, OneFormField> gauge_transform(const ScalarField& psi, const OneFormField& a,
                                                            const GaugeFunction& chi) {
    require_same_grid(psi.grid(), a.grid(), "gauge_transform");
    require_same_grid(psi.grid(), chi.values.grid(), "gauge_transform");
    ScalarField p(psi.grid());
    for (std::size_t k = 0; k < p.size(); ++k) p[k] = std::polar(1.0, chi.values[k]) * psi[k];
    const OneFormField dchi = exterior_d(chi);
    OneFormField out = a;
    out.theta += dchi.theta;
    out.phi += dchi.phi;
    return {std::move(p), std::move(out)};
}

inline double grid_mean(const RealField& f) {
    return grid_sum(f.grid(), [&](int i, int j) { return f(i, j); }) / static_cast<double>(f.size());
}

inline double max_abs(const RealField& f) {
    double m = 0.0;
    for (double v : f.values()) m = std::max(m, std::abs(v));
    return m;
}

struct CoulombDecomposition {
    OneFormField coulomb;     ///< A_C with div_σ A_C = 0
    GaugeFunction chi;        ///< mean-zero, A = A_C + dχ
    double harmonic_theta = 0.0;  ///< grid mean of A_θ (kept by the projection)
    double harmonic_phi = 0.0;
    double divergence_residual = 0.0;  ///< max |div_σ A_C|
    int cg_iterations = 0;             ///< 0 on the spectral path
};

struct CoulombOptions {
    double tolerance = 1e-11;  ///< on max |div_σ A_C|
    int max_cg_iterations = 1000;
};

/// Splits A = A_C + dχ with div_σ A_C = 0 and mean(χ) = 0. Constant σ uses a
/// spectral solve; otherwise preconditioned CG on  -Σ D_k(σ D_k χ) = -Σ D_k(σ A_k).
/// Constant 1-forms (the harmonic part) are left untouched. Holds FFTW plans,
/// so one projector should not be shared between threads.
class CoulombProjector {
public:
    CoulombProjector(const RealField& sigma, const CoulombOptions& opt = {})
        : sigma_(sigma), opt_(opt), poisson_(sigma.grid()) {
        const auto [s_min, s_max] = std::minmax_element(sigma.values().begin(), sigma.values().end());
        if (!(*s_min > 0.0)) throw ConstructionError("Coulomb projection needs a positive density");
        constant_ = (*s_max - *s_min) <= 1e-14 * *s_max;
        s_mean_ = grid_mean(sigma);
    }

    const PeriodicGrid& grid() const { return sigma_.grid(); }
    bool constant_density() const { return constant_; }

    /// `diagnostics = false` skips the residual check and harmonic means.
    CoulombDecomposition project(const OneFormField& a, bool diagnostics = true) {
        require_same_grid(a.grid(), sigma_.grid(), "coulomb_project");
        const PeriodicGrid& g = a.grid();
        const std::size_t n = g.size();
        const RealField& sigma = sigma_;
        CoulombDecomposition out;

        // b = -Σ D_k(σ A_k)
        RealField st(g), sp(g);
        for (std::size_t k = 0; k < n; ++k) {
            st[k] = sigma[k] * a.theta[k];
            sp[k] = sigma[k] * a.phi[k];
        }
        RealField b(g);
        for_each_node(g, [&](int i, int j) { b(i, j) = -(diff_theta(st, i, j) + diff_phi(sp, i, j)); });

        auto apply_k = [&](const RealField& chi) {
            RealField t(g), p(g);
            for_each_node(g, [&](int i, int j) {
                t(i, j) = sigma(i, j) * diff_theta(chi, i, j);
                p(i, j) = sigma(i, j) * diff_phi(chi, i, j);
            });
            RealField r(g);
            for_each_node(g, [&](int i, int j) { r(i, j) = -(diff_theta(t, i, j) + diff_phi(p, i, j)); });
            return r;
        };
        auto dot = [&](const RealField& x, const RealField& y) {
            return grid_sum(g, [&](int i, int j) { return x(i, j) * y(i, j); });
        };
        auto div_residual = [&](const RealField& r) {
            double m = 0.0;
            for (std::size_t k = 0; k < n; ++k) m = std::max(m, std::abs(r[k] / sigma[k]));
            return m;
        };
        // Tolerances are relative to the size of A so that gradients of any scale project cleanly.
        const double scale = std::max({1.0, max_abs(a.theta), max_abs(a.phi)});
        const double tol = opt_.tolerance * scale;

        RealField chi(g);
        if (constant_) {
            chi = poisson_.solve(b, s_mean_);
        } else {
            RealField r = b;
            RealField z = poisson_.solve(r, s_mean_);
            RealField p = z;
            double rz = dot(r, z);
            int it = 0;
            while (div_residual(r) > tol) {
                if (it == opt_.max_cg_iterations)
                    throw IterativeFailure("Coulomb projection CG stalled", div_residual(r));
                const RealField kp = apply_k(p);
                const double alpha = rz / dot(p, kp);
                for (std::size_t k = 0; k < n; ++k) {
                    chi[k] += alpha * p[k];
                    r[k] -= alpha * kp[k];
                }
                z = poisson_.solve(r, s_mean_);
                const double rz_new = dot(r, z);
                const double beta = rz_new / rz;
                rz = rz_new;
                for (std::size_t k = 0; k < n; ++k) p[k] = z[k] + beta * p[k];
                ++it;
            }
            out.cg_iterations = it;
        }

        // Kernel components are zero by construction; remove rounding drift in the mean.
        const double m = grid_mean(chi);
        for (double& v : chi.values()) v -= m;

        const OneFormField dchi = exterior_d(chi);
        out.coulomb = OneFormField(g);
        for (std::size_t k = 0; k < n; ++k) {
            out.coulomb.theta[k] = a.theta[k] - dchi.theta[k];
            out.coulomb.phi[k] = a.phi[k] - dchi.phi[k];
        }
        out.chi = GaugeFunction{std::move(chi), true};
        if (!diagnostics) return out;
        out.harmonic_theta = grid_mean(a.theta);
        out.harmonic_phi = grid_mean(a.phi);
        out.divergence_residual = max_abs(divergence(out.coulomb, sigma));
        if (out.divergence_residual > 10.0 * tol && constant_)
            throw IterativeFailure("spectral Coulomb projection inaccurate", out.divergence_residual);
        return out;
    }

private:
    RealField sigma_;
    CoulombOptions opt_;
    SpectralPoisson poisson_;
    bool constant_ = true;
    double s_mean_ = 1.0;
};

inline CoulombDecomposition coulomb_project(const OneFormField& a, const RealField& sigma,
                                            const CoulombOptions& opt = {}) {
    require_same_grid(a.grid(), sigma.grid(), "coulomb_project");
    CoulombProjector proj(sigma, opt);
    return proj.project(a);
}

}  // namespace fgl
