#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "fgl/coefficient.hpp"
#include "fgl/error.hpp"
#include "fgl/torus.hpp"

namespace fgl {

enum class NormKind { quadratic, randers };

/// Minkowski norm on a single tangent plane:
///   F(y) = sqrt(a y_θ² + b y_φ²) + β·y
/// with β = 0 for the quadratic kind.
class MinkowskiNorm {
public:
    static constexpr int kNewtonMaxIters = 50;
    static constexpr double kNewtonTol = 1e-12;

    MinkowskiNorm() = default;
    MinkowskiNorm(double a, double b, Vec2 beta, NormKind kind) : a_(a), b_(b), beta_(beta), kind_(kind) {}

    double a() const { return a_; }
    double b() const { return b_; }
    const Vec2& beta() const { return beta_; }
    NormKind kind() const { return kind_; }

    double base_norm(const Vec2& y) const { return std::sqrt(a_ * y[0] * y[0] + b_ * y[1] * y[1]); }

    double value(const Vec2& y) const {
        if (kind_ == NormKind::quadratic) return base_norm(y);
        return base_norm(y) + beta_.dot(y);
    }

    /// ∂F/∂y; requires y ≠ 0.
    Vec2 gradient(const Vec2& y) const {
        const double alpha = base_norm(y);
        Vec2 qy(a_ * y[0], b_ * y[1]);
        Vec2 g = qy / alpha;
        if (kind_ == NormKind::randers) g += beta_;
        return g;
    }

    /// g_ij(y) = ½ ∂²(F²)/∂y^i∂y^j = F ∇²F + ∇F ∇Fᵀ; requires y ≠ 0.
    Mat2 fundamental_tensor(const Vec2& y) const {
        if (kind_ == NormKind::quadratic) return Mat2{{a_, 0.0}, {0.0, b_}};
        const double alpha = base_norm(y);
        const Vec2 qy(a_ * y[0], b_ * y[1]);
        Mat2 q{{a_, 0.0}, {0.0, b_}};
        const Mat2 hess_f = (q - qy * qy.transpose() / (alpha * alpha)) / alpha;
        const Vec2 grad_f = qy / alpha + beta_;
        return value(y) * hess_f + grad_f * grad_f.transpose();
    }

    /// L(y) = ∂_y(½F²) with L(0) = 0.
    Vec2 legendre(const Vec2& y) const {
        if (kind_ == NormKind::quadratic) return Vec2(a_ * y[0], b_ * y[1]);
        if (y.isZero(0.0)) return Vec2::Zero();
        return value(y) * gradient(y);
    }

    /// L⁻¹(ξ) with L⁻¹(0) = 0. Closed form for the quadratic kind; damped
    /// Newton for Randers (the map is 1-homogeneous, so the solve runs on ξ/|ξ|).
    Vec2 legendre_inverse(const Vec2& xi) const {
        if (kind_ == NormKind::quadratic) return Vec2(xi[0] / a_, xi[1] / b_);
        const double scale = xi.norm();
        if (scale == 0.0) return Vec2::Zero();
        return scale * newton_unit(xi / scale);
    }

    /// F*(ξ) = F(L⁻¹ξ).
    double dual(const Vec2& xi) const {
        if (kind_ == NormKind::quadratic) return std::sqrt(xi[0] * xi[0] / a_ + xi[1] * xi[1] / b_);
        return value(legendre_inverse(xi));
    }

    double half_dual_sq(const Vec2& xi) const {
        if (kind_ == NormKind::quadratic) return 0.5 * (xi[0] * xi[0] / a_ + xi[1] * xi[1] / b_);
        const double f = dual(xi);
        return 0.5 * f * f;
    }

private:
    Vec2 newton_unit(const Vec2& xi) const {
        constexpr double c_armijo = 1e-4;
        Vec2 y(xi[0] / a_, xi[1] / b_);
        Vec2 r = legendre(y) - xi;
        double rn = r.norm();
        int it = 0;
        for (; it < kNewtonMaxIters && rn > kNewtonTol; ++it) {
            const Vec2 dir = -fundamental_tensor(y).ldlt().solve(r);
            double t = 1.0;
            Vec2 y_try, r_try;
            for (;;) {
                y_try = y + t * dir;
                r_try = legendre(y_try) - xi;
                if (r_try.squaredNorm() <= (1.0 - 2.0 * c_armijo * t) * rn * rn || t < 1e-10) break;
                t *= 0.5;
            }
            y = y_try;
            r = r_try;
            rn = r.norm();
        }
        if (rn > kNewtonTol) throw IterativeFailure("Randers Legendre inverse did not converge", rn);
        // One undamped polish step; keep it only if it helps.
        const Vec2 y_pol = y - fundamental_tensor(y).ldlt().solve(r);
        if ((legendre(y_pol) - xi).norm() < rn) y = y_pol;
        return y;
    }

    double a_ = 1.0;
    double b_ = 1.0;
    Vec2 beta_ = Vec2::Zero();
    NormKind kind_ = NormKind::quadratic;
};

/// Point-dependent Finsler norm F(x, ·) on the torus, from closed-form
/// coefficient profiles a(x), b(x) and a constant Randers drift β.
class FinslerNorm {
public:
    static FinslerNorm quadratic(CoefficientProfile a, CoefficientProfile b) {
        return FinslerNorm(NormKind::quadratic, a, b, Vec2::Zero());
    }

    static FinslerNorm quadratic(double a, double b) {
        return quadratic(CoefficientProfile::constant(a), CoefficientProfile::constant(b));
    }

    static FinslerNorm randers(CoefficientProfile a, CoefficientProfile b, Vec2 beta) {
        return FinslerNorm(NormKind::randers, a, b, beta);
    }

    static FinslerNorm randers(double a, double b, Vec2 beta) {
        return randers(CoefficientProfile::constant(a), CoefficientProfile::constant(b), beta);
    }

    NormKind kind() const { return kind_; }
    const CoefficientProfile& a() const { return a_; }
    const CoefficientProfile& b() const { return b_; }
    const Vec2& beta() const { return beta_; }
    bool is_homogeneous() const { return a_.is_constant() && b_.is_constant(); }

    MinkowskiNorm at(const TorusPoint& x) const { return MinkowskiNorm(a_(x), b_(x), beta_, kind_); }

    /// Constants with c₁|ξ| ≤ F*(x, ξ) ≤ c₂|ξ| (Euclidean co-metric), found by
    /// an angular sweep at construction.
    double equivalence_lower() const { return c1_; }
    double equivalence_upper() const { return c2_; }

private:
    FinslerNorm(NormKind kind, CoefficientProfile a, CoefficientProfile b, Vec2 beta)
        : kind_(kind), a_(a), b_(b), beta_(beta) {
        if (!std::isfinite(beta[0]) || !std::isfinite(beta[1]))
            throw ConstructionError("Randers drift must be finite");
        if (kind == NormKind::randers) {
            // Sufficient for ‖β‖_{α*} < 1 at every point.
            const double beta_sq = beta[0] * beta[0] / a.min_value() + beta[1] * beta[1] / b.min_value();
            if (beta_sq >= 1.0) throw ConstructionError("Randers drift must satisfy ||beta|| < 1 in the base co-metric");
        } else if (!beta.isZero(0.0)) {
            throw ConstructionError("quadratic norm takes no drift");
        }
        sweep_equivalence();
    }

    void sweep_equivalence();

    NormKind kind_;
    CoefficientProfile a_;
    CoefficientProfile b_;
    Vec2 beta_;
    double c1_ = 0.0;
    double c2_ = 0.0;
};

// ---- point operations -------------------------------------------------------

inline double eval_norm(const FinslerNorm& norm, const TangentVector& y) {
    return norm.at(y.base).value(y.comp);
}

inline Mat2 fundamental_tensor(const FinslerNorm& norm, const TangentVector& y) {
    if (y.comp.isZero(0.0)) throw DomainError("fundamental tensor is undefined at y = 0");
    return norm.at(y.base).fundamental_tensor(y.comp);
}

inline CotangentVector legendre_forward(const FinslerNorm& norm, const TangentVector& y) {
    return CotangentVector(y.base, norm.at(y.base).legendre(y.comp));
}

inline TangentVector legendre_inverse(const FinslerNorm& norm, const CotangentVector& xi) {
    return TangentVector(xi.base, norm.at(xi.base).legendre_inverse(xi.comp));
}

inline double dual_norm(const FinslerNorm& norm, const CotangentVector& xi) {
    return norm.at(xi.base).dual(xi.comp);
}

/// ½F(y)² + ½F*(ξ)² − ξ(y); nonnegative, zero exactly on the Legendre graph.
inline double fenchel_gap(const FinslerNorm& norm, const TangentVector& y, const CotangentVector& xi) {
    const MinkowskiNorm m = norm.at(y.base);
    const double f = m.value(y.comp);
    const double fs = m.dual(xi.comp);
    return 0.5 * f * f + 0.5 * fs * fs - xi.comp.dot(y.comp);
}

/// Support-function evaluation sup{ξ(v) : F(v) ≤ 1} over `n_angles` equally
/// spaced directions. Independent of the Legendre path; used as a cross-check.
inline double dual_norm_angular_sup(const MinkowskiNorm& m, const Vec2& xi, int n_angles = 4096) {
    double best = 0.0;
    for (int k = 0; k < n_angles; ++k) {
        const double w = kTwoPi * k / n_angles;
        const Vec2 u(std::cos(w), std::sin(w));
        best = std::max(best, xi.dot(u) / m.value(u));
    }
    return best;
}

inline void FinslerNorm::sweep_equivalence() {
    std::vector<TorusPoint> pts;
    if (is_homogeneous()) {
        pts.emplace_back(0.0, 0.0);
    } else {
        constexpr int n = 16;
        for (int i = 0; i < n; ++i)
            for (int j = 0; j < n; ++j) pts.emplace_back(kTwoPi * i / n, kTwoPi * j / n);
    }
    double lo = std::numeric_limits<double>::infinity();
    double hi = 0.0;
    for (const TorusPoint& x : pts) {
        const MinkowskiNorm m = at(x);
        if (kind_ == NormKind::quadratic) {
            lo = std::min(lo, 1.0 / std::sqrt(std::max(m.a(), m.b())));
            hi = std::max(hi, 1.0 / std::sqrt(std::min(m.a(), m.b())));
            continue;
        }
        auto ratio = [&](double w) { return m.dual(Vec2(std::cos(w), std::sin(w))); };
        constexpr int n_ang = 256;
        int k_lo = 0, k_hi = 0;
        double v_lo = ratio(0.0), v_hi = v_lo;
        for (int k = 1; k < n_ang; ++k) {
            const double v = ratio(kTwoPi * k / n_ang);
            if (v < v_lo) v_lo = v, k_lo = k;
            if (v > v_hi) v_hi = v, k_hi = k;
        }
        // Golden-section refinement inside the bracketing cells.
        auto refine = [&](int k, double sign) {
            const double g = 0.5 * (std::sqrt(5.0) - 1.0);
            double l = kTwoPi * (k - 1) / n_ang, r = kTwoPi * (k + 1) / n_ang;
            double x1 = r - g * (r - l), x2 = l + g * (r - l);
            double f1 = sign * ratio(x1), f2 = sign * ratio(x2);
            for (int it = 0; it < 60; ++it) {
                if (f1 < f2) {
                    r = x2, x2 = x1, f2 = f1;
                    x1 = r - g * (r - l), f1 = sign * ratio(x1);
                } else {
                    l = x1, x1 = x2, f1 = f2;
                    x2 = l + g * (r - l), f2 = sign * ratio(x2);
                }
            }
            return sign * std::min(f1, f2);
        };
        lo = std::min({lo, v_lo, refine(k_lo, 1.0)});
        hi = std::max({hi, v_hi, refine(k_hi, -1.0)});
    }
    c1_ = lo;
    c2_ = hi;
}

}  // namespace fgl
