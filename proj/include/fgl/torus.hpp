#pragma once

#include <cmath>
#include <numbers>

#include <Eigen/Core>

namespace fgl {

inline constexpr double kPi = std::numbers::pi;
inline constexpr double kTwoPi = 2.0 * std::numbers::pi;

/// Reduce an angle to [0, 2π).
inline double wrap_angle(double t) {
    double r = std::fmod(t, kTwoPi);
    if (r < 0.0) r += kTwoPi;
    if (r >= kTwoPi) r = 0.0;
    return r;
}

/// Shortest signed difference b - a on the circle, in [-π, π).
inline double circle_delta(double a, double b) {
    double d = std::fmod(b - a + kPi, kTwoPi);
    if (d < 0.0) d += kTwoPi;
    return d - kPi;
}

/// A point (θ, φ) of the flat torus, stored modulo 2π.
struct TorusPoint {
    double theta = 0.0;
    double phi = 0.0;

    TorusPoint() = default;
    TorusPoint(double t, double p) : theta(wrap_angle(t)), phi(wrap_angle(p)) {}
};

inline double torus_distance(const TorusPoint& a, const TorusPoint& b) {
    return std::hypot(circle_delta(a.theta, b.theta), circle_delta(a.phi, b.phi));
}

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// y = y_θ ∂_θ + y_φ ∂_φ at a base point.
struct TangentVector {
    TorusPoint base;
    Vec2 comp = Vec2::Zero();

    TangentVector() = default;
    TangentVector(TorusPoint x, double y_theta, double y_phi) : base(x), comp(y_theta, y_phi) {}
    TangentVector(TorusPoint x, const Vec2& y) : base(x), comp(y) {}
};

/// ξ = ξ_θ dθ + ξ_φ dφ at a base point.
struct CotangentVector {
    TorusPoint base;
    Vec2 comp = Vec2::Zero();

    CotangentVector() = default;
    CotangentVector(TorusPoint x, double xi_theta, double xi_phi) : base(x), comp(xi_theta, xi_phi) {}
    CotangentVector(TorusPoint x, const Vec2& xi) : base(x), comp(xi) {}
};

/// Natural pairing ξ(y). Base points are assumed to agree.
inline double pairing(const CotangentVector& xi, const TangentVector& y) { return xi.comp.dot(y.comp); }

}  // namespace fgl
