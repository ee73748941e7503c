#pragma once

#include <cmath>
#include <cstdio>
#include <string>

#include "fgl/error.hpp"
#include "fgl/torus.hpp"

namespace fgl {

/// Smooth positive coefficient function on the torus, given in closed form so
/// that it can be sampled exactly at any point.
///
///   constant            c0
///   cos_theta           c0 + amp cos θ
///   cos_phi             c0 + amp cos φ
///   cos_theta_cos_phi   c0 + amp cos θ cos φ
class CoefficientProfile {
public:
    enum class Shape { constant, cos_theta, cos_phi, cos_theta_cos_phi };

    CoefficientProfile() = default;

    static CoefficientProfile constant(double c0) { return CoefficientProfile(Shape::constant, c0, 0.0); }
    static CoefficientProfile make(Shape shape, double c0, double amp) { return CoefficientProfile(shape, c0, amp); }

    double operator()(const TorusPoint& x) const {
        switch (shape_) {
            case Shape::constant: return c0_;
            case Shape::cos_theta: return c0_ + amp_ * std::cos(x.theta);
            case Shape::cos_phi: return c0_ + amp_ * std::cos(x.phi);
            case Shape::cos_theta_cos_phi: return c0_ + amp_ * std::cos(x.theta) * std::cos(x.phi);
        }
        return c0_;
    }

    Shape shape() const { return shape_; }
    double base() const { return c0_; }
    double amplitude() const { return amp_; }
    bool is_constant() const { return shape_ == Shape::constant || amp_ == 0.0; }
    double min_value() const { return c0_ - std::abs(amp_); }
    double max_value() const { return c0_ + std::abs(amp_); }

    /// Text form used by the config file: `2` or `cos_theta(2, 0.5)`.
    std::string to_string() const {
        char buf[96];
        if (shape_ == Shape::constant) {
            std::snprintf(buf, sizeof buf, "%.17g", c0_);
        } else {
            std::snprintf(buf, sizeof buf, "%s(%.17g, %.17g)", shape_name(shape_), c0_, amp_);
        }
        return buf;
    }

    bool operator==(const CoefficientProfile&) const = default;

    static const char* shape_name(Shape s) {
        switch (s) {
            case Shape::constant: return "constant";
            case Shape::cos_theta: return "cos_theta";
            case Shape::cos_phi: return "cos_phi";
            case Shape::cos_theta_cos_phi: return "cos_theta_cos_phi";
        }
        return "?";
    }

private:
    CoefficientProfile(Shape s, double c0, double amp) : shape_(s), c0_(c0), amp_(amp) {
        if (!std::isfinite(c0) || !std::isfinite(amp))
            throw ConstructionError("coefficient profile: non-finite parameter");
        if (min_value() <= 0.0)
            throw ConstructionError("coefficient profile " + to_string() + " is not positive everywhere");
    }

    Shape shape_ = Shape::constant;
    double c0_ = 1.0;
    double amp_ = 0.0;
};

}  // namespace fgl
