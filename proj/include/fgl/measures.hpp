#pragma once

#include <cmath>
#include <memory>
#include <mutex>
#include <map>
#include <utility>
#include <string>

#include "fgl/error.hpp"
#include "fgl/finsler_norm.hpp"
#include "fgl/grid.hpp"
#include "fgl/numerics.hpp"

namespace fgl {

enum class MeasureKind { busemann_hausdorff, holmes_thompson };

inline const char* measure_name(MeasureKind k) {
    return k == MeasureKind::busemann_hausdorff ? "busemann-hausdorff" : "holmes-thompson";
}

inline MeasureKind parse_measure_kind(const std::string& s) {
    if (s == "busemann-hausdorff") return MeasureKind::busemann_hausdorff;
    if (s == "holmes-thompson") return MeasureKind::holmes_thompson;
    throw ConstructionError("unknown measure kind '" + s + "'");
}

inline constexpr int kDefaultBallAngles = 2048;

/// Area of {y : F(y) < 1} (or {ξ : F*(ξ) < 1} when `dual`), from the polar
/// formula ½∫ r(ω)² dω with r(ω) = 1/F(cos ω, sin ω), trapezoid rule.
inline double unit_ball_volume(const MinkowskiNorm& m, bool dual, int n_angles = kDefaultBallAngles) {
    CompensatedSum s;
    for (int k = 0; k < n_angles; ++k) {
        const double w = kTwoPi * k / n_angles;
        const Vec2 u(std::cos(w), std::sin(w));
        const double f = dual ? m.dual(u) : m.value(u);
        s.add(1.0 / (f * f));
    }
    return 0.5 * s.value() * (kTwoPi / n_angles);
}

inline double unit_ball_volume(const FinslerNorm& norm, const TorusPoint& x, bool dual,
                               int n_angles = kDefaultBallAngles) {
    return unit_ball_volume(norm.at(x), dual, n_angles);
}

/// σ_BH = vol(B²)/vol(B_F(x)).
inline double bh_density(const FinslerNorm& norm, const TorusPoint& x) {
    return kPi / unit_ball_volume(norm, x, false);
}

/// σ_HT = vol(B*_F(x))/vol(B²).
inline double ht_density(const FinslerNorm& norm, const TorusPoint& x) {
    return unit_ball_volume(norm, x, true) / kPi;
}

/// σ(x) for one canonical measure of a norm, with a per-grid nodal cache.
class MeasureDensity {
public:
    MeasureDensity(FinslerNorm norm, MeasureKind kind) : norm_(std::move(norm)), kind_(kind) {}

    MeasureKind kind() const { return kind_; }
    const FinslerNorm& norm() const { return norm_; }

    double operator()(const TorusPoint& x) const {
        return kind_ == MeasureKind::busemann_hausdorff ? bh_density(norm_, x) : ht_density(norm_, x);
    }

    /// Nodal σ on `g`; computed on first use and then read-only.
    const RealField& on(const PeriodicGrid& g) const {
        std::lock_guard lock(cache_->mutex);
        const auto key = std::make_pair(g.n_theta(), g.n_phi());
        auto it = cache_->fields.find(key);
        if (it == cache_->fields.end()) {
            RealField f(g);
            if (norm_.is_homogeneous()) {
                const double s = (*this)(TorusPoint{});
                for (double& v : f.values()) v = s;
            } else {
                for_each_node(g, [&](int i, int j) { f(i, j) = (*this)(g.point(i, j)); });
            }
            it = cache_->fields.emplace(key, std::move(f)).first;
        }
        return it->second;
    }

private:
    struct Cache {
        std::mutex mutex;
        std::map<std::pair<int, int>, RealField> fields;  // node references stay valid
    };

    FinslerNorm norm_;
    MeasureKind kind_;
    std::shared_ptr<Cache> cache_ = std::make_shared<Cache>();
};

/// Σ f(x_i) σ(x_i) h_θ h_φ.
inline double integrate(const RealField& sigma, const RealField& f) {
    require_same_grid(sigma.grid(), f.grid(), "integrate");
    const PeriodicGrid& g = f.grid();
    return grid_sum(g, [&](int i, int j) { return f(i, j) * sigma(i, j); }) * g.cell_area();
}

inline double integrate(const MeasureDensity& density, const RealField& f) {
    return integrate(density.on(f.grid()), f);
}

}  // namespace fgl
