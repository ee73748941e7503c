#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "fgl/error.hpp"
#include "fgl/torus.hpp"

namespace fgl {

using Complex = std::complex<double>;

/// Uniform node grid on [0, 2π)² with periodic wraparound. Node (i, j) sits at
/// (θ_i, φ_j) = (i h_θ, j h_φ); storage is row-major in i (φ index fastest).
class PeriodicGrid {
public:
    PeriodicGrid() = default;

    PeriodicGrid(int n_theta, int n_phi) : n_theta_(n_theta), n_phi_(n_phi) {
        if (n_theta < 8 || n_phi < 8) throw ConstructionError("grid needs at least 8 nodes per direction");
        if (n_theta % 2 != 0 || n_phi % 2 != 0) throw ConstructionError("grid node counts must be even");
    }

    int n_theta() const { return n_theta_; }
    int n_phi() const { return n_phi_; }
    std::size_t size() const { return static_cast<std::size_t>(n_theta_) * n_phi_; }
    double h_theta() const { return kTwoPi / n_theta_; }
    double h_phi() const { return kTwoPi / n_phi_; }
    double cell_area() const { return h_theta() * h_phi(); }

    std::size_t index(int i, int j) const {
        return static_cast<std::size_t>(wrap(i, n_theta_)) * n_phi_ + wrap(j, n_phi_);
    }

    double theta(int i) const { return i * h_theta(); }
    double phi(int j) const { return j * h_phi(); }
    TorusPoint point(int i, int j) const { return TorusPoint(theta(i), phi(j)); }

    bool operator==(const PeriodicGrid&) const = default;

    std::string describe() const { return std::to_string(n_theta_) + "x" + std::to_string(n_phi_); }

private:
    static int wrap(int i, int n) {
        if (i >= 0 && i < n) return i;
        if (i >= n && i < 2 * n) return i - n;
        if (i < 0 && i >= -n) return i + n;
        i %= n;
        return i < 0 ? i + n : i;
    }

    int n_theta_ = 8;
    int n_phi_ = 8;
};

inline void require_same_grid(const PeriodicGrid& a, const PeriodicGrid& b, const char* where) {
    if (!(a == b)) throw GridMismatch(std::string(where) + ": grid " + a.describe() + " vs " + b.describe());
}

/// Nodal values of type T on a periodic grid.
template <class T>
class GridField {
public:
    GridField() = default;
    explicit GridField(const PeriodicGrid& g, T fill = T{}) : grid_(g), data_(g.size(), fill) {}

    template <class Fn>
    static GridField sample(const PeriodicGrid& g, Fn&& fn) {
        GridField f(g);
        for (int i = 0; i < g.n_theta(); ++i)
            for (int j = 0; j < g.n_phi(); ++j) f.data_[g.index(i, j)] = fn(g.theta(i), g.phi(j));
        return f;
    }

    const PeriodicGrid& grid() const { return grid_; }
    std::size_t size() const { return data_.size(); }

    T& operator[](std::size_t k) { return data_[k]; }
    const T& operator[](std::size_t k) const { return data_[k]; }
    T& operator()(int i, int j) { return data_[grid_.index(i, j)]; }
    const T& operator()(int i, int j) const { return data_[grid_.index(i, j)]; }

    std::span<T> values() { return data_; }
    std::span<const T> values() const { return data_; }

    bool all_finite() const {
        for (const T& v : data_)
            if (!finite(v)) return false;
        return true;
    }

    GridField& operator+=(const GridField& o) {
        require_same_grid(grid_, o.grid_, "field +=");
        for (std::size_t k = 0; k < data_.size(); ++k) data_[k] += o.data_[k];
        return *this;
    }

private:
    static bool finite(double v) { return std::isfinite(v); }
    static bool finite(const Complex& v) { return std::isfinite(v.real()) && std::isfinite(v.imag()); }

    PeriodicGrid grid_;
    std::vector<T> data_;
};

using RealField = GridField<double>;
using ComplexField = GridField<Complex>;

/// Order parameter ψ.
using ScalarField = ComplexField;

/// Nodal 1-form with components along dθ and dφ.
template <class T>
struct OneForm {
    GridField<T> theta;
    GridField<T> phi;

    OneForm() = default;
    explicit OneForm(const PeriodicGrid& g) : theta(g), phi(g) {}
    OneForm(GridField<T> t, GridField<T> p) : theta(std::move(t)), phi(std::move(p)) {
        require_same_grid(theta.grid(), phi.grid(), "OneForm");
    }

    const PeriodicGrid& grid() const { return theta.grid(); }
    bool all_finite() const { return theta.all_finite() && phi.all_finite(); }
};

/// Real gauge potential A.
using OneFormField = OneForm<double>;
using ComplexOneForm = OneForm<Complex>;

/// Nodal vector field (components along ∂_θ, ∂_φ).
using VectorField = OneForm<double>;

/// Real gauge function χ.
struct GaugeFunction {
    RealField values;
    bool mean_zero = false;
};

}  // namespace fgl
