#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdlib>
#include <deque>
#include <utility>
#include <vector>

#include "fgl/error.hpp"
#include "fgl/finsler_norm.hpp"
#include "fgl/grid.hpp"
#include "fgl/operators.hpp"

namespace fgl {

struct Vortex {
    TorusPoint position;
    int degree = 0;
};

struct VortexSet {
    std::vector<Vortex> vortices;

    std::size_t size() const { return vortices.size(); }
    bool empty() const { return vortices.empty(); }
    int total_degree() const {
        int s = 0;
        for (const Vortex& v : vortices) s += v.degree;
        return s;
    }
};

inline constexpr double kZeroModulus = 1e-12;

namespace detail {

/// Nodal values used for phase differences. A node where ψ vanishes takes
/// the bilinear interpolant at (i + ¼, j + ¼) of the plaquette it anchors, so
/// every plaquette sees the same substitute and circulations still telescope.
inline ComplexField phase_samples(const ScalarField& psi, int* substituted = nullptr) {
    ComplexField s = psi;
    int count = 0;
    const PeriodicGrid& g = psi.grid();
    for (int i = 0; i < g.n_theta(); ++i) {
        for (int j = 0; j < g.n_phi(); ++j) {
            if (std::abs(psi(i, j)) >= kZeroModulus) continue;
            constexpr double d = 0.25;
            s(i, j) = d * (1.0 - d) * (psi(i + 1, j) + psi(i, j + 1)) + d * d * psi(i + 1, j + 1);
            ++count;
        }
    }
    if (substituted) *substituted = count;
    return s;
}

inline double edge_phase(const Complex& from, const Complex& to) { return std::arg(to * std::conj(from)); }

}  // namespace detail

/// Winding of the phase around every plaquette [i, i+1]×[j, j+1], indexed by
/// its lower-left node. Exact integers; they sum to zero on the torus.
inline GridField<int> plaquette_degrees(const ScalarField& psi) {
    const PeriodicGrid& g = psi.grid();
    const ComplexField s = detail::phase_samples(psi);
    RealField et(g), ep(g);
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j) {
            et(i, j) = detail::edge_phase(s(i, j), s(i + 1, j));
            ep(i, j) = detail::edge_phase(s(i, j), s(i, j + 1));
        }
    GridField<int> deg(g, 0);
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j) {
            const double circ = et(i, j) + ep(i + 1, j) - et(i, j + 1) - ep(i, j);
            deg(i, j) = static_cast<int>(std::lround(circ / kTwoPi));
        }
    return deg;
}

/// Nonzero plaquettes grouped by 8-connectivity; each cluster becomes one
/// vortex at the |degree|-weighted centroid of its plaquette centres.
/// Clusters whose degrees cancel are dropped.
inline VortexSet detect_vortices(const ScalarField& psi) {
    const PeriodicGrid& g = psi.grid();
    const GridField<int> deg = plaquette_degrees(psi);
    std::vector<char> seen(g.size(), 0);
    VortexSet out;
    for (int i0 = 0; i0 < g.n_theta(); ++i0) {
        for (int j0 = 0; j0 < g.n_phi(); ++j0) {
            if (deg(i0, j0) == 0 || seen[g.index(i0, j0)]) continue;
            const double ct0 = (i0 + 0.5) * g.h_theta(), cp0 = (j0 + 0.5) * g.h_phi();
            double wsum = 0.0, st = 0.0, sp = 0.0;
            int total = 0;
            std::deque<std::pair<int, int>> queue{{i0, j0}};
            seen[g.index(i0, j0)] = 1;
            while (!queue.empty()) {
                const auto [i, j] = queue.front();
                queue.pop_front();
                const int d = deg(i, j);
                total += d;
                const double w = std::abs(d);
                wsum += w;
                st += w * circle_delta(ct0, (i + 0.5) * g.h_theta());
                sp += w * circle_delta(cp0, (j + 0.5) * g.h_phi());
                for (int di = -1; di <= 1; ++di)
                    for (int dj = -1; dj <= 1; ++dj) {
                        const std::size_t k = g.index(i + di, j + dj);
                        if (seen[k] || deg[k] == 0) continue;
                        seen[k] = 1;
                        queue.emplace_back(i + di, j + dj);
                    }
            }
            if (total != 0) out.vortices.push_back({TorusPoint(ct0 + st / wsum, cp0 + sp / wsum), total});
        }
    }
    return out;
}

/// Phase windings (m, n) along a θ-cycle and a φ-cycle. Cycles through the
/// origin are tried first; shifted cycles are used when ψ vanishes on one.
inline std::pair<int, int> cycle_windings(const ScalarField& psi) {
    const PeriodicGrid& g = psi.grid();
    auto along = [&](bool theta_cycle) {
        const int n_cycles = theta_cycle ? g.n_phi() : g.n_theta();
        const int len = theta_cycle ? g.n_theta() : g.n_phi();
        for (int c = 0; c < n_cycles; ++c) {
            auto at = [&](int t) { return theta_cycle ? psi(t, c) : psi(c, t); };
            bool ok = true;
            double sum = 0.0;
            for (int t = 0; t < len && ok; ++t) {
                if (std::abs(at(t)) < kZeroModulus) ok = false;
                sum += detail::edge_phase(at(t), at(t + 1));
            }
            if (ok) return static_cast<int>(std::lround(sum / kTwoPi));
        }
        throw DomainError("cycle_windings: psi vanishes on every sampling cycle");
    };
    return {along(true), along(false)};
}

struct JacobianField {
    RealField density;        ///< J = ½ curl⟨iu, D_A u⟩
    std::vector<char> masked;  ///< nodes where the 1-form was not evaluated
};

/// Vorticity 2-form ½ d⟨iu, D_A u⟩ with u = ψ/|ψ|, where ⟨a, b⟩ = Re(ā b).
/// The 1-form ⟨iu, D_A u⟩ = Im(ū du) - A is set to zero on the core mask
/// (nodes within `core_radius` of a detected vortex, and zeros of ψ); the
/// curl is taken everywhere, so integrals over regions enclosing a core
/// still see the full circulation. core_radius ≤ 0 selects 3h.
inline JacobianField jacobian_field(const ScalarField& psi, const OneFormField& a, double core_radius = -1.0) {
    require_same_grid(psi.grid(), a.grid(), "jacobian_field");
    const PeriodicGrid& g = psi.grid();
    if (core_radius <= 0.0) core_radius = 3.0 * std::max(g.h_theta(), g.h_phi());

    JacobianField out{RealField(g), std::vector<char>(g.size(), 0)};
    const VortexSet cores = detect_vortices(psi);
    ComplexField u(g);
    for (int i = 0; i < g.n_theta(); ++i)
        for (int j = 0; j < g.n_phi(); ++j) {
            const std::size_t k = g.index(i, j);
            const double r = std::abs(psi[k]);
            u[k] = r < kZeroModulus ? Complex(1.0, 0.0) : psi[k] / r;
            bool m = r < kZeroModulus;
            for (const Vortex& v : cores.vortices)
                if (torus_distance(g.point(i, j), v.position) <= core_radius) m = true;
            out.masked[k] = m;
        }
    OneFormField j1(g);
    for_each_node(g, [&](int i, int j) {
        const std::size_t k = g.index(i, j);
        if (out.masked[k]) return;
        const Complex ub = std::conj(u[k]);
        j1.theta[k] = (ub * diff_theta(u, i, j)).imag() - a.theta[k];
        j1.phi[k] = (ub * diff_phi(u, i, j)).imag() - a.phi[k];
    });
    const RealField c = curl(j1);
    for (std::size_t k = 0; k < g.size(); ++k) out.density[k] = 0.5 * c[k];
    return out;
}

/// Γ-limit energy of point vortices in two dimensions: π Σ |d_i|.
inline double gamma_limit_energy(const FinslerNorm& /*norm*/, const VortexSet& vortices) {
    double s = 0.0;
    for (const Vortex& v : vortices.vortices) s += std::abs(v.degree);
    return kPi * s;
}

/// Oriented polyline on the torus. Vertices are stored unwrapped (in the
/// universal cover) so that segments may cross the seams.
class PolylineCurrent {
public:
    PolylineCurrent() = default;

    /// Consecutive duplicate vertices are dropped. `closed` requires the last
    /// vertex to coincide with the first modulo the period lattice.
    PolylineCurrent(std::vector<Vec2> vertices, bool closed, int multiplicity = 1, int orientation = 1)
        : multiplicity_(multiplicity), orientation_(orientation >= 0 ? 1 : -1), closed_(closed) {
        for (const Vec2& v : vertices) {
            if (!std::isfinite(v[0]) || !std::isfinite(v[1])) throw ConstructionError("polyline vertex not finite");
            if (vertices_.empty() || (v - vertices_.back()).norm() > 0.0) vertices_.push_back(v);
        }
        if (closed_ && vertices_.size() >= 2) {
            const Vec2 d = vertices_.back() - vertices_.front();
            auto on_lattice = [](double x) { return std::abs(x - kTwoPi * std::round(x / kTwoPi)) < 1e-9; };
            if (!on_lattice(d[0]) || !on_lattice(d[1]))
                throw ConstructionError("closed polyline must end where it starts (mod 2pi)");
        }
    }

    const std::vector<Vec2>& vertices() const { return vertices_; }
    int multiplicity() const { return multiplicity_; }
    int orientation() const { return orientation_; }
    bool closed() const { return closed_; }

    PolylineCurrent reversed() const {
        std::vector<Vec2> v(vertices_.rbegin(), vertices_.rend());
        return PolylineCurrent(std::move(v), closed_, multiplicity_, orientation_);
    }

private:
    std::vector<Vec2> vertices_;
    int multiplicity_ = 1;
    int orientation_ = 1;
    bool closed_ = false;
};

/// |m| Σ_segments ∫₀¹ F(x(t), ẋ(t)) dt with 5-point Gauss–Legendre per
/// segment. Direction follows orientation·sign(m); Randers norms see it.
inline double finsler_length(const FinslerNorm& norm, const PolylineCurrent& curve) {
    if (curve.vertices().size() < 2) throw ConstructionError("polyline needs at least two distinct vertices");
    static constexpr std::array<double, 5> nodes{0.0, -0.5384693101056831, 0.5384693101056831,
                                                 -0.9061798459386640, 0.9061798459386640};
    static constexpr std::array<double, 5> weights{0.5688888888888889, 0.4786286704993665, 0.4786286704993665,
                                                   0.2369268850561891, 0.2369268850561891};
    if (curve.multiplicity() == 0) return 0.0;
    const double dir = curve.orientation() * (curve.multiplicity() > 0 ? 1.0 : -1.0);
    const auto& v = curve.vertices();
    double total = 0.0;
    for (std::size_t s = 0; s + 1 < v.size(); ++s) {
        const Vec2 delta = v[s + 1] - v[s];
        if (delta.norm() == 0.0) continue;
        double seg = 0.0;
        for (int q = 0; q < 5; ++q) {
            const double t = 0.5 * (nodes[q] + 1.0);
            const Vec2 x = v[s] + t * delta;
            seg += 0.5 * weights[q] * norm.at(TorusPoint(x[0], x[1])).value(dir * delta);
        }
        total += seg;
    }
    return std::abs(curve.multiplicity()) * total;
}

}  // namespace fgl
