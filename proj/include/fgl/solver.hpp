#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "fgl/energy.hpp"
#include "fgl/error.hpp"
#include "fgl/finsler_norm.hpp"
#include "fgl/grid.hpp"
#include "fgl/measures.hpp"
#include "fgl/operators.hpp"
#include "fgl/vortex.hpp"

namespace fgl {

// ---- initial configurations --------------------------------------------------

enum class SectorKind { theta_winding, phi_winding, vortex_pair };

inline const char* sector_name(SectorKind k) {
    switch (k) {
        case SectorKind::theta_winding: return "theta_winding";
        case SectorKind::phi_winding: return "phi_winding";
        case SectorKind::vortex_pair: return "vortex_pair";
    }
    return "?";
}

inline SectorKind parse_sector_kind(const std::string& s) {
    if (s == "theta_winding") return SectorKind::theta_winding;
    if (s == "phi_winding") return SectorKind::phi_winding;
    if (s == "vortex_pair") return SectorKind::vortex_pair;
    throw ConstructionError("unknown sector '" + s + "'");
}

struct Sector {
    SectorKind kind = SectorKind::theta_winding;
    int winding = 1;            ///< m for theta_winding, n for phi_winding
    double separation = kPi;    ///< θ-distance between the two cores of vortex_pair
    TorusPoint center{kPi, kPi};  ///< midpoint of the pair
};

struct InitialState {
    ScalarField psi;
    OneFormField a;
    std::vector<TorusPoint> cores;  ///< vortex_pair: +1 core first, then -1
};

/// Portable uniform draw in [-1, 1) from a 64-bit Mersenne twister.
class NoiseSource {
public:
    explicit NoiseSource(std::uint64_t seed) : state_(seed) {}
    double next() { return static_cast<double>(state_() >> 11) * 0x1.0p-52 - 1.0; }

private:
    std::mt19937_64 state_;
};

namespace detail {

/// Smooth monotone step: 1 for r ≤ r0, 0 for r ≥ r1.
inline double smooth_cutoff(double r, double r0, double r1) {
    if (r <= r0) return 1.0;
    if (r >= r1) return 0.0;
    const double t = (r - r0) / (r1 - r0);
    auto f = [](double x) { return x > 0.0 ? std::exp(-1.0 / x) : 0.0; };
    return f(1.0 - t) / (f(1.0 - t) + f(t));
}

}  // namespace detail

/// Initial (ψ, A) in a topological sector, plus a seeded perturbation of ψ.
///
/// vortex_pair: ψ = ρ e^{iηϑ} with ϑ = arg((z - z₊) conj(z - z₋)) in local
/// coordinates about the pair centre and η a smooth cutoff that equals 1 near
/// the branch cut between the cores and vanishes before the cell boundary, so
/// ψ is periodic with degrees +1 at z₊ and -1 at z₋. ρ = tanh(r₊/√2ε) tanh(r₋/√2ε).
inline InitialState init_winding(const PeriodicGrid& grid, const Sector& sector, double epsilon, double noise,
                                 std::uint64_t seed) {
    if (!(epsilon > 0.0)) throw ConstructionError("init_winding: epsilon must be > 0");
    if (!(noise >= 0.0) || !std::isfinite(noise)) throw ConstructionError("init_winding: noise must be >= 0");
    InitialState st{ScalarField(grid), OneFormField(grid), {}};
    const Complex I(0.0, 1.0);

    switch (sector.kind) {
        case SectorKind::theta_winding:
            st.psi = ScalarField::sample(grid, [&](double t, double) { return std::exp(I * (sector.winding * t)); });
            break;
        case SectorKind::phi_winding:
            st.psi = ScalarField::sample(grid, [&](double, double p) { return std::exp(I * (sector.winding * p)); });
            break;
        case SectorKind::vortex_pair: {
            const double s = sector.separation;
            if (!(s > 0.0) || s > 2.0 * kPi - 1.0)
                throw ConstructionError("vortex_pair separation must lie in (0, 2pi - 1)");
            const double half = 0.5 * s;
            const double gap = kPi - half;
            const TorusPoint zp(sector.center.theta - half, sector.center.phi);
            const TorusPoint zm(sector.center.theta + half, sector.center.phi);
            st.cores = {zp, zm};
            const double scale = std::sqrt(2.0) * epsilon;
            st.psi = ScalarField::sample(grid, [&](double t, double p) {
                const double x = circle_delta(sector.center.theta, t);
                const double y = circle_delta(sector.center.phi, p);
                const Complex w = Complex(x + half, y) * std::conj(Complex(x - half, y));
                const double eta = detail::smooth_cutoff(std::abs(x), half + 0.25 * gap, kPi - 0.25 * gap) *
                                   detail::smooth_cutoff(std::abs(y), 0.25 * kPi, 0.75 * kPi);
                const double phase = std::abs(w) > 0.0 ? eta * std::arg(w) : 0.0;
                const double rho = std::tanh(torus_distance(TorusPoint(t, p), zp) / scale) *
                                   std::tanh(torus_distance(TorusPoint(t, p), zm) / scale);
                return rho * std::exp(I * phase);
            });
            break;
        }
    }
    if (noise > 0.0) {
        NoiseSource rng(seed);
        for (std::size_t k = 0; k < st.psi.size(); ++k) {
            const double re = rng.next();
            const double im = rng.next();
            st.psi[k] += noise * Complex(re, im);
        }
    }
    return st;
}

/// (2r+1)×(2r+1) node patches around the nodes nearest to each core.
inline std::vector<char> core_pin_mask(const PeriodicGrid& g, const std::vector<TorusPoint>& cores, int r = 1) {
    std::vector<char> mask(g.size(), 0);
    for (const TorusPoint& c : cores) {
        const int ic = static_cast<int>(std::lround(c.theta / g.h_theta()));
        const int jc = static_cast<int>(std::lround(c.phi / g.h_phi()));
        for (int di = -r; di <= r; ++di)
            for (int dj = -r; dj <= r; ++dj) mask[g.index(ic + di, jc + dj)] = 1;
    }
    return mask;
}

// ---- minimization ------------------------------------------------------------

enum class StepRule { fixed, armijo, barzilai_borwein };

inline const char* step_rule_name(StepRule r) {
    switch (r) {
        case StepRule::fixed: return "fixed";
        case StepRule::armijo: return "armijo";
        case StepRule::barzilai_borwein: return "bb";
    }
    return "?";
}

inline StepRule parse_step_rule(const std::string& s) {
    if (s == "fixed") return StepRule::fixed;
    if (s == "armijo") return StepRule::armijo;
    if (s == "bb") return StepRule::barzilai_borwein;
    throw ConstructionError("unknown step rule '" + s + "'");
}

struct SolverConfig {
    int max_iters = 50000;
    double grad_tol = 1e-8;
    StepRule step_rule = StepRule::barzilai_borwein;
    double fixed_step = 0.0;          ///< step for StepRule::fixed; 0 selects a stability estimate
    int gauge_reproject_every = 500;  ///< 0 disables Coulomb reprojection
    bool precondition = true;         ///< spectral Sobolev preconditioning of the descent direction
    std::uint64_t rng_seed = 0;
    int checkpoint_every = 0;         ///< 0 disables the checkpoint callback

    void validate() const {
        if (max_iters < 1) throw ConstructionError("solver max_iters must be >= 1");
        if (!(grad_tol > 0.0)) throw ConstructionError("solver grad_tol must be > 0");
        if (gauge_reproject_every < 0) throw ConstructionError("gauge_reproject_every must be >= 0");
        if (checkpoint_every < 0) throw ConstructionError("checkpoint_every must be >= 0");
        if (!(fixed_step >= 0.0)) throw ConstructionError("fixed_step must be >= 0");
    }
};

enum class Termination { converged, max_iters, stall };

inline const char* termination_name(Termination t) {
    switch (t) {
        case Termination::converged: return "converged";
        case Termination::max_iters: return "max_iters";
        case Termination::stall: return "stall";
    }
    return "?";
}

struct TraceRow {
    int iter = 0;
    EnergyBreakdown energy;
    double grad_norm = 0.0;  ///< L²(dμ_F) norm of the gradient on the Coulomb slice
    double step = 0.0;
    bool after_reprojection = false;  ///< a gauge reprojection followed this step
};

struct SolverTrace {
    std::vector<TraceRow> rows;
    Termination termination = Termination::max_iters;
    int reprojections = 0;
    double max_reprojection_change = 0.0;  ///< largest |ΔE| caused by a reprojection alone

    const TraceRow& final_row() const { return rows.back(); }
};

struct MinimizeResult {
    ScalarField psi;
    OneFormField a;
    SolverTrace trace;
};

using CheckpointFn = std::function<void(int iter, const ScalarField&, const OneFormField&)>;

namespace detail {

struct Iterate {
    ScalarField psi;
    OneFormField a;
};

inline void step_to(Iterate& out, const Iterate& x, double alpha, const GLGradient& d) {
    const std::size_t n = x.psi.size();
    for (std::size_t k = 0; k < n; ++k) {
        out.psi[k] = x.psi[k] + alpha * d.psi[k];
        out.a.theta[k] = x.a.theta[k] + alpha * d.a.theta[k];
        out.a.phi[k] = x.a.phi[k] + alpha * d.a.phi[k];
    }
}

/// d = -Z Π M' Π Z g, where Z zeroes pinned ψ nodes, Π is the Coulomb
/// projection and M' = w̄⁻¹ M w with M the Fourier multipliers
/// 1/(1 + s_θ²/a + s_φ²/b) on ψ and 1/(1 + |s|²/λ) on A. Each factor is
/// self-adjoint in the weighted product, so d is a descent direction.
class Preconditioner {
public:
    Preconditioner(const GLFunctional& f, const FinslerNorm& norm, bool enabled)
        : enabled_(enabled), grid_(f.grid()), fft_(f.grid()) {
        if (!enabled_) return;
        const double a = 0.5 * (norm.a().min_value() + norm.a().max_value());
        const double b = 0.5 * (norm.b().min_value() + norm.b().max_value());
        const double lam = f.params().lambda;
        m_psi_ = fft_.multiplier([&](double st, double sp) { return 1.0 / (1.0 + st * st / a + sp * sp / b); });
        m_a_ = fft_.multiplier([&](double st, double sp) { return 1.0 / (1.0 + (st * st + sp * sp) / lam); });
        std::vector<double> w(grid_.size());
        double wsum = 0.0;
        for (std::size_t k = 0; k < w.size(); ++k) wsum += (w[k] = f.weight(k));
        const double wbar = wsum / static_cast<double>(w.size());
        bool uniform = true;
        for (double v : w) uniform = uniform && std::abs(v - wbar) <= 1e-14 * wbar;
        if (!uniform) {
            ratio_.resize(w.size());
            for (std::size_t k = 0; k < w.size(); ++k) ratio_[k] = w[k] / wbar;
        }
    }

    bool enabled() const { return enabled_; }

    /// `g` must already be projected and pinned.
    void direction(const GLGradient& g, GLGradient& d, CoulombProjector& proj, const std::vector<char>& pinned) {
        const std::size_t n = grid_.size();
        if (d.psi.size() != n) d = GLGradient{ScalarField(grid_), OneFormField(grid_)};
        if (!enabled_) {
            for (std::size_t k = 0; k < n; ++k) {
                d.psi[k] = -g.psi[k];
                d.a.theta[k] = -g.a.theta[k];
                d.a.phi[k] = -g.a.phi[k];
            }
            return;
        }
        re_.resize(n);
        im_.resize(n);
        for (std::size_t k = 0; k < n; ++k) {
            const double r = ratio_.empty() ? 1.0 : ratio_[k];
            re_[k] = r * g.psi[k].real();
            im_[k] = r * g.psi[k].imag();
            d.a.theta[k] = r * g.a.theta[k];
            d.a.phi[k] = r * g.a.phi[k];
        }
        fft_.filter(m_psi_, re_.data(), im_.data());
        fft_.filter(m_a_, d.a.theta.values().data(), d.a.phi.values().data());
        // Multipliers commute with Π when σ is constant; otherwise project again.
        if (!proj.constant_density()) d.a = proj.project(d.a, false).coulomb;
        for (std::size_t k = 0; k < n; ++k) {
            d.psi[k] = (!pinned.empty() && pinned[k]) ? Complex(0.0, 0.0) : -Complex(re_[k], im_[k]);
            d.a.theta[k] = -d.a.theta[k];
            d.a.phi[k] = -d.a.phi[k];
        }
    }

private:
    bool enabled_;
    PeriodicGrid grid_;
    PeriodicFFT fft_;
    std::vector<double> m_psi_, m_a_, ratio_, re_, im_;
};

/// Rough bound on the curvature seen along the descent direction; its
/// inverse is the first trial step.
inline double initial_step(const GLFunctional& f, const FinslerNorm& norm, bool preconditioned) {
    const PeriodicGrid& g = f.grid();
    const double eps = f.params().epsilon;
    const double c2 = norm.equivalence_upper();
    const double ca = 1.0 / std::min(norm.a().min_value(), norm.b().min_value());
    if (preconditioned) return 1.0 / (2.0 * std::max(1.0, c2 * c2 / ca) + 2.0 / (eps * eps) + 1.0);
    const double dmax = 1.3722 / std::min(g.h_theta(), g.h_phi());  // max |s(k)| of the stencil
    const double lip = 2.0 * c2 * c2 * dmax * dmax + 2.0 * dmax * dmax / f.params().lambda + 2.0 / (eps * eps) + 1.0;
    return 1.0 / lip;
}

}  // namespace detail

/// Descent on the discrete GL energy over the Coulomb slice. Steps are
/// accepted only when the energy drops by the Armijo amount (c = 1e-4,
/// halving), up to a rounding slack of 1e-14|E|. Nodes flagged in `pinned`
/// keep their ψ values.
inline MinimizeResult minimize(const FinslerNorm& norm, const MeasureDensity& density, const GLParams& params,
                               const SolverConfig& config, const ScalarField& psi0, const OneFormField& a0,
                               const std::vector<char>& pinned = {}, const CheckpointFn& checkpoint = {}) {
    config.validate();
    require_same_grid(psi0.grid(), a0.grid(), "minimize");
    if (!psi0.all_finite() || !a0.all_finite()) throw ConstructionError("minimize: initial fields must be finite");
    const PeriodicGrid& g = psi0.grid();
    if (!pinned.empty() && pinned.size() != g.size()) throw GridMismatch("minimize: pin mask size");

    const GLFunctional f(norm, density, params, g);
    constexpr double c_armijo = 1e-4;
    constexpr double min_step = 1e-14;
    CoulombProjector projector(f.sigma());
    detail::Preconditioner precond(f, norm, config.precondition);

    // The A-component of the gradient is projected onto div_σ-free 1-forms
    // (harmonic part kept); pinned ψ components are zeroed.
    auto eval = [&](const detail::Iterate& x, GLGradient& grad) {
        const EnergyBreakdown e = f.energy_and_gradient(x.psi, x.a, grad);
        grad.a = projector.project(grad.a, false).coulomb;
        if (!pinned.empty())
            for (std::size_t k = 0; k < g.size(); ++k)
                if (pinned[k]) grad.psi[k] = 0.0;
        return e;
    };
    // Moves (ψ, A) to the gauge-equivalent pair with A on the slice.
    auto to_slice = [&](detail::Iterate& x) {
        CoulombDecomposition cd = projector.project(x.a, false);
        for (std::size_t k = 0; k < g.size(); ++k) x.psi[k] *= std::polar(1.0, -cd.chi.values[k]);
        x.a = std::move(cd.coulomb);
    };

    detail::Iterate x{psi0, a0};
    to_slice(x);
    detail::Iterate trial = x;
    GLGradient grad, grad_trial, dir, dir_trial;
    EnergyBreakdown e = eval(x, grad);
    double gnorm = f.gradient_norm(grad);
    precond.direction(grad, dir, projector, pinned);
    double slope = f.inner(grad.psi, grad.a, dir.psi, dir.a);

    MinimizeResult res;
    SolverTrace& trace = res.trace;
    trace.rows.push_back({0, e, gnorm, 0.0, false});

    const double alpha0 = config.step_rule == StepRule::fixed && config.fixed_step > 0.0
                              ? config.fixed_step
                              : detail::initial_step(f, norm, precond.enabled());
    double alpha_prev = alpha0;
    bool have_pair = false;
    double bb_long = 0.0, bb_short = 0.0;

    trace.termination = Termination::max_iters;
    for (int it = 1; it <= config.max_iters; ++it) {
        if (gnorm <= config.grad_tol) {
            trace.termination = Termination::converged;
            break;
        }
        double alpha = alpha0;
        switch (config.step_rule) {
            case StepRule::fixed: break;
            case StepRule::armijo: alpha = std::min(2.0 * alpha_prev, 1e3 * alpha0); break;
            case StepRule::barzilai_borwein:
                // Alternate the long and short BB steps.
                alpha = have_pair ? ((it % 2 == 0) ? bb_long : bb_short) : alpha_prev;
                alpha = std::clamp(alpha, 1e-3 * alpha0, 1e6 * alpha0);
                break;
        }

        const double slack = 1e-14 * std::max(1.0, std::abs(e.total));
        EnergyBreakdown e_try;
        bool accepted = false;
        bool first_trial = true;  // the first trial also gets its gradient; backtracks do not
        while (alpha >= min_step) {
            detail::step_to(trial, x, alpha, dir);
            e_try = first_trial ? eval(trial, grad_trial) : f.energy(trial.psi, trial.a);
            if (std::isfinite(e_try.total) && e_try.total <= e.total + c_armijo * alpha * slope + slack) {
                accepted = true;
                break;
            }
            if (config.step_rule == StepRule::fixed) break;
            alpha *= 0.5;
            first_trial = false;
        }
        if (!accepted) {
            trace.termination = Termination::stall;
            break;
        }
        if (!first_trial) e_try = eval(trial, grad_trial);
        precond.direction(grad_trial, dir_trial, projector, pinned);

        // s = α d, y = g⁺ - g, M'y = d - d⁺ (weighted products).
        {
            double sy = 0.0, ymy = 0.0;
            sy = alpha * (f.inner(dir.psi, dir.a, grad_trial.psi, grad_trial.a) - slope);
            ymy = f.inner(grad_trial.psi, grad_trial.a, dir.psi, dir.a) - slope -
                  f.inner(grad_trial.psi, grad_trial.a, dir_trial.psi, dir_trial.a) +
                  f.inner(grad.psi, grad.a, dir_trial.psi, dir_trial.a);
            const double ss = -alpha * alpha * slope;
            have_pair = sy > 0.0 && ymy > 0.0;
            if (have_pair) {
                bb_long = ss / sy;
                bb_short = sy / ymy;
            }
        }
        std::swap(x, trial);
        std::swap(grad, grad_trial);
        std::swap(dir, dir_trial);
        e = e_try;
        gnorm = f.gradient_norm(grad);
        slope = f.inner(grad.psi, grad.a, dir.psi, dir.a);
        alpha_prev = alpha;
        trace.rows.push_back({it, e, gnorm, alpha, false});

        if (config.gauge_reproject_every > 0 && it % config.gauge_reproject_every == 0) {
            to_slice(x);
            const EnergyBreakdown before = e;
            e = eval(x, grad);
            gnorm = f.gradient_norm(grad);
            precond.direction(grad, dir, projector, pinned);
            slope = f.inner(grad.psi, grad.a, dir.psi, dir.a);
            trace.max_reprojection_change = std::max(trace.max_reprojection_change, std::abs(e.total - before.total));
            trace.rows.back().energy = e;
            trace.rows.back().grad_norm = gnorm;
            trace.rows.back().after_reprojection = true;
            ++trace.reprojections;
        }
        if (checkpoint && config.checkpoint_every > 0 && it % config.checkpoint_every == 0) checkpoint(it, x.psi, x.a);
    }
    if (trace.termination == Termination::max_iters && gnorm <= config.grad_tol)
        trace.termination = Termination::converged;

    res.psi = std::move(x.psi);
    res.a = std::move(x.a);
    return res;
}

// ---- ε sweep -------------------------------------------------------------------

struct GridSchedule {
    double h_over_epsilon = 0.25;  ///< h = h_over_epsilon · ε, rounded to an even node count
    std::vector<int> explicit_n;   ///< optional node count per ε (overrides the ratio)
};

inline int schedule_nodes(const GridSchedule& s, double eps, std::size_t idx) {
    int n = 0;
    if (!s.explicit_n.empty()) {
        n = s.explicit_n.at(idx);
    } else {
        n = static_cast<int>(std::ceil(kTwoPi / (s.h_over_epsilon * eps) - 1e-9));
        n += n % 2;
    }
    if (kTwoPi / n > 0.25 * eps * (1.0 + 1e-12))
        throw ConfigError("resolution violation at epsilon=" + std::to_string(eps) + ": h=" + std::to_string(kTwoPi / n) +
                          " exceeds epsilon/4");
    return n;
}

struct SweepRow {
    double epsilon = 0.0;
    int n = 0;
    EnergyBreakdown energy;
    int vortex_count = 0;
    VortexSet vortices;
    double energy_over_logeps = 0.0;
    Termination termination = Termination::max_iters;
    int iterations = 0;
    double grad_norm = 0.0;
};

/// Minimizes in `sector` at each ε (square grids from `schedule`). vortex_pair
/// runs pin 3×3 patches at both cores so the pair cannot annihilate.
inline std::vector<SweepRow> epsilon_sweep(const FinslerNorm& norm, const MeasureDensity& density, double lambda,
                                           const Sector& sector, const std::vector<double>& eps_list,
                                           const GridSchedule& schedule, const SolverConfig& config) {
    if (eps_list.empty()) throw ConfigError("epsilon sweep needs at least one epsilon");
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        if (!(eps_list[k] > 0.0)) throw ConfigError("epsilon values must be > 0");
        if (k > 0 && !(eps_list[k] < eps_list[k - 1])) throw ConfigError("epsilon list must be strictly decreasing");
    }
    if (!schedule.explicit_n.empty() && schedule.explicit_n.size() != eps_list.size())
        throw ConfigError("grid schedule length differs from epsilon list");
    std::vector<int> nodes;
    for (std::size_t k = 0; k < eps_list.size(); ++k) nodes.push_back(schedule_nodes(schedule, eps_list[k], k));

    std::vector<SweepRow> rows;
    for (std::size_t k = 0; k < eps_list.size(); ++k) {
        const double eps = eps_list[k];
        const PeriodicGrid grid(nodes[k], nodes[k]);
        const GLParams params(lambda, eps);
        const InitialState init = init_winding(grid, sector, eps, 0.0, config.rng_seed);
        const std::vector<char> pins =
            sector.kind == SectorKind::vortex_pair ? core_pin_mask(grid, init.cores) : std::vector<char>{};
        const MinimizeResult r = minimize(norm, density, params, config, init.psi, init.a, pins);
        const VortexSet v = detect_vortices(r.psi);
        SweepRow row;
        row.epsilon = eps;
        row.n = nodes[k];
        row.energy = r.trace.final_row().energy;
        row.vortex_count = static_cast<int>(v.size());
        row.vortices = v;
        row.energy_over_logeps = row.energy.total / std::abs(std::log(eps));
        row.termination = r.trace.termination;
        row.iterations = r.trace.final_row().iter;
        row.grad_norm = r.trace.final_row().grad_norm;
        rows.push_back(std::move(row));
    }
    return rows;
}

/// Least-squares slope and intercept of y against x.
inline std::pair<double, double> fit_line(const std::vector<double>& x, const std::vector<double>& y) {
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    return {slope, (sy - slope * sx) / n};
}

}  // namespace fgl
