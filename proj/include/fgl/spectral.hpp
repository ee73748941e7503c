#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <memory>
#include <vector>

#include <fftw3.h>

#include "fgl/grid.hpp"

namespace fgl {

/// Fourier symbol of the fourth-order central difference on N nodes with
/// spacing h: D e^{ikx} = i s(k) e^{ikx}. Vanishes at k = 0 and at Nyquist.
inline double central_diff_symbol(int k, int n, double h) {
    const double x = kTwoPi * k / n;
    return std::sin(x) * (8.0 - 2.0 * std::cos(x)) / (6.0 * h);
}

/// In-place 2D complex FFT on a grid, used to apply real Fourier multipliers
/// m(k) to pairs of real fields at once: F⁻¹[m F[u + iv]] = m*u + i m*v for
/// real even m. Not thread-safe: FFTW planning must stay on one thread.
class PeriodicFFT {
public:
    explicit PeriodicFFT(const PeriodicGrid& g) : grid_(g), n_(g.size()) {
        buf_ = static_cast<fftw_complex*>(fftw_malloc(sizeof(fftw_complex) * n_));
        // FFTW_ESTIMATE + fftw_malloc'd buffers keep the transform bit-reproducible.
        fwd_ = fftw_plan_dft_2d(g.n_theta(), g.n_phi(), buf_, buf_, FFTW_FORWARD, FFTW_ESTIMATE);
        bwd_ = fftw_plan_dft_2d(g.n_theta(), g.n_phi(), buf_, buf_, FFTW_BACKWARD, FFTW_ESTIMATE);
        sym_theta_.resize(static_cast<std::size_t>(g.n_theta()));
        sym_phi_.resize(static_cast<std::size_t>(g.n_phi()));
        for (int i = 0; i < g.n_theta(); ++i) sym_theta_[i] = central_diff_symbol(i, g.n_theta(), g.h_theta());
        for (int j = 0; j < g.n_phi(); ++j) sym_phi_[j] = central_diff_symbol(j, g.n_phi(), g.h_phi());
    }

    PeriodicFFT(const PeriodicFFT&) = delete;
    PeriodicFFT& operator=(const PeriodicFFT&) = delete;

    ~PeriodicFFT() {
        fftw_destroy_plan(fwd_);
        fftw_destroy_plan(bwd_);
        fftw_free(buf_);
    }

    const PeriodicGrid& grid() const { return grid_; }
    std::size_t size() const { return n_; }

    /// Symbol of the θ / φ difference operator for mode index i / j.
    double symbol_theta(int i) const { return sym_theta_[static_cast<std::size_t>(i)]; }
    double symbol_phi(int j) const { return sym_phi_[static_cast<std::size_t>(j)]; }

    /// Table m[index(i, j)] = fn(s_θ(i), s_φ(j)).
    template <class Fn>
    std::vector<double> multiplier(Fn&& fn) const {
        std::vector<double> m(n_);
        for (int i = 0; i < grid_.n_theta(); ++i)
            for (int j = 0; j < grid_.n_phi(); ++j) m[grid_.index(i, j)] = fn(sym_theta_[i], sym_phi_[j]);
        return m;
    }

    /// (u, v) ← (m*u, m*v); v may be null for a single real field.
    void filter(const std::vector<double>& m, double* u, double* v) {
        for (std::size_t k = 0; k < n_; ++k) {
            buf_[k][0] = u[k];
            buf_[k][1] = v ? v[k] : 0.0;
        }
        fftw_execute(fwd_);
        const double scale = 1.0 / static_cast<double>(n_);
        for (std::size_t k = 0; k < n_; ++k) {
            buf_[k][0] *= m[k] * scale;
            buf_[k][1] *= m[k] * scale;
        }
        fftw_execute(bwd_);
        for (std::size_t k = 0; k < n_; ++k) {
            u[k] = buf_[k][0];
            if (v) v[k] = buf_[k][1];
        }
    }

private:
    PeriodicGrid grid_;
    std::size_t n_;
    fftw_complex* buf_ = nullptr;
    fftw_plan fwd_{};
    fftw_plan bwd_{};
    std::vector<double> sym_theta_, sym_phi_;
};

/// Inverts the constant-coefficient operator  -c Σ_k D_k D_k  on the complement
/// of its kernel (constants and Nyquist checkerboards).
class SpectralPoisson {
public:
    explicit SpectralPoisson(const PeriodicGrid& g) : fft_(g) {
        // Tiny symbols only occur on the exact kernel; the smallest nonzero one is O(1).
        inv_ = fft_.multiplier([](double st, double sp) {
            const double s = st * st + sp * sp;
            return s > 1e-9 ? 1.0 / s : 0.0;
        });
    }

    /// Returns u with  -c Σ D_k D_k u = rhs  projected off the kernel.
    RealField solve(const RealField& rhs, double c = 1.0) {
        RealField out = rhs;
        fft_.filter(inv_, out.values().data(), nullptr);
        if (c != 1.0)
            for (double& v : out.values()) v /= c;
        return out;
    }

private:
    PeriodicFFT fft_;
    std::vector<double> inv_;
};

}  // namespace fgl
