#pragma once

#include <cmath>
#include <cstddef>
#include <exception>
#include <span>
#include <vector>

#include "fgl/grid.hpp"

namespace fgl {

/// Neumaier-compensated accumulator.
class CompensatedSum {
public:
    void add(double v) {
        const double t = sum_ + v;
        if (std::abs(sum_) >= std::abs(v))
            comp_ += (sum_ - t) + v;
        else
            comp_ += (v - t) + sum_;
        sum_ = t;
    }
    double value() const { return sum_ + comp_; }

private:
    double sum_ = 0.0;
    double comp_ = 0.0;
};

inline double compensated_total(std::span<const double> v) {
    CompensatedSum s;
    for (double x : v) s.add(x);
    return s.value();
}

/// Σ_{i,j} term(i, j). Rows are accumulated independently (in parallel when
/// OpenMP is on) and combined in fixed order, so the result does not depend
/// on the thread count.
template <class Fn>
double grid_sum(const PeriodicGrid& g, Fn&& term) {
    std::vector<double> rows(static_cast<std::size_t>(g.n_theta()));
    const int nt = g.n_theta(), np = g.n_phi();
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nt; ++i) {
        CompensatedSum s;
        for (int j = 0; j < np; ++j) s.add(term(i, j));
        rows[static_cast<std::size_t>(i)] = s.value();
    }
    return compensated_total(rows);
}

/// Applies fn(i, j) to every node, rows in parallel. The first exception
/// raised by any row is rethrown after the loop.
template <class Fn>
void for_each_node(const PeriodicGrid& g, Fn&& fn) {
    const int nt = g.n_theta(), np = g.n_phi();
    std::exception_ptr failure;
#pragma omp parallel for schedule(static)
    for (int i = 0; i < nt; ++i) {
        try {
            for (int j = 0; j < np; ++j) fn(i, j);
        } catch (...) {
#pragma omp critical(fgl_failure)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
}

}  // namespace fgl
