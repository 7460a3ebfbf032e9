#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "iucert/errors.hpp"

namespace iucert::roots {

struct BisectOptions {
    double x_tol = 0.0;   // absolute width; 0 means "to machine resolution"
    int max_iter = 200;
};

/// Solves h(x) = target for a non-decreasing h on [lo, hi] with
/// h(lo) <= target <= h(hi). Returns the midpoint of the final bracket.
template <class H>
double bisect_increasing(H&& h, double target, double lo, double hi, const BisectOptions& opt = {}) {
    for (int it = 0; it < opt.max_iter; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) return mid;
        if (opt.x_tol > 0.0 && hi - lo <= opt.x_tol) return mid;
        if (h(mid) < target) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    if (opt.x_tol > 0.0 && hi - lo > opt.x_tol) {
        throw ConvergenceError("bisection did not reach the requested width");
    }
    return 0.5 * (lo + hi);
}

/// Grows [lo, hi] geometrically around `start` (step doubles each time)
/// until h(lo) <= target <= h(hi), then bisects.
template <class H>
double solve_increasing(H&& h, double target, double start, double step, const BisectOptions& opt = {}) {
    double lo = start - step;
    double hi = start + step;
    int expansions = 0;
    while (h(lo) > target) {
        if (++expansions > opt.max_iter) throw ConvergenceError("bracket expansion failed (lower side)");
        hi = lo;
        step *= 2.0;
        lo -= step;
    }
    while (h(hi) < target) {
        if (++expansions > opt.max_iter) throw ConvergenceError("bracket expansion failed (upper side)");
        lo = hi;
        step *= 2.0;
        hi += step;
    }
    return bisect_increasing(h, target, lo, hi, opt);
}

}  // namespace iucert::roots
