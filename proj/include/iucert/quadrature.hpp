#pragma once

// Adaptive Simpson quadrature on finite intervals plus two change-of-variable
// wrappers for half-infinite intervals (exponential and algebraic decay).

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <type_traits>
#include <utility>

#include "iucert/errors.hpp"

namespace iucert::quad {

struct Options {
    double rel_tol = 1e-10;
    int max_depth = 40;
    std::size_t max_evals = 20'000'000;
};

struct Result {
    double value = 0.0;
    double error = 0.0;  // sum of local |S2 - S|/15 estimates
    std::size_t evals = 0;
};

namespace detail {

template <class F>
struct SimpsonState {
    F& f;
    const Options& opt;
    std::size_t evals = 0;
    double error = 0.0;

    double eval(double x) {
        ++evals;
        if (evals > opt.max_evals) {
            throw QuadratureError("adaptive Simpson: evaluation budget exhausted");
        }
        const double y = f(x);
        if (!std::isfinite(y)) {
            throw QuadratureError("adaptive Simpson: non-finite integrand at x=" + std::to_string(x));
        }
        return y;
    }

    double recurse(double a, double b, double fa, double fm, double fb, double whole, double tol, int depth) {
        const double m = 0.5 * (a + b);
        const double lm = 0.5 * (a + m);
        const double rm = 0.5 * (m + b);
        const double flm = eval(lm);
        const double frm = eval(rm);
        const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
        const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
        const double delta = left + right - whole;
        const double noise = 64.0 * std::numeric_limits<double>::epsilon() * (std::abs(left) + std::abs(right));
        if (std::abs(delta) <= 15.0 * tol || std::abs(delta) <= noise) {
            error += std::abs(delta) / 15.0;
            return left + right + delta / 15.0;
        }
        if (depth >= opt.max_depth) {
            throw QuadratureError("adaptive Simpson: tolerance not met at maximum depth on [" + std::to_string(a) +
                                  ", " + std::to_string(b) + "]");
        }
        return recurse(a, m, fa, flm, fm, left, 0.5 * tol, depth + 1) +
               recurse(m, b, fm, frm, fb, right, 0.5 * tol, depth + 1);
    }
};

}  // namespace detail

/// Integrates f over [a, b] to relative tolerance opt.rel_tol.
/// The interval is first cut into 16 panels to get a scale for the
/// absolute tolerance; each panel is then refined adaptively.
template <class F>
Result simpson(F&& f, double a, double b, const Options& opt = {}) {
    Result res;
    if (a == b) return res;
    double sign = 1.0;
    if (b < a) {
        std::swap(a, b);
        sign = -1.0;
    }
    detail::SimpsonState<std::remove_reference_t<F>> st{f, opt};

    constexpr int panels = 16;
    const double w = (b - a) / panels;
    double xs[2 * panels + 1];
    double ys[2 * panels + 1];
    for (int i = 0; i <= 2 * panels; ++i) {
        xs[i] = (i == 2 * panels) ? b : a + 0.5 * w * i;
        ys[i] = st.eval(xs[i]);
    }
    double coarse[panels];
    double scale = 0.0;
    for (int p = 0; p < panels; ++p) {
        coarse[p] = (xs[2 * p + 2] - xs[2 * p]) / 6.0 * (ys[2 * p] + 4.0 * ys[2 * p + 1] + ys[2 * p + 2]);
        scale += std::abs(coarse[p]);
    }
    const double abs_tol = opt.rel_tol * std::max(scale, std::numeric_limits<double>::min());
    double total = 0.0;
    for (int p = 0; p < panels; ++p) {
        total += st.recurse(xs[2 * p], xs[2 * p + 2], ys[2 * p], ys[2 * p + 1], ys[2 * p + 2], coarse[p],
                            abs_tol / panels, 0);
    }
    res.value = sign * total;
    res.error = st.error;
    res.evals = st.evals;
    return res;
}

/// ∫_a^∞ f(x) dx for integrands decaying at least like e^{-rate·x}.
/// Uses x = a - ln(v)/rate, v ∈ (0, 1].
template <class F>
Result exp_tail(F&& f, double a, double rate, const Options& opt = {}) {
    constexpr double v_min = 1e-250;
    auto g = [&](double v) {
        v = std::max(v, v_min);
        const double x = a - std::log(v) / rate;
        return f(x) / (rate * v);
    };
    return simpson(g, 0.0, 1.0, opt);
}

/// ∫_a^∞ f(x) dx for integrands decaying like x^{-s}, s > 1, a > 0.
/// Uses x = a·v^{-1/(s-1)}; a pure power x^{-s} maps to a constant.
template <class F>
Result power_tail(F&& f, double a, double s, const Options& opt = {}) {
    if (!(s > 1.0) || !(a > 0.0)) throw DomainError("power_tail: need s > 1 and a > 0");
    const double e = 1.0 / (s - 1.0);
    // keep x and dx/dv finite at the open end
    const double v_min =
        std::max({1e-300, std::pow(a / 1e300, s - 1.0), std::pow(a * e / 1e300, 1.0 / (e + 1.0))});
    auto g = [&](double v) {
        v = std::max(v, v_min);
        const double x = a * std::pow(v, -e);
        const double dx = a * e * std::pow(v, -e - 1.0);
        return f(x) * dx;
    };
    return simpson(g, 0.0, 1.0, opt);
}

}  // namespace iucert::quad
