#pragma once

// Iterated logarithms, the auxiliary functions f_{k,m}, their exponential
// continuation below r0, the inverse g of f∘ln and the Young split built
// from the pair (f∘ln, g).

#include <cmath>
#include <string>

#include "iucert/errors.hpp"
#include "iucert/roots.hpp"

namespace iucert {

/// ln applied p times; iter_log(0, t) == t.
inline double iter_log(int p, double t) {
    if (p < 0) throw DomainError("iter_log: negative depth");
    double v = t;
    for (int i = 0; i < p; ++i) {
        if (!(v > 0.0)) {
            throw DomainError("iter_log: intermediate value " + std::to_string(v) + " <= 0 at depth " +
                              std::to_string(i));
        }
        v = std::log(v);
    }
    return v;
}

/// (ln^{(m)} t)^k · ∏_{p<m} ln^{(p)} t
inline double f_km(double k, int m, double t) {
    double prod = 1.0;
    double v = t;
    for (int p = 0; p < m; ++p) {
        if (!(v > 0.0)) throw DomainError("f_km: ln^(" + std::to_string(p) + ")(t) <= 0");
        prod *= v;
        v = std::log(v);
    }
    if (!(v > 0.0)) throw DomainError("f_km: ln^(" + std::to_string(m) + ")(t) <= 0");
    return std::pow(v, k) * prod;
}

/// ln f_km(k, m, t), usable where f_km itself would overflow.
inline double log_f_km(double k, int m, double t) {
    double acc = 0.0;
    double v = t;
    for (int p = 0; p < m; ++p) {
        if (!(v > 0.0)) throw DomainError("log_f_km: ln^(" + std::to_string(p) + ")(t) <= 0");
        acc += std::log(v);
        v = std::log(v);
    }
    if (!(v > 0.0)) throw DomainError("log_f_km: ln^(" + std::to_string(m) + ")(t) <= 0");
    return k * std::log(v) + acc;
}

struct AuxParams {
    double k = 2.0;
    int m = 1;
    double r0 = 1.0;

    void validate() const {
        if (!(k > 1.0)) throw DomainError("AuxParams: k must exceed 1");
        if (m < 1) throw DomainError("AuxParams: m must be >= 1");
        if (!(r0 > 0.0)) throw DomainError("AuxParams: r0 must be positive");
        if (!(iter_log(m - 1, r0) > 0.0)) throw DomainError("AuxParams: ln^(m-1)(r0) must be positive");
    }
};

/// ln f(q) for the piecewise function f = f_{k,m-1} on [r0, ∞) and
/// f_{k,m-1}(r0)·e^{q/r0 - 1} below r0.
inline double log_f_extended(const AuxParams& a, double q) {
    if (q >= a.r0) return log_f_km(a.k, a.m - 1, q);
    return log_f_km(a.k, a.m - 1, a.r0) + q / a.r0 - 1.0;
}

inline double f_extended(const AuxParams& a, double q) {
    if (q >= a.r0) return f_km(a.k, a.m - 1, q);
    return f_km(a.k, a.m - 1, a.r0) * std::exp(q / a.r0 - 1.0);
}

inline constexpr double kDefaultInverseTol = 1e-12;

/// ln g(y) from ln y, where g inverts x ↦ f(ln x) on (0, ∞).
/// Bisection in ℓ = ln x, bracket grown geometrically from x = 1.
inline double log_g_of_log(const AuxParams& a, double log_y, double tol = kDefaultInverseTol) {
    if (!std::isfinite(log_y)) throw DomainError("g_inverse: ln y must be finite");
    auto h = [&](double ell) { return log_f_extended(a, ell); };
    roots::BisectOptions opt;
    opt.max_iter = 200;
    const double ell = roots::solve_increasing(h, log_y, 0.0, 1.0, opt);
    const double resid = std::abs(std::expm1(h(ell) - log_y));
    if (!(resid <= tol)) {
        throw ConvergenceError("g_inverse: relative residual " + std::to_string(resid) + " above tolerance");
    }
    return ell;
}

inline double log_g_inverse(const AuxParams& a, double y, double tol = kDefaultInverseTol) {
    if (!(y > 0.0)) throw DomainError("g_inverse: y must be positive");
    return log_g_of_log(a, std::log(y), tol);
}

inline double g_inverse(const AuxParams& a, double y, double tol = kDefaultInverseTol) {
    return std::exp(log_g_inverse(a, y, tol));
}

/// a·f(ln a) + b·g(b); never below a·b.
inline double young_bound(const AuxParams& p, double a, double b, double tol = kDefaultInverseTol) {
    if (!(a > 0.0) || !(b > 0.0)) throw DomainError("young_bound: a and b must be positive");
    return a * f_extended(p, std::log(a)) + b * g_inverse(p, b, tol);
}

}  // namespace iucert
