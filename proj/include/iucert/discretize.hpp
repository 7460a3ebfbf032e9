#pragma once

// Radial finite differences for H = -Δ + q on L²((0,∞), r^{n-1}dr).
// With u = r^{(n-1)/2}ψ the operator becomes -u'' + [q + (n-1)(n-3)/(4r²)]u,
// discretized by the three-point stencil with Dirichlet ends.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "iucert/errors.hpp"

namespace iucert {

struct RadialGrid {
    int n_dim = 3;
    double R_max = 10.0;
    std::size_t N = 1000;
    double h = 10.0 / 1001.0;

    double r(std::size_t i) const { return double(i + 1) * h; }
    std::vector<double> nodes() const {
        std::vector<double> x(N);
        for (std::size_t i = 0; i < N; ++i) x[i] = r(i);
        return x;
    }
};

inline constexpr std::size_t kMinInterior = 16;

/// Uniform grid r_i = i·h, i = 1..N, h = R_max/(N+1).  N below 16 is raised to 16.
inline RadialGrid make_grid(int n_dim, double R_max, std::size_t N) {
    if (n_dim < 3) throw DomainError("radial grid: dimension must be >= 3");
    if (!(R_max > 0.0) || !std::isfinite(R_max)) throw DomainError("radial grid: R_max must be positive");
    N = std::max(N, kMinInterior);
    return {n_dim, R_max, N, R_max / double(N + 1)};
}

struct DiscreteOperator {
    RadialGrid grid;
    std::vector<double> q;
    std::vector<double> diag;
    std::vector<double> offdiag;  // N-1 entries, all -1/h²
    std::vector<double> weight;   // r_i^{n-1}·h

    std::size_t size() const { return diag.size(); }

    std::vector<double> apply(const std::vector<double>& u) const {
        const std::size_t n = size();
        std::vector<double> y(n);
        for (std::size_t i = 0; i < n; ++i) {
            double s = diag[i] * u[i];
            if (i > 0) s += offdiag[i - 1] * u[i - 1];
            if (i + 1 < n) s += offdiag[i] * u[i + 1];
            y[i] = s;
        }
        return y;
    }
};

inline double centrifugal(int n_dim, double r) { return (n_dim - 1) * (n_dim - 3) / (4.0 * r * r); }

inline DiscreteOperator assemble_operator(const RadialGrid& g, const std::vector<double>& q) {
    if (q.size() != g.N) throw DomainError("assemble_operator: need one potential sample per node");
    DiscreteOperator op;
    op.grid = g;
    op.q = q;
    op.diag.resize(g.N);
    op.offdiag.assign(g.N - 1, -1.0 / (g.h * g.h));
    op.weight.resize(g.N);
    for (std::size_t i = 0; i < g.N; ++i) {
        if (!(q[i] >= 0.0)) throw InvalidPotential("assemble_operator: q(" + std::to_string(g.r(i)) + ") < 0");
        const double r = g.r(i);
        op.diag[i] = 2.0 / (g.h * g.h) + q[i] + centrifugal(g.n_dim, r);
        op.weight[i] = std::pow(r, g.n_dim - 1) * g.h;
    }
    return op;
}

template <class Q>
    requires std::invocable<Q, double>
DiscreteOperator assemble_operator(const RadialGrid& g, Q&& qfun) {
    std::vector<double> q(g.N);
    for (std::size_t i = 0; i < g.N; ++i) q[i] = qfun(g.r(i));
    return assemble_operator(g, q);
}

namespace tridiag {

/// Number of eigenvalues strictly below x (Sturm count from LDLᵀ pivots).
inline std::size_t sturm_count(const std::vector<double>& a, const std::vector<double>& b, double x) {
    const double tiny = std::numeric_limits<double>::min();
    std::size_t c = 0;
    double d = a[0] - x;
    if (d < 0) ++c;
    for (std::size_t i = 1; i < a.size(); ++i) {
        if (d == 0.0) d = tiny;
        d = a[i] - x - b[i - 1] * b[i - 1] / d;
        if (d < 0) ++c;
    }
    return c;
}

inline std::pair<double, double> gershgorin(const std::vector<double>& a, const std::vector<double>& b) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo;
    for (std::size_t i = 0; i < a.size(); ++i) {
        double rad = 0.0;
        if (i > 0) rad += std::abs(b[i - 1]);
        if (i < b.size()) rad += std::abs(b[i]);
        lo = std::min(lo, a[i] - rad);
        hi = std::max(hi, a[i] + rad);
    }
    return {lo, hi};
}

/// j-th eigenvalue (0-based, ascending) by bisection on the Sturm count.
inline double kth_eigenvalue(const std::vector<double>& a, const std::vector<double>& b, std::size_t j) {
    auto [lo, hi] = gershgorin(a, b);
    for (int it = 0; it < 400; ++it) {
        const double mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;
        if (sturm_count(a, b, mid) > j) hi = mid;
        else lo = mid;
    }
    return 0.5 * (lo + hi);
}

/// Solves (T - σI)x = rhs by LU with partial pivoting (the gttrf/gttrs scheme).
inline std::vector<double> shifted_solve(const std::vector<double>& a, const std::vector<double>& b, double sigma,
                                         std::vector<double> rhs) {
    const std::size_t n = a.size();
    const double tiny = std::numeric_limits<double>::epsilon() * (std::abs(sigma) + 1.0);
    std::vector<double> d(n), dl(b), du(b), du2(n, 0.0);
    std::vector<char> piv(n, 0);
    for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - sigma;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (std::abs(d[i]) >= std::abs(dl[i])) {
            if (d[i] == 0.0) d[i] = tiny;
            const double f = dl[i] / d[i];
            dl[i] = f;
            d[i + 1] -= f * du[i];
        } else {
            piv[i] = 1;
            const double f = d[i] / dl[i];
            d[i] = dl[i];
            dl[i] = f;
            const double t = du[i];
            du[i] = d[i + 1];
            d[i + 1] = t - f * d[i + 1];
            if (i + 2 < n) {
                du2[i] = du[i + 1];
                du[i + 1] = -f * du[i + 1];
            }
        }
    }
    if (d[n - 1] == 0.0) d[n - 1] = tiny;
    for (std::size_t i = 0; i + 1 < n; ++i) {
        if (!piv[i]) {
            rhs[i + 1] -= dl[i] * rhs[i];
        } else {
            const double t = rhs[i];
            rhs[i] = rhs[i + 1];
            rhs[i + 1] = t - dl[i] * rhs[i];
        }
    }
    for (std::size_t k = n; k-- > 0;) {
        double s = rhs[k];
        if (k + 1 < n) s -= du[k] * rhs[k + 1];
        if (k + 2 < n) s -= du2[k] * rhs[k + 2];
        rhs[k] = s / d[k];
    }
    return rhs;
}

/// Thomas elimination without pivoting; used for T - σI with σ below the
/// spectrum, where every pivot is positive and the solve keeps signs.
inline std::vector<double> thomas_solve(const std::vector<double>& a, const std::vector<double>& b, double sigma,
                                        std::vector<double> rhs) {
    const std::size_t n = a.size();
    std::vector<double> d(n);
    d[0] = a[0] - sigma;
    for (std::size_t i = 1; i < n; ++i) {
        const double f = b[i - 1] / d[i - 1];
        d[i] = a[i] - sigma - f * b[i - 1];
        rhs[i] -= f * rhs[i - 1];
    }
    for (std::size_t i = 0; i < n; ++i)
        if (!(d[i] > 0.0)) throw ConvergenceError("thomas_solve: shift not below the spectrum");
    rhs[n - 1] /= d[n - 1];
    for (std::size_t k = n - 1; k-- > 0;) rhs[k] = (rhs[k] - b[k] * rhs[k + 1]) / d[k];
    return rhs;
}

}  // namespace tridiag

inline double dot(const std::vector<double>& x, const std::vector<double>& y) {
    double s = 0.0;
    for (std::size_t i = 0; i < x.size(); ++i) s += x[i] * y[i];
    return s;
}

inline double norm2(const std::vector<double>& x) { return std::sqrt(dot(x, x)); }

/// uᵀAu / uᵀu, which is the discrete quadratic form over the squared norm.
inline double rayleigh_quotient(const DiscreteOperator& op, const std::vector<double>& u) {
    return dot(u, op.apply(u)) / dot(u, u);
}

inline double residual_norm(const DiscreteOperator& op, const std::vector<double>& u, double lambda) {
    auto y = op.apply(u);
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += (y[i] - lambda * u[i]) * (y[i] - lambda * u[i]);
    return std::sqrt(s) / norm2(u);
}

/// ψ_i = u_i·r_i^{-(n-1)/2}/√h, so that Σψ_i² w_i = Σu_i².
inline std::vector<double> u_to_psi(const RadialGrid& g, const std::vector<double>& u) {
    std::vector<double> psi(u.size());
    for (std::size_t i = 0; i < u.size(); ++i) psi[i] = u[i] * std::pow(g.r(i), -0.5 * (g.n_dim - 1)) / std::sqrt(g.h);
    return psi;
}

inline std::vector<double> psi_to_u(const RadialGrid& g, const std::vector<double>& psi) {
    std::vector<double> u(psi.size());
    for (std::size_t i = 0; i < psi.size(); ++i) u[i] = psi[i] * std::pow(g.r(i), 0.5 * (g.n_dim - 1)) * std::sqrt(g.h);
    return u;
}

struct GroundState {
    RadialGrid grid;
    std::vector<double> u;    // Euclidean unit vector of the symmetric matrix
    std::vector<double> phi;  // Σφ_i² w_i = 1
    std::vector<double> mu_weights;
    double E0 = 0.0;
    double residual = 0.0;
};

namespace detail {

inline std::vector<double> inverse_iteration(const DiscreteOperator& op, double lambda,
                                            const std::vector<std::vector<double>>& against, std::vector<double> v,
                                            double tol, int max_iter = 50) {
    const double scale = std::max({1.0, std::abs(lambda), std::abs(op.diag.front()), std::abs(op.diag.back())});
    const double sigma = lambda - 8.0 * std::numeric_limits<double>::epsilon() * scale;
    for (int it = 0; it < max_iter; ++it) {
        v = tridiag::shifted_solve(op.diag, op.offdiag, sigma, v);
        for (int pass = 0; pass < 2; ++pass)
            for (const auto& w : against) {
                const double c = dot(v, w);
                for (std::size_t i = 0; i < v.size(); ++i) v[i] -= c * w[i];
            }
        const double nv = norm2(v);
        if (!(nv > 0.0) || !std::isfinite(nv)) throw ConvergenceError("inverse iteration: degenerate iterate");
        for (auto& x : v) x /= nv;
        if (it >= 1 && residual_norm(op, v, rayleigh_quotient(op, v)) <= tol) return v;
    }
    throw ConvergenceError("inverse iteration: residual above tolerance after " + std::to_string(max_iter) +
                           " steps");
}

}  // namespace detail

inline constexpr double kDefaultEigenTol = 1e-8;

/// Lowest eigenpair: Sturm bisection for E0 and E1, then inverse iteration
/// from the positive constant vector with shift E0 - 1e-6·(E1 - E0).
inline GroundState ground_state(const DiscreteOperator& op, double tol = kDefaultEigenTol) {
    const double e0 = tridiag::kth_eigenvalue(op.diag, op.offdiag, 0);
    const double e1 = tridiag::kth_eigenvalue(op.diag, op.offdiag, 1);
    const double sigma = e0 - 1e-6 * std::max(e1 - e0, std::numeric_limits<double>::epsilon() * std::abs(e0));
    // residuals below ~eps·‖A‖ are roundoff
    const auto [glo, ghi] = tridiag::gershgorin(op.diag, op.offdiag);
    const double a_norm = std::max(std::abs(glo), std::abs(ghi));
    const double rtol = std::max(tol * std::max(1.0, std::abs(e0)), 64.0 * std::numeric_limits<double>::epsilon() * a_norm);
    std::vector<double> v(op.size(), 1.0);
    // keep iterating a few steps past the residual test: the tail nodes of u
    // need componentwise accuracy, not just a small residual
    int extra = -1;
    for (int it = 0; it < 50 && extra != 0; ++it) {
        v = tridiag::thomas_solve(op.diag, op.offdiag, sigma, v);
        const double nv = norm2(v);
        if (!(nv > 0.0) || !std::isfinite(nv)) throw ConvergenceError("ground_state: degenerate iterate");
        for (auto& x : v) x /= nv;
        if (extra > 0) --extra;
        if (extra < 0 && it >= 1 && residual_norm(op, v, rayleigh_quotient(op, v)) <= rtol) extra = 3;
    }
    if (extra != 0) throw ConvergenceError("ground_state: residual above tolerance");
    double s = 0.0;
    for (double x : v) s += x;
    if (s < 0)
        for (auto& x : v) x = -x;
    for (std::size_t i = 0; i < v.size(); ++i) {
        if (!(v[i] > 0.0)) throw SignError("ground state changes sign at r=" + std::to_string(op.grid.r(i)));
    }
    GroundState gs;
    gs.grid = op.grid;
    gs.u = v;
    gs.E0 = rayleigh_quotient(op, v);
    gs.residual = residual_norm(op, v, gs.E0);
    gs.phi = u_to_psi(op.grid, v);
    gs.mu_weights.resize(v.size());
    for (std::size_t i = 0; i < v.size(); ++i) gs.mu_weights[i] = v[i] * v[i];
    return gs;
}

struct Spectrum {
    RadialGrid grid;
    std::vector<double> values;
    std::vector<std::vector<double>> u;    // Euclidean orthonormal
    std::vector<std::vector<double>> psi;  // orthonormal in Σ·w_i
};

inline Spectrum eigenpairs(const DiscreteOperator& op, std::size_t K, double tol = kDefaultEigenTol) {
    if (K == 0 || K > op.size()) throw DomainError("eigenpairs: need 1 <= K <= N");
    Spectrum sp;
    sp.grid = op.grid;
    for (std::size_t j = 0; j < K; ++j) {
        const double lam = tridiag::kth_eigenvalue(op.diag, op.offdiag, j);
        const double rtol = tol * std::max(1.0, std::abs(lam));
        std::vector<double> v(op.size());
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = 1.0 + 0.5 * std::sin(0.7 * double(i) + double(j));
        v = detail::inverse_iteration(op, lam, sp.u, v, rtol);
        std::size_t first = 0;
        while (first < v.size() && std::abs(v[first]) < 1e-300) ++first;
        if (first < v.size() && v[first] < 0)
            for (auto& x : v) x = -x;
        sp.values.push_back(rayleigh_quotient(op, v));
        sp.psi.push_back(u_to_psi(op.grid, v));
        sp.u.push_back(std::move(v));
    }
    return sp;
}

/// (E_h - E_{h/2}) / (E_{h/2} - E_{h/4}); close to 4 for a second-order scheme.
inline double richardson_ratio(double e_h, double e_h2, double e_h4) { return (e_h - e_h2) / (e_h2 - e_h4); }

/// Grid with half the spacing on the same box.
inline RadialGrid refine(const RadialGrid& g) { return make_grid(g.n_dim, g.R_max, 2 * g.N + 1); }

inline void write_ground_state_csv(const GroundState& gs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(17);
    out << "r,phi,phi2,weight\n";
    for (std::size_t i = 0; i < gs.phi.size(); ++i) {
        const double w = std::pow(gs.grid.r(i), gs.grid.n_dim - 1) * gs.grid.h;
        out << gs.grid.r(i) << ',' << gs.phi[i] << ',' << gs.phi[i] * gs.phi[i] << ',' << w << '\n';
    }
}

inline void write_spectrum_csv(const Spectrum& sp, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(17);
    out << "index,eigenvalue\n";
    for (std::size_t j = 0; j < sp.values.size(); ++j) out << j << ',' << sp.values[j] << '\n';
}

}  // namespace iucert
