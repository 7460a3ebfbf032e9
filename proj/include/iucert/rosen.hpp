#pragma once

// Subsolution ψ = exp(-√2·A), the radial inequality it satisfies on the
// tail, the comparison ψ ≤ cφ, calibration of C and the certificates
// -ln φ ≤ εq + γ(ε).

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "iucert/discretize.hpp"
#include "iucert/errors.hpp"
#include "iucert/potentials.hpp"
#include "iucert/quadrature.hpp"
#include "iucert/roots.hpp"
#include "iucert/specialfn.hpp"

namespace iucert {

inline constexpr double kSqrt2 = std::numbers::sqrt2;

/// -ln ψ(r) = √2·A(r)
inline double neg_log_psi(const Potential& p, double r) { return kSqrt2 * p.A(r); }

inline double subsolution_psi(const Potential& p, double r) { return std::exp(-neg_log_psi(p, r)); }

/// Q'/Q^{3/2} + (n-1)/(r Q^{1/2})
inline double radial_bracket(const Potential& p, int n_dim, double r) {
    const auto [q, dq] = p.eval(r);
    return dq * std::pow(q, -1.5) + (n_dim - 1) / (r * std::sqrt(q));
}

/// (ψ'' + (n-1)/r ψ') / (Qψ) = 2 - Q'/(√2 Q^{3/2}) - √2(n-1)/(r Q^{1/2})
inline double radial_factor(const Potential& p, int n_dim, double r) {
    const auto [q, dq] = p.eval(r);
    return 2.0 - dq * std::pow(q, -1.5) / kSqrt2 - kSqrt2 * (n_dim - 1) / (r * std::sqrt(q));
}

/// Finite-difference value of (ψ'' + (n-1)/r ψ')/(Qψ) at r with step h.
/// ψ(r±h)/ψ(r) is built from the local increments of A, so no global
/// quadrature error enters the second difference.
inline double radial_factor_fd(const Potential& p, int n_dim, double r, double h) {
    quad::Options opt;
    opt.rel_tol = 1e-13;
    auto sq = [&](double t) { return std::sqrt(p.Q(t)); };
    const double dp = quad::simpson(sq, r, r + h, opt).value;
    const double dm = quad::simpson(sq, r - h, r, opt).value;
    const double up = std::exp(-kSqrt2 * dp);
    const double um = std::exp(kSqrt2 * dm);
    const double second = (std::expm1(-kSqrt2 * dp) + std::expm1(kSqrt2 * dm)) / (h * h);
    const double first = (up - um) / (2.0 * h);
    return (second + (n_dim - 1) / r * first) / p.Q(r);
}

struct RadialInequalityReport {
    double R_ineq = 0.0;
    double min_factor = 0.0;   // over verified nodes, should stay ≥ 1
    double max_bracket = 0.0;  // |bracket| over verified nodes, < 1/2
    std::size_t nodes = 0;
};

/// Smallest grid node from which |bracket| < 1/2 holds on every later node,
/// with the factor ≥ 1 confirmed on all of them.
inline RadialInequalityReport verify_radial_inequality(const Potential& p, const RadialGrid& g) {
    std::vector<double> br(g.N);
    for (std::size_t i = 0; i < g.N; ++i) br[i] = radial_bracket(p, g.n_dim, g.r(i));
    std::size_t start = g.N;
    while (start > 0 && std::abs(br[start - 1]) < 0.5) --start;
    if (start >= g.N) throw NotSatisfiable("radial inequality: no grid radius qualifies");
    RadialInequalityReport rep;
    rep.R_ineq = g.r(start);
    rep.min_factor = std::numeric_limits<double>::infinity();
    for (std::size_t i = start; i < g.N; ++i) {
        const double f = radial_factor(p, g.n_dim, g.r(i));
        rep.min_factor = std::min(rep.min_factor, f);
        rep.max_bracket = std::max(rep.max_bracket, std::abs(br[i]));
        if (!(f >= 1.0))
            throw NotSatisfiable("radial inequality: factor " + std::to_string(f) + " < 1 at r=" +
                                 std::to_string(g.r(i)));
    }
    rep.nodes = g.N - start;
    return rep;
}

struct ComparisonResult {
    double c = 0.0;
    double R = 0.0;
    std::size_t checked = 0;
    std::vector<double> violations;  // radii where ψ̃ > cφ(1+slack)
};

inline constexpr double kComparisonSlack = 1e-6;

/// c = max ψ̃/φ over nodes in (R, R+delta], then ψ̃ ≤ cφ checked on every node
/// beyond R.  ψ̃ = ψ - ψ(R_max) vanishes at the Dirichlet wall like φ does.
inline ComparisonResult comparison_constant(const GroundState& gs, const Potential& p, double R, double delta,
                                            bool throw_on_failure = true) {
    const auto& g = gs.grid;
    if (!(R + delta < g.R_max)) throw DomainError("comparison_constant: need R + delta < R_max");
    const double psi_wall = subsolution_psi(p, g.R_max);
    ComparisonResult res;
    res.R = R;
    std::vector<double> psit(g.N);
    for (std::size_t i = 0; i < g.N; ++i) psit[i] = subsolution_psi(p, g.r(i)) - psi_wall;
    for (std::size_t i = 0; i < g.N; ++i) {
        const double r = g.r(i);
        if (r > R && r <= R + delta) res.c = std::max(res.c, psit[i] / gs.phi[i]);
    }
    if (!(res.c > 0.0)) throw DomainError("comparison_constant: no node in (R, R+delta]");
    for (std::size_t i = 0; i < g.N; ++i) {
        if (!(g.r(i) > R)) continue;
        ++res.checked;
        if (psit[i] > res.c * gs.phi[i] * (1.0 + kComparisonSlack)) res.violations.push_back(g.r(i));
    }
    if (throw_on_failure && !res.violations.empty())
        throw ComparisonFailure("comparison ψ <= cφ fails at " + std::to_string(res.violations.size()) +
                                " nodes, first r=" + std::to_string(res.violations.front()));
    return res;
}

/// C = max_i(-ln φ_i - √2·A(r_i)).
inline double calibrate_C(const GroundState& gs, const Potential& p) {
    double C = -std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < gs.phi.size(); ++i)
        C = std::max(C, -std::log(gs.phi[i]) - neg_log_psi(p, gs.grid.r(i)));
    return C;
}

/// γ(ε) = √2·g(√2/(d·ε)) + C
inline double gamma_of_eps(const SandwichParams& sw, double eps, double C) {
    if (!(eps > 0.0)) throw DomainError("gamma_of_eps: eps must be positive");
    return kSqrt2 * g_inverse(sw.aux(), kSqrt2 / (sw.d * eps)) + C;
}

struct SandwichCheck {
    bool valid = false;
    double first_violation = 0.0;
    double min_lower_gap = 0.0;  // min (q - L)/q
    double min_upper_gap = 0.0;  // min (Q - q)/Q
    std::size_t samples = 0;
};

/// L ≤ q ≤ Q on log-spaced samples of [R_m, r_hi].
inline SandwichCheck check_sandwich(const Potential& p, const SandwichParams& sw,
                                    const std::function<double(double)>& q, double r_hi,
                                    std::size_t samples = 4096) {
    SandwichCheck res;
    res.min_lower_gap = res.min_upper_gap = std::numeric_limits<double>::infinity();
    r_hi = std::max(r_hi, sw.R_m);
    const std::size_t n = std::max<std::size_t>(samples, 2);
    res.valid = true;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = (r_hi == sw.R_m) ? sw.R_m : sw.R_m * std::pow(r_hi / sw.R_m, double(i) / double(n - 1));
        const double qi = q(r);
        const double Qi = p.Q(r);
        const double Li = lower_bound(p, sw, r);
        res.min_lower_gap = std::min(res.min_lower_gap, (qi - Li) / qi);
        res.min_upper_gap = std::min(res.min_upper_gap, (Qi - qi) / Qi);
        if ((Li > qi || qi > Qi) && res.valid) {
            res.valid = false;
            res.first_violation = r;
        }
        ++res.samples;
    }
    return res;
}

/// B = max over r ≤ R_m of (d·A·f(ln A) - q)⁺, with f the extended auxiliary
/// function.  Young's inequality gives √2A ≤ ε·d·A·f(ln A) + √2·g(√2/(dε)),
/// and inside the ball d·A·f(ln A) ≤ q + B.
inline double ball_term(const Potential& p, const SandwichParams& sw, const std::function<double(double)>& q,
                        std::size_t samples = 4096) {
    const AuxParams aux = sw.aux();
    double B = 0.0;
    for (std::size_t i = 1; i <= samples; ++i) {
        const double r = sw.R_m * double(i) / double(samples);
        const double a = p.A(r);
        if (!(a > 0.0)) continue;
        B = std::max(B, sw.d * a * f_extended(aux, std::log(a)) - q(r));
    }
    return B;
}

/// Smallest R with exp(-√2·A(R)) ≤ level.
inline double suggest_R_max(const Potential& p, double level = 1e-14) {
    const double target = -std::log(level) / kSqrt2;
    roots::BisectOptions opt;
    opt.x_tol = 1e-10;
    return roots::solve_increasing([&](double r) { return r <= 0.0 ? 0.0 : p.A(r); }, target, 1.0, 1.0, opt);
}

struct RosenEntry {
    double eps = 0.0;
    double gamma = std::numeric_limits<double>::quiet_NaN();
    double gamma_emp = 0.0;
    double min_margin = std::numeric_limits<double>::quiet_NaN();
    double argmin_r = 0.0;
};

struct RosenCertificate {
    double C = 0.0;
    double ball = 0.0;  // γ(ε) carries an extra ε·ball
    double comparison_c = 0.0;
    std::size_t comparison_violations = 0;
    double R_ineq = 0.0;
    bool sandwich_valid = false;
    std::vector<RosenEntry> entries;
    std::vector<std::string> notes;

    bool valid() const {
        if (!sandwich_valid || entries.empty()) return false;
        for (const auto& e : entries)
            if (!(e.min_margin >= 0.0) || !(e.gamma > 0.0)) return false;
        return true;
    }
};

inline const std::vector<double>& default_eps_list() {
    static const std::vector<double> v{1.0, 0.3, 0.1, 0.03, 0.01};
    return v;
}

struct RosenOptions {
    double sandwich_r_hi = 1e8;
    bool require_sandwich = false;  // throw SandwichViolation instead of flagging
};

/// Builds the certificate for a ground state computed from q.  Without a
/// valid sandwich only the empirical γ_emp(ε) = max(-ln φ - εq) is reported.
inline RosenCertificate rosen_certificate(const GroundState& gs, const std::vector<double>& q_nodes,
                                          const std::function<double(double)>& q, const Potential& p,
                                          const std::optional<SandwichParams>& sw, const std::vector<double>& eps_list,
                                          const RosenOptions& opt = {}) {
    const auto& g = gs.grid;
    if (q_nodes.size() != g.N) throw DomainError("rosen_certificate: need one q sample per node");
    RosenCertificate cert;
    cert.C = calibrate_C(gs, p);

    if (sw) {
        const auto chk = check_sandwich(p, *sw, q, std::max(opt.sandwich_r_hi, g.R_max));
        bool on_grid = true;
        for (std::size_t i = 0; i < g.N; ++i)
            if (g.r(i) >= sw->R_m && q_nodes[i] > p.Q(g.r(i))) on_grid = false;
        cert.sandwich_valid = chk.valid && on_grid;
        if (!cert.sandwich_valid) {
            if (opt.require_sandwich)
                throw SandwichViolation("sandwich L <= q <= Q fails at r=" + std::to_string(chk.first_violation));
            cert.notes.push_back("sandwich fails at r=" + std::to_string(chk.first_violation));
        }
        cert.ball = ball_term(p, *sw, q);
        if (sw->d == 1.0) cert.notes.push_back("d = 1 is outside the open interval used for the gamma formula");
    } else {
        cert.notes.push_back("no sandwich parameters; only empirical gamma reported");
    }

    try {
        const auto ri = verify_radial_inequality(p, g);
        cert.R_ineq = ri.R_ineq;
        const double delta = 2.0 * g.h;
        if (ri.R_ineq + delta < g.R_max) {
            const auto cmp = comparison_constant(gs, p, ri.R_ineq, delta, false);
            cert.comparison_c = cmp.c;
            cert.comparison_violations = cmp.violations.size();
        }
    } catch (const NotSatisfiable& e) {
        cert.notes.push_back(e.what());
    }

    for (double eps : eps_list) {
        RosenEntry e;
        e.eps = eps;
        e.gamma_emp = -std::numeric_limits<double>::infinity();
        for (std::size_t i = 0; i < g.N; ++i) e.gamma_emp = std::max(e.gamma_emp, -std::log(gs.phi[i]) - eps * q_nodes[i]);
        if (sw && cert.sandwich_valid) {
            e.gamma = gamma_of_eps(*sw, eps, cert.C) + eps * cert.ball;
            e.min_margin = std::numeric_limits<double>::infinity();
            for (std::size_t i = 0; i < g.N; ++i) {
                const double m = eps * q_nodes[i] + e.gamma + std::log(gs.phi[i]);
                if (m < e.min_margin) {
                    e.min_margin = m;
                    e.argmin_r = g.r(i);
                }
            }
        }
        cert.entries.push_back(e);
    }
    return cert;
}

}  // namespace iucert
