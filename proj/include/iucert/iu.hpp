#pragma once

// The L² → L^∞ iteration schedule: T, ξ(t), ε_t(p), G, p(s), N(s), M(t),
// the constant C_t = e^{M}, the certificate against the computed semigroup
// and the harmonic-oscillator negative control.
//
// Every integral over p is taken in x = ½ln p + ξ, where dp/p = 2dx and
// p^{-2}dp = 2e^{-2(x-ξ)}dx.  p(s) leaves double range long before s
// reaches t, so the schedule stores ln p.

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "iucert/discretize.hpp"
#include "iucert/errors.hpp"
#include "iucert/potentials.hpp"
#include "iucert/quadrature.hpp"
#include "iucert/roots.hpp"
#include "iucert/rosen.hpp"
#include "iucert/semigroup.hpp"
#include "iucert/specialfn.hpp"

namespace iucert {

inline const double kHalfLn2 = 0.5 * std::numbers::ln2;

struct IUParams {
    SandwichParams sw;
    int n_dim = 3;
    double C_rosen = 0.0;
    double ball = 0.0;  // γ(ε) = √2 g(√2/(dε)) + C_rosen + ε·ball
    double C_LS = 0.0;
};

inline double gamma_full(const IUParams& P, double eps) { return gamma_of_eps(P.sw, eps, P.C_rosen) + eps * P.ball; }

/// β(ε) = ε/2 - (n/4)ln(ε/2) + γ(ε/2) + C_LS
inline double beta_of_eps(const IUParams& P, double eps) {
    if (!(eps > 0.0)) throw DomainError("beta_of_eps: eps must be positive");
    return eps / 2.0 - P.n_dim / 4.0 * std::log(eps / 2.0) + gamma_full(P, eps / 2.0) + P.C_LS;
}

/// ∫_a^∞ f(r)^{-1} dr for the extended auxiliary function, in closed form.
inline double inv_f_tail(const SandwichParams& sw, double a) {
    const double r0 = sw.r0;
    const double k = sw.k;
    auto upper = [&](double x) { return std::pow(iter_log(sw.m - 1, x), 1.0 - k) / (k - 1.0); };
    if (a >= r0) return upper(a);
    const double fr0 = f_km(k, sw.m - 1, r0);
    return r0 * std::expm1(1.0 - a / r0) / fr0 + upper(r0);
}

/// Same integral by adaptive quadrature (m ≤ 2).
inline double inv_f_tail_quadrature(const SandwichParams& sw, double a, double rel_tol = 1e-12) {
    const AuxParams aux = sw.aux();
    quad::Options opt;
    opt.rel_tol = rel_tol;
    double total = 0.0;
    double lo = a;
    if (a < sw.r0) {
        total += quad::simpson([&](double r) { return 1.0 / f_extended(aux, r); }, a, sw.r0, opt).value;
        lo = sw.r0;
    }
    if (sw.m == 1) {
        total += quad::power_tail([&](double r) { return 1.0 / f_km(sw.k, 0, r); }, lo, sw.k, opt).value;
    } else if (sw.m == 2) {
        // r = e^y turns 1/((ln r)^k r) into y^{-k}; f is evaluated up to y = Y
        const double Y = std::max(50.0, 2.0 * std::log(lo));
        auto h = [&](double y) { return std::exp(y - log_f_km(sw.k, 1, std::exp(y))); };
        total += quad::simpson(h, std::log(lo), Y, opt).value + std::pow(Y, 1.0 - sw.k) / (sw.k - 1.0);
    } else {
        throw DomainError("inv_f_tail_quadrature: only m <= 2 supported");
    }
    return total;
}

/// T = (√2/d)·∫_{½ln2}^∞ f^{-1}
inline double horizon_T(const SandwichParams& sw) { return kSqrt2 / sw.d * inv_f_tail(sw, kHalfLn2); }

/// ξ ≥ 0 with (√2/d)∫_{½ln2+ξ}^∞ f^{-1} = t.
inline double xi_of_t(const SandwichParams& sw, double t) {
    const double T = horizon_T(sw);
    if (!(t > 0.0) || t > T * (1.0 + 1e-14)) throw DomainError("xi_of_t: need 0 < t <= T");
    if (t >= T) return 0.0;
    auto h = [&](double xi) { return -kSqrt2 / sw.d * inv_f_tail(sw, kHalfLn2 + xi); };
    const double xi = roots::solve_increasing(h, -t, 1.0, 1.0);
    if (std::abs(-h(xi) - t) > 1e-10 * t) throw ConvergenceError("xi_of_t: root not resolved");
    return std::max(xi, 0.0);
}

/// ε_t(p) = 1/(√2·d·f(½ln p + ξ)), given ln p.
inline double eps_t_of_logp(const SandwichParams& sw, double xi, double log_p) {
    return 1.0 / (kSqrt2 * sw.d * f_extended(sw.aux(), 0.5 * log_p + xi));
}

/// G(p) = ∫_2^p ε_t(q)/q dq by quadrature, given ln p.
inline double G_of_logp(const SandwichParams& sw, double xi, double log_p, double rel_tol = 1e-13) {
    const double x0 = kHalfLn2 + xi;
    const double x1 = 0.5 * log_p + xi;
    if (x1 <= x0) return 0.0;
    quad::Options opt;
    opt.rel_tol = rel_tol;
    const AuxParams aux = sw.aux();
    auto f = [&](double x) { return 1.0 / f_extended(aux, x); };
    double v = 0.0;
    if (x0 < sw.r0 && x1 > sw.r0) {
        v = quad::simpson(f, x0, sw.r0, opt).value + quad::simpson(f, sw.r0, x1, opt).value;
    } else {
        v = quad::simpson(f, x0, x1, opt).value;
    }
    return kSqrt2 / sw.d * v;
}

/// 4·β(ε_t)·e^{-2(x-ξ)}: the integrand of N in the x variable.
inline double N_integrand(const IUParams& P, double xi, double x) {
    if (!std::isfinite(x)) return 0.0;
    const auto& sw = P.sw;
    const AuxParams aux = sw.aux();
    const double lf = log_f_extended(aux, x);
    const double eps = std::exp(-lf) / (kSqrt2 * sw.d);
    const double damp = -2.0 * (x - xi);
    // γ(ε/2) = √2·g(2√2/(dε)) + C_rosen + (ε/2)·ball, and 2√2/(dε) = 4f(x)
    const double log_g = log_g_of_log(aux, std::log(4.0) + lf);
    const double rest = eps / 2.0 - P.n_dim / 4.0 * std::log(eps / 2.0) + P.C_rosen + eps / 2.0 * P.ball + P.C_LS;
    return 4.0 * (std::exp(std::log(kSqrt2) + log_g + damp) + rest * std::exp(damp));
}

/// Decay rate of N_integrand in x; throws when M(t) is infinite.
inline double N_decay_rate(const SandwichParams& sw) {
    if (sw.m != 1 || !(sw.k > 2.0))
        throw ConvergenceError("M(t) diverges: the gamma(eps/2) term grows like p^{c/2} with c >= 2 unless m = 1 and "
                               "k > 2 (got k=" +
                               std::to_string(sw.k) + ", m=" + std::to_string(sw.m) + ")");
    return 2.0 - std::pow(4.0, 1.0 / sw.k);
}

inline double N_between(const IUParams& P, double xi, double xa, double xb, double rel_tol = 1e-10) {
    quad::Options opt;
    opt.rel_tol = rel_tol;
    auto f = [&](double x) { return N_integrand(P, xi, x); };
    std::vector<double> cuts{xa};
    // kinks of the integrand: x = r0 (f) and x = r0 - r0·ln4 (g(4f))
    for (double c : {P.sw.r0 * (1.0 - std::log(4.0)), P.sw.r0})
        if (c > xa && c < xb) cuts.push_back(c);
    cuts.push_back(xb);
    double v = 0.0;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i) v += quad::simpson(f, cuts[i], cuts[i + 1], opt).value;
    return v;
}

/// M(t) = 2∫_2^∞ β(ε_t(q))/q² dq, as a finite piece plus an exponential tail.
inline double M_of_t(const IUParams& P, double t) {
    const double rate = N_decay_rate(P.sw);
    const double xi = xi_of_t(P.sw, t);
    const double x0 = kHalfLn2 + xi;
    const double xs = std::max(x0, P.sw.r0) + 1.0;
    quad::Options opt;
    opt.rel_tol = 1e-10;
    const double head = N_between(P, xi, x0, xs);
    const double tail = quad::exp_tail([&](double x) { return N_integrand(P, xi, x); }, xs, rate, opt).value;
    return head + tail;
}

/// ∫_2^∞ g(1/(√2 d ε_t(p))) p^{-2} dp by quadrature; equals √2·e^{ξ(t)}.
inline double gamma_term_integral(const SandwichParams& sw, double t) {
    const double xi = xi_of_t(sw, t);
    const AuxParams aux = sw.aux();
    quad::Options opt;
    opt.rel_tol = 1e-10;
    auto f = [&](double x) {
        if (!std::isfinite(x)) return 0.0;
        return 2.0 * std::exp(log_g_of_log(aux, log_f_extended(aux, x)) - 2.0 * (x - xi));
    };
    return quad::exp_tail(f, kHalfLn2 + xi, 1.0, opt).value;
}

struct SchedulePoint {
    double s = 0.0;
    double log_p = std::numbers::ln2;
    double eps = 0.0;
    double N = 0.0;
};

/// p(s) = G^{-1}(s) by bracketed root-finding on ln p, ε_t(p(s)) and N(s).
inline SchedulePoint schedule_at(const IUParams& P, double t, double s, double xi) {
    if (!(s >= 0.0) || !(s < t)) throw DomainError("schedule_at: need 0 <= s < t");
    SchedulePoint pt;
    pt.s = s;
    if (s > 0.0) {
        auto h = [&](double lp) { return lp <= std::numbers::ln2 ? 0.0 : G_of_logp(P.sw, xi, lp); };
        roots::BisectOptions opt;
        opt.x_tol = 1e-13;
        pt.log_p = roots::solve_increasing(h, s, std::numbers::ln2 + 1.0, 1.0, opt);
        pt.log_p = std::max(pt.log_p, std::numbers::ln2);
    }
    pt.eps = eps_t_of_logp(P.sw, xi, pt.log_p);
    const double x0 = kHalfLn2 + xi;
    const double x1 = 0.5 * pt.log_p + xi;
    pt.N = (x1 > x0) ? N_between(P, xi, x0, x1) : 0.0;
    return pt;
}

inline SchedulePoint schedule_at(const IUParams& P, double t, double s) { return schedule_at(P, t, s, xi_of_t(P.sw, t)); }

/// s_j = t·sin(jπ/(2n)), j < n: clustered toward t.
inline std::vector<double> schedule_grid(double t, std::size_t n = 64) {
    std::vector<double> s(n);
    for (std::size_t j = 0; j < n; ++j) s[j] = t * std::sin(double(j) * std::numbers::pi / (2.0 * double(n)));
    return s;
}

struct IUSchedule {
    IUParams params;
    double t = 0.0;
    double T = 0.0;
    double xi = 0.0;
    double M = 0.0;
    double log_C_t = 0.0;  // = M, or M(t - kT) past the horizon
    int k = 0;
    std::vector<SchedulePoint> samples;

    double C_t() const { return std::exp(log_C_t); }
};

/// k with kT < t ≤ (k+1)T
inline int horizon_steps(double t, double T) {
    int k = static_cast<int>(std::ceil(t / T)) - 1;
    return std::max(k, 0);
}

/// ln C_t: M(t) for t ≤ T, else M(t - kT).
inline double iu_log_constant(const IUParams& P, double t) {
    if (!(t > 0.0)) throw DomainError("iu_constant: t must be positive");
    const double T = horizon_T(P.sw);
    const int k = horizon_steps(t, T);
    return M_of_t(P, std::min(t - k * T, T));
}

inline double iu_constant(const IUParams& P, double t) { return std::exp(iu_log_constant(P, t)); }

inline IUSchedule build_schedule(const IUParams& P, double t, std::size_t n_samples = 64) {
    IUSchedule S;
    S.params = P;
    S.t = t;
    S.T = horizon_T(P.sw);
    S.k = horizon_steps(t, S.T);
    const double te = std::min(t - S.k * S.T, S.T);
    S.xi = xi_of_t(P.sw, te);
    S.M = M_of_t(P, te);
    S.log_C_t = S.M;
    for (double s : schedule_grid(te, n_samples)) S.samples.push_back(schedule_at(P, te, s, S.xi));
    return S;
}

/// C_LS = max over samples of -residual·p/(2‖w‖^p) with the C-free β.
inline double calibrate_C_LS(const DiscreteOperator& op, const GroundState& gs, const ExactPropagator& prop,
                             const std::vector<GridFunction>& inputs, const std::vector<double>& eps_list,
                             const std::vector<double>& p_list, const IUParams& P_without_C) {
    IUParams P = P_without_C;
    P.C_LS = 0.0;
    double C = -std::numeric_limits<double>::infinity();
    for (const auto& u : inputs)
        for (double eps : eps_list) {
            const double beta = beta_of_eps(P, eps);
            for (double p : p_list) {
                const auto r = log_sobolev_residual(op, gs, prop, u, prop.t(), eps, p, beta);
                C = std::max(C, -r.residual * p / (2.0 * r.norm_p));
            }
        }
    return C;
}

struct IUCheck {
    double t = 0.0;
    double log_C_t = 0.0;
    double worst_ratio = 0.0;  // max over v of sup_i |e^{-tH}v|_i/(φ_i‖v‖₂)
    double kernel_ratio = 0.0;
    double log_slack = 0.0;    // ln C_t - ln max(worst, kernel)
    std::size_t functions = 0;
};

/// sup_i |e^{-tH}v|_i/(φ_i‖v‖₂) against C_t for each test function, plus the kernel route.
inline IUCheck iu_certificate(const GroundState& gs, const ExactPropagator& prop, double log_C_t,
                              const std::vector<GridFunction>& tests, bool throw_on_violation = true) {
    IUCheck res;
    res.t = prop.t();
    res.log_C_t = log_C_t;
    const auto& g = gs.grid;
    for (const auto& v : tests) {
        double n2 = 0.0;
        for (std::size_t i = 0; i < g.N; ++i) n2 += v[i] * v[i] * std::pow(g.r(i), g.n_dim - 1) * g.h;
        const auto out = prop.propagate(v);
        double sup = 0.0;
        for (std::size_t i = 0; i < g.N; ++i) sup = std::max(sup, std::abs(out[i]) / gs.phi[i]);
        res.worst_ratio = std::max(res.worst_ratio, sup / std::sqrt(n2));
        ++res.functions;
    }
    res.kernel_ratio = kernel_iu_ratio(gs, heat_kernel(prop));
    const double worst = std::max(res.worst_ratio, res.kernel_ratio);
    res.log_slack = log_C_t - std::log(worst);
    if (throw_on_violation && std::log(worst) > log_C_t + std::log1p(1e-6))
        throw CertificateViolation("observed ratio " + std::to_string(worst) + " exceeds C_t = exp(" +
                                   std::to_string(log_C_t) + ")");
    return res;
}

struct ControlRow {
    double R_max = 0.0;
    double ratio = 0.0;
};

/// sup_r |v_mode(r)|/φ(r) on grids of growing R_max with a fixed spacing.
inline std::vector<ControlRow> negative_control(const std::vector<double>& R_list, std::size_t mode,
                                                const std::function<double(double)>& q, double h = 0.005,
                                                int n_dim = 3) {
    std::vector<ControlRow> rows;
    for (double R : R_list) {
        const auto N = static_cast<std::size_t>(std::llround(R / h)) - 1;
        const auto g = make_grid(n_dim, R, N);
        const auto op = assemble_operator(g, q);
        const auto sp = eigenpairs(op, mode + 1, 1e-10);
        double sup = 0.0;
        for (std::size_t i = 0; i < g.N; ++i) sup = std::max(sup, std::abs(sp.psi[mode][i]) / sp.psi[0][i]);
        rows.push_back({R, sup});
    }
    return rows;
}

}  // namespace iucert
