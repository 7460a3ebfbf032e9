// Acceptance run: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "iucert/iucert.hpp"

using namespace iucert;

namespace {

struct Outcome {
    bool pass = false;
    std::string detail;
};

std::string fmt(const char* f, auto... xs) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, xs...);
    return buf;
}

double elapsed(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

SandwichParams sandwich_for(const Potential& p, double k, int m) {
    const auto rep = check_theorem_conditions(p, 1.0, k, m, 1e8);
    return make_sandwich(p, rep, 1.0, k, m);
}

struct Q1Alpha4 {
    Potential p{PotentialSpec::power(4.0)};
    SandwichParams sw = sandwich_for(p, 3.0, 1);
};

const Q1Alpha4& q1a4() {
    static const Q1Alpha4 s;
    return s;
}

Outcome harmonic_oracle() {
    const auto t0 = std::chrono::steady_clock::now();
    const auto g = make_grid(3, 12.0, 2400);
    const auto op = assemble_operator(g, [](double r) { return r * r; });
    const auto gs = ground_state(op, 1e-12);
    const double c = std::sqrt(4.0 / std::sqrt(std::numbers::pi));
    double err = 0.0;
    for (std::size_t i = 0; i < g.N; ++i)
        if (g.r(i) <= 8.0) err = std::max(err, std::abs(gs.phi[i] - c * std::exp(-g.r(i) * g.r(i) / 2)));
    const double secs = elapsed(t0);
    const double de = std::abs(gs.E0 - 3.0);
    return {de <= 2e-3 && err <= 1e-3 && secs < 10.0,
            fmt("|E0-3|=%.2e (<=2e-3), sup|phi-phi_ref|=%.2e (<=1e-3), %.2fs (<10s)", de, err, secs)};
}

Outcome radial_inequality() {
    const double floor = 2.0 - 1.0 / std::sqrt(2.0);
    double worst_factor = kInf, worst_fd = 0.0;
    std::string where;
    for (const auto& spec : {PotentialSpec::power(3.0), PotentialSpec::power(4.0), PotentialSpec::log_power(3.0)}) {
        const Potential p(spec);
        const auto g = make_grid(3, 50.0, 5000);
        const auto rep = verify_radial_inequality(p, g);
        for (std::size_t i = 0; i < g.N; ++i) {
            const double r = g.r(i);
            if (r < rep.R_ineq) continue;
            const double F = radial_factor(p, 3, r);
            const double Ffd = radial_factor_fd(p, 3, r, 1e-3 / std::sqrt(p.Q(r)));
            worst_factor = std::min(worst_factor, F);
            worst_fd = std::max(worst_fd, std::abs(Ffd - F) / std::abs(F));
        }
        where += fmt("%s a=%g R_ineq=%.3g; ", family_name(spec.family), spec.alpha, rep.R_ineq);
    }
    return {worst_factor >= floor && worst_fd <= 1e-6,
            where + fmt("min factor=%.4f (>=%.4f), max FD rel diff=%.2e (<=1e-6)", worst_factor, floor, worst_fd)};
}

Outcome rosen_certificates() {
    bool ok = true;
    std::string detail;
    struct Case {
        PotentialSpec spec;
        double k;
    };
    for (const auto& cs : {Case{PotentialSpec::power(4.0), 3.0}, Case{PotentialSpec::log_power(3.0), 1.05}}) {
        const Potential p(cs.spec);
        const auto sw = sandwich_for(p, cs.k, 1);
        const auto g = make_grid(3, suggest_R_max(p), 400);
        const auto qf = [&p](double r) { return p.Q(r); };
        const auto op = assemble_operator(g, qf);
        const auto gs = ground_state(op, 1e-12);
        std::vector<double> qn;
        for (double r : g.nodes()) qn.push_back(p.Q(r));
        const auto rc = rosen_certificate(gs, qn, qf, p, sw, default_eps_list());
        double min_margin = kInf;
        bool dominates = true;
        for (const auto& e : rc.entries) {
            min_margin = std::min(min_margin, e.min_margin);
            dominates = dominates && e.gamma >= e.gamma_emp;
        }
        ok = ok && rc.valid() && min_margin >= 0.0 && dominates;
        detail += fmt("%s a=%g k=%g: min margin=%.3g, gamma>=gamma_emp %s; ", family_name(cs.spec.family),
                      cs.spec.alpha, cs.k, min_margin, dominates ? "yes" : "no");
    }
    return {ok, detail};
}

Outcome appendix_oracles() {
    const auto& sw = q1a4().sw;
    double worst_T = 0.0;
    for (const auto& s : {sw, SandwichParams{1.0, 2.0, 1, 1.0, 1.0}, SandwichParams{0.5, 1.5, 2, 1.0, 20.0}}) {
        const double closed = inv_f_tail(s, kHalfLn2);
        worst_T = std::max(worst_T, std::abs(inv_f_tail_quadrature(s, kHalfLn2) - closed) / closed);
    }
    const double T = horizon_T(sw);
    double worst_g = 0.0;
    for (double t : {T / 4, T / 2, T}) {
        const double want = kSqrt2 * std::exp(xi_of_t(sw, t));
        worst_g = std::max(worst_g, std::abs(gamma_term_integral(sw, t) - want) / want);
    }
    return {worst_T <= 1e-8 && worst_g <= 1e-6,
            fmt("T closed vs quadrature rel=%.2e (<=1e-8), gamma tail identity rel=%.2e (<=1e-6)", worst_T, worst_g)};
}

Outcome schedule_identities() {
    const auto& sw = q1a4().sw;
    IUParams P{sw, 3, 0.0, 0.0, 0.0};
    const double T = horizon_T(sw);
    double worst_int = 0.0, worst_inv = 0.0, worst_ode = 0.0;
    bool p0 = true;
    for (double t : {T / 2, T}) {
        const double xi = xi_of_t(sw, t);
        const double total = kSqrt2 / sw.d * inv_f_tail_quadrature(sw, kHalfLn2 + xi);
        worst_int = std::max(worst_int, std::abs(total - t) / t);
        const auto pt0 = schedule_at(P, t, 0.0, xi);
        p0 = p0 && std::exp(pt0.log_p) == 2.0;
        for (double s : schedule_grid(t, 64)) {
            const auto pt = schedule_at(P, t, s, xi);
            worst_inv = std::max(worst_inv, std::abs(G_of_logp(sw, xi, pt.log_p) - s));
            if (s <= 0.0) continue;
            // (ln p)' = 1/ε_t(p) along the schedule
            const double h = 1e-3 * std::min(s, t - s);
            const double lp = schedule_at(P, t, s + h, xi).log_p;
            const double lm = schedule_at(P, t, s - h, xi).log_p;
            const double lhs = (lp - lm) / (2 * h);
            worst_ode = std::max(worst_ode, std::abs(lhs * pt.eps - 1.0));
        }
    }
    return {worst_int <= 1e-8 && p0 && worst_inv <= 1e-9 && worst_ode < 1e-4,
            fmt("int eps/p rel=%.2e (<=1e-8), p(0)=2 %s, |G(p(s))-s|=%.2e (<=1e-9), ODE rel=%.2e (<1e-4)", worst_int,
                p0 ? "exact" : "NOT exact", worst_inv, worst_ode)};
}

struct Q1Grid {
    RadialGrid g;
    DiscreteOperator op;
    GroundState gs;
    explicit Q1Grid(std::size_t N) {
        const auto& p = q1a4().p;
        g = make_grid(3, suggest_R_max(p), N);
        op = assemble_operator(g, [&p](double r) { return p.Q(r); });
        gs = ground_state(op, 1e-12);
    }
};

Outcome contraction() {
    const Q1Grid s(300);
    std::mt19937 rng(2024);
    double worst = 0.0;
    std::size_t runs = 0;
    bool ok = true;
    for (double t : {0.1, 1.0}) {
        const ExactPropagator prop(s.op, t);
        for (int j = 0; j < 100; ++j) {
            const bool nonneg = j % 2 == 0;
            std::uniform_real_distribution<double> u(nonneg ? 0.0 : -1.0, 1.0);
            GridFunction v(s.g.N);
            for (auto& x : v) x = u(rng);
            try {
                const auto rep = contraction_report(s.gs, prop, v, t, {1.0, 2.0, kInf});
                for (const auto& e : rep.entries) worst = std::max(worst, e.ratio / e.bound);
            } catch (const ContractionViolation&) {
                ok = false;
            }
            ++runs;
        }
    }
    return {ok && worst <= 1.0 + 1e-9, fmt("%zu inputs, max ratio/bound=%.12f (<=1+1e-9)", runs, worst)};
}

Outcome positivity() {
    const Q1Grid s(300);
    std::size_t good = 0, total = 0;
    for (double t : {0.01, 0.1, 1.0}) {
        const ExactPropagator prop(s.op, t);
        for (std::size_t j = 0; j < 50; ++j) {
            GridFunction v(s.g.N, 0.0);
            const std::size_t a = (j * s.g.N) / 50;
            if (j % 2 == 0) {
                v[a] = 1.0;
            } else {
                for (std::size_t i = a; i < std::min(s.g.N, a + s.g.N / 10); ++i) v[i] = 1.0;
            }
            good += positivity_check(prop, v, t);
            ++total;
        }
    }
    return {good == total, fmt("%zu of %zu outputs strictly positive at every node", good, total)};
}

Outcome iu_bound() {
    const auto& base = q1a4();
    const Q1Grid coarse(400);
    const Q1Grid fine(801);
    IUParams P{base.sw, 3, 0.0, 0.0, 0.0};
    {
        std::vector<double> qn;
        for (double r : coarse.g.nodes()) qn.push_back(base.p.Q(r));
        const auto rc = rosen_certificate(coarse.gs, qn, [&](double r) { return base.p.Q(r); }, base.p, base.sw,
                                          default_eps_list());
        P.C_rosen = rc.C;
        P.ball = rc.ball;
    }
    const double T = horizon_T(base.sw);
    std::mt19937 rng(7);
    std::vector<GridFunction> tests;
    for (int j = 0; j < 8; ++j) {
        std::normal_distribution<double> n01;
        GridFunction v(coarse.g.N);
        for (std::size_t i = 0; i < coarse.g.N; ++i)
            v[i] = j < 4 ? std::exp(-std::pow(coarse.g.r(i) - j, 2)) : n01(rng);
        tests.push_back(v);
    }
    bool bound_ok = true;
    double worst_drift = 0.0, min_slack = kInf;
    for (double t : {0.25, 0.5, 1.0, T, 1.5 * T}) {
        const double lc = iu_log_constant(P, t);
        const auto chk = iu_certificate(coarse.gs, ExactPropagator(coarse.op, t), lc, tests, false);
        bound_ok = bound_ok && chk.log_slack >= -std::log1p(1e-6);
        min_slack = std::min(min_slack, chk.log_slack);
        const double kf = kernel_iu_ratio(fine.gs, heat_kernel(ExactPropagator(fine.op, t)));
        worst_drift = std::max(worst_drift, std::abs(kf - chk.kernel_ratio) / chk.kernel_ratio);
    }
    return {bound_ok && worst_drift <= 0.05,
            fmt("min ln C_t - ln observed=%.3g (>=0), kernel ratio N->2N drift=%.2f%% (<=5%%)", min_slack,
                100 * worst_drift)};
}

Outcome negative_control_check() {
    const auto harm = negative_control({6.0, 9.0, 12.0}, 1, [](double r) { return r * r; });
    const auto quart = negative_control({6.0, 9.0, 12.0}, 1, [](double r) { return r * r * r * r; });
    bool increasing = true;
    for (std::size_t i = 1; i < harm.size(); ++i) increasing = increasing && harm[i].ratio > harm[i - 1].ratio;
    const double growth = harm.back().ratio / harm.front().ratio;
    double lo = kInf, hi = 0.0;
    for (const auto& r : quart) lo = std::min(lo, r.ratio), hi = std::max(hi, r.ratio);
    const double variation = (hi - lo) / lo;
    return {increasing && growth > 10.0 && variation < 0.1,
            fmt("r^2 ratios %.3g, %.3g, %.3g (increasing %s, last/first=%.2f, need >10); r^4 variation=%.1f%% "
                "(need <10%%)",
                harm[0].ratio, harm[1].ratio, harm[2].ratio, increasing ? "yes" : "no", growth, 100 * variation)};
}

Outcome young_property() {
    const auto aux = q1a4().sw.aux();
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> e(-6.0, 6.0);
    std::size_t bad = 0;
    const std::size_t n = 10000;
    for (std::size_t j = 0; j < n; ++j) {
        const double a = std::pow(10.0, e(rng));
        const double b = std::pow(10.0, e(rng));
        if (young_bound(aux, a, b) < a * b) ++bad;
    }
    return {bad == 0, fmt("%zu violations in %zu random pairs", bad, n)};
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"eigensolver oracle (harmonic oscillator)", harmonic_oracle},
        {"radial inequality factor", radial_inequality},
        {"Rosen certificates", rosen_certificates},
        {"horizon and gamma tail oracles", appendix_oracles},
        {"schedule identities", schedule_identities},
        {"Lp contraction", contraction},
        {"positivity improving", positivity},
        {"IU bound and kernel ratio", iu_bound},
        {"negative control", negative_control_check},
        {"Young property", young_property},
    };
    int failed = 0;
    for (std::size_t i = 0; i < criteria.size(); ++i) {
        Outcome o;
        try {
            o = criteria[i].second();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        failed += !o.pass;
        std::printf("%s %2zu %s: %s\n", o.pass ? "PASS" : "FAIL", i + 1, criteria[i].first.c_str(), o.detail.c_str());
        std::fflush(stdout);
    }
    std::printf("%d of %zu criteria passed\n", int(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
