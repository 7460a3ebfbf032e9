#include <gtest/gtest.h>

#include <cmath>

#include "iucert/rosen.hpp"

using namespace iucert;

namespace {

struct QuarticRun {
    Potential p{PotentialSpec::power(4.0)};
    RadialGrid g;
    GroundState gs;
    std::vector<double> qn;
    QuarticRun() {
        g = make_grid(3, suggest_R_max(p), 3000);
        auto op = assemble_operator(g, [&](double r) { return p.Q(r); });
        qn = op.q;
        gs = ground_state(op);
    }
};

const QuarticRun& quartic() {
    static QuarticRun run;
    return run;
}

}  // namespace

TEST(Psi, Values) {
    Potential p(PotentialSpec::power(4.0));
    EXPECT_DOUBLE_EQ(subsolution_psi(p, 0.0), 1.0);
    EXPECT_NEAR(subsolution_psi(p, 1.0), std::exp(-kSqrt2 / 3.0), 1e-12);
    for (double r : {0.3, 1.7, 5.0}) EXPECT_NEAR(-std::log(subsolution_psi(p, r)), kSqrt2 * p.A(r), 1e-12 * p.A(r));
    EXPECT_GT(subsolution_psi(p, 1.0), subsolution_psi(p, 1.1));
}

TEST(RadialInequality, QuarticFactor) {
    Potential p(PotentialSpec::power(4.0));
    EXPECT_NEAR(radial_bracket(p, 3, 5.0), 6.0 / 125.0, 1e-15);
    EXPECT_NEAR(radial_factor(p, 3, 5.0), 2.0 - (4.0 / 125.0) / kSqrt2 - kSqrt2 * 2.0 / 125.0, 1e-14);
    auto g = make_grid(3, 20.0, 4000);
    auto rep = verify_radial_inequality(p, g);
    EXPECT_GE(rep.min_factor, 2.0 - 1.0 / kSqrt2);
    EXPECT_LT(rep.max_bracket, 0.5);
    EXPECT_NEAR(rep.R_ineq, std::cbrt(12.0), 2 * g.h);
}

TEST(RadialInequality, FiniteDifferenceCrossCheck) {
    Potential p(PotentialSpec::power(4.0));
    for (double r : {3.0, 4.0, 8.0}) {
        const double fa = radial_factor(p, 3, r);
        const double fd = radial_factor_fd(p, 3, r, 1e-3 / std::sqrt(p.Q(r)));
        EXPECT_GE(fd, 1.0 - 1e-6);
        EXPECT_NEAR(fd, fa, 1e-6 * fa) << r;
    }
}

TEST(Comparison, QuarticTail) {
    const auto& run = quartic();
    auto ri = verify_radial_inequality(run.p, run.g);
    auto cmp = comparison_constant(run.gs, run.p, ri.R_ineq, 2 * run.g.h);
    EXPECT_GT(cmp.c, 0.0);
    EXPECT_TRUE(cmp.violations.empty());
    EXPECT_GT(cmp.checked, 10u);
}

TEST(Comparison, FullTailIsTightAtArgmax) {
    const auto& run = quartic();
    const double R = 2.5;
    auto cmp = comparison_constant(run.gs, run.p, R, run.g.R_max - R - run.g.h / 2);
    EXPECT_TRUE(cmp.violations.empty());
}

TEST(Calibrate, MaxProperty) {
    const auto& run = quartic();
    const double C = calibrate_C(run.gs, run.p);
    double best = -1e300;
    for (std::size_t i = 0; i < run.g.N; i += 7) {
        const double v = -std::log(run.gs.phi[i]) - kSqrt2 * run.p.A(run.g.r(i));
        EXPECT_LE(v, C + 1e-12);
        best = std::max(best, v);
    }
    EXPECT_GT(best, C - 1.0);
}

TEST(Calibrate, StableUnderDoubledBox) {
    Potential p(PotentialSpec::power(4.0));
    auto q = [&](double r) { return p.Q(r); };
    const double R = suggest_R_max(p);
    auto a = ground_state(assemble_operator(make_grid(3, R, 3000), q));
    auto b = ground_state(assemble_operator(make_grid(3, 2 * R, 6001), q));
    const double ca = calibrate_C(a, p), cb = calibrate_C(b, p);
    EXPECT_LT(std::abs(ca - cb), 0.01 * std::abs(ca));
}

TEST(Gamma, RoundTripAndMonotone) {
    SandwichParams sw{1.0, 2.0, 1, 2.0, 1.0};
    const double C = 0.7;
    const double gam = gamma_of_eps(sw, 0.1, C);
    const double x = (gam - C) / kSqrt2;
    EXPECT_NEAR(f_extended(sw.aux(), std::log(x)), kSqrt2 / 0.1, 1e-10 * kSqrt2 / 0.1);
    double prev = 1e300;
    for (double eps : {0.01, 0.1, 1.0, 10.0, 1e3, 1e6}) {
        const double v = gamma_of_eps(sw, eps, C);
        EXPECT_LT(v, prev);
        prev = v;
    }
    EXPECT_NEAR(gamma_of_eps(sw, 1e12, C), C, 1e-6);
}

TEST(Certificate, QuarticValid) {
    const auto& run = quartic();
    auto rep = check_theorem_conditions(run.p, 1.0, 2.0, 1, 1e8);
    auto sw = make_sandwich(run.p, rep, 1.0, 2.0, 1);
    auto q = [&](double r) { return run.p.Q(r); };
    auto cert = rosen_certificate(run.gs, run.qn, q, run.p, sw, {1.0, 0.1, 0.01});
    EXPECT_TRUE(cert.sandwich_valid);
    EXPECT_TRUE(cert.valid());
    double prev_emp = -1e300;
    for (auto it = cert.entries.rbegin(); it != cert.entries.rend(); ++it) {
        EXPECT_GE(it->min_margin, 0.0) << it->eps;
        EXPECT_GE(it->gamma, it->gamma_emp) << it->eps;
        EXPECT_GE(prev_emp, -1e300);
        prev_emp = it->gamma_emp;
    }
    EXPECT_GE(cert.entries[2].gamma_emp, cert.entries[0].gamma_emp);
}

TEST(Certificate, HarmonicHasNoSandwich) {
    Potential p(PotentialSpec::power(4.0));
    auto g = make_grid(3, 12.0, 1200);
    auto q = [](double r) { return r * r; };
    auto op = assemble_operator(g, q);
    auto gs = ground_state(op);
    auto rep = check_theorem_conditions(p, 1.0, 2.0, 1, 1e8);
    auto sw = make_sandwich(p, rep, 1.0, 2.0, 1);
    auto cert = rosen_certificate(gs, op.q, q, p, sw, default_eps_list());
    EXPECT_FALSE(cert.sandwich_valid);
    EXPECT_FALSE(cert.valid());
    for (const auto& e : cert.entries) {
        EXPECT_TRUE(std::isnan(e.gamma));
        EXPECT_TRUE(std::isfinite(e.gamma_emp));
    }
    RosenOptions strict;
    strict.require_sandwich = true;
    EXPECT_THROW(rosen_certificate(gs, op.q, q, p, sw, {0.1}, strict), SandwichViolation);
}
