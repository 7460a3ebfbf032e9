#include <gtest/gtest.h>

#include <cmath>

#include "iucert/iu.hpp"

using namespace iucert;

namespace {

SandwichParams sandwich(double k, int m, double r0, double d = 1.0) {
    SandwichParams sw;
    sw.d = d;
    sw.k = k;
    sw.m = m;
    sw.R_m = 1.0;
    sw.r0 = r0;
    return sw;
}

IUParams params(double k, double r0) {
    IUParams P;
    P.sw = sandwich(k, 1, r0);
    P.C_rosen = 0.5;
    P.ball = 2.0;
    return P;
}

}  // namespace

TEST(Horizon, UnitCaseIsE) {
    // k=2, m=1, r0=1: (√2)(e^{1-½ln2} - 1 + 1) = e
    EXPECT_NEAR(horizon_T(sandwich(2.0, 1, 1.0)), std::exp(1.0), 1e-13);
}

TEST(Horizon, ClosedFormMatchesQuadrature) {
    for (auto sw : {sandwich(2.0, 1, 1.0), sandwich(3.0, 1, 7.5), sandwich(1.5, 2, 20.0, 0.5), sandwich(2.5, 1, 0.2)}) {
        const double a = inv_f_tail(sw, kHalfLn2);
        EXPECT_NEAR(inv_f_tail_quadrature(sw, kHalfLn2), a, 1e-9 * a);
    }
}

TEST(Horizon, XiInvertsTail) {
    const auto sw = sandwich(3.0, 1, 4.0);
    const double T = horizon_T(sw);
    EXPECT_EQ(xi_of_t(sw, T), 0.0);
    for (double frac : {0.9, 0.5, 0.1, 1e-3}) {
        const double xi = xi_of_t(sw, frac * T);
        EXPECT_GT(xi, 0.0);
        EXPECT_NEAR(kSqrt2 / sw.d * inv_f_tail(sw, kHalfLn2 + xi), frac * T, 1e-10 * frac * T);
    }
    EXPECT_THROW(xi_of_t(sw, 1.01 * T), DomainError);
}

TEST(Schedule, InverseOfGRoundTrips) {
    const auto P = params(3.0, 4.0);
    const double t = 0.7 * horizon_T(P.sw);
    const double xi = xi_of_t(P.sw, t);
    for (double s : schedule_grid(t, 16)) {
        const auto pt = schedule_at(P, t, s, xi);
        EXPECT_NEAR(G_of_logp(P.sw, xi, pt.log_p), s, 1e-9 * t);
        if (s > 0.0) {
            // G(p) = s  ⇔  ½ln p + ξ(t) = ½ln2 + ξ(t - s)
            EXPECT_NEAR(pt.log_p, std::log(2.0) + 2.0 * (xi_of_t(P.sw, t - s) - xi), 1e-7 * pt.log_p);
        }
    }
}

TEST(Schedule, EpsDecreasesAndNIncreases) {
    const auto P = params(3.0, 4.0);
    const double t = 0.5 * horizon_T(P.sw);
    const auto S = build_schedule(P, t, 32);
    ASSERT_EQ(S.samples.size(), 32u);
    for (std::size_t j = 1; j < S.samples.size(); ++j) {
        EXPECT_LE(S.samples[j].eps, S.samples[j - 1].eps);
        EXPECT_GE(S.samples[j].N, S.samples[j - 1].N);
    }
    EXPECT_LE(S.samples.back().N, S.M * (1 + 1e-9));
    EXPECT_GT(S.samples.back().N, 0.5 * S.M);
}

TEST(Schedule, GammaTermIdentity) {
    // g∘f = exp turns the γ part of N into √2·e^{ξ(t)}
    auto check = [](const SandwichParams& sw, double frac) {
        const double t = frac * horizon_T(sw);
        const double want = kSqrt2 * std::exp(xi_of_t(sw, t));
        EXPECT_NEAR(gamma_term_integral(sw, t), want, 1e-9 * want);
    };
    for (double frac : {1.0, 0.5, 0.05}) {
        check(sandwich(3.0, 1, 4.0), frac);
        check(sandwich(2.0, 1, 1.0), frac);
    }
    // ξ grows like exp(c·t^{-1/(k-1)}) for m = 2, so e^ξ overflows quickly
    for (double frac : {1.0, 0.5}) check(sandwich(3.0, 2, 20.0), frac);
}

TEST(Schedule, MDivergesOutsideMOneKAboveTwo) {
    EXPECT_THROW(M_of_t(params(2.0, 4.0), 0.1), ConvergenceError);
    auto P = params(3.0, 4.0);
    P.sw.m = 2;
    P.sw.r0 = 20.0;
    EXPECT_THROW(M_of_t(P, 0.01), ConvergenceError);
}

TEST(Schedule, MOracleWithoutGamma) {
    // with the γ term and the ε terms removed analytically, M reduces to
    // 2∫_2^∞ (c - (n/4)ln(ε/2))/q² dq; check the constant part: 2∫_2^∞ c/q² = c
    auto P = params(3.0, 4.0);
    const double t = 0.5 * horizon_T(P.sw);
    auto Q = P;
    Q.C_LS = 10.0;
    EXPECT_NEAR(M_of_t(Q, t) - M_of_t(P, t), 10.0, 1e-7);
}

TEST(Constant, CompositionPastHorizon) {
    const auto P = params(3.0, 4.0);
    const double T = horizon_T(P.sw);
    EXPECT_EQ(horizon_steps(0.5 * T, T), 0);
    EXPECT_EQ(horizon_steps(T, T), 0);
    EXPECT_EQ(horizon_steps(1.5 * T, T), 1);
    EXPECT_NEAR(iu_log_constant(P, 1.5 * T), M_of_t(P, 0.5 * T), 1e-12 * M_of_t(P, 0.5 * T));
    EXPECT_NEAR(iu_log_constant(P, 2.25 * T), M_of_t(P, 0.25 * T), 1e-12 * M_of_t(P, 0.25 * T));
}

TEST(Constant, SmallerTimeGivesLargerM) {
    const auto P = params(3.0, 4.0);
    const double T = horizon_T(P.sw);
    EXPECT_GT(M_of_t(P, 0.25 * T), M_of_t(P, 0.5 * T));
    EXPECT_GT(M_of_t(P, 0.5 * T), M_of_t(P, T));
}

TEST(Beta, MatchesDefinition) {
    const auto P = params(3.0, 4.0);
    const double eps = 0.01;
    const double want =
        eps / 2 - 3.0 / 4.0 * std::log(eps / 2) + gamma_of_eps(P.sw, eps / 2, P.C_rosen) + eps / 2 * P.ball;
    EXPECT_NEAR(beta_of_eps(P, eps), want, 1e-12 * std::abs(want));
    EXPECT_THROW(beta_of_eps(P, 0.0), DomainError);
}

TEST(Control, HarmonicRatioGrowsWithBox) {
    const auto rows = negative_control({4.0, 6.0, 8.0}, 1, [](double r) { return r * r; }, 0.01);
    ASSERT_EQ(rows.size(), 3u);
    EXPECT_GT(rows[1].ratio, rows[0].ratio);
    EXPECT_GT(rows[2].ratio, rows[1].ratio);
}
