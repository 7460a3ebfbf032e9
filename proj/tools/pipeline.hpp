#pragma once

// Stages of the certify run: conditions, discretization, Rosen, semigroup, IU.

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "config.hpp"
#include "io.hpp"
#include "iucert/iu.hpp"

namespace iucert::cli {

enum ExitCode : int {
    kOk = 0,
    kPotentialStage = 2,
    kConfigError = 3,
    kDiscretizeStage = 4,
    kIUStage = 5,
    kRosenSemigroupStage = 6,
};

struct StageFailure : Error {
    int code;
    StageFailure(int c, const std::string& what) : Error(what), code(c) {}
};

inline Json witness_json(const ConditionReport& rep) {
    Json w = Json::array();
    for (const auto& s : rep.witness_samples) w.push_back({{"condition", s.condition}, {"r", num(s.r)}, {"value", num(s.value)}});
    return w;
}

inline Json conditions_json(const ConditionReport& rep) {
    return {{"differentiable", rep.differentiable},
            {"iterated_log_positive", rep.iterated_log_positive},
            {"ratio_below_one", rep.ratio_below_one},
            {"decay_Qprime", rep.decay_Qprime},
            {"supercritical_r2", rep.supercritical_r2},
            {"sandwich_ordered", rep.sandwich_ordered},
            {"R_m", num(rep.R_m_found)},
            {"r2_threshold", num(rep.r2_threshold)},
            {"samples", rep.samples},
            {"witnesses", witness_json(rep)},
            {"all", rep.all()}};
}

struct SandwichChoice {
    ConditionReport report;
    SandwichParams sw;
};

/// Manual (d,k,m) from the config, or the first satisfiable candidate, preferring
/// m = 1 and k > 2, where the IU constant is finite.
inline SandwichChoice choose_sandwich(const Potential& p, const RunConfig& c) {
    ConditionOptions opt;
    if (!c.sandwich_auto) {
        auto rep = check_theorem_conditions(p, c.d, c.k, c.m, c.check_r_max, opt);
        return {rep, make_sandwich(p, rep, c.d, c.k, c.m)};
    }
    std::string last;
    for (int m : {1, 2})
        for (double k : {3.0, 2.5, 2.2, 2.0, 1.5, 1.2, 1.05}) {
            try {
                auto rep = check_theorem_conditions(p, 1.0, k, m, c.check_r_max, opt);
                return {rep, make_sandwich(p, rep, 1.0, k, m)};
            } catch (const NotSatisfiable& e) {
                last = e.what();
            } catch (const DomainError& e) {
                last = e.what();
            }
        }
    throw NotSatisfiable("no sandwich candidate satisfies the conditions: " + last);
}

inline Json sandwich_json(const SandwichParams& sw) {
    return {{"d", num(sw.d)}, {"k", num(sw.k)}, {"m", sw.m}, {"R_m", num(sw.R_m)}, {"r0", num(sw.r0)}};
}

struct Discretization {
    RadialGrid grid;
    DiscreteOperator op;
    GroundState gs;
    Spectrum sp;
    std::vector<double> q_nodes;
    double richardson = 0.0;
    bool sensitivity_warning = false;
};

inline Discretization discretize(const Potential& p, const RunConfig& c) {
    Discretization d;
    const double R = c.R_max ? *c.R_max : suggest_R_max(p);
    auto qf = [&p](double r) { return p.Q(r); };
    d.grid = make_grid(c.n_dim, R, c.N);
    d.op = assemble_operator(d.grid, qf);
    d.gs = ground_state(d.op, c.eigen_tol);
    d.sp = eigenpairs(d.op, std::min(c.K, d.grid.N), c.eigen_tol);
    for (double r : d.grid.nodes()) d.q_nodes.push_back(p.Q(r));
    const auto g2 = refine(d.grid);
    const auto g4 = refine(g2);
    const double e2 = ground_state(assemble_operator(g2, qf), c.eigen_tol).E0;
    const double e4 = ground_state(assemble_operator(g4, qf), c.eigen_tol).E0;
    d.richardson = richardson_ratio(d.gs.E0, e2, e4);
    d.sensitivity_warning = c.N < d.grid.N || !(d.richardson > 3.0 && d.richardson < 5.0);
    return d;
}

inline Json rosen_json(const RosenCertificate& rc) {
    Json entries = Json::array();
    for (const auto& e : rc.entries)
        entries.push_back({{"eps", num(e.eps)},
                           {"gamma", num(e.gamma)},
                           {"gamma_emp", num(e.gamma_emp)},
                           {"min_margin", num(e.min_margin)},
                           {"argmin_r", num(e.argmin_r)}});
    return {{"C", num(rc.C)},
            {"ball", num(rc.ball)},
            {"comparison_c", num(rc.comparison_c)},
            {"comparison_violations", rc.comparison_violations},
            {"R_ineq", num(rc.R_ineq)},
            {"sandwich_valid", rc.sandwich_valid},
            {"entries", entries},
            {"notes", rc.notes},
            {"valid", rc.valid()}};
}

inline GridFunction random_input(std::size_t n, std::mt19937& rng, bool nonneg) {
    std::uniform_real_distribution<double> u(nonneg ? 0.0 : -1.0, 1.0);
    GridFunction v(n);
    for (auto& x : v) x = u(rng);
    return v;
}

struct SemigroupOutcome {
    Json json;
    bool valid = true;
};

inline SemigroupOutcome semigroup_stage(const Discretization& d, const RunConfig& c) {
    SemigroupOutcome out;
    std::mt19937 rng(c.seed);
    Json contraction = Json::array();
    for (double t : {0.1, 1.0}) {
        ExactPropagator prop(d.op, t);
        double worst = 0.0;
        std::size_t runs = 0;
        for (int j = 0; j < 20; ++j) {
            const auto u = random_input(d.grid.N, rng, j % 2 == 0);
            try {
                const auto rep = contraction_report(d.gs, prop, u, t, {1.0, 2.0, kInf}, c.contraction_tol);
                for (const auto& e : rep.entries) worst = std::max(worst, e.ratio / e.bound);
            } catch (const ContractionViolation& e) {
                out.valid = false;
                worst = kInf;
            }
            ++runs;
        }
        contraction.push_back({{"t", t}, {"inputs", runs}, {"worst_ratio_over_bound", num(worst)}});
    }
    Json positivity = Json::array();
    for (double t : {0.01, 0.1, 1.0}) {
        ExactPropagator prop(d.op, t);
        std::size_t positive = 0, total = 0;
        for (std::size_t j = 0; j < 10; ++j) {
            GridFunction u(d.grid.N, 0.0);
            u[(j * d.grid.N) / 10] = 1.0;
            positive += positivity_check(prop, u, t);
            ++total;
        }
        out.valid = out.valid && positive == total;
        positivity.push_back({{"t", t}, {"inputs", total}, {"strictly_positive", positive}});
    }
    out.json = {{"contraction", contraction}, {"positivity", positivity}, {"valid", out.valid}};
    return out;
}

inline std::vector<GridFunction> iu_test_functions(const RadialGrid& g, std::mt19937& rng) {
    std::vector<GridFunction> v;
    for (int j = 0; j < 4; ++j) {
        const double c = g.R_max * j / 4.0;
        GridFunction f(g.N);
        for (std::size_t i = 0; i < g.N; ++i) f[i] = std::exp(-(g.r(i) - c) * (g.r(i) - c));
        v.push_back(f);
    }
    for (int j = 0; j < 4; ++j) v.push_back(random_input(g.N, rng, false));
    return v;
}

inline double calibrated_C_LS(const Discretization& d, const IUParams& P, const RunConfig& c) {
    std::mt19937 rng(c.seed + 1);
    std::vector<GridFunction> inputs;
    for (int j = 0; j < 3; ++j) inputs.push_back(random_input(d.grid.N, rng, true));
    ExactPropagator prop(d.op, 0.1);
    return std::max(0.0, calibrate_C_LS(d.op, d.gs, prop, inputs, c.eps_list, {2.0, 4.0}, P));
}

inline Json schedule_json(const IUSchedule& S) {
    Json pts = Json::array();
    for (const auto& s : S.samples)
        pts.push_back({{"s", num(s.s)}, {"log_p", num(s.log_p)}, {"eps", num(s.eps)}, {"N", num(s.N)}});
    return {{"t", num(S.t)},  {"T", num(S.T)},         {"xi", num(S.xi)}, {"M", num(S.M)},
            {"k", S.k},       {"log_C_t", num(S.log_C_t)}, {"samples", pts}};
}

inline std::function<double(double)> control_potential(const std::string& which) {
    if (which == "r4") return [](double r) { return r * r * r * r; };
    return [](double r) { return r * r; };
}

}  // namespace iucert::cli
