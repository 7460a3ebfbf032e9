// iucert: command-line front end.
//
//   iucert check-potential --config run.cfg
//   iucert certify         --config run.cfg --out DIR
//   iucert plotdata        --config run.cfg --out DIR

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "pipeline.hpp"

namespace fs = std::filesystem;
using namespace iucert;
using namespace iucert::cli;

namespace {

struct Overrides {
    std::string config;
    std::string out;
    std::string t;
    std::string eps;
    std::string grid;
    std::size_t modes = 0;
};

RunConfig load(const Overrides& o) {
    KeyValues kv;
    if (!o.config.empty()) kv = load_key_values(o.config);
    auto c = make_config(kv);
    if (!o.out.empty()) c.out_dir = o.out;
    if (!o.t.empty()) c.t_list = parse_times("--t", o.t);
    if (!o.eps.empty()) c.eps_list = parse_list("--eps", o.eps);
    if (!o.grid.empty()) {
        const auto parts = split(o.grid);
        if (parts.size() != 2) throw ConfigError("--grid expects N,R_max");
        c.N = parse_count("--grid", parts[0]);
        c.R_max = parse_number("--grid", parts[1]);
    }
    if (o.modes) c.K = o.modes;
    c.validate();
    return c;
}

Potential make_potential(const RunConfig& c) { return Potential(c.potential, c.quad_tol); }

int cmd_check_potential(const RunConfig& c) {
    const auto p = make_potential(c);
    Json doc = {{"potential", family_name(c.potential.family)}, {"alpha", num(c.potential.alpha)}};
    int code = kOk;
    try {
        const auto choice = choose_sandwich(p, c);
        doc["conditions"] = conditions_json(choice.report);
        doc["sandwich"] = sandwich_json(choice.sw);
        doc["satisfied"] = true;
    } catch (const NotSatisfiable& e) {
        ConditionOptions opt;
        opt.throw_if_unsatisfied = false;
        const auto rep = check_theorem_conditions(p, c.sandwich_auto ? 1.0 : c.d, c.sandwich_auto ? 3.0 : c.k,
                                                  c.sandwich_auto ? 1 : c.m, c.check_r_max, opt);
        doc["conditions"] = conditions_json(rep);
        doc["satisfied"] = false;
        doc["reason"] = e.what();
        code = kPotentialStage;
    }
    write_json(fs::path(c.out_dir) / "conditions.json", doc);
    std::cout << "check-potential: " << (code == kOk ? "satisfied" : "not satisfied") << "\n";
    return code;
}

struct CertifyRun {
    Json summary = Json::object();
    int code = kOk;

    void fail(int c, const std::string& stage, const std::string& why) {
        if (code == kOk) code = c;
        summary["failures"].push_back({{"stage", stage}, {"reason", why}});
    }
};

int cmd_certify(const RunConfig& c) {
    const fs::path out(c.out_dir);
    const auto p = make_potential(c);
    CertifyRun run;
    run.summary["failures"] = Json::array();

    SandwichChoice choice;
    try {
        choice = choose_sandwich(p, c);
    } catch (const NotSatisfiable& e) {
        run.fail(kPotentialStage, "potentials", e.what());
        run.summary["exit_code"] = run.code;
        write_json(out / "certificate.json", run.summary);
        std::cerr << "certify: " << e.what() << "\n";
        return run.code;
    }
    write_json(out / "conditions.json", {{"conditions", conditions_json(choice.report)},
                                         {"sandwich", sandwich_json(choice.sw)}});
    run.summary["sandwich"] = sandwich_json(choice.sw);

    Discretization d;
    try {
        d = discretize(p, c);
    } catch (const Error& e) {
        run.fail(kDiscretizeStage, "discretize", e.what());
        run.summary["exit_code"] = run.code;
        write_json(out / "certificate.json", run.summary);
        std::cerr << "certify: " << e.what() << "\n";
        return run.code;
    }
    {
        CsvTable gs({"r", "phi", "neg_log_phi"});
        for (std::size_t i = 0; i < d.grid.N; ++i) gs.add({d.grid.r(i), d.gs.phi[i], -std::log(d.gs.phi[i])});
        gs.write(out / "ground_state.csv");
        CsvTable sp({"index", "eigenvalue"});
        for (std::size_t j = 0; j < d.sp.values.size(); ++j) sp.add({double(j), d.sp.values[j]});
        sp.write(out / "spectrum.csv");
    }
    run.summary["discretization"] = {{"n_dim", d.grid.n_dim}, {"R_max", num(d.grid.R_max)}, {"N", d.grid.N},
                                     {"E0", num(d.gs.E0)},     {"richardson_ratio", num(d.richardson)},
                                     {"sensitivity_warning", d.sensitivity_warning}};

    const auto qf = [&p](double r) { return p.Q(r); };
    const auto rc = rosen_certificate(d.gs, d.q_nodes, qf, p, choice.sw, c.eps_list);
    write_json(out / "rosen.json", rosen_json(rc));
    run.summary["rosen_valid"] = rc.valid();
    if (!rc.valid()) run.fail(kRosenSemigroupStage, "rosen", "Rosen certificate has a negative margin or no sandwich");

    const auto sg = semigroup_stage(d, c);
    write_json(out / "semigroup.json", sg.json);
    run.summary["semigroup_valid"] = sg.valid;
    if (!sg.valid) run.fail(kRosenSemigroupStage, "semigroup", "contraction or positivity check failed");

    Json iu = Json::object();
    try {
        IUParams P{choice.sw, c.n_dim, rc.C, rc.ball, 0.0};
        P.C_LS = c.C_LS ? std::max(0.0, *c.C_LS) : calibrated_C_LS(d, P, c);
        iu["C_LS"] = num(P.C_LS);
        const double T = horizon_T(choice.sw);
        iu["T"] = num(T);
        iu["T_quadrature"] = choice.sw.m <= 2 ? num(kSqrt2 / choice.sw.d * inv_f_tail_quadrature(choice.sw, kHalfLn2))
                                              : Json(nullptr);
        std::mt19937 rng(c.seed + 2);
        const auto tests = iu_test_functions(d.grid, rng);
        Json checks = Json::array();
        bool ok = true;
        for (const auto& ts : c.t_list) {
            const double t = ts.resolve(T);
            const double lc = iu_log_constant(P, t);
            ExactPropagator prop(d.op, t);
            const auto chk = iu_certificate(d.gs, prop, lc, tests, false);
            const bool pass = chk.log_slack >= -std::log1p(1e-6);
            ok = ok && pass;
            checks.push_back({{"t", num(t)},
                              {"label", ts.label()},
                              {"log_C_t", num(lc)},
                              {"worst_ratio", num(chk.worst_ratio)},
                              {"kernel_ratio", num(chk.kernel_ratio)},
                              {"log_slack", num(chk.log_slack)},
                              {"pass", pass}});
        }
        iu["checks"] = checks;
        iu["schedule"] = schedule_json(build_schedule(P, std::min(c.t_list.front().resolve(T), T)));
        if (!ok) run.fail(kIUStage, "iu", "observed IU ratio exceeds C_t");
    } catch (const Error& e) {
        iu["error"] = e.what();
        run.fail(kIUStage, "iu", e.what());
    }
    if (!c.control_q.empty()) {
        const auto rows = negative_control(c.control_R, 1, control_potential(c.control_q));
        Json ctl = Json::array();
        bool increasing = true;
        for (std::size_t i = 0; i < rows.size(); ++i) {
            ctl.push_back({{"R_max", num(rows[i].R_max)}, {"ratio", num(rows[i].ratio)}});
            if (i > 0) increasing = increasing && rows[i].ratio > rows[i - 1].ratio;
        }
        iu["control"] = {{"q", c.control_q}, {"rows", ctl}, {"unbounded_trend", increasing}};
        if (increasing) run.fail(kIUStage, "iu", "negative control: eigenfunction ratio grows with R_max");
    }
    write_json(out / "iu.json", iu);

    run.summary["exit_code"] = run.code;
    write_json(out / "certificate.json", run.summary);
    write_json(out / "run_meta.json", {{"tool", "iucert"}, {"command", "certify"}, {"version", "0.1.0"}});
    std::cout << "certify: " << (run.code == kOk ? "all certificates valid" : "failed") << " (exit " << run.code
              << ")\n";
    return run.code;
}

int cmd_plotdata(const RunConfig& c) {
    const fs::path out(c.out_dir);
    const auto p = make_potential(c);
    const auto choice = choose_sandwich(p, c);
    const auto d = discretize(p, c);
    const auto qf = [&p](double r) { return p.Q(r); };
    const auto rc = rosen_certificate(d.gs, d.q_nodes, qf, p, choice.sw, c.eps_list);
    const double eps = c.eps_list.front();
    const double gamma = rc.entries.front().gamma;

    CsvTable profile({"r", "phi", "neg_log_phi", "eps_q_plus_gamma"});
    for (std::size_t i = 0; i < d.grid.N; ++i)
        profile.add({d.grid.r(i), d.gs.phi[i], -std::log(d.gs.phi[i]), eps * d.q_nodes[i] + gamma});
    profile.write(out / "profile.csv");

    IUParams P{choice.sw, c.n_dim, rc.C, rc.ball, c.C_LS ? std::max(0.0, *c.C_LS) : 0.0};
    const double T = horizon_T(choice.sw);
    CsvTable sched({"s", "log_p", "eps", "N"});
    CsvTable consts({"t", "log_C_t"});
    try {
        const auto S = build_schedule(P, std::min(c.t_list.front().resolve(T), T));
        for (const auto& s : S.samples) sched.add({s.s, s.log_p, s.eps, s.N});
        for (const auto& ts : c.t_list) consts.add({ts.resolve(T), iu_log_constant(P, ts.resolve(T))});
    } catch (const ConvergenceError& e) {
        std::cerr << "plotdata: " << e.what() << "\n";
    }
    sched.write(out / "schedule.csv");
    consts.write(out / "constants.csv");

    const double t = c.t_list.front().resolve(T);
    const auto km = heat_kernel(ExactPropagator(d.op, t));
    const std::size_t stride = std::max<std::size_t>(1, d.grid.N / 64);
    CsvTable heat({"r_i", "r_j", "ratio"});
    for (std::size_t i = 0; i < d.grid.N; i += stride)
        for (std::size_t j = 0; j < d.grid.N; j += stride)
            heat.add({d.grid.r(i), d.grid.r(j), km.k(i, j) / (d.gs.phi[i] * d.gs.phi[j])});
    heat.write(out / "kernel_ratio.csv");
    std::cout << "plotdata: wrote 4 files to " << out.string() << "\n";
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Intrinsic ultracontractivity certificates for radial Schrodinger operators"};
    app.require_subcommand(1);
    Overrides o;
    auto add_common = [&o](CLI::App* sub) {
        sub->add_option("--config", o.config, "key=value configuration file");
        sub->add_option("--out", o.out, "output directory");
        sub->add_option("--t", o.t, "comma-separated times; nT means n times the horizon");
        sub->add_option("--eps", o.eps, "comma-separated epsilon values");
        sub->add_option("--grid", o.grid, "N,R_max");
        sub->add_option("--modes", o.modes, "number of eigenpairs");
    };
    auto* check = app.add_subcommand("check-potential", "check the theorem conditions");
    auto* certify = app.add_subcommand("certify", "run the full pipeline and write certificates");
    auto* plot = app.add_subcommand("plotdata", "write CSV data for plots");
    for (auto* s : {check, certify, plot}) add_common(s);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : kConfigError;
    }
    RunConfig cfg;
    try {
        cfg = load(o);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const InvalidPotential& e) {
        std::cerr << "not satisfiable: " << e.what() << "\n";
        return kPotentialStage;
    }
    try {
        if (check->parsed()) return cmd_check_potential(cfg);
        if (certify->parsed()) return cmd_certify(cfg);
        return cmd_plotdata(cfg);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kConfigError;
    } catch (const NotSatisfiable& e) {
        std::cerr << "not satisfiable: " << e.what() << "\n";
        return kPotentialStage;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kDiscretizeStage;
    }
}
