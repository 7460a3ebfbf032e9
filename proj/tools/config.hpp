#pragma once

// Flat key=value run configuration with dotted section prefixes.

#include <cmath>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "iucert/errors.hpp"
#include "iucert/potentials.hpp"

namespace iucert::cli {

using KeyValues = std::map<std::string, std::string>;

inline std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos) return "";
    const auto e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

inline KeyValues parse_key_values(std::istream& in, const std::string& origin = "<config>") {
    KeyValues kv;
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
        line = trim(line);
        if (line.empty()) continue;
        const auto eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError(origin + ":" + std::to_string(lineno) + ": expected key=value");
        const auto key = trim(line.substr(0, eq));
        if (key.empty()) throw ConfigError(origin + ":" + std::to_string(lineno) + ": empty key");
        if (kv.count(key)) throw ConfigError(origin + ":" + std::to_string(lineno) + ": duplicate key '" + key + "'");
        kv[key] = trim(line.substr(eq + 1));
    }
    return kv;
}

inline KeyValues load_key_values(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config '" + path + "'");
    return parse_key_values(in, path);
}

inline double parse_number(const std::string& key, const std::string& v) {
    std::size_t pos = 0;
    double x = 0.0;
    try {
        x = std::stod(v, &pos);
    } catch (const std::exception&) {
        throw ConfigError(key + ": '" + v + "' is not a number");
    }
    if (pos != v.size() || !std::isfinite(x)) throw ConfigError(key + ": '" + v + "' is not a finite number");
    return x;
}

inline std::vector<std::string> split(const std::string& s, char sep = ',') {
    std::vector<std::string> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, sep)) out.push_back(trim(item));
    return out;
}

inline std::vector<double> parse_list(const std::string& key, const std::string& v) {
    std::vector<double> out;
    for (const auto& s : split(v)) out.push_back(parse_number(key, s));
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

/// A time entry: a number, or a multiple of the horizon written "T", "0.5T", "1.5T".
struct TimeSpec {
    double value = 0.0;
    bool in_T = false;

    double resolve(double T) const { return in_T ? value * T : value; }
    std::string label() const {
        std::ostringstream os;
        os << value;
        return in_T ? os.str() + "T" : os.str();
    }
};

inline std::vector<TimeSpec> parse_times(const std::string& key, const std::string& v) {
    std::vector<TimeSpec> out;
    for (auto s : split(v)) {
        TimeSpec ts;
        if (!s.empty() && s.back() == 'T') {
            ts.in_T = true;
            s.pop_back();
            ts.value = s.empty() ? 1.0 : parse_number(key, s);
        } else {
            ts.value = parse_number(key, s);
        }
        if (!(ts.value > 0.0)) throw ConfigError(key + ": times must be positive");
        out.push_back(ts);
    }
    if (out.empty()) throw ConfigError(key + ": empty list");
    return out;
}

struct RunConfig {
    PotentialSpec potential = PotentialSpec::power(4.0);
    std::string table_path;

    bool sandwich_auto = true;
    double d = 1.0;
    double k = 3.0;
    int m = 1;
    double check_r_max = 1e8;

    int n_dim = 3;
    std::optional<double> R_max;  // empty: decay-based choice
    std::size_t N = 400;
    std::size_t K = 60;

    std::vector<double> eps_list{1.0, 0.3, 0.1, 0.03, 0.01};
    std::vector<TimeSpec> t_list{{0.25, false}, {0.5, false}, {1.0, false}, {1.0, true}, {1.5, true}};

    double eigen_tol = 1e-10;
    double contraction_tol = 1e-9;
    double quad_tol = 1e-10;

    std::optional<double> C_LS;   // empty: calibrated
    std::string control_q;        // "", "r2" or "r4"
    std::vector<double> control_R{6.0, 9.0, 12.0};
    unsigned seed = 12345;

    std::string out_dir = "iucert_out";

    void validate() const {
        if (n_dim < 3) throw ConfigError("grid.n_dim must be >= 3");
        if (N < 1) throw ConfigError("grid.N must be >= 1");
        if (R_max && !(*R_max > 0.0)) throw ConfigError("grid.R_max must be positive");
        if (K < 1) throw ConfigError("modes.K must be >= 1");
        for (double tol : {eigen_tol, contraction_tol, quad_tol})
            if (!(tol > 0.0)) throw ConfigError("tolerances must be positive");
        for (double e : eps_list)
            if (!(e > 0.0)) throw ConfigError("rosen.eps must be positive");
        if (!sandwich_auto) {
            if (!(d > 0.0 && d <= 1.0)) throw ConfigError("sandwich.d must lie in (0, 1]");
            if (!(k > 1.0)) throw ConfigError("sandwich.k must exceed 1");
            if (m < 1) throw ConfigError("sandwich.m must be >= 1");
        }
        if (!(check_r_max > 1.0)) throw ConfigError("check.r_max must exceed 1");
        if (!control_q.empty() && control_q != "r2" && control_q != "r4")
            throw ConfigError("iu.control must be r2 or r4");
        try {
            potential.validate();
        } catch (const DomainError& e) {
            throw ConfigError(std::string("potential: ") + e.what());
        }
    }
};

inline const std::vector<std::string>& known_keys() {
    static const std::vector<std::string> keys{
        "potential.family", "potential.alpha", "potential.l", "potential.table",   "sandwich",
        "sandwich.d",       "sandwich.k",      "sandwich.m",  "check.r_max",       "grid.n_dim",
        "grid.R_max",       "grid.N",          "modes.K",     "rosen.eps",         "iu.t",
        "iu.C_LS",          "iu.control",      "iu.control_R", "tol.eigen",        "tol.contraction",
        "tol.quad",         "seed",            "output.dir"};
    return keys;
}

inline std::size_t parse_count(const std::string& key, const std::string& v) {
    const double x = parse_number(key, v);
    if (x < 0.0 || x != std::floor(x) || x > 1e9) throw ConfigError(key + ": expected a non-negative integer");
    return static_cast<std::size_t>(x);
}

inline RunConfig make_config(const KeyValues& kv) {
    for (const auto& [key, _] : kv) {
        bool ok = false;
        for (const auto& k : known_keys()) ok = ok || k == key;
        if (!ok) throw ConfigError("unknown key '" + key + "'");
    }
    auto get = [&](const std::string& key) -> std::optional<std::string> {
        auto it = kv.find(key);
        if (it == kv.end()) return std::nullopt;
        return it->second;
    };
    RunConfig c;
    const std::string fam = get("potential.family").value_or("power");
    Family f{};
    try {
        f = parse_family(fam);
    } catch (const Error& e) {
        throw ConfigError(std::string("potential.family: ") + e.what());
    }
    const double alpha = get("potential.alpha") ? parse_number("potential.alpha", *get("potential.alpha")) : 4.0;
    switch (f) {
        case Family::PowerAlpha: c.potential = PotentialSpec::power(alpha); break;
        case Family::LogPower: c.potential = PotentialSpec::log_power(alpha); break;
        case Family::LogLogPower: c.potential = PotentialSpec::loglog_power(alpha); break;
        case Family::GeneralIterated: {
            const auto l = get("potential.l") ? parse_count("potential.l", *get("potential.l")) : 0;
            c.potential = PotentialSpec::iterated(alpha, static_cast<int>(l));
            break;
        }
        case Family::Tabulated: {
            auto path = get("potential.table");
            if (!path) throw ConfigError("potential.table is required for tabulated potentials");
            c.table_path = *path;
            try {
                c.potential = load_tabulated_csv(*path);
            } catch (const ConfigError&) {
                throw;
            } catch (const Error& e) {
                throw ConfigError(std::string("potential.table: ") + e.what());
            }
            break;
        }
    }
    if (auto s = get("sandwich")) {
        if (*s != "auto" && *s != "manual") throw ConfigError("sandwich must be auto or manual");
        c.sandwich_auto = *s == "auto";
    }
    if (get("sandwich.d") || get("sandwich.k") || get("sandwich.m")) c.sandwich_auto = get("sandwich") == "auto";
    if (auto v = get("sandwich.d")) c.d = parse_number("sandwich.d", *v);
    if (auto v = get("sandwich.k")) c.k = parse_number("sandwich.k", *v);
    if (auto v = get("sandwich.m")) c.m = static_cast<int>(parse_count("sandwich.m", *v));
    if (auto v = get("check.r_max")) c.check_r_max = parse_number("check.r_max", *v);
    if (auto v = get("grid.n_dim")) c.n_dim = static_cast<int>(parse_count("grid.n_dim", *v));
    if (auto v = get("grid.R_max"); v && *v != "auto") c.R_max = parse_number("grid.R_max", *v);
    if (auto v = get("grid.N")) c.N = parse_count("grid.N", *v);
    if (auto v = get("modes.K")) c.K = parse_count("modes.K", *v);
    if (auto v = get("rosen.eps")) c.eps_list = parse_list("rosen.eps", *v);
    if (auto v = get("iu.t")) c.t_list = parse_times("iu.t", *v);
    if (auto v = get("iu.C_LS"); v && *v != "auto") c.C_LS = parse_number("iu.C_LS", *v);
    if (auto v = get("iu.control")) c.control_q = *v;
    if (auto v = get("iu.control_R")) c.control_R = parse_list("iu.control_R", *v);
    if (auto v = get("tol.eigen")) c.eigen_tol = parse_number("tol.eigen", *v);
    if (auto v = get("tol.contraction")) c.contraction_tol = parse_number("tol.contraction", *v);
    if (auto v = get("tol.quad")) c.quad_tol = parse_number("tol.quad", *v);
    if (auto v = get("seed")) c.seed = static_cast<unsigned>(parse_count("seed", *v));
    if (auto v = get("output.dir")) c.out_dir = *v;
    return c;
}

}  // namespace iucert::cli
