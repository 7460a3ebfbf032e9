#pragma once

// Bounding potentials Q: the families r^α, r²(ln r)^α, r²(ln r)²(ln ln r)^α
// and the general iterated one, plus tabulated data.  A(r) = ∫₀ʳ Q^{1/2}
// with a per-potential cache, the sandwich lower bound and the hypothesis
// checker.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "iucert/errors.hpp"
#include "iucert/quadrature.hpp"
#include "iucert/specialfn.hpp"

namespace iucert {

enum class Family { PowerAlpha, LogPower, LogLogPower, GeneralIterated, Tabulated };

inline const char* family_name(Family f) {
    switch (f) {
        case Family::PowerAlpha: return "power";
        case Family::LogPower: return "logpower";
        case Family::LogLogPower: return "loglogpower";
        case Family::GeneralIterated: return "iterated";
        case Family::Tabulated: return "tabulated";
    }
    return "?";
}

inline Family parse_family(const std::string& s) {
    if (s == "power" || s == "Q1") return Family::PowerAlpha;
    if (s == "logpower" || s == "Q2") return Family::LogPower;
    if (s == "loglogpower" || s == "Q3") return Family::LogLogPower;
    if (s == "iterated" || s == "Q4") return Family::GeneralIterated;
    if (s == "tabulated" || s == "table") return Family::Tabulated;
    throw ConfigError("unknown potential family '" + s + "'");
}

struct PotentialSpec {
    Family family = Family::PowerAlpha;
    double alpha = 4.0;
    int l = 0;  // iteration depth, only read for GeneralIterated
    std::vector<double> table_r;
    std::vector<double> table_q;
    std::vector<double> table_m;  // monotone cubic slopes, filled by prepare()

    static PotentialSpec power(double alpha) { return {Family::PowerAlpha, alpha, 0, {}, {}}; }
    static PotentialSpec log_power(double alpha) { return {Family::LogPower, alpha, 1, {}, {}}; }
    static PotentialSpec loglog_power(double alpha) { return {Family::LogLogPower, alpha, 2, {}, {}}; }
    static PotentialSpec iterated(double alpha, int l) { return {Family::GeneralIterated, alpha, l, {}, {}}; }

    static PotentialSpec tabulated(std::vector<double> r, std::vector<double> q) {
        PotentialSpec s{Family::Tabulated, 0.0, 0, std::move(r), std::move(q), {}};
        s.prepare();
        return s;
    }

    void prepare();

    /// number of logarithms in the leading factor
    int depth() const {
        switch (family) {
            case Family::PowerAlpha: return 0;
            case Family::LogPower: return 1;
            case Family::LogLogPower: return 2;
            case Family::GeneralIterated: return l;
            case Family::Tabulated: return -1;
        }
        return 0;
    }

    void validate() const {
        if (family == Family::Tabulated) {
            if (table_r.size() < 2 || table_r.size() != table_q.size())
                throw InvalidPotential("tabulated potential needs at least two (r, Q) rows");
            for (std::size_t i = 0; i < table_r.size(); ++i) {
                if (i > 0 && !(table_r[i] > table_r[i - 1]))
                    throw InvalidPotential("tabulated potential: r must be strictly increasing");
                if (!(table_q[i] > 0.0)) throw InvalidPotential("tabulated potential: Q must be positive");
            }
            if (table_r.front() != 0.0) throw InvalidPotential("tabulated potential must start at r = 0");
            return;
        }
        if (!(alpha > 2.0)) throw InvalidPotential("alpha must exceed 2");
        if (depth() < 0 || depth() > 4) throw InvalidPotential("iteration depth l must lie in 0..4");
    }
};

/// exp applied l times to 1, so that ln^{(l)}(floor) = 1; zero for l = 0.
inline double domain_floor(const PotentialSpec& s) {
    const int l = s.depth();
    if (l <= 0) return 0.0;
    double v = 1.0;
    for (int i = 0; i < l; ++i) v = std::exp(v);
    return v;
}

namespace detail {

inline double pchip_end_slope(double h0, double h1, double d0, double d1) {
    double m = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if (m * d0 <= 0.0) return 0.0;
    if (d0 * d1 < 0.0 && std::abs(m) > 3.0 * std::abs(d0)) return 3.0 * d0;
    return m;
}

// Fritsch-Carlson monotone cubic slopes (the PCHIP variant).
inline std::vector<double> pchip_slopes(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    std::vector<double> m(n, 0.0);
    if (n == 2) {
        m[0] = m[1] = (y[1] - y[0]) / (x[1] - x[0]);
        return m;
    }
    std::vector<double> h(n - 1), d(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        h[i] = x[i + 1] - x[i];
        d[i] = (y[i + 1] - y[i]) / h[i];
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        if (d[i - 1] * d[i] <= 0.0) continue;
        const double w1 = 2.0 * h[i] + h[i - 1];
        const double w2 = h[i] + 2.0 * h[i - 1];
        m[i] = (w1 + w2) / (w1 / d[i - 1] + w2 / d[i]);
    }
    m[0] = pchip_end_slope(h[0], h[1], d[0], d[1]);
    m[n - 1] = pchip_end_slope(h[n - 2], h[n - 3], d[n - 2], d[n - 3]);
    return m;
}

inline double pchip_eval(const std::vector<double>& x, const std::vector<double>& y, const std::vector<double>& m,
                         double r) {
    if (r < x.front() || r > x.back())
        throw DomainError("tabulated potential evaluated outside [" + std::to_string(x.front()) + ", " +
                          std::to_string(x.back()) + "]");
    auto it = std::upper_bound(x.begin(), x.end(), r);
    std::size_t i = (it == x.begin()) ? 0 : static_cast<std::size_t>(it - x.begin()) - 1;
    if (i >= x.size() - 1) i = x.size() - 2;
    const double h = x[i + 1] - x[i];
    const double t = (r - x[i]) / h;
    const double t2 = t * t, t3 = t2 * t;
    return (2 * t3 - 3 * t2 + 1) * y[i] + (t3 - 2 * t2 + t) * h * m[i] + (-2 * t3 + 3 * t2) * y[i + 1] +
           (t3 - t2) * h * m[i + 1];
}

// Q and Q' for the closed-form families above their floor.
inline std::pair<double, double> eval_closed(const PotentialSpec& s, double r) {
    const int l = s.depth();
    double logq = 0.0;
    double dlog = 0.0;  // d/dr ln Q
    double v = r;
    double chain = 1.0;  // ∏_{j≤p} ln^{(j)} r
    for (int p = 0; p < l; ++p) {
        chain *= v;
        logq += 2.0 * std::log(v);
        dlog += 2.0 / chain;
        v = std::log(v);
    }
    chain *= v;
    logq += s.alpha * std::log(v);
    dlog += s.alpha / chain;
    const double q = std::exp(logq);
    return {q, q * dlog};
}

}  // namespace detail

inline void PotentialSpec::prepare() {
    validate();
    if (family == Family::Tabulated) table_m = detail::pchip_slopes(table_r, table_q);
}

/// Q(r) and Q'(r).  Below the domain floor of a log family the potential is
/// continued by (Q(floor) - 1)(r/floor)² + 1.
inline std::pair<double, double> eval_Q(const PotentialSpec& s, double r) {
    if (!(r >= 0.0)) throw DomainError("eval_Q: r must be nonnegative");
    if (s.family == Family::Tabulated) {
        const std::vector<double> local =
            s.table_m.size() == s.table_r.size() ? std::vector<double>{} : detail::pchip_slopes(s.table_r, s.table_q);
        const std::vector<double>& slopes = local.empty() ? s.table_m : local;
        const double q = detail::pchip_eval(s.table_r, s.table_q, slopes, r);
        const double h = 1e-6 * std::max(1.0, r);
        const double lo = std::max(s.table_r.front(), r - h);
        const double hi = std::min(s.table_r.back(), r + h);
        const double dq = (detail::pchip_eval(s.table_r, s.table_q, slopes, hi) -
                           detail::pchip_eval(s.table_r, s.table_q, slopes, lo)) /
                          (hi - lo);
        return {q, dq};
    }
    if (s.family == Family::PowerAlpha) {
        if (r == 0.0) return {0.0, 0.0};
        const double q = std::pow(r, s.alpha);
        return {q, s.alpha * q / r};
    }
    const double fl = domain_floor(s);
    if (r >= fl) return detail::eval_closed(s, r);
    const double qf = detail::eval_closed(s, fl).first;
    const double c = (qf - 1.0) / (fl * fl);
    return {c * r * r + 1.0, 2.0 * c * r};
}

inline double Q_of(const PotentialSpec& s, double r) { return eval_Q(s, r).first; }

/// A PotentialSpec plus the append-only cache of A(r).
class Potential {
public:
    explicit Potential(PotentialSpec spec, double tol = 1e-10)
        : spec_(std::move(spec)), tol_(tol), cache_(std::make_shared<Cache>()) {
        spec_.prepare();
    }

    const PotentialSpec& spec() const { return spec_; }
    std::pair<double, double> eval(double r) const { return eval_Q(spec_, r); }
    double Q(double r) const { return eval_Q(spec_, r).first; }

    /// A(r) = ∫₀ʳ Q(t)^{1/2} dt, integrated piecewise on [x, 2x] panels
    /// (breaking at the log-family floor) and cached at panel ends.
    double A(double r) const {
        if (!(r >= 0.0)) throw DomainError("cumulative_sqrtQ: r must be nonnegative");
        if (r == 0.0) return 0.0;
        std::lock_guard<std::mutex> lock(cache_->mu);
        auto& m = cache_->values;
        if (m.empty()) m.emplace(0.0, 0.0);
        auto it = m.upper_bound(r);
        --it;
        double x = it->first;
        double acc = it->second;
        if (x == r) return acc;
        const double fl = domain_floor(spec_);
        while (x < r) {
            double next = (x < 1.0) ? 1.0 : 2.0 * x;
            if (fl > x && fl < next) next = fl;
            const bool last = next >= r;
            if (last) next = r;
            acc += segment(x, next);
            x = next;
            if (!last) m.emplace(x, acc);
        }
        return acc;
    }

    double tol() const { return tol_; }

private:
    struct Cache {
        std::mutex mu;
        std::map<double, double> values;
    };

    double segment(double a, double b) const {
        quad::Options opt;
        opt.rel_tol = tol_;
        auto f = [&](double t) { return std::sqrt(Q(t)); };
        return quad::simpson(f, a, b, opt).value;
    }

    PotentialSpec spec_;
    double tol_;
    std::shared_ptr<Cache> cache_;
};

inline double cumulative_sqrtQ(const Potential& p, double r) { return p.A(r); }

struct SandwichParams {
    double d = 1.0;
    double k = 2.0;
    int m = 1;
    double R_m = 0.0;
    double r0 = 0.0;  // ln A(R_m)

    AuxParams aux() const { return {k, m, r0}; }

    void validate() const {
        if (!(d > 0.0 && d <= 1.0)) throw DomainError("sandwich: d must lie in (0, 1]");
        if (!(k > 1.0)) throw DomainError("sandwich: k must exceed 1");
        if (m < 1) throw DomainError("sandwich: m must be >= 1");
        if (!(R_m > 0.0)) throw DomainError("sandwich: R_m must be positive");
        if (!(r0 > 0.0)) throw DomainError("sandwich: r0 = ln A(R_m) must be positive");
    }
};

/// L(r) = d·A(r)·f_{k,m-1}(ln A(r)), valid for r ≥ R_m.
inline double lower_bound(const Potential& p, const SandwichParams& sw, double r) {
    if (r < sw.R_m) throw DomainError("lower_bound: r below R_m");
    const double a = p.A(r);
    if (!(a > 0.0)) throw DomainError("lower_bound: A(r) must be positive");
    const double la = std::log(a);
    if (!(iter_log(sw.m - 1, la) > 0.0)) throw DomainError("lower_bound: ln^(m-1)(ln A(r)) <= 0");
    return sw.d * a * f_km(sw.k, sw.m - 1, la);
}

struct Witness {
    std::string condition;
    double r = 0.0;
    double value = 0.0;
};

struct ConditionReport {
    bool differentiable = false;
    bool iterated_log_positive = false;
    bool ratio_below_one = false;
    bool decay_Qprime = false;
    bool supercritical_r2 = false;
    bool sandwich_ordered = false;
    double R_m_found = 0.0;
    double r2_threshold = 0.0;  // first sample from which r² < Q(r) holds on the sampled tail
    std::size_t samples = 0;
    std::vector<Witness> witness_samples;

    bool all() const {
        return differentiable && iterated_log_positive && ratio_below_one && decay_Qprime && supercritical_r2;
    }
};

struct ConditionOptions {
    std::size_t samples = 4096;
    double tail_fraction = 0.10;
    double r_min = 0.0;  // 0: start at max(1, floor) or the first positive table node
    bool throw_if_unsatisfied = true;
};

/// f_{k,m-1}(ln Q(r))·r·Q(r)^{-1/2}, or +inf where the iterated log is undefined.
inline double theorem_ratio(const Potential& p, double k, int m, double r) {
    const double q = p.Q(r);
    const double lq = std::log(q);
    double v = lq;
    for (int i = 0; i < m - 1; ++i) {
        if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
        v = std::log(v);
    }
    if (!(v > 0.0)) return std::numeric_limits<double>::infinity();
    return std::exp(log_f_km(k, m - 1, lq) + std::log(r) - 0.5 * lq);
}

/// Smallest sampled R_m ≤ r_max from which every hypothesis holds on the
/// log-spaced sample tail.
inline ConditionReport check_theorem_conditions(const Potential& p, double d, double k, int m, double r_max,
                                                const ConditionOptions& opt = {}) {
    if (!(k > 1.0)) throw DomainError("check_theorem_conditions: k must exceed 1");
    if (m < 1) throw DomainError("check_theorem_conditions: m must be >= 1");
    if (!(d > 0.0 && d <= 1.0)) throw DomainError("check_theorem_conditions: d must lie in (0, 1]");
    const auto& s = p.spec();
    double r_lo = opt.r_min;
    if (r_lo <= 0.0) {
        if (s.family == Family::Tabulated) {
            r_lo = s.table_r[1];
        } else {
            r_lo = std::max(1.0, domain_floor(s) * (1.0 + 1e-12));
        }
    }
    if (s.family == Family::Tabulated) r_max = std::min(r_max, s.table_r.back());
    if (!(r_max > r_lo)) throw NotSatisfiable("check_theorem_conditions: r_max must exceed the sampling start");
    const std::size_t n = std::max<std::size_t>(opt.samples, 16);

    std::vector<double> r(n), ratio(n), decay(n), la(n), q(n);
    std::vector<char> ok(n), sup(n);
    for (std::size_t i = 0; i < n; ++i) {
        r[i] = r_lo * std::pow(r_max / r_lo, double(i) / double(n - 1));
        const auto [qi, dqi] = p.eval(r[i]);
        q[i] = qi;
        const double a = p.A(r[i]);
        double v = a;
        bool ii = true;
        for (int j = 0; j < m; ++j) {
            if (!(v > 0.0)) {
                ii = false;
                break;
            }
            v = std::log(v);
        }
        ii = ii && v > 0.0;
        la[i] = v;
        ratio[i] = theorem_ratio(p, k, m, r[i]);
        decay[i] = dqi * std::pow(qi, -1.5);
        sup[i] = r[i] * r[i] < qi;
        ok[i] = ii && ratio[i] > 0.0 && ratio[i] < 1.0 && sup[i] && std::isfinite(decay[i]);
    }

    ConditionReport rep;
    rep.samples = n;
    std::size_t start = n;
    while (start > 0 && ok[start - 1]) --start;
    std::size_t sup_start = n;
    while (sup_start > 0 && sup[sup_start - 1]) --sup_start;
    if (sup_start < n) rep.r2_threshold = r[sup_start];

    const bool found = start < n && (n - start) >= 2;
    if (found) {
        rep.R_m_found = r[start];
        rep.differentiable = true;  // closed forms are smooth; PCHIP is C¹
        rep.iterated_log_positive = true;
        rep.supercritical_r2 = true;
        const std::size_t tail = std::max<std::size_t>(2, std::size_t(opt.tail_fraction * double(n - start)));
        const std::size_t t0 = n - tail;
        bool ratio_dec = true, decay_dec = true;
        for (std::size_t i = t0 + 1; i < n; ++i) {
            ratio_dec = ratio_dec && ratio[i] <= ratio[i - 1];
            decay_dec = decay_dec && decay[i] <= decay[i - 1];
        }
        rep.ratio_below_one = ratio_dec;
        rep.decay_Qprime = decay_dec && decay[n - 1] >= 0.0;

        // L(r) ≤ r·Q^{1/2}·f(ln Q) < Q on the verified tail
        SandwichParams sw{d, k, m, rep.R_m_found, std::log(p.A(rep.R_m_found))};
        bool ordered = true;
        for (std::size_t i = start; i < n; ++i) {
            double lb = 0.0;
            try {
                lb = lower_bound(p, sw, r[i]);
            } catch (const DomainError&) {
                ordered = false;
                break;
            }
            const double mid = ratio[i] * q[i];
            ordered = ordered && lb <= mid * (1.0 + 1e-12) && mid < q[i];
        }
        rep.sandwich_ordered = ordered;

        for (std::size_t i : {start, start + (n - start) / 2, n - 1}) {
            rep.witness_samples.push_back({"iterated_log", r[i], la[i]});
            rep.witness_samples.push_back({"ratio", r[i], ratio[i]});
            rep.witness_samples.push_back({"Qprime_Q^-3/2", r[i], decay[i]});
            rep.witness_samples.push_back({"Q - r^2", r[i], q[i] - r[i] * r[i]});
        }
    }
    if (opt.throw_if_unsatisfied && !(found && rep.all())) {
        std::ostringstream os;
        os << "no R_m <= " << r_max << " satisfies the hypotheses for " << family_name(s.family)
           << " alpha=" << s.alpha << " k=" << k << " m=" << m;
        if (found) os << " (tail monotonicity failed)";
        throw NotSatisfiable(os.str());
    }
    return rep;
}

/// Builds the sandwich parameters from a successful report.
inline SandwichParams make_sandwich(const Potential& p, const ConditionReport& rep, double d, double k, int m) {
    SandwichParams sw{d, k, m, rep.R_m_found, std::log(p.A(rep.R_m_found))};
    sw.validate();
    return sw;
}

/// Reads a two-column CSV (r, Q); a non-numeric first line is a header.
inline PotentialSpec load_tabulated_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open potential table '" + path + "'");
    PotentialSpec s;
    s.family = Family::Tabulated;
    std::string line;
    bool first = true;
    while (std::getline(in, line)) {
        if (line.empty() || line[0] == '#') continue;
        std::replace(line.begin(), line.end(), ',', ' ');
        std::istringstream ls(line);
        double r = 0.0, q = 0.0;
        if (!(ls >> r >> q)) {
            if (first) {
                first = false;
                continue;
            }
            throw ConfigError("malformed row in '" + path + "': " + line);
        }
        first = false;
        s.table_r.push_back(r);
        s.table_q.push_back(q);
    }
    s.prepare();
    return s;
}

}  // namespace iucert
