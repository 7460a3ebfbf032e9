#pragma once

// e^{-tH} on the radial grid, the weighted semigroup φ^{-1}e^{-tH}(φ·),
// L^p_μ norms, contraction and positivity checks, the heat kernel and the
// log-Sobolev residual.
//
// Two propagators: a truncated spectral sum over K eigenpairs, and the exact
// matrix exponential of the assembled operator.  The exact one writes
// e^{-τA} = e^{-τc}·e^{τ(cI-A)} with cI-A entrywise nonnegative, sums the
// Taylor series of the second factor (no cancellation) and squares, so tiny
// kernel entries keep their relative accuracy.

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <string>
#include <type_traits>
#include <vector>

#include "iucert/discretize.hpp"
#include "iucert/errors.hpp"

namespace iucert {

using GridFunction = std::vector<double>;

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// (Σ|u_i|^p μ_i)^{1/p}, μ_i = φ_i² w_i; p = ∞ gives max|u_i|.
inline double lp_mu_norm(const GroundState& gs, const GridFunction& u, double p) {
    if (p == kInf) {
        double m = 0.0;
        for (double x : u) m = std::max(m, std::abs(x));
        return m;
    }
    if (!(p >= 1.0)) throw DomainError("lp_mu_norm: p must be >= 1");
    double s = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i) s += std::pow(std::abs(u[i]), p) * gs.mu_weights[i];
    return std::pow(s, 1.0 / p);
}

struct Propagated {
    GridFunction values;
    double tail = 0.0;  // relative weighted mass of u0 outside the first K modes
    bool truncated = false;
};

/// Truncated spectral sum Σ_j e^{-λ_j t}⟨u0, v_j⟩_w v_j.
class SpectralPropagator {
public:
    SpectralPropagator(const Spectrum& sp, double tail_tol = 1e-8) : sp_(sp), tail_tol_(tail_tol) {
        const auto& g = sp.grid;
        w_.resize(g.N);
        for (std::size_t i = 0; i < g.N; ++i) w_[i] = std::pow(g.r(i), g.n_dim - 1) * g.h;
    }

    const Spectrum& spectrum() const { return sp_; }

    Propagated propagate(const GridFunction& u0, double t) const {
        if (!(t >= 0.0)) throw DomainError("propagate: t must be nonnegative");
        Propagated out;
        out.values.assign(u0.size(), 0.0);
        double total = 0.0, captured = 0.0;
        for (std::size_t i = 0; i < u0.size(); ++i) total += u0[i] * u0[i] * w_[i];
        for (std::size_t j = 0; j < sp_.values.size(); ++j) {
            const auto& v = sp_.psi[j];
            double c = 0.0;
            for (std::size_t i = 0; i < u0.size(); ++i) c += u0[i] * v[i] * w_[i];
            captured += c * c;
            const double f = c * std::exp(-sp_.values[j] * t);
            for (std::size_t i = 0; i < u0.size(); ++i) out.values[i] += f * v[i];
        }
        out.tail = total > 0.0 ? std::max(0.0, total - captured) / total : 0.0;
        out.truncated = out.tail > tail_tol_;
        return out;
    }

private:
    Spectrum sp_;
    double tail_tol_;
    std::vector<double> w_;
};

/// e^{-tA} for the symmetric tridiagonal matrix A of an assembled operator.
inline Eigen::MatrixXd exact_exponential(const DiscreteOperator& op, double t) {
    if (!(t >= 0.0)) throw DomainError("exact_exponential: t must be nonnegative");
    const std::size_t n = op.size();
    if (t == 0.0) return Eigen::MatrixXd::Identity(n, n);
    const double c = *std::max_element(op.diag.begin(), op.diag.end());
    const double dmin = *std::min_element(op.diag.begin(), op.diag.end());
    const double off = op.offdiag.empty() ? 0.0 : std::abs(op.offdiag.front());
    const double mnorm = (c - dmin) + 2.0 * off;
    int s = 0;
    while (t * mnorm / std::ldexp(1.0, s) > 0.5) ++s;
    const double tau = std::ldexp(t, -s);

    // Horner form of Σ (τM)^k/k!, M = cI - A, with M applied as a band.
    auto apply_M = [&](const Eigen::MatrixXd& X) {
        Eigen::MatrixXd Y(n, n);
        for (std::size_t i = 0; i < n; ++i) {
            Y.row(i) = (c - op.diag[i]) * X.row(i);
            if (i > 0) Y.row(i) -= op.offdiag[i - 1] * X.row(i - 1);
            if (i + 1 < n) Y.row(i) -= op.offdiag[i] * X.row(i + 1);
        }
        return Y;
    };
    const int degree = 24;
    Eigen::MatrixXd S = Eigen::MatrixXd::Identity(n, n);
    for (int k = degree; k >= 1; --k) {
        S = apply_M(S) * (tau / k);
        S.diagonal().array() += 1.0;
    }
    S *= std::exp(-tau * c);
    for (int i = 0; i < s; ++i) S = (S * S).eval();
    return 0.5 * (S + S.transpose());
}

/// Propagator from the exact matrix exponential at one fixed time.
class ExactPropagator {
public:
    ExactPropagator(const DiscreteOperator& op, double t) : grid_(op.grid), t_(t), P_(exact_exponential(op, t)) {
        sqw_.resize(grid_.N);
        for (std::size_t i = 0; i < grid_.N; ++i) sqw_[i] = std::sqrt(op.weight[i]);
    }

    double t() const { return t_; }
    const RadialGrid& grid() const { return grid_; }
    /// e^{-tA} in the symmetric (u = √w·ψ) coordinates
    const Eigen::MatrixXd& matrix() const { return P_; }
    const std::vector<double>& sqrt_weight() const { return sqw_; }

    GridFunction propagate(const GridFunction& psi) const {
        Eigen::VectorXd u(psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) u[i] = psi[i] * sqw_[i];
        Eigen::VectorXd y = P_ * u;
        GridFunction out(psi.size());
        for (std::size_t i = 0; i < psi.size(); ++i) out[i] = y[i] / sqw_[i];
        return out;
    }

private:
    RadialGrid grid_;
    double t_;
    Eigen::MatrixXd P_;
    std::vector<double> sqw_;
};

template <class Prop>
GridFunction propagate_values(const Prop& prop, const GridFunction& u0, double t) {
    if constexpr (std::is_same_v<Prop, ExactPropagator>) {
        if (std::abs(t - prop.t()) > 1e-14 * std::max(1.0, t))
            throw DomainError("exact propagator was built for a different t");
        return prop.propagate(u0);
    } else {
        return prop.propagate(u0, t).values;
    }
}

/// φ^{-1}·e^{-tH}(φ·u0)
template <class Prop>
GridFunction weighted_propagate(const GroundState& gs, const Prop& prop, const GridFunction& u0, double t) {
    GridFunction v(u0.size());
    for (std::size_t i = 0; i < u0.size(); ++i) v[i] = gs.phi[i] * u0[i];
    auto out = propagate_values(prop, v, t);
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= gs.phi[i];
    return out;
}

struct ContractionEntry {
    double p = 1.0;
    double ratio = 0.0;
    double bound = 1.0;
};

struct ContractionReport {
    double t = 0.0;
    double E0 = 0.0;
    bool nonneg_input = false;
    std::vector<ContractionEntry> entries;
};

inline constexpr double kContractionTol = 1e-9;

/// ‖e^{-tH̃}u0‖_{p,μ}/‖u0‖_{p,μ} for each p; for nonnegative u0 the ∞ bound is e^{-tE0}.
template <class Prop>
ContractionReport contraction_report(const GroundState& gs, const Prop& prop, const GridFunction& u0, double t,
                                     const std::vector<double>& p_list, double tol = kContractionTol) {
    if (!(t > 0.0)) throw DomainError("contraction_report: t must be positive");
    ContractionReport rep;
    rep.t = t;
    rep.E0 = gs.E0;
    rep.nonneg_input = std::all_of(u0.begin(), u0.end(), [](double x) { return x >= 0.0; });
    const auto out = weighted_propagate(gs, prop, u0, t);
    for (double p : p_list) {
        ContractionEntry e;
        e.p = p;
        e.ratio = lp_mu_norm(gs, out, p) / lp_mu_norm(gs, u0, p);
        e.bound = (p == kInf && rep.nonneg_input) ? std::exp(-t * gs.E0) : 1.0;
        if (e.ratio > e.bound * (1.0 + tol))
            throw ContractionViolation("contraction fails for p=" + std::to_string(p) + ": ratio " +
                                       std::to_string(e.ratio) + " > " + std::to_string(e.bound));
        rep.entries.push_back(e);
    }
    return rep;
}

/// True iff every node of e^{-tH}u0 is strictly positive.
template <class Prop>
bool positivity_check(const Prop& prop, const GridFunction& u0, double t) {
    bool any = false;
    for (double x : u0) {
        if (x < 0.0) throw DomainError("positivity_check: u0 must be nonnegative");
        any = any || x > 0.0;
    }
    if (!any) throw DomainError("positivity_check: u0 must be nonzero");
    const auto out = propagate_values(prop, u0, t);
    return std::all_of(out.begin(), out.end(), [](double x) { return x > 0.0; });
}

struct KernelMatrix {
    RadialGrid grid;
    double t = 0.0;
    std::size_t K = 0;  // modes used; 0 for the exact exponential
    Eigen::MatrixXd k;  // propagate(u)_i = Σ_j k_ij u_j w_j
    double min_entry = 0.0;
    bool truncation_warning = false;
};

inline KernelMatrix heat_kernel(const ExactPropagator& prop) {
    KernelMatrix km;
    km.grid = prop.grid();
    km.t = prop.t();
    const auto& s = prop.sqrt_weight();
    const std::size_t n = s.size();
    km.k.resize(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) km.k(i, j) = prop.matrix()(i, j) / (s[i] * s[j]);
    km.min_entry = km.k.minCoeff();
    km.truncation_warning = km.min_entry < -1e-10;
    return km;
}

inline KernelMatrix heat_kernel(const Spectrum& sp, double t, double tail_tol = 1e-10) {
    if (!(t > 0.0)) throw DomainError("heat_kernel: t must be positive");
    KernelMatrix km;
    km.grid = sp.grid;
    km.t = t;
    km.K = sp.values.size();
    const std::size_t n = sp.grid.N;
    km.k = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t m = 0; m < km.K; ++m) {
        Eigen::Map<const Eigen::VectorXd> v(sp.psi[m].data(), n);
        km.k.noalias() += std::exp(-sp.values[m] * t) * v * v.transpose();
    }
    km.min_entry = km.k.minCoeff();
    km.truncation_warning = km.min_entry < -1e-10 || std::exp(-sp.values.back() * t) > tail_tol;
    return km;
}

/// sup_ij k_ij/(φ_i φ_j)
inline double kernel_iu_ratio(const GroundState& gs, const KernelMatrix& km) {
    double best = 0.0;
    const std::size_t n = gs.phi.size();
    for (std::size_t j = 0; j < n; ++j)
        for (std::size_t i = 0; i < n; ++i) best = std::max(best, km.k(i, j) / (gs.phi[i] * gs.phi[j]));
    return best;
}

/// Binary layout: uint64 N, double t, uint64 K, then N·N doubles row-major.
inline void write_kernel_binary(const KernelMatrix& km, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    const std::uint64_t n = km.k.rows(), K = km.K;
    out.write(reinterpret_cast<const char*>(&n), sizeof n);
    out.write(reinterpret_cast<const char*>(&km.t), sizeof km.t);
    out.write(reinterpret_cast<const char*>(&K), sizeof K);
    for (Eigen::Index i = 0; i < km.k.rows(); ++i)
        for (Eigen::Index j = 0; j < km.k.cols(); ++j) {
            const double v = km.k(i, j);
            out.write(reinterpret_cast<const char*>(&v), sizeof v);
        }
}

inline KernelMatrix read_kernel_binary(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::uint64_t n = 0, K = 0;
    KernelMatrix km;
    in.read(reinterpret_cast<char*>(&n), sizeof n);
    in.read(reinterpret_cast<char*>(&km.t), sizeof km.t);
    in.read(reinterpret_cast<char*>(&K), sizeof K);
    km.K = K;
    km.k.resize(n, n);
    for (std::uint64_t i = 0; i < n; ++i)
        for (std::uint64_t j = 0; j < n; ++j) in.read(reinterpret_cast<char*>(&km.k(i, j)), sizeof(double));
    if (!in) throw ConfigError("truncated kernel file '" + path + "'");
    return km;
}

/// Per-node CSV: r, k_ii, Σ_j k_ij w_j, max_j k_ij/(φ_i φ_j).
inline void write_kernel_summary_csv(const KernelMatrix& km, const GroundState& gs, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ConfigError("cannot write '" + path + "'");
    out.precision(17);
    out << "r,k_diag,row_mass,row_iu_ratio\n";
    const auto& g = km.grid;
    for (std::size_t i = 0; i < g.N; ++i) {
        double mass = 0.0, ratio = 0.0;
        for (std::size_t j = 0; j < g.N; ++j) {
            const double w = std::pow(g.r(j), g.n_dim - 1) * g.h;
            mass += km.k(i, j) * w;
            ratio = std::max(ratio, km.k(i, j) / (gs.phi[i] * gs.phi[j]));
        }
        out << g.r(i) << ',' << km.k(i, i) << ',' << mass << ',' << ratio << '\n';
    }
}

/// (H̃w)_i = φ_i^{-1}((H - E0)(φw))_i, evaluated with the assembled matrix.
inline GridFunction shifted_weighted_action(const DiscreteOperator& op, const GroundState& gs, const GridFunction& w) {
    GridFunction v(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) v[i] = gs.u[i] * w[i];
    auto y = op.apply(v);
    GridFunction out(w.size());
    for (std::size_t i = 0; i < w.size(); ++i) out[i] = (y[i] - gs.E0 * v[i]) / gs.u[i];
    return out;
}

struct LogSobolevSample {
    double residual = 0.0;
    double norm_p = 0.0;  // ‖w‖_{p,μ}^p, the coefficient of 2β/p
};

/// RHS - LHS of ∫w^p ln w dμ ≤ ε⟨H̃w, w^{p-1}⟩_μ + (2β/p)‖w‖^p + ‖w‖^p ln‖w‖
/// for w = e^{-tH̃}u0.
template <class Prop>
LogSobolevSample log_sobolev_residual(const DiscreteOperator& op, const GroundState& gs, const Prop& prop,
                                      const GridFunction& u0, double t, double eps, double p, double beta) {
    if (!(p >= 2.0)) throw DomainError("log_sobolev_residual: p must be >= 2");
    for (double x : u0)
        if (x < 0.0) throw DomainError("log_sobolev_residual: u0 must be nonnegative");
    const auto w = weighted_propagate(gs, prop, u0, t);
    const auto hw = shifted_weighted_action(op, gs, w);
    double lhs = 0.0, form = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
        const double mu = gs.mu_weights[i];
        if (w[i] > 0.0) lhs += std::pow(w[i], p) * std::log(w[i]) * mu;
        form += hw[i] * std::pow(std::max(w[i], 0.0), p - 1.0) * mu;
    }
    const double nrm = lp_mu_norm(gs, w, p);
    const double np = std::pow(nrm, p);
    LogSobolevSample s;
    s.norm_p = np;
    s.residual = eps * form + (2.0 * beta / p) * np + np * std::log(nrm) - lhs;
    return s;
}

}  // namespace iucert
