#ifndef HAWKESWAVE_ANALYSIS_HPP
#define HAWKESWAVE_ANALYSIS_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <random>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "error.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "nfe.hpp"
#include "sigmoid.hpp"
#include "wave.hpp"

namespace hawkeswave {

// ---------------------------------------------------------------- linearized operator

/// A = -I + K diag(m0), K_ij = int_{I_j} W(x_i - y) dy, and its symmetrized form
/// S = D^{1/2} A D^{-1/2} = -I + D^{1/2} K D^{1/2}, D = diag(m0).
struct LinearizedOperator {
    Grid grid;
    Eigen::VectorXd weight;  // m0 = f'(u0(x_i))
    Eigen::MatrixXd kernel;  // K
    Eigen::MatrixXd sym;     // S

    Eigen::MatrixXd unsymmetrized() const { return -Eigen::MatrixXd::Identity(kernel.rows(), kernel.cols()) + kernel * weight.asDiagonal(); }
};

inline LinearizedOperator assemble_linearized(const WaveProfile& w, const Grid& g) {
    const double eps = g.eps();
    if (eps > w.kernel().sigma / 10.0 * (1.0 + 1e-12)) throw ConfigError("linearization grid must resolve sigma / 10");
    const auto n = static_cast<Eigen::Index>(g.size());
    const auto& f = w.sigmoid();
    LinearizedOperator op{g, Eigen::VectorXd(n), Eigen::MatrixXd(n, n), Eigen::MatrixXd(n, n)};
    for (Eigen::Index i = 0; i < n; ++i) op.weight(i) = f.d1(w.value(g.node(static_cast<std::size_t>(i))));
    for (Eigen::Index i = 0; i < n; ++i)
        for (Eigen::Index j = 0; j < n; ++j)
            op.kernel(i, j) = w.kernel().cell_mass(g.node(static_cast<std::size_t>(i)), g.node(static_cast<std::size_t>(j)), 0.5 * eps);
    const Eigen::VectorXd root = op.weight.cwiseSqrt();
    op.sym = root.asDiagonal() * op.kernel * root.asDiagonal();
    op.sym.diagonal().array() -= 1.0;
    const double asym = (op.sym - op.sym.transpose()).cwiseAbs().maxCoeff();
    if (asym >= 1e-12) throw NonFinite("symmetrized linear operator is not symmetric: " + std::to_string(asym));
    return op;
}

struct SpectrumReport {
    std::vector<double> leading;  // top eigenvalues, descending
    double overlap = 0.0;          // |<e1, u0'>| / (|e1| |u0'|) in the m0-weighted product
    double kappa = 0.0;            // -lambda_2
    double max_eigenvalue = 0.0;
};

inline SpectrumReport spectral_gap(const LinearizedOperator& op, const WaveProfile& w, int count = 5) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(op.sym);
    if (es.info() != Eigen::Success) throw NoConvergence("symmetric eigen-solver failed");
    const auto n = es.eigenvalues().size();
    SpectrumReport r;
    for (Eigen::Index k = 0; k < std::min<Eigen::Index>(count, n); ++k) r.leading.push_back(es.eigenvalues()(n - 1 - k));
    r.max_eigenvalue = es.eigenvalues()(n - 1);
    if (n < 2 || r.leading[1] >= -1e-6) throw GapNotFound("second eigenvalue is not negative");
    r.kappa = -r.leading[1];

    // Zero mode of S is D^{1/2} u0'.
    Eigen::VectorXd mode(op.weight.size());
    for (Eigen::Index i = 0; i < mode.size(); ++i)
        mode(i) = std::sqrt(op.weight(i)) * w.deriv(op.grid.node(static_cast<std::size_t>(i)));
    const Eigen::VectorXd e1 = es.eigenvectors().col(n - 1);
    r.overlap = std::abs(e1.dot(mode)) / (e1.norm() * mode.norm());
    return r;
}

/// Least-squares rate lambda of y ~ C exp(-lambda t) (log-linear fit, y > 0).
inline double fit_exponential_rate(const std::vector<double>& t, const std::vector<double>& y) {
    double st = 0, sy = 0, stt = 0, sty = 0;
    std::size_t n = 0;
    for (std::size_t k = 0; k < t.size(); ++k) {
        if (!(y[k] > 0.0)) continue;
        const double ly = std::log(y[k]);
        st += t[k];
        sy += ly;
        stt += t[k] * t[k];
        sty += t[k] * ly;
        ++n;
    }
    if (n < 2) throw NoConvergence("exponential fit needs two positive samples");
    const double dn = static_cast<double>(n);
    return -(dn * sty - st * sy) / (dn * stt - st * st);
}

// ---------------------------------------------------------------- ensemble statistics

struct GaussStats {
    std::size_t n = 0;
    double skew = 0.0;
    double excess_kurtosis = 0.0;
    double se_skew = 0.0;
    double se_kurtosis = 0.0;
    bool degenerate = false;
    bool pass = false;
};

/// Sample skewness and excess kurtosis (moment estimators); passes when both lie within 3 SE of 0.
inline GaussStats gaussianity(const std::vector<double>& x) {
    GaussStats g;
    g.n = x.size();
    if (g.n < 4) {
        g.degenerate = true;
        return g;
    }
    const double dn = static_cast<double>(g.n);
    const double mean = std::accumulate(x.begin(), x.end(), 0.0) / dn;
    double m2 = 0, m3 = 0, m4 = 0;
    for (double v : x) {
        const double d = v - mean;
        const double d2 = d * d;
        m2 += d2;
        m3 += d2 * d;
        m4 += d2 * d2;
    }
    m2 /= dn;
    m3 /= dn;
    m4 /= dn;
    g.se_skew = std::sqrt(6.0 / dn);
    g.se_kurtosis = std::sqrt(24.0 / dn);
    if (!(m2 > 1e-300) || m2 <= 1e-24 * mean * mean) {
        g.degenerate = true;
        return g;
    }
    g.skew = m3 / std::pow(m2, 1.5);
    g.excess_kurtosis = m4 / (m2 * m2) - 3.0;
    g.pass = std::abs(g.skew) < 3.0 * g.se_skew && std::abs(g.excess_kurtosis) < 3.0 * g.se_kurtosis;
    return g;
}

struct LagStats {
    std::size_t lag = 0;    // in observation steps
    double du = 0.0;        // macroscopic lag
    GaussStats stats;
};

struct EnsembleStats {
    std::vector<double> u;         // macroscopic times eps t_m
    std::vector<double> mean_path;
    std::vector<double> variance;  // around the ensemble mean path
    double slope = 0.0;            // variance slope through the origin on [t_f / 5, t_f]
    double ci_low = 0.0;
    double ci_high = 0.0;
    double mean_slope = 0.0;       // least-squares slope of the mean path on the same window
    double mean_final = 0.0;       // mean psi(t_f) - mean psi(0)
    std::size_t runs = 0;
    bool sufficient = true;
    std::vector<LagStats> lags;    // finest first
};

struct DiffusionOptions {
    std::size_t bootstrap = 1000;
    std::uint64_t bootstrap_seed = 12345;
    std::size_t min_runs = 50;
    std::size_t min_times = 10;
    /// Throw InsufficientRuns instead of flagging.
    bool enforce = true;
    /// Number of dyadic lags for the Gaussianity table.
    std::size_t lag_levels = 4;
};

namespace detail {

inline double origin_slope(const std::vector<double>& u, const std::vector<double>& v, std::size_t from, std::size_t to) {
    double num = 0, den = 0;
    for (std::size_t m = from; m < to; ++m) {
        num += u[m] * v[m];
        den += u[m] * u[m];
    }
    return den > 0.0 ? num / den : 0.0;
}

inline std::vector<double> variance_path(const std::vector<std::vector<double>>& paths, const std::vector<std::size_t>& pick,
                                         std::vector<double>* mean_out = nullptr) {
    const std::size_t nt = paths.front().size();
    std::vector<double> mean(nt, 0.0), var(nt, 0.0);
    const double r = static_cast<double>(pick.size());
    for (std::size_t idx : pick)
        for (std::size_t m = 0; m < nt; ++m) mean[m] += paths[idx][m];
    for (double& v : mean) v /= r;
    for (std::size_t idx : pick)
        for (std::size_t m = 0; m < nt; ++m) {
            const double d = paths[idx][m] - mean[m];
            var[m] += d * d;
        }
    for (double& v : var) v /= std::max(r - 1.0, 1.0);
    if (mean_out) *mean_out = std::move(mean);
    return var;
}

}  // namespace detail

/// Variance-growth estimate of the phase diffusion rate from per-run phase paths sampled at common micro times.
inline EnsembleStats estimate_diffusion(const std::vector<std::vector<double>>& paths, const std::vector<double>& times,
                                        double eps, double t_f, const DiffusionOptions& opt = {}) {
    EnsembleStats s;
    s.runs = paths.size();
    for (const auto& p : paths)
        if (p.size() != times.size()) throw ConfigError("phase paths and observation times differ in length");
    for (double t : times) s.u.push_back(eps * t);
    std::size_t in_window = 0;
    for (double u : s.u) in_window += u <= t_f * (1.0 + 1e-12) ? 1 : 0;
    s.sufficient = s.runs >= opt.min_runs && in_window >= opt.min_times;
    if (!s.sufficient && opt.enforce)
        throw InsufficientRuns("need >= " + std::to_string(opt.min_runs) + " runs and >= " + std::to_string(opt.min_times) +
                               " observation times, got " + std::to_string(s.runs) + " and " + std::to_string(in_window));
    if (s.runs < 2 || times.empty()) throw InsufficientRuns("need at least two runs with observations");

    std::size_t from = s.u.size(), to = 0;
    for (std::size_t m = 0; m < s.u.size(); ++m) {
        if (s.u[m] >= t_f / 5.0 * (1.0 - 1e-12) && from == s.u.size()) from = m;
        if (s.u[m] <= t_f * (1.0 + 1e-12)) to = m + 1;
    }
    if (from >= to) throw InsufficientRuns("no observation times in [t_f / 5, t_f]");

    std::vector<std::size_t> all(s.runs);
    std::iota(all.begin(), all.end(), 0);
    s.variance = detail::variance_path(paths, all, &s.mean_path);
    s.slope = detail::origin_slope(s.u, s.variance, from, to);

    {
        double su = 0, sm = 0, suu = 0, sum_ = 0;
        const double n = static_cast<double>(to - from);
        for (std::size_t m = from; m < to; ++m) {
            su += s.u[m];
            sm += s.mean_path[m];
            suu += s.u[m] * s.u[m];
            sum_ += s.u[m] * s.mean_path[m];
        }
        const double den = n * suu - su * su;
        s.mean_slope = den > 0.0 ? (n * sum_ - su * sm) / den : 0.0;
        s.mean_final = s.mean_path[to - 1] - s.mean_path.front();
    }

    std::mt19937_64 rng(opt.bootstrap_seed);
    std::vector<double> boot;
    boot.reserve(opt.bootstrap);
    std::vector<std::size_t> pick(s.runs);
    for (std::size_t b = 0; b < opt.bootstrap; ++b) {
        for (auto& p : pick) p = static_cast<std::size_t>(rng() % s.runs);
        boot.push_back(detail::origin_slope(s.u, detail::variance_path(paths, pick), from, to));
    }
    if (!boot.empty()) {
        std::sort(boot.begin(), boot.end());
        auto q = [&](double p) { return boot[std::min(boot.size() - 1, static_cast<std::size_t>(p * static_cast<double>(boot.size())))]; };
        s.ci_low = q(0.025);
        s.ci_high = q(0.975);
    }

    // Non-overlapping increments over the window, pooled across runs, ensemble-mean increment removed.
    const std::size_t span = to - 1 - from;
    for (std::size_t level = opt.lag_levels; level-- > 0;) {
        const std::size_t lag = span >> level;
        if (lag == 0) continue;
        std::vector<double> inc;
        for (std::size_t m = from; m + lag < to; m += lag) {
            const double drift = s.mean_path[m + lag] - s.mean_path[m];
            for (const auto& p : paths) inc.push_back(p[m + lag] - p[m] - drift);
        }
        if (!s.lags.empty() && s.lags.back().lag == lag) continue;
        s.lags.push_back({lag, s.u[from + lag] - s.u[from], gaussianity(inc)});
    }
    return s;
}

/// Gaussianity verdict at the two coarsest lags.
inline bool coarse_lags_gaussian(const EnsembleStats& s) {
    if (s.lags.size() < 2) return false;
    return s.lags[s.lags.size() - 1].stats.pass && s.lags[s.lags.size() - 2].stats.pass;
}

// ---------------------------------------------------------------- discretization errors

struct DiscretizationError {
    double delta0 = 0.0;       // |sum_i Delta^(0)_i 1_{I_i}|_{L2}
    double delta_plus = 0.0;
    double delta_minus = 0.0;
};

/// Lattice sums against exact integrals of the piecewise-constant profile, L2 norms by 8-point Gauss per cell.
inline DiscretizationError discretization_error(const Field& u, const SigmoidSpec& f, const KernelSpec& k) {
    using gauss = boost::math::quadrature::gauss<double, 8>;
    const Grid& g = u.grid;
    const double eps = g.eps();
    const double s = k.sigma;
    const double h = 0.5 * eps;
    const std::size_t n = u.size();
    std::vector<double> fu(n);
    for (std::size_t i = 0; i < n; ++i) fu[i] = f(u.values[i]);
    const auto& fp = f.fixed_points();

    // A_i = sum_{j<i} f_j int_{I_j} W(x_i - y) dy, B_i likewise for j > i; for x in I_i the exact
    // contributions are A_i e^{-(x - x_i)/s} and B_i e^{(x - x_i)/s}.
    const double r = std::exp(-eps / s);
    const double c = std::sinh(h / s);
    std::vector<double> A(n, 0.0), B(n, 0.0);
    for (std::size_t i = 1; i < n; ++i) A[i] = r * (A[i - 1] + fu[i - 1]);
    for (std::size_t i = n - 1; i-- > 0;) B[i] = r * (B[i + 1] + fu[i + 1]);
    for (std::size_t i = 0; i < n; ++i) {
        A[i] *= c;
        B[i] *= c;
    }
    const Field lattice = [&] {
        Field fl(g, 0.0, 0.0);
        fl.values = fu;
        return conv_exp(fl, k, ConvRule::midpoint);
    }();

    DiscretizationError e;
    const double geo = r / (1.0 - r);
    for (std::size_t i = 0; i < n; ++i) {
        const double xi = g.node(i);
        const double sum0 = lattice.values[i];
        const double d_right = g.right_edge() - xi;
        const double d_left = xi - g.left_edge();
        // eps sum_{j > N} W(x_i - x_j)
        const double sum_plus = eps / (2.0 * s) * std::exp(-(d_right - h) / s) * geo;
        const double sum_minus = eps / (2.0 * s) * std::exp(-(d_left - h) / s) * geo;
        auto d0 = [&](double t) {
            const double exact = A[i] * std::exp(-t / s) + B[i] * std::exp(t / s) + fu[i] * k.cell_mass(xi + t, xi, h);
            const double d = sum0 - exact;
            return d * d;
        };
        auto dp = [&](double t) {
            const double d = fp.a2 * (sum_plus - k.tail_mass(d_right - t));
            return d * d;
        };
        auto dm = [&](double t) {
            const double d = fp.a1 * (sum_minus - k.tail_mass(d_left + t));
            return d * d;
        };
        e.delta0 += gauss::integrate(d0, -h, h);
        e.delta_plus += gauss::integrate(dp, -h, h);
        e.delta_minus += gauss::integrate(dm, -h, h);
    }
    e.delta0 = std::sqrt(e.delta0);
    e.delta_plus = std::sqrt(e.delta_plus);
    e.delta_minus = std::sqrt(e.delta_minus);
    return e;
}

/// sum_j |varpi_j|^2 = eps^3 sum_j sum_{|i| <= N} W(x_i - x_j)^2 over all j in Z.
inline double kernel_sum_varpi(const Grid& g, const KernelSpec& k) {
    const double eps = g.eps();
    const long n = g.half_count();
    const double q = std::exp(-2.0 * eps / k.sigma);  // W^2 ratio per lattice step
    const double w0 = 1.0 / (4.0 * k.sigma * k.sigma);
    double total = 0.0;
    // j inside the bulk: direct; j outside: geometric tails, by symmetry both sides equal.
    for (long j = -n; j <= n; ++j)
        for (long i = -n; i <= n; ++i) total += w0 * std::pow(q, static_cast<double>(std::abs(i - j)));
    double outside = 0.0;
    for (long i = -n; i <= n; ++i) outside += w0 * std::pow(q, static_cast<double>(n + 1 - i)) / (1.0 - q);
    total += 2.0 * outside;
    return eps * eps * eps * total;
}

/// Log-log least-squares slope of y against x.
inline double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(x.size());
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double lx = std::log(x[k]), ly = std::log(y[k]);
        sx += lx;
        sy += ly;
        sxx += lx * lx;
        sxy += lx * ly;
    }
    return (n * sxy - sx * sy) / (n * sxx - sx * sx);
}

}  // namespace hawkeswave

#endif  // HAWKESWAVE_ANALYSIS_HPP
