#ifndef HAWKESWAVE_PHASE_HPP
#define HAWKESWAVE_PHASE_HPP

#include <cmath>
#include <limits>
#include <string>

#include <boost/math/tools/minima.hpp>

#include "error.hpp"
#include "nfe.hpp"
#include "quadrature.hpp"
#include "wave.hpp"

namespace hawkeswave {

enum class PhaseMethod { projection, minimization };

inline const char* to_string(PhaseMethod m) { return m == PhaseMethod::projection ? "projection" : "minimization"; }

struct PhaseResult {
    double psi = 0.0;
    double dist = 0.0;  // flat L2 distance |u - u_psi|
    PhaseMethod method = PhaseMethod::projection;
    int iterations = 0;
    bool converged = false;
};

struct PhaseOptions {
    /// Radius of the tube around M; default (a2 - a1) / 4.
    double tube_radius = 0.0;
    /// Half-width of the initial search bracket in units of sigma.
    double bracket = 2.0;
    double tol = 1e-10;
    int max_iter = 100;
    /// Length, in units of sigma, of the D-/D+ window integrated by quadrature.
    double tail_window = 40.0;
};

namespace detail {

inline constexpr int kTailPanels = 16;

inline double tube_radius(const WaveProfile& w, const PhaseOptions& opt) {
    if (opt.tube_radius > 0.0) return opt.tube_radius;
    const auto& fp = w.fixed_points();
    return 0.25 * (fp.a2 - fp.a1);
}

/// Sum over the bulk (eps-weighted) plus quadrature of the far-field integrands over D-/D+.
/// `bulk(value, x)` and `tail(far_value, x)` return the pointwise integrand.
template <class Bulk, class Tail>
double lattice_integral(const Field& u, const WaveProfile& w, double window, Bulk&& bulk, Tail&& tail) {
    const Grid& g = u.grid;
    double s = 0.0;
    for (std::size_t k = 0; k < u.size(); ++k) s += bulk(u.values[k], g.node(k));
    s *= g.eps();
    const double edge = g.right_edge();
    const double len = window * w.kernel().sigma;
    s += quad::panels([&](double y) { return tail(u.right, y); }, edge, edge + len, kTailPanels);
    s += quad::panels([&](double y) { return tail(u.left, -y); }, edge, edge + len, kTailPanels);
    return s;
}

}  // namespace detail

/// <u, v>_{m_psi} with u, v given by their integrand product; discrete over the bulk, quadrature on D-/D+.
inline double weighted_dot(const Field& v, const WaveProfile& w, double psi, double window = 40.0) {
    const auto& f = w.sigmoid();
    auto integrand = [&](double val, double x) {
        const double up = w.shifted_deriv(psi, x);
        return val * up * f.d1(w.shifted(psi, x));
    };
    return detail::lattice_integral(v, w, window, integrand, integrand);
}

/// <u_psi', u_psi'>_{m_psi} on the lattice of `g`.
inline double weighted_norm2_deriv(const Grid& g, const WaveProfile& w, double psi, double window = 40.0) {
    const auto& f = w.sigmoid();
    auto integrand = [&](double, double x) {
        const double up = w.shifted_deriv(psi, x);
        return up * up * f.d1(w.shifted(psi, x));
    };
    return detail::lattice_integral(Field(g, 0.0, 0.0), w, window, integrand, integrand);
}

/// Squared flat L2 distance |u - u_psi|^2, piecewise-constant u.
inline double flat_dist2(const Field& u, const WaveProfile& w, double psi, double window = 40.0) {
    auto integrand = [&](double val, double x) {
        const double d = val - w.shifted(psi, x);
        return d * d;
    };
    return detail::lattice_integral(u, w, window, integrand, integrand);
}

/// g(psi) = <u - u_psi, u_psi'>_{m_psi} and its derivative in psi.
inline std::pair<double, double> projection_residual(const Field& u, const WaveProfile& w, double psi,
                                                      double window = 40.0) {
    const auto& f = w.sigmoid();
    double gp = 0.0;
    auto value = [&](double val, double x) {
        const double uh = w.shifted(psi, x);
        const double up = w.shifted_deriv(psi, x);
        const double upp = w.second(x - psi);
        const double m = f.d1(uh);
        return std::pair{(val - uh) * up * m, up * up * m - (val - uh) * (upp * m + f.d2(uh) * up * up)};
    };
    auto first = [&](double val, double x) { return value(val, x).first; };
    auto second = [&](double val, double x) { return value(val, x).second; };
    const double g = detail::lattice_integral(u, w, window, first, first);
    gp = detail::lattice_integral(u, w, window, second, second);
    return {g, gp};
}

/// Root of g(psi) = 0 by Newton safeguarded with bisection on psi_init +- 2 sigma (widened x4 once).
inline PhaseResult project_phase(const Field& u, const WaveProfile& w, double psi_init = 0.0,
                                 const PhaseOptions& opt = {}) {
    const double sigma = w.kernel().sigma;
    auto g = [&](double psi) { return projection_residual(u, w, psi, opt.tail_window); };

    double lo = 0.0, hi = 0.0, g_lo = 0.0, g_hi = 0.0;
    bool bracketed = false;
    for (double half : {opt.bracket * sigma, 4.0 * opt.bracket * sigma}) {
        lo = psi_init - half;
        hi = psi_init + half;
        g_lo = g(lo).first;
        g_hi = g(hi).first;
        if ((g_lo <= 0.0) != (g_hi <= 0.0)) {
            bracketed = true;
            break;
        }
    }
    if (!bracketed) throw OutOfTube("projection residual does not change sign around psi = " + std::to_string(psi_init));

    const bool increasing = g_lo < 0.0;
    PhaseResult r;
    r.method = PhaseMethod::projection;
    double psi = std::clamp(psi_init, lo, hi);
    for (r.iterations = 1; r.iterations <= opt.max_iter; ++r.iterations) {
        const auto [gv, gd] = g(psi);
        if (gv == 0.0) {
            r.converged = true;
            break;
        }
        if ((gv < 0.0) == increasing) lo = psi;
        else hi = psi;
        double next = psi - gv / gd;
        if (!(gd != 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
        const double step = std::abs(next - psi);
        psi = next;
        if (step < opt.tol || hi - lo < opt.tol) {
            r.converged = true;
            break;
        }
    }
    if (!r.converged) throw NoConvergence("projection phase did not converge in " + std::to_string(opt.max_iter) + " iterations");
    r.psi = psi;
    r.dist = std::sqrt(flat_dist2(u, w, psi, opt.tail_window));
    if (r.dist > detail::tube_radius(w, opt))
        throw OutOfTube("distance " + std::to_string(r.dist) + " to the projected profile exceeds the tube radius");
    return r;
}

namespace detail {

inline std::pair<double, double> minimize_dist(const Field& u, const WaveProfile& w, double lo, double hi,
                                               const PhaseOptions& opt, int& iterations) {
    boost::uintmax_t it = static_cast<boost::uintmax_t>(std::max(opt.max_iter, 200));
    const auto [psi, d2] = boost::math::tools::brent_find_minima(
        [&](double p) { return flat_dist2(u, w, p, opt.tail_window); }, lo, hi, std::numeric_limits<double>::digits / 2, it);
    iterations += static_cast<int>(it);
    // Brent resolves psi only to sqrt(machine eps); polish the stationarity condition by Newton
    double x = psi;
    for (int k = 0; k < 8; ++k) {
        auto first = [&](double val, double y) { return (val - w.shifted(x, y)) * w.shifted_deriv(x, y); };
        auto second = [&](double val, double y) {
            const double up = w.shifted_deriv(x, y);
            return up * up - (val - w.shifted(x, y)) * w.second(y - x);
        };
        const double h = lattice_integral(u, w, opt.tail_window, first, first);
        const double hp = lattice_integral(u, w, opt.tail_window, second, second);
        if (!(hp > 0.0)) break;
        const double next = x - h / hp;
        if (!(next > lo && next < hi)) break;
        const double step = std::abs(next - x);
        x = next;
        ++iterations;
        if (step < 1e-14 * std::max(1.0, std::abs(x))) break;
    }
    const double dx = flat_dist2(u, w, x, opt.tail_window);
    if (dx <= d2) return {x, dx};
    return {psi, d2};
}

}  // namespace detail

/// Minimizer of the flat distance |u - u_psi| over psi_init +- 2 sigma (widened x4 once), no tube check.
inline PhaseResult nearest_phase(const Field& u, const WaveProfile& w, double psi_init = 0.0,
                                 const PhaseOptions& opt = {}) {
    const double sigma = w.kernel().sigma;
    PhaseResult r;
    r.method = PhaseMethod::minimization;
    const double edge_tol = 1e-6 * sigma;
    for (double half : {opt.bracket * sigma, 4.0 * opt.bracket * sigma}) {
        const double lo = psi_init - half, hi = psi_init + half;
        const auto [psi, d2] = detail::minimize_dist(u, w, lo, hi, opt, r.iterations);
        r.psi = psi;
        r.dist = std::sqrt(std::max(d2, 0.0));
        r.converged = psi - lo > edge_tol && hi - psi > edge_tol;
        if (r.converged) break;
    }
    return r;
}

/// Minimizer of the flat distance; OutOfTube when the optimum sits on the bracket edge or outside the tube.
inline PhaseResult phase_by_minimization(const Field& u, const WaveProfile& w, double psi_init = 0.0,
                                         const PhaseOptions& opt = {}) {
    PhaseResult r = nearest_phase(u, w, psi_init, opt);
    if (!r.converged) throw OutOfTube("distance minimum not interior to the search bracket");
    if (r.dist > detail::tube_radius(w, opt))
        throw OutOfTube("distance " + std::to_string(r.dist) + " to M exceeds the tube radius");
    return r;
}

/// inf_psi |u - u_psi| over the search bracket.
inline double dist_to_manifold(const Field& u, const WaveProfile& w, double psi_init = 0.0,
                               const PhaseOptions& opt = {}) {
    return nearest_phase(u, w, psi_init, opt).dist;
}

/// -<v, u_psi'>_{m_psi} / <u_psi', u_psi'>_{m_psi}
inline double dtheta_on_manifold(const Field& v, double psi, const WaveProfile& w, double window = 40.0) {
    return -weighted_dot(v, w, psi, window) / weighted_norm2_deriv(v.grid, w, psi, window);
}

/// Phase continuation along a trajectory: projection inside the tube, distance minimizer outside it.
class PhaseTracker {
public:
    struct Sample {
        double psi;
        double dist;
        bool in_tube;
    };

    PhaseTracker(const WaveProfile& w, PhaseOptions opt = {}, double psi0 = 0.0) : w_(w), opt_(opt), psi_(psi0) {}

    Sample operator()(const Field& u) {
        const PhaseResult near = nearest_phase(u, w_, psi_, opt_);
        if (near.dist <= detail::tube_radius(w_, opt_)) {
            try {
                const PhaseResult p = project_phase(u, w_, near.psi, opt_);
                psi_ = p.psi;
                return {p.psi, near.dist, true};
            } catch (const OutOfTube&) {
            } catch (const NoConvergence&) {
            }
        }
        psi_ = near.psi;
        return {near.psi, near.dist, false};
    }

    double psi() const noexcept { return psi_; }

private:
    const WaveProfile& w_;
    PhaseOptions opt_;
    double psi_;
};

}  // namespace hawkeswave

#endif  // HAWKESWAVE_PHASE_HPP
