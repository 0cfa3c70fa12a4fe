#ifndef HAWKESWAVE_WAVE_HPP
#define HAWKESWAVE_WAVE_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "error.hpp"
#include "kernel.hpp"
#include "quadrature.hpp"
#include "sigmoid.hpp"

namespace hawkeswave {

/// First integral of the standing-wave ODE: H(u) = int_{a1}^{u} (s - f(s)) ds.
///
/// For u above the middle fixed point the integral is split at a2, so that values
/// near either stable state keep full relative accuracy.
class Potential {
public:
    explicit Potential(const SigmoidSpec& f) : f_(f), fp_(f.fixed_points()) {
        total_ = quad::panels([&](double s) { return s - f_(s); }, fp_.a1, fp_.a2, 2 * kPanels);
        // below this the total is rounding noise, which would swamp H near a2
        if (std::abs(total_) < 1e-14) total_ = 0.0;
    }

    double operator()(double u, double tol = 1e-9) const {
        if (u < fp_.a1 - tol || u > fp_.a2 + tol)
            throw OutOfRange("H(u) requires u in [a1, a2], got " + std::to_string(u));
        auto integrand = [&](double s) { return s - f_(s); };
        if (u <= fp_.a) return quad::panels(integrand, fp_.a1, u, kPanels);
        return total_ - quad::panels(integrand, u, fp_.a2, kPanels);
    }

    /// int_{a1}^{a2} (s - f(s)) ds; zero exactly in the neutral case.
    double total() const noexcept { return total_; }

private:
    // 8-point Gauss-Legendre panels; the integrand is analytic on [a1, a2]
    static constexpr int kPanels = 16;
    SigmoidSpec f_;
    FixedPoints fp_;
    double total_ = 0.0;
};

inline double potential_H(const SigmoidSpec& f, double u) { return Potential(f)(u); }

/// Standing front u0 connecting a1 to a2, pinned at u0(0) = a, tabulated on a uniform
/// grid with exact derivatives and continued by exponential tails outside the table.
class WaveProfile {
public:
    struct Tail {
        double mu = 0.0;     // decay rate
        double coeff = 0.0;  // prefactor C
        double start = 0.0;  // |x| beyond which the analytic tail is used
    };

    WaveProfile(SigmoidSpec f, KernelSpec k, double step, std::vector<double> u, std::vector<double> du)
        : f_(std::move(f)), k_(k), h_(step), u_(std::move(u)), du_(std::move(du)) {
        if (u_.size() != du_.size() || u_.size() < 5 || u_.size() % 2 == 0)
            throw ConfigError("profile table must have an odd number (>= 5) of samples");
        half_ = static_cast<long>(u_.size() / 2);
        const auto& fp = f_.fixed_points();
        right_.mu = std::sqrt(1.0 - f_.d1(fp.a2)) / k_.sigma;
        left_.mu = std::sqrt(1.0 - f_.d1(fp.a1)) / k_.sigma;
        fit_tails(half_width(), half_width());
    }

    /// Rebuild from an exported table (uniform abscissae centred on 0).
    static WaveProfile from_table(SigmoidSpec f, KernelSpec k, const std::vector<double>& x,
                                  std::vector<double> u, std::vector<double> du) {
        if (x.size() < 5) throw ConfigError("profile table too short");
        const double h = (x.back() - x.front()) / static_cast<double>(x.size() - 1);
        if (std::abs(x.front() + x.back()) > 1e-9 * h) throw ConfigError("profile table must be centred on 0");
        return WaveProfile(std::move(f), k, h, std::move(u), std::move(du));
    }

    const SigmoidSpec& sigmoid() const noexcept { return f_; }
    const KernelSpec& kernel() const noexcept { return k_; }
    const FixedPoints& fixed_points() const { return f_.fixed_points(); }
    double step() const noexcept { return h_; }
    double half_width() const noexcept { return h_ * static_cast<double>(half_); }
    std::size_t table_size() const noexcept { return u_.size(); }
    double table_x(std::size_t k) const noexcept { return h_ * (static_cast<double>(k) - half_); }
    const std::vector<double>& table_u() const noexcept { return u_; }
    const std::vector<double>& table_du() const noexcept { return du_; }
    const Tail& left_tail() const noexcept { return left_; }
    const Tail& right_tail() const noexcept { return right_; }

    /// u0(x).
    double value(double x) const {
        const auto& fp = fixed_points();
        if (x >= right_.start) return fp.a2 - right_.coeff * std::exp(-right_.mu * x);
        if (x <= -left_.start) return fp.a1 + left_.coeff * std::exp(left_.mu * x);
        std::size_t k;
        double t;
        if (locate(x, k, t)) return u_[k];
        const double t2 = t * t, t3 = t2 * t;
        return (2 * t3 - 3 * t2 + 1) * u_[k] + (t3 - 2 * t2 + t) * h_ * du_[k] + (-2 * t3 + 3 * t2) * u_[k + 1] +
               (t3 - t2) * h_ * du_[k + 1];
    }

    /// u0'(x).
    double deriv(double x) const {
        if (x >= right_.start) return right_.mu * right_.coeff * std::exp(-right_.mu * x);
        if (x <= -left_.start) return left_.mu * left_.coeff * std::exp(left_.mu * x);
        std::size_t k;
        double t;
        if (locate(x, k, t)) return du_[k];
        const double t2 = t * t;
        return ((6 * t2 - 6 * t) * u_[k] + (3 * t2 - 4 * t + 1) * h_ * du_[k] + (-6 * t2 + 6 * t) * u_[k + 1]) / h_ +
               (3 * t2 - 2 * t) * du_[k + 1];
    }

    /// u0''(x) from the ODE sigma^2 u'' = u - f(u).
    double second(double x) const {
        const double u = value(x);
        return (u - f_(u)) / (k_.sigma * k_.sigma);
    }

    /// Translated profile u_psi(x) = u0(x - psi) and its derivative.
    double shifted(double psi, double x) const { return value(x - psi); }
    double shifted_deriv(double psi, double x) const { return deriv(x - psi); }

    /// Envelope constants (c, mu) with 0 <= u0'(z) <= c exp(-mu |z|) for all z.
    std::pair<double, double> derivative_envelope() const {
        const double mu = std::min(left_.mu, right_.mu);
        double c = 0.0;
        for (std::size_t k = 0; k < u_.size(); ++k)
            c = std::max(c, du_[k] * std::exp(mu * std::abs(table_x(k))));
        // analytic tails decay at least as fast as exp(-mu |x|)
        c = std::max({c, left_.mu * left_.coeff, right_.mu * right_.coeff});
        return {c * (1.0 + 1e-12), mu};
    }

    /// FNV-1a 64 hash of the tabulated values, as 16 hex digits.
    std::string table_hash() const {
        std::uint64_t h = 1469598103934665603ULL;
        auto mix = [&](const std::vector<double>& v) {
            for (double d : v) {
                unsigned char bytes[sizeof(double)];
                std::memcpy(bytes, &d, sizeof(double));
                for (unsigned char b : bytes) {
                    h ^= b;
                    h *= 1099511628211ULL;
                }
            }
        };
        mix(u_);
        mix(du_);
        char buf[17];
        std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
        return buf;
    }

    /// Overrides where the analytic tails take over (|x| beyond these).
    void fit_tails(double left_start, double right_start) {
        const auto& fp = fixed_points();
        left_start = std::min(left_start, half_width());
        right_start = std::min(right_start, half_width());
        const auto kr = static_cast<std::size_t>(std::lround(right_start / h_)) + half_;
        const auto kl = half_ - static_cast<long>(std::lround(left_start / h_));
        right_.start = table_x(kr);
        left_.start = -table_x(static_cast<std::size_t>(kl));
        right_.coeff = (fp.a2 - u_[kr]) * std::exp(right_.mu * right_.start);
        left_.coeff = (u_[static_cast<std::size_t>(kl)] - fp.a1) * std::exp(left_.mu * left_.start);
    }

private:
    // Returns true when x hits a table node exactly (k is then that node).
    bool locate(double x, std::size_t& k, double& t) const {
        const double s = x / h_ + static_cast<double>(half_);
        const double r = std::round(s);
        if (std::abs(s - r) <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(s)) && r >= 0 && r < static_cast<double>(u_.size())) {
            k = static_cast<std::size_t>(r);
            return true;
        }
        const double fl = std::clamp(std::floor(s), 0.0, static_cast<double>(u_.size() - 2));
        k = static_cast<std::size_t>(fl);
        t = s - fl;
        return false;
    }

    SigmoidSpec f_;
    KernelSpec k_;
    double h_;
    long half_ = 0;
    std::vector<double> u_;
    std::vector<double> du_;
    Tail left_;
    Tail right_;
};

struct ProfileOptions {
    double step = 0.0;        // default sigma / 100
    double half_width = 0.0;  // default 20 sigma
    double tail_switch = 1e-8;
};

/// Integrates sigma u' = sqrt(2 H(u)) outward from u(0) = a with classical RK4.
inline WaveProfile solve_profile(const SigmoidSpec& f, const KernelSpec& k, ProfileOptions opt = {}) {
    if (!f.has_fixed_points()) throw ConfigError("solve_profile: fixed points not computed");
    const double sigma = k.sigma;
    const double h = opt.step > 0.0 ? opt.step : sigma / 100.0;
    const double L = opt.half_width > 0.0 ? opt.half_width : 20.0 * sigma;
    if (h > sigma / 20.0 * (1.0 + 1e-12)) throw ConfigError("profile step must be <= sigma / 20");
    if (L < 10.0 * sigma * (1.0 - 1e-12)) throw ConfigError("profile half-width must be >= 10 sigma");

    const auto fp = f.fixed_points();
    const Potential H(f);
    const long half = std::lround(L / h);
    std::vector<double> u(static_cast<std::size_t>(2 * half + 1));
    std::vector<double> du(u.size());

    auto slope = [&](double v) {
        const double hv = H(v, 1e-6);
        if (hv < -1e-10) throw NegativeH("H(u) = " + std::to_string(hv) + " at u = " + std::to_string(v));
        return std::sqrt(2.0 * std::max(hv, 0.0)) / sigma;
    };

    const auto centre = static_cast<std::size_t>(half);
    u[centre] = fp.a;
    du[centre] = slope(fp.a);

    double tail_right = L, tail_left = L;
    for (int dir : {+1, -1}) {
        const double dx = dir * h;
        double v = fp.a;
        bool tail = false;
        for (long s = 1; s <= half; ++s) {
            const auto k_idx = static_cast<std::size_t>(half + dir * s);
            if (!tail) {
                const double k1 = slope(v);
                const double k2 = slope(std::clamp(v + 0.5 * dx * k1, fp.a1, fp.a2));
                const double k3 = slope(std::clamp(v + 0.5 * dx * k2, fp.a1, fp.a2));
                const double k4 = slope(std::clamp(v + dx * k3, fp.a1, fp.a2));
                v += dx * (k1 + 2 * k2 + 2 * k3 + k4) / 6.0;
                if (!std::isfinite(v) || v < fp.a1 - 1e-6 || v > fp.a2 + 1e-6)
                    throw ProfileDiverged("profile left [a1, a2] at x = " + std::to_string(s * dx));
                u[k_idx] = v;
                du[k_idx] = slope(std::clamp(v, fp.a1, fp.a2));
                const double gap = dir > 0 ? fp.a2 - v : v - fp.a1;
                if (gap < opt.tail_switch) {
                    tail = true;
                    (dir > 0 ? tail_right : tail_left) = s * h;
                }
            } else {
                // analytic continuation from the switch point
                const double start = dir > 0 ? tail_right : tail_left;
                const double mu = std::sqrt(1.0 - f.d1(dir > 0 ? fp.a2 : fp.a1)) / sigma;
                const auto ks = static_cast<std::size_t>(half + dir * std::lround(start / h));
                const double gap0 = dir > 0 ? fp.a2 - u[ks] : u[ks] - fp.a1;
                const double gap = gap0 * std::exp(-mu * (s * h - start));
                u[k_idx] = dir > 0 ? fp.a2 - gap : fp.a1 + gap;
                du[k_idx] = mu * gap;
            }
        }
    }

    WaveProfile w(f, k, h, std::move(u), std::move(du));
    w.fit_tails(tail_left, tail_right);
    return w;
}

struct RhoReport {
    double rho2 = 0.0;             // quotient with the convolution in the numerator
    double rho2_simplified = 0.0;  // same quotient after W * (f'(u0) u0') = u0'
    double numerator = 0.0;        // int (W * (u0' f'(u0)))^2 f(u0)
    double denominator = 0.0;      // <u0', u0'>_{m_0} = int u0'^2 f'(u0)
    double max_identity_residual = 0.0;  // sup |W * (f'(u0) u0') - u0'| on the table
    /// numerator / denominator^2: variance rate of the projected phase per unit eps t,
    /// from the jump sizes -eps u0'(x_j) / <u0', u0'>_m and rates f(u0(x_j)).
    double phase_variance_rate = 0.0;
    /// Wave-speed diagnostic int_{a1}^{a2} (x - f(x)) dx / denominator.
    double speed = 0.0;
};

namespace detail {

// Composite Simpson on a uniform table with an even number of intervals.
inline double simpson(const std::vector<double>& y, double h) {
    const std::size_t n = y.size() - 1;
    double s = y.front() + y.back();
    for (std::size_t k = 1; k < n; ++k) s += (k % 2 ? 4.0 : 2.0) * y[k];
    return s * h / 3.0;
}

}  // namespace detail

/// Diffusion constant of the wave phase, by quadrature over the table plus tails.
inline RhoReport rho_squared(const WaveProfile& w) {
    const auto& f = w.sigmoid();
    const double sigma = w.kernel().sigma;
    const double h = w.step();
    const std::size_t n = w.table_size();
    const auto& u = w.table_u();
    const auto& du = w.table_du();

    // g = u0' f'(u0) on nodes and midpoints; W * g by two exponential scans with
    // Simpson weights on each cell.
    std::vector<double> g(n), gm(n - 1);
    for (std::size_t k = 0; k < n; ++k) g[k] = du[k] * f.d1(u[k]);
    for (std::size_t k = 0; k + 1 < n; ++k) {
        const double xm = w.table_x(k) + 0.5 * h;
        gm[k] = w.deriv(xm) * f.d1(w.value(xm));
    }
    const double e1 = std::exp(-h / sigma), eh = std::exp(-0.5 * h / sigma);
    std::vector<double> left(n, 0.0), right(n, 0.0);
    for (std::size_t k = 1; k < n; ++k)
        left[k] = e1 * left[k - 1] + h / 6.0 * (e1 * g[k - 1] + 4.0 * eh * gm[k - 1] + g[k]);
    for (std::size_t k = n - 1; k-- > 0;)
        right[k] = e1 * right[k + 1] + h / 6.0 * (e1 * g[k + 1] + 4.0 * eh * gm[k] + g[k]);

    RhoReport r;
    std::vector<double> num(n), num_s(n), den(n);
    for (std::size_t k = 0; k < n; ++k) {
        const double conv = (left[k] + right[k]) / (2.0 * sigma);
        r.max_identity_residual = std::max(r.max_identity_residual, std::abs(conv - du[k]));
        num[k] = conv * conv * f(u[k]);
        num_s[k] = du[k] * du[k] * f(u[k]);
        den[k] = du[k] * du[k] * f.d1(u[k]);
    }
    // analytic tails beyond the table: u0' = mu C e^{-mu |x|}, u0 ~ a_k
    const auto& fp = w.fixed_points();
    const double L = w.half_width();
    const double dr = w.deriv(L), dl = w.deriv(-L);
    const double tr = dr * dr / (2.0 * w.right_tail().mu), tl = dl * dl / (2.0 * w.left_tail().mu);
    const double tail_num = tr * f(fp.a2) + tl * f(fp.a1);
    const double tail_den = tr * f.d1(fp.a2) + tl * f.d1(fp.a1);

    r.numerator = detail::simpson(num, h) + tail_num;
    const double numerator_s = detail::simpson(num_s, h) + tail_num;
    r.denominator = detail::simpson(den, h) + tail_den;
    r.rho2 = r.numerator / r.denominator;
    r.rho2_simplified = numerator_s / r.denominator;
    r.phase_variance_rate = numerator_s / (r.denominator * r.denominator);
    r.speed = -Potential(f).total() / r.denominator;

    const double rel = std::abs(r.rho2 - r.rho2_simplified) / std::abs(r.rho2_simplified);
    if (rel > 1e-3)
        throw IdentityViolation("rho^2 forms disagree (relative " + std::to_string(rel) + ")");
    return r;
}

/// CSV `x,u0,du0` with 17 significant digits; `#` lines carry metadata.
inline void write_profile_csv(const WaveProfile& w, std::ostream& os, const std::string& meta = {}) {
    if (!meta.empty()) {
        std::istringstream lines(meta);
        for (std::string line; std::getline(lines, line);) os << "# " << line << '\n';
    }
    os << "x,u0,du0\n";
    char buf[128];
    for (std::size_t k = 0; k < w.table_size(); ++k) {
        std::snprintf(buf, sizeof buf, "%.17g,%.17g,%.17g\n", w.table_x(k), w.table_u()[k], w.table_du()[k]);
        os << buf;
    }
}

inline WaveProfile read_profile_csv(std::istream& is, SigmoidSpec f, KernelSpec k) {
    std::vector<double> x, u, du;
    bool header = false;
    for (std::string line; std::getline(is, line);) {
        if (line.empty() || line[0] == '#') continue;
        if (!header) {
            if (line.rfind("x,u0,du0", 0) != 0) throw ConfigError("profile CSV header must be x,u0,du0");
            header = true;
            continue;
        }
        double a, b, c;
        if (std::sscanf(line.c_str(), "%lf,%lf,%lf", &a, &b, &c) != 3)
            throw ConfigError("malformed profile CSV row: " + line);
        x.push_back(a);
        u.push_back(b);
        du.push_back(c);
    }
    return WaveProfile::from_table(std::move(f), k, x, std::move(u), std::move(du));
}

}  // namespace hawkeswave

#endif  // HAWKESWAVE_WAVE_HPP
