#ifndef HAWKESWAVE_SIGMOID_HPP
#define HAWKESWAVE_SIGMOID_HPP

#include <algorithm>
#include <cmath>
#include <memory>
#include <numbers>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <boost/math/interpolators/pchip.hpp>

#include "error.hpp"

namespace hawkeswave {

/// f(x) = 1/2 + atan(gain (x - center)) / pi
struct ArctanFamily {
    double gain = 8.0;
    double center = 0.5;
};

/// f(x) = 1 / (1 + exp(-gain (x - center)))
struct LogisticFamily {
    double gain = 8.0;
    double center = 0.5;
};

/// Degenerate f == p. Only meaningful as a thinning test hook.
struct ConstantFamily {
    double p = 0.5;
};

/// Monotone cubic (PCHIP) through user samples; clamped outside the table.
struct TabulatedFamily {
    std::vector<double> x;
    std::vector<double> y;
};

struct FixedPoints {
    double a1 = 0.0;
    double a = 0.0;
    double a2 = 0.0;
};

/// The firing-rate nonlinearity f with analytic f', f'' and cached fixed points.
///
/// A voltage shift c maps f to x -> c + f(x - c); it translates every fixed point by c.
class SigmoidSpec {
public:
    using Family = std::variant<ArctanFamily, LogisticFamily, ConstantFamily, TabulatedFamily>;

    static SigmoidSpec arctan(double gain, double center) { return SigmoidSpec(ArctanFamily{gain, center}); }
    static SigmoidSpec logistic(double gain, double center) { return SigmoidSpec(LogisticFamily{gain, center}); }
    static SigmoidSpec tabulated(std::vector<double> x, std::vector<double> y) {
        return SigmoidSpec(TabulatedFamily{std::move(x), std::move(y)});
    }
    /// f == p with all three "fixed points" pinned at p, so every neuron is Poisson(p).
    static SigmoidSpec constant(double p) {
        SigmoidSpec s(ConstantFamily{p});
        s.fixed_ = FixedPoints{p, p, p};
        return s;
    }

    explicit SigmoidSpec(Family family) : family_(std::move(family)) {
        if (auto* t = std::get_if<TabulatedFamily>(&family_)) {
            if (t->x.size() < 4 || t->x.size() != t->y.size())
                throw ConfigError("tabulated sigmoid needs >= 4 matching samples");
            if (!std::is_sorted(t->x.begin(), t->x.end()))
                throw ConfigError("tabulated sigmoid abscissae must be increasing");
            auto xs = t->x;
            auto ys = t->y;
            table_ = std::make_shared<boost::math::interpolators::pchip<std::vector<double>>>(std::move(xs),
                                                                                             std::move(ys));
        }
    }

    const Family& family() const noexcept { return family_; }
    double shift() const noexcept { return shift_; }

    SigmoidSpec voltage_shifted(double c) const {
        SigmoidSpec s = *this;
        s.shift_ += c;
        if (s.fixed_) s.fixed_ = FixedPoints{fixed_->a1 + c, fixed_->a + c, fixed_->a2 + c};
        return s;
    }

    double operator()(double x) const { return shift_ + base(x - shift_); }
    double d1(double x) const { return base_d1(x - shift_); }
    double d2(double x) const { return base_d2(x - shift_); }

    /// Largest f' over the scan window; a Lipschitz constant for f.
    double lipschitz() const {
        if (const auto* a = std::get_if<ArctanFamily>(&family_)) return a->gain / std::numbers::pi;
        if (const auto* l = std::get_if<LogisticFamily>(&family_)) return l->gain / 4.0;
        double best = 0.0;
        const auto [lo, hi] = scan_window();
        for (int k = 0; k <= 10000; ++k) best = std::max(best, d1(lo + (hi - lo) * k / 10000.0));
        return best;
    }

    /// Interval scanned for sign changes of f(x) - x.
    std::pair<double, double> scan_window() const {
        double c0 = 0.5;
        std::visit(
            [&](const auto& fam) {
                using T = std::decay_t<decltype(fam)>;
                if constexpr (std::is_same_v<T, ArctanFamily> || std::is_same_v<T, LogisticFamily>)
                    c0 = fam.center;
                else if constexpr (std::is_same_v<T, TabulatedFamily>)
                    c0 = 0.5 * (fam.x.front() + fam.x.back());
            },
            family_);
        return {std::min(0.0, c0 - 5.0) + shift_, std::max(1.0, c0 + 5.0) + shift_};
    }

    bool has_fixed_points() const noexcept { return fixed_.has_value(); }
    const FixedPoints& fixed_points() const {
        if (!fixed_) throw ConfigError("sigmoid fixed points not computed");
        return *fixed_;
    }
    void set_fixed_points(const FixedPoints& fp) { fixed_ = fp; }

    /// sup over n samples of x in [-half, half] of |f(a+x) + f(a-x) - 2a|.
    double neutrality_residual(double half = 5.0, int n = 10000) const {
        const double a = fixed_points().a;
        double worst = 0.0;
        for (int k = 0; k < n; ++k) {
            const double x = -half + 2.0 * half * k / (n - 1);
            worst = std::max(worst, std::abs((*this)(a + x) + (*this)(a - x) - 2.0 * a));
        }
        return worst;
    }

private:
    double base(double x) const {
        return std::visit(
            [&](const auto& fam) -> double {
                using T = std::decay_t<decltype(fam)>;
                if constexpr (std::is_same_v<T, ArctanFamily>) {
                    return 0.5 + std::atan(fam.gain * (x - fam.center)) / std::numbers::pi;
                } else if constexpr (std::is_same_v<T, LogisticFamily>) {
                    return 1.0 / (1.0 + std::exp(-fam.gain * (x - fam.center)));
                } else if constexpr (std::is_same_v<T, ConstantFamily>) {
                    return fam.p;
                } else {
                    return (*table_)(std::clamp(x, fam.x.front(), fam.x.back()));
                }
            },
            family_);
    }

    double base_d1(double x) const {
        return std::visit(
            [&](const auto& fam) -> double {
                using T = std::decay_t<decltype(fam)>;
                if constexpr (std::is_same_v<T, ArctanFamily>) {
                    const double z = fam.gain * (x - fam.center);
                    return fam.gain / (std::numbers::pi * (1.0 + z * z));
                } else if constexpr (std::is_same_v<T, LogisticFamily>) {
                    const double s = 1.0 / (1.0 + std::exp(-fam.gain * (x - fam.center)));
                    return fam.gain * s * (1.0 - s);
                } else if constexpr (std::is_same_v<T, ConstantFamily>) {
                    return 0.0;
                } else {
                    if (x < fam.x.front() || x > fam.x.back()) return 0.0;
                    return table_->prime(x);
                }
            },
            family_);
    }

    double base_d2(double x) const {
        return std::visit(
            [&](const auto& fam) -> double {
                using T = std::decay_t<decltype(fam)>;
                if constexpr (std::is_same_v<T, ArctanFamily>) {
                    const double z = fam.gain * (x - fam.center);
                    const double q = 1.0 + z * z;
                    return -2.0 * fam.gain * fam.gain * z / (std::numbers::pi * q * q);
                } else if constexpr (std::is_same_v<T, LogisticFamily>) {
                    const double s = 1.0 / (1.0 + std::exp(-fam.gain * (x - fam.center)));
                    return fam.gain * fam.gain * s * (1.0 - s) * (1.0 - 2.0 * s);
                } else if constexpr (std::is_same_v<T, ConstantFamily>) {
                    return 0.0;
                } else {
                    constexpr double h = 1e-5;
                    return (base_d1(x + h) - base_d1(x - h)) / (2.0 * h);
                }
            },
            family_);
    }

    Family family_;
    double shift_ = 0.0;
    std::shared_ptr<const boost::math::interpolators::pchip<std::vector<double>>> table_;
    std::optional<FixedPoints> fixed_;
};

/// Roots a1 < a < a2 of f(x) = x by scan + bisection; caches them into `f`.
inline FixedPoints fixed_points(SigmoidSpec& f, int scan_points = 10000, double tol = 1e-12) {
    const auto [lo, hi] = f.scan_window();
    auto g = [&](double x) { return f(x) - x; };

    std::vector<double> roots;
    double x_prev = lo;
    double g_prev = g(lo);
    if (g_prev == 0.0) roots.push_back(lo);
    for (int k = 1; k < scan_points; ++k) {
        const double x = lo + (hi - lo) * k / (scan_points - 1);
        const double gx = g(x);
        if (gx == 0.0) {
            roots.push_back(x);
        } else if (g_prev != 0.0 && (g_prev < 0.0) != (gx < 0.0)) {
            double a = x_prev, b = x, ga = g_prev;
            for (int it = 0; it < 200 && b - a > tol * 0.1; ++it) {
                const double m = 0.5 * (a + b);
                const double gm = g(m);
                if (gm == 0.0) { a = b = m; break; }
                if ((gm < 0.0) == (ga < 0.0)) { a = m; ga = gm; } else { b = m; }
            }
            roots.push_back(0.5 * (a + b));
        }
        x_prev = x;
        g_prev = gx;
        if (roots.size() > 3) break;
    }
    if (roots.size() != 3)
        throw NotBistable("f(x) - x has " + std::to_string(roots.size()) + (roots.size() > 3 ? "+" : "") +
                          " roots on the scan window, expected 3");

    const FixedPoints fp{roots[0], roots[1], roots[2]};
    if (f.d1(fp.a1) >= 1.0 || f.d1(fp.a2) >= 1.0)
        throw StabilityViolation("outer fixed points must satisfy f' < 1");
    if (f.d1(fp.a) <= 1.0) throw StabilityViolation("middle fixed point must satisfy f' > 1");
    if (fp.a1 < 0.0) throw ConfigError("a1 < 0: rates f(a1) would leave [0, 1]");
    f.set_fixed_points(fp);
    return fp;
}

}  // namespace hawkeswave

#endif  // HAWKESWAVE_SIGMOID_HPP
