#ifndef HAWKESWAVE_KERNEL_HPP
#define HAWKESWAVE_KERNEL_HPP

#include <cmath>

#include "error.hpp"

namespace hawkeswave {

/// Exponential interaction kernel W(x) = exp(-|x| / sigma) / (2 sigma).
struct KernelSpec {
    double sigma = 1.0;

    explicit KernelSpec(double s = 1.0) : sigma(s) {
        if (!(sigma > 0.0)) throw ConfigError("kernel length scale sigma must be > 0");
    }

    double operator()(double x) const { return std::exp(-std::abs(x) / sigma) / (2.0 * sigma); }

    /// Integral of W over [d, inf) for d >= 0.
    double tail_mass(double d) const { return 0.5 * std::exp(-d / sigma); }

    /// Integral of W(x - y) over y in [c - h, c + h).
    double cell_mass(double x, double c, double h) const {
        const double r = x - c;
        if (std::abs(r) >= h) return 0.5 * std::exp(-(std::abs(r) - h) / sigma) * -std::expm1(-2.0 * h / sigma);
        return 1.0 - 0.5 * std::exp(-(h - r) / sigma) - 0.5 * std::exp(-(h + r) / sigma);
    }
};

}  // namespace hawkeswave

#endif  // HAWKESWAVE_KERNEL_HPP
