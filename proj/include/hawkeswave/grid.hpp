#ifndef HAWKESWAVE_GRID_HPP
#define HAWKESWAVE_GRID_HPP

#include <cmath>
#include <cstddef>
#include <optional>

#include "error.hpp"

namespace hawkeswave {

/// Uniform lattice x_i = i eps, i in [-N, N], with cells I_i = [x_i - eps/2, x_i + eps/2).
///
/// Left of the bulk is D- = (-inf, -eps N - eps/2), right of it D+ = [eps N + eps/2, inf).
/// `band` is the number of boundary Poisson neurons simulated on each side.
class Grid {
public:
    Grid(double eps, long half_count, long band = 1) : eps_(eps), n_(half_count), band_(band) {
        if (!(eps > 0.0)) throw ConfigError("grid spacing eps must be > 0");
        if (half_count < 0) throw ConfigError("bulk half-count N must be >= 0");
        if (band < 1) throw ConfigError("boundary band width must be >= 1");
    }

    /// N = floor(ell / eps) with ell = eps^{-beta}.
    static Grid from_beta(double eps, double beta, long band = 1) {
        if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("beta must lie in (0, 1)");
        const double ell = std::pow(eps, -beta);
        Grid g(eps, static_cast<long>(std::floor(ell / eps * (1.0 + 1e-12))), band);
        g.beta_ = beta;
        return g;
    }

    Grid with_band(long band) const {
        Grid g = *this;
        if (band < 1) throw ConfigError("boundary band width must be >= 1");
        g.band_ = band;
        return g;
    }

    double eps() const noexcept { return eps_; }
    long half_count() const noexcept { return n_; }
    long band() const noexcept { return band_; }
    std::optional<double> beta() const noexcept { return beta_; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(2 * n_ + 1); }

    /// Position of lattice index i (may lie outside the bulk).
    double x(long i) const noexcept { return static_cast<double>(i) * eps_; }
    /// Position of array slot k = i + N.
    double node(std::size_t k) const noexcept { return x(static_cast<long>(k) - n_); }

    double right_edge() const noexcept { return eps_ * (static_cast<double>(n_) + 0.5); }
    double left_edge() const noexcept { return -right_edge(); }

    /// Lattice index of the cell containing x, ignoring the bulk limits.
    long cell_index(double x) const noexcept { return static_cast<long>(std::floor(x / eps_ + 0.5)); }

    /// Array slot of the bulk cell containing x; empty on D- or D+.
    std::optional<std::size_t> bulk_slot(double x) const noexcept {
        if (x < left_edge() || x >= right_edge()) return std::nullopt;
        long i = cell_index(x);
        if (i < -n_) i = -n_;
        if (i > n_) i = n_;
        return static_cast<std::size_t>(i + n_);
    }

private:
    double eps_;
    long n_;
    long band_;
    std::optional<double> beta_;
};

}  // namespace hawkeswave

#endif  // HAWKESWAVE_GRID_HPP
