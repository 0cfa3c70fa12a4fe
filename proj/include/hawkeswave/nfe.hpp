#ifndef HAWKESWAVE_NFE_HPP
#define HAWKESWAVE_NFE_HPP

#include <cmath>
#include <functional>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "sigmoid.hpp"
#include "wave.hpp"

namespace hawkeswave {

/// Values on the bulk nodes of a grid plus constant far fields on D- and D+.
struct Field {
    Grid grid;
    std::vector<double> values;
    double left = 0.0;
    double right = 0.0;
    double time = 0.0;

    Field(Grid g, double left_far, double right_far)
        : grid(std::move(g)), values(grid.size(), 0.0), left(left_far), right(right_far) {}

    static Field constant(const Grid& g, double c) {
        Field out(g, c, c);
        std::fill(out.values.begin(), out.values.end(), c);
        return out;
    }

    /// Nodes sampled from a function, far fields given explicitly.
    template <class F>
    static Field sample(const Grid& g, F&& fn, double left_far, double right_far) {
        Field out(g, left_far, right_far);
        for (std::size_t k = 0; k < out.values.size(); ++k) out.values[k] = fn(g.node(k));
        return out;
    }

    /// Standing wave translated by psi, far fields a1 / a2.
    static Field from_profile(const Grid& g, const WaveProfile& w, double psi = 0.0) {
        const auto& fp = w.fixed_points();
        return sample(g, [&](double x) { return w.shifted(psi, x); }, fp.a1, fp.a2);
    }

    /// Piecewise-constant reading: far field on D-/D+, node value on each cell.
    double at(double x) const {
        if (x < grid.left_edge()) return left;
        if (auto k = grid.bulk_slot(x)) return values[*k];
        return right;
    }

    std::size_t size() const noexcept { return values.size(); }
};

/// Quadrature rule for W * g on the lattice.
enum class ConvRule {
    /// Exact convolution of the piecewise-constant field (cell integrals, far fields on D+/-).
    cell,
    /// eps * sum_j W(x_i - x_j) g_j over all of eps Z, far fields summed as geometric series;
    /// the mean-field drift of the particle system.
    midpoint,
};

/// (W * g)(x_i) for every bulk node in O(N) via two exponential scans.
inline Field conv_exp(const Field& g, const KernelSpec& k, ConvRule rule = ConvRule::cell) {
    const Grid& grid = g.grid;
    const double eps = grid.eps();
    const double s = k.sigma;
    const double r = std::exp(-eps / s);
    const std::size_t n = g.size();

    double w_off, w_diag;
    if (rule == ConvRule::cell) {
        w_off = std::sinh(eps / (2.0 * s));
        w_diag = -std::expm1(-eps / (2.0 * s));
    } else {
        w_off = eps / (2.0 * s);
        w_diag = w_off;
    }

    Field out(grid, g.left, g.right);
    out.time = g.time;
    std::vector<double>& o = out.values;

    double acc = 0.0;  // sum_{j<k} r^{k-j} g_j
    for (std::size_t i = 0; i < n; ++i) {
        if (i > 0) acc = r * (acc + g.values[i - 1]);
        o[i] = acc;
    }
    acc = 0.0;
    for (std::size_t i = n; i-- > 0;) {
        if (i + 1 < n) acc = r * (acc + g.values[i + 1]);
        o[i] = w_off * (o[i] + acc) + w_diag * g.values[i];
    }

    for (std::size_t i = 0; i < n; ++i) {
        const double to_left = eps * (static_cast<double>(i) + 0.5);  // x_i - left edge
        const double to_right = eps * (static_cast<double>(n - 1 - i) + 0.5);
        if (rule == ConvRule::cell) {
            o[i] += g.left * k.tail_mass(to_left) + g.right * k.tail_mass(to_right);
        } else {
            // eps/(2 s) sum_{m>=1} exp(-(d + m eps)/s), d = distance to the last bulk node
            const double geo = w_off * r / (1.0 - r);
            o[i] += geo * (g.left * std::exp(-(to_left - 0.5 * eps) / s) +
                           g.right * std::exp(-(to_right - 0.5 * eps) / s));
        }
    }
    return out;
}

/// Voltage / rate NFE right-hand sides and exponential-Heun steps.
class NfeModel {
public:
    NfeModel(SigmoidSpec f, KernelSpec k, ConvRule rule = ConvRule::cell)
        : f_(std::move(f)), k_(k), rule_(rule) {}

    const SigmoidSpec& sigmoid() const noexcept { return f_; }
    const KernelSpec& kernel() const noexcept { return k_; }
    ConvRule rule() const noexcept { return rule_; }

    /// W * f(u)
    Field voltage_drive(const Field& u) const {
        Field fu = u;
        for (double& v : fu.values) v = f_(v);
        fu.left = f_(u.left);
        fu.right = f_(u.right);
        return conv_exp(fu, k_, rule_);
    }

    /// f(W * v); far fields mapped through f as well.
    Field rate_drive(const Field& v) const {
        Field c = conv_exp(v, k_, rule_);
        for (double& x : c.values) x = f_(x);
        c.left = f_(v.left);
        c.right = f_(v.right);
        return c;
    }

    Field step_vnfe(const Field& u, double dt) const {
        return heun(u, dt, [this](const Field& x) { return voltage_drive(x); });
    }
    Field step_rnfe(const Field& v, double dt) const {
        return heun(v, dt, [this](const Field& x) { return rate_drive(x); });
    }

private:
    // x' = -x + N(x), integrating factor e^{-t}, trapezoidal average of N.
    template <class Drive>
    Field heun(const Field& x, double dt, Drive&& drive) const {
        if (!(dt > 0.0 && dt <= 0.5)) throw ConfigError("NFE time step must lie in (0, 0.5]");
        const double decay = std::exp(-dt);
        const double gain = -std::expm1(-dt);
        const Field n0 = drive(x);
        Field pred = x;
        for (std::size_t i = 0; i < x.size(); ++i) pred.values[i] = decay * x.values[i] + gain * n0.values[i];
        const Field n1 = drive(pred);
        Field out = x;
        for (std::size_t i = 0; i < x.size(); ++i)
            out.values[i] = decay * x.values[i] + 0.5 * gain * (n0.values[i] + n1.values[i]);
        out.time = x.time + dt;
        return out;
    }

    SigmoidSpec f_;
    KernelSpec k_;
    ConvRule rule_;
};

/// v = u - sigma^2 D2 u with the 3-point stencil; far fields close the stencil.
inline Field deconvolve_exp(const Field& u, const KernelSpec& k) {
    Field v = u;
    const std::size_t n = u.size();
    const double c = k.sigma * k.sigma / (u.grid.eps() * u.grid.eps());
    for (std::size_t i = 0; i < n; ++i) {
        const double lo = i == 0 ? u.left : u.values[i - 1];
        const double hi = i + 1 == n ? u.right : u.values[i + 1];
        v.values[i] = u.values[i] - c * (lo - 2.0 * u.values[i] + hi);
    }
    return v;
}

enum class NfeKind { voltage, rate };

struct IntegrateOptions {
    double dt = 0.01;
    double observe_every = 0.0;  // 0: only the initial and final states
    NfeKind kind = NfeKind::voltage;
};

/// Fixed-step integration up to T; returns the snapshots at the observation times.
inline std::vector<Field> integrate(const NfeModel& model, const Field& initial, double T,
                                    const IntegrateOptions& opt = {}) {
    if (T < 0.0) throw ConfigError("integration horizon must be >= 0");
    if (!(opt.dt > 0.0 && opt.dt <= 0.5)) throw ConfigError("nfe.dt must lie in (0, 0.5]");
    std::vector<Field> out{initial};
    if (T == 0.0) return out;
    const auto steps = static_cast<long>(std::ceil(T / opt.dt - 1e-9));
    const double dt = T / static_cast<double>(steps);
    const long every = opt.observe_every > 0.0 ? std::max(1L, std::lround(opt.observe_every / dt)) : steps;

    Field x = initial;
    const double t0 = initial.time;
    for (long s = 1; s <= steps; ++s) {
        x = opt.kind == NfeKind::voltage ? model.step_vnfe(x, dt) : model.step_rnfe(x, dt);
        x.time = t0 + static_cast<double>(s) * dt;
        for (double v : x.values)
            if (!std::isfinite(v)) throw NonFinite("NFE state became non-finite at t = " + std::to_string(x.time));
        if (s % every == 0 || s == steps) {
            if (out.back().time != x.time) out.push_back(x);
        }
    }
    return out;
}

}  // namespace hawkeswave

#endif  // HAWKESWAVE_NFE_HPP
