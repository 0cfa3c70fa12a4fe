#ifndef HAWKESWAVE_HAWKES_HPP
#define HAWKESWAVE_HAWKES_HPP

#include <cmath>
#include <cstdint>
#include <functional>
#include <limits>
#include <memory>
#include <ostream>
#include <random>
#include <variant>
#include <vector>

#include "error.hpp"
#include "grid.hpp"
#include "kernel.hpp"
#include "nfe.hpp"
#include "sigmoid.hpp"
#include "wave.hpp"

namespace hawkeswave {

/// a1 left of -ell, a2 right of ell, linear in between (ell = eps^{-beta}).
struct RampInit {};
/// Translated standing wave.
struct WaveInit {
    std::shared_ptr<const WaveProfile> profile;
    double psi = 0.0;
};
/// Bulk node values given explicitly (size 2N + 1).
struct FieldInit {
    std::vector<double> values;
};
using InitialCondition = std::variant<RampInit, WaveInit, FieldInit>;

/// M_b = ceil(sigma ln(1/tol) / eps), at least 1 and at most 5N.
inline long default_band_width(double eps, double sigma, long half_count, double tol = 1e-10) {
    if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("band tolerance must lie in (0, 1)");
    const auto m = static_cast<long>(std::ceil(sigma * std::log(1.0 / tol) / eps));
    return std::max(1L, std::min(m, 5 * std::max(half_count, 1L)));
}

struct HawkesParams {
    SigmoidSpec f;
    KernelSpec kernel;
    Grid grid;
    InitialCondition init = RampInit{};
    double t_end = 1.0;
    std::uint64_t seed = 0;
    /// Replace neurons beyond the bands by their mean input.
    bool far_tail = true;
    /// Spikes only reach bulk nodes within sigma ln(1/tol_spike).
    double tol_spike = 1e-12;
    /// Multiplies every interaction; 0 decouples the neurons (test hook).
    double coupling = 1.0;
    bool record_spikes = true;
};

struct Spike {
    double t;
    long i;  // lattice index; |i| > N for band neurons
};

struct SpikeLog {
    std::vector<Spike> spikes;
    std::uint64_t accepted = 0;
    std::uint64_t candidates = 0;

    void write_ndjson(std::ostream& os) const {
        char buf[64];
        for (const auto& s : spikes) {
            std::snprintf(buf, sizeof buf, "{\"t\":%.17g,\"i\":%ld}\n", s.t, s.i);
            os << buf;
        }
    }
};

/// Initial bulk potentials u0(x_i).
inline std::vector<double> initial_values(const HawkesParams& p) {
    const Grid& g = p.grid;
    const auto& fp = p.f.fixed_points();
    std::vector<double> u(g.size());
    std::visit(
        [&](const auto& init) {
            using T = std::decay_t<decltype(init)>;
            if constexpr (std::is_same_v<T, RampInit>) {
                const double ell = g.beta() ? std::pow(g.eps(), -*g.beta()) : g.eps() * static_cast<double>(g.half_count());
                if (!(ell > 0.0)) throw ConfigError("ramp initial condition needs a positive bulk width");
                for (std::size_t k = 0; k < u.size(); ++k) {
                    const double x = g.node(k);
                    u[k] = std::clamp(fp.a1 + (fp.a2 - fp.a1) / (2.0 * ell) * (x + ell), fp.a1, fp.a2);
                }
            } else if constexpr (std::is_same_v<T, WaveInit>) {
                if (!init.profile) throw ConfigError("wave initial condition without a profile");
                for (std::size_t k = 0; k < u.size(); ++k) u[k] = init.profile->shifted(init.psi, g.node(k));
            } else {
                if (init.values.size() != u.size())
                    throw ConfigError("imported initial field has " + std::to_string(init.values.size()) +
                                      " values, grid needs " + std::to_string(u.size()));
                u = init.values;
            }
        },
        p.init);
    return u;
}

/// eps * sum_{j > N + M_b} W(x_i - x_j) for the slot k, i.e. the right far tail weight.
inline double far_tail_weight(const Grid& g, const KernelSpec& k, std::size_t slot, bool right) {
    const double eps = g.eps();
    const long i = static_cast<long>(slot) - g.half_count();
    const long first = g.half_count() + g.band() + 1;
    const double d = eps * static_cast<double>(right ? first - i : first + i);
    const double r = std::exp(-eps / k.sigma);
    return eps * k(d) / (1.0 - r);
}

/// Potentials stored against a decay epoch: U_i(t) = r_i + u_i e^{-(t - epoch)}.
struct HawkesState {
    HawkesParams params;
    double t = 0.0;
    double epoch = 0.0;
    std::vector<double> stored;    // u_i, scaled to the epoch
    std::vector<double> far;       // stationary far-tail input r_i
    std::vector<std::uint64_t> counts;  // bulk spike counts Z_i
    std::uint64_t band_left = 0;
    std::uint64_t band_right = 0;
    std::mt19937_64 rng;

    explicit HawkesState(HawkesParams p) : params(std::move(p)), rng(params.seed) {}

    double decay() const { return std::exp(-(t - epoch)); }
    double potential(std::size_t k) const { return far[k] + stored[k] * decay(); }
    std::vector<double> potentials() const {
        std::vector<double> u(stored.size());
        const double d = decay();
        for (std::size_t k = 0; k < u.size(); ++k) u[k] = far[k] + stored[k] * d;
        return u;
    }
    /// Folds the pending decay into the stored values.
    void renormalize() {
        const double d = decay();
        for (double& s : stored) s *= d;
        epoch = t;
    }
};

inline HawkesState init_state(const HawkesParams& p) {
    if (!p.f.has_fixed_points()) throw ConfigError("sigmoid fixed points must be computed first");
    if (!(p.t_end >= 0.0)) throw ConfigError("sim.t_end must be >= 0");
    if (!(p.tol_spike > 0.0 && p.tol_spike < 1.0)) throw ConfigError("tol_spike must lie in (0, 1)");
    HawkesState s(p);
    const auto& fp = p.f.fixed_points();
    const std::vector<double> u0 = initial_values(p);
    s.far.assign(u0.size(), 0.0);
    if (p.far_tail) {
        for (std::size_t k = 0; k < u0.size(); ++k)
            s.far[k] = p.coupling * (fp.a1 * far_tail_weight(p.grid, p.kernel, k, false) +
                                     fp.a2 * far_tail_weight(p.grid, p.kernel, k, true));
    }
    s.stored.resize(u0.size());
    for (std::size_t k = 0; k < u0.size(); ++k) s.stored[k] = u0[k] - s.far[k];
    s.counts.assign(u0.size(), 0);
    return s;
}

namespace detail {

inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// eps W(d eps) for d = 0 .. max distance between a simulated neuron and a bulk node.
inline std::vector<double> coupling_row(const HawkesParams& p) {
    const Grid& g = p.grid;
    const long reach = std::min<long>(2 * g.half_count() + g.band(),
                                      static_cast<long>(std::ceil(p.kernel.sigma * std::log(1.0 / p.tol_spike) / g.eps())));
    std::vector<double> row(static_cast<std::size_t>(reach + 1));
    for (std::size_t d = 0; d < row.size(); ++d) row[d] = p.coupling * g.eps() * p.kernel(g.eps() * static_cast<double>(d));
    return row;
}

inline constexpr double kRenormalizeEvery = 50.0;

}  // namespace detail

/// Adds the effect of a spike of lattice neuron j at the current clock to every bulk potential.
inline void apply_spike(HawkesState& s, long j, const std::vector<double>& row) {
    const long n = s.params.grid.half_count();
    const double scale = std::exp(s.t - s.epoch);
    const long reach = static_cast<long>(row.size()) - 1;
    const long lo = std::max(-n, j - reach);
    const long hi = std::min(n, j + reach);
    for (long i = lo; i <= hi; ++i) s.stored[static_cast<std::size_t>(i + n)] += scale * row[static_cast<std::size_t>(std::abs(i - j))];
}

/// Test hook: a spike of neuron j at the current clock, outside the thinning loop.
inline void force_spike(HawkesState& s, long j, SpikeLog* log = nullptr) {
    apply_spike(s, j, detail::coupling_row(s.params));
    const long n = s.params.grid.half_count();
    if (std::abs(j) <= n) ++s.counts[static_cast<std::size_t>(j + n)];
    if (log) {
        ++log->accepted;
        if (s.params.record_spikes) log->spikes.push_back({s.t, j});
    }
}

using HawkesObserver = std::function<void(const HawkesState&, const SpikeLog&)>;

/// Ogata thinning up to t_end. Bulk candidates carry bound 1, band candidates their exact rate a_k.
/// The observer sees the state at every multiple of observe_every (0 disables) and at t_end.
inline SpikeLog simulate(HawkesState& s, double t_end, const HawkesObserver& observer = {}, double observe_every = 0.0) {
    if (!(t_end >= s.t)) throw ConfigError("simulation horizon lies before the current clock");
    const HawkesParams& p = s.params;
    const Grid& g = p.grid;
    const long n = g.half_count();
    const long mb = g.band();
    const auto& fp = p.f.fixed_points();
    const std::vector<double> row = detail::coupling_row(p);

    const double bulk_bound = static_cast<double>(2 * n + 1);
    const double left_bound = static_cast<double>(mb) * fp.a1;
    const double right_bound = static_cast<double>(mb) * fp.a2;
    const double total = bulk_bound + left_bound + right_bound;

    SpikeLog log;
    double next_obs = observe_every > 0.0 ? s.t : std::numeric_limits<double>::infinity();
    double last_obs = -std::numeric_limits<double>::infinity();
    auto observe_until = [&](double upto) {
        if (!observer) return;
        while (next_obs <= upto && next_obs <= t_end) {
            const double keep = s.t;
            s.t = next_obs;
            observer(s, log);
            last_obs = next_obs;
            s.t = keep;
            next_obs += observe_every;
        }
    };

    while (true) {
        const double tau = -std::log1p(-detail::uniform01(s.rng)) / total;
        const double t_next = s.t + tau;
        if (t_next > t_end) break;
        observe_until(t_next);
        s.t = t_next;
        if (s.t - s.epoch > detail::kRenormalizeEvery) s.renormalize();
        ++log.candidates;

        const double v = detail::uniform01(s.rng) * total;
        long j;
        if (v < bulk_bound) {
            const auto k = std::min(static_cast<std::size_t>(v), static_cast<std::size_t>(2 * n));
            const double u = s.potential(k);
            const double rate = p.f(u);
            if (!std::isfinite(u)) throw NonFinite("bulk potential became non-finite");
            if (detail::uniform01(s.rng) >= rate) continue;
            j = static_cast<long>(k) - n;
            ++s.counts[k];
        } else if (v < bulk_bound + left_bound) {
            const auto m = std::min(static_cast<long>((v - bulk_bound) / fp.a1), mb - 1);
            j = -n - 1 - m;
            ++s.band_left;
        } else {
            const auto m = std::min(static_cast<long>((v - bulk_bound - left_bound) / fp.a2), mb - 1);
            j = n + 1 + m;
            ++s.band_right;
        }
        ++log.accepted;
        if (p.record_spikes) log.spikes.push_back({s.t, j});
        apply_spike(s, j, row);
    }
    observe_until(t_end);
    s.t = t_end;
    if (observer && last_obs < t_end - 1e-12 * std::max(1.0, t_end)) observer(s, log);
    return log;
}

/// Piecewise-constant voltage profile: a1 on D-, U_i on I_i, a2 on D+.
inline Field voltage_profile(const HawkesState& s) {
    const auto& fp = s.params.f.fixed_points();
    Field out(s.params.grid, fp.a1, fp.a2);
    out.values = s.potentials();
    out.time = s.t;
    return out;
}

/// Lambda_i = f(U_i).
inline Field rate_profile(const HawkesState& s) {
    Field out = voltage_profile(s);
    for (double& v : out.values) v = s.params.f(v);
    out.left = s.params.f(out.left);
    out.right = s.params.f(out.right);
    return out;
}

/// V_t = v0 e^{-t} + int_0^t e^{-(t-s)} f(U_s) ds, advanced with a trapezoidal integrating-factor step.
struct ConvRateAccumulator {
    Field value;
    Field last_rate;

    ConvRateAccumulator(Field v0, Field rate0) : value(std::move(v0)), last_rate(std::move(rate0)) {}
};

inline ConvRateAccumulator conv_rate_init(Field v0, const HawkesState& s) {
    v0.time = s.t;
    return ConvRateAccumulator(std::move(v0), rate_profile(s));
}

inline void conv_rate_update(ConvRateAccumulator& acc, const Field& rate_now) {
    const double dt = rate_now.time - acc.value.time;
    if (dt < 0.0) throw ConfigError("convoluted rate update runs backwards in time");
    const double decay = std::exp(-dt);
    const double gain = -std::expm1(-dt);
    for (std::size_t k = 0; k < acc.value.size(); ++k)
        acc.value.values[k] = decay * acc.value.values[k] + 0.5 * gain * (acc.last_rate.values[k] + rate_now.values[k]);
    acc.value.time = rate_now.time;
    acc.last_rate = rate_now;
}

inline void conv_rate_update(ConvRateAccumulator& acc, const HawkesState& s) { conv_rate_update(acc, rate_profile(s)); }

}  // namespace hawkeswave

#endif  // HAWKESWAVE_HAWKES_HPP
