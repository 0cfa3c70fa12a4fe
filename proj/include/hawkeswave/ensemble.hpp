#ifndef HAWKESWAVE_ENSEMBLE_HPP
#define HAWKESWAVE_ENSEMBLE_HPP

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <mutex>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include "hawkes.hpp"
#include "phase.hpp"

namespace hawkeswave {

/// Phase path of one Hawkes run sampled at a fixed cadence.
struct PhaseRecord {
    std::uint64_t seed = 0;
    std::vector<double> t;
    std::vector<double> psi;
    std::vector<double> dist;
    std::vector<std::uint64_t> events;  // accepted spikes up to t
    std::vector<bool> in_tube;
    SpikeLog log;
};

/// Simulates p and tracks the wave phase at 0, observe_every, 2 observe_every, ... and t_end.
inline PhaseRecord track_run(const HawkesParams& p, const WaveProfile& w, double observe_every,
                             const PhaseOptions& opt = {}) {
    if (!(observe_every > 0.0)) throw ConfigError("observation cadence must be > 0");
    PhaseRecord rec;
    rec.seed = p.seed;
    HawkesState s = init_state(p);
    PhaseTracker tracker(w, opt, 0.0);
    auto observe = [&](const HawkesState& st, const SpikeLog& log) {
        const auto sample = tracker(voltage_profile(st));
        rec.t.push_back(st.t);
        rec.psi.push_back(sample.psi);
        rec.dist.push_back(sample.dist);
        rec.events.push_back(log.accepted);
        rec.in_tube.push_back(sample.in_tube);
    };
    rec.log = simulate(s, p.t_end, observe, observe_every);
    return rec;
}

struct EnsembleResult {
    std::vector<std::optional<PhaseRecord>> records;  // by run index
    std::vector<std::string> errors;                  // empty string for a completed run

    std::size_t completed() const {
        return static_cast<std::size_t>(std::count_if(records.begin(), records.end(), [](const auto& r) { return r.has_value(); }));
    }
};

/// Runs r = 0 .. runs-1 with seed base_seed + r on up to `jobs` threads. `done` is called once per
/// finished run, serialized, in completion order.
inline EnsembleResult run_ensemble(const HawkesParams& base, const WaveProfile& w, std::size_t runs, std::uint64_t base_seed,
                                   double observe_every, unsigned jobs, const PhaseOptions& opt = {},
                                   const std::function<void(std::size_t, const PhaseRecord&)>& done = {}) {
    EnsembleResult out;
    out.records.resize(runs);
    out.errors.assign(runs, std::string());
    std::atomic<std::size_t> next{0};
    std::mutex lock;
    auto worker = [&] {
        for (std::size_t r = next++; r < runs; r = next++) {
            HawkesParams p = base;
            p.seed = base_seed + r;
            try {
                PhaseRecord rec = track_run(p, w, observe_every, opt);
                std::lock_guard<std::mutex> g(lock);
                if (done) done(r, rec);
                out.records[r] = std::move(rec);
            } catch (const std::exception& e) {
                std::lock_guard<std::mutex> g(lock);
                out.errors[r] = e.what();
            }
        }
    };
    jobs = std::max(1u, std::min<unsigned>(jobs, static_cast<unsigned>(std::max<std::size_t>(runs, 1))));
    if (jobs == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        for (unsigned j = 0; j < jobs; ++j) pool.emplace_back(worker);
        for (auto& t : pool) t.join();
    }
    return out;
}

}  // namespace hawkeswave

#endif  // HAWKESWAVE_ENSEMBLE_HPP
