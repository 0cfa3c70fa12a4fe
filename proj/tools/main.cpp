#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <hawkeswave/hawkeswave.hpp>

#include "config.hpp"

namespace fs = std::filesystem;
using namespace hawkeswave;
using hwcli::Config;
using hwcli::json;

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitStatistical = 4;

struct Model {
    SigmoidSpec f;
    KernelSpec k;
    std::shared_ptr<const WaveProfile> wave;
    std::string hash;
};

Model build_model(const Config& c) {
    const std::string family = c.text("model.f.family");
    const double gain = c.number("model.f.gain");
    const double center = c.number("model.f.center");
    if (!(gain > 0.0)) throw ConfigError("model.f.gain must be > 0");
    SigmoidSpec f = family == "arctan"     ? SigmoidSpec::arctan(gain, center)
                    : family == "logistic" ? SigmoidSpec::logistic(gain, center)
                                           : throw ConfigError("model.f.family must be 'arctan' or 'logistic'");
    fixed_points(f);
    const KernelSpec k(c.number("model.sigma"));
    ProfileOptions opt;
    opt.step = c.number("profile.step");
    opt.half_width = c.number("profile.half_width");
    auto w = std::make_shared<const WaveProfile>(solve_profile(f, k, opt));
    return {f, k, w, w->table_hash()};
}

void validate_sim(const Config& c) {
    const double eps = c.number("sim.epsilon");
    const double beta = c.number("sim.beta");
    if (!(eps > 0.0 && eps <= 0.5)) throw ConfigError("sim.epsilon must lie in (0, 0.5]");
    if (!(beta > 0.0 && beta < 1.0)) throw ConfigError("sim.beta must lie in (0, 1)");
    const double tol = c.number("sim.band_tol");
    if (!(tol > 0.0 && tol < 1.0)) throw ConfigError("sim.band_tol must lie in (0, 1)");
    c.unsigned_int("sim.seed");
    c.flag("sim.far_tail");
    const std::string init = c.text("sim.init");
    if (init.rfind("file:", 0) == 0) {
        if (!fs::exists(init.substr(5))) throw ConfigError("initial field file " + init.substr(5) + " does not exist");
    } else if (init != "ramp" && init != "wave") {
        throw ConfigError("sim.init must be 'ramp', 'wave' or 'file:<path>'");
    }
    if (beta > 1.0 / 12.0) std::cerr << "warning: beta exceeds 1/12 (outside the proven theorem regime)\n";
}

Grid sim_grid(const Config& c, const KernelSpec& k) {
    const double eps = c.number("sim.epsilon");
    const Grid g = Grid::from_beta(eps, c.number("sim.beta"));
    return g.with_band(default_band_width(eps, k.sigma, g.half_count(), c.number("sim.band_tol")));
}

/// Node values of an initial field file: one value per line, or x,u pairs; '#' lines and a header are skipped.
std::vector<double> read_field(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open initial field file " + path);
    std::vector<double> u;
    for (std::string line; std::getline(in, line);) {
        if (line.empty() || line[0] == '#') continue;
        const auto comma = line.rfind(',');
        const std::string cell = comma == std::string::npos ? line : line.substr(comma + 1);
        try {
            std::size_t used = 0;
            const double v = std::stod(cell, &used);
            u.push_back(v);
        } catch (const std::exception&) {
            if (u.empty()) continue;  // header
            throw ConfigError("malformed initial field row: " + line);
        }
    }
    return u;
}

HawkesParams sim_params(const Config& c, const Model& m) {
    HawkesParams p{m.f, m.k, sim_grid(c, m.k)};
    const std::string init = c.text("sim.init");
    if (init == "wave") p.init = WaveInit{m.wave, 0.0};
    else if (init.rfind("file:", 0) == 0) p.init = FieldInit{read_field(init.substr(5))};
    p.t_end = c.number("sim.t_end");
    p.seed = c.unsigned_int("sim.seed");
    p.far_tail = c.flag("sim.far_tail");
    return p;
}

PhaseOptions phase_options(const Config& c) {
    PhaseOptions opt;
    opt.tube_radius = c.number("phase.tube_radius");
    if (opt.tube_radius < 0.0) throw ConfigError("phase.tube_radius must be >= 0");
    return opt;
}

// out.dir is left out so that identical runs written to different places are byte-identical
json embedded_config(const Config& c) {
    json j = c.values();
    j.erase("out.dir");
    return j;
}

json meta(const Config& c, const Model& m) { return {{"config", embedded_config(c)}, {"profile_hash", m.hash}}; }

void write_meta_comments(std::ostream& os, const Config& c, const Model& m) {
    os << "# config=" << embedded_config(c).dump() << '\n' << "# profile_hash=" << m.hash << '\n';
}

std::string fmt(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

fs::path out_dir(const Config& c) {
    fs::path d = c.text("out.dir");
    fs::create_directories(d);
    return d;
}

std::ofstream open_out(const fs::path& p) {
    std::ofstream os(p);
    if (!os) throw ConfigError("cannot write " + p.string());
    return os;
}

void write_run_csv(const fs::path& p, const PhaseRecord& r, const Config& c, const Model& m) {
    auto os = open_out(p);
    write_meta_comments(os, c, m);
    os << "t,psi,dist_l2,n_events\n";
    for (std::size_t k = 0; k < r.t.size(); ++k)
        os << fmt(r.t[k]) << ',' << fmt(r.psi[k]) << ',' << fmt(r.dist[k]) << ',' << r.events[k] << '\n';
}

void write_spikes(const fs::path& p, const PhaseRecord& r, const Config& c, const Model& m) {
    auto os = open_out(p);
    os << meta(c, m).dump() << '\n';
    r.log.write_ndjson(os);
}

double observe_every(const Config& c, double t_end) {
    const double every = c.number("sim.observe_every");
    if (every < 0.0) throw ConfigError("sim.observe_every must be >= 0");
    return every > 0.0 ? every : t_end / 100.0;
}

// ------------------------------------------------------------------ subcommands

int cmd_profile(const Config& c) {
    validate_sim(c);
    const Model m = build_model(c);
    const fs::path dir = out_dir(c);
    {
        auto os = open_out(dir / "profile.csv");
        std::ostringstream comments;
        comments << "config=" << embedded_config(c).dump() << "\nprofile_hash=" << m.hash;
        write_profile_csv(*m.wave, os, comments.str());
    }
    const RhoReport rho = rho_squared(*m.wave);
    json j = meta(c, m);
    j["rho2"] = rho.rho2;
    j["rho2_simplified"] = rho.rho2_simplified;
    j["rho2_relative_gap"] = std::abs(rho.rho2 - rho.rho2_simplified) / rho.rho2;
    j["rho2_numerator"] = rho.numerator;
    j["rho2_denominator"] = rho.denominator;
    j["phase_variance_rate"] = rho.phase_variance_rate;
    j["identity_residual"] = rho.max_identity_residual;
    j["speed"] = rho.speed;
    const auto& fp = m.f.fixed_points();
    j["fixed_points"] = {fp.a1, fp.a, fp.a2};
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_nfe(const Config& c) {
    validate_sim(c);
    const Model m = build_model(c);
    const std::string rule = c.text("nfe.rule");
    if (rule != "cell" && rule != "midpoint") throw ConfigError("nfe.rule must be 'cell' or 'midpoint'");
    const std::string kind = c.text("nfe.kind");
    if (kind != "voltage" && kind != "rate") throw ConfigError("nfe.kind must be 'voltage' or 'rate'");
    const NfeModel model(m.f, m.k, rule == "cell" ? ConvRule::cell : ConvRule::midpoint);

    const HawkesParams p = sim_params(c, m);
    const auto& fp = m.f.fixed_points();
    Field u0(p.grid, fp.a1, fp.a2);
    u0.values = initial_values(p);
    IntegrateOptions opt;
    opt.dt = c.number("nfe.dt");
    opt.observe_every = c.number("nfe.observe_every");
    opt.kind = kind == "voltage" ? NfeKind::voltage : NfeKind::rate;
    const Field start = opt.kind == NfeKind::voltage ? u0 : deconvolve_exp(u0, m.k);
    const auto snaps = integrate(model, start, c.number("nfe.T"), opt);

    const fs::path dir = out_dir(c);
    auto os = open_out(dir / "nfe.csv");
    write_meta_comments(os, c, m);
    os << "t,x,u\n";
    for (const auto& s : snaps)
        for (std::size_t k = 0; k < s.size(); ++k) os << fmt(s.time) << ',' << fmt(s.grid.node(k)) << ',' << fmt(s.values[k]) << '\n';

    // the phase is read off the voltage, W * v for the rate equation
    const Field last = opt.kind == NfeKind::voltage ? snaps.back() : conv_exp(snaps.back(), m.k);
    const auto near = nearest_phase(last, *m.wave, 0.0, phase_options(c));
    json j = meta(c, m);
    j["snapshots"] = snaps.size();
    j["final_time"] = snaps.back().time;
    j["final_psi"] = near.psi;
    j["final_dist_l2"] = near.dist;
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_simulate(const Config& c) {
    validate_sim(c);
    const Model m = build_model(c);
    HawkesParams p = sim_params(c, m);
    p.record_spikes = c.flag("sim.spikes");
    const PhaseRecord r = track_run(p, *m.wave, observe_every(c, p.t_end), phase_options(c));
    const fs::path dir = out_dir(c);
    write_run_csv(dir / "run_0.csv", r, c, m);
    if (p.record_spikes) write_spikes(dir / "spikes_0.ndjson", r, c, m);
    json j = meta(c, m);
    j["seed"] = p.seed;
    j["N"] = p.grid.half_count();
    j["band"] = p.grid.band();
    j["accepted"] = r.log.accepted;
    j["candidates"] = r.log.candidates;
    j["final_psi"] = r.psi.back();
    j["final_dist_l2"] = r.dist.back();
    std::cout << j.dump(2) << '\n';
    return 0;
}

json gauss_json(const GaussStats& g) {
    return {{"n", g.n},
            {"skew", g.skew},
            {"excess_kurtosis", g.excess_kurtosis},
            {"se_skew", g.se_skew},
            {"se_kurtosis", g.se_kurtosis},
            {"degenerate", g.degenerate},
            {"pass", g.pass}};
}

int cmd_ensemble(const Config& c, bool assert_mode) {
    validate_sim(c);
    const Model m = build_model(c);
    const auto runs = static_cast<std::size_t>(c.unsigned_int("ensemble.runs"));
    const double t_f = c.number("ensemble.t_f");
    const auto base_seed = c.unsigned_int("ensemble.base_seed");
    const auto jobs = static_cast<unsigned>(c.unsigned_int("ensemble.jobs"));
    const bool spikes = c.flag("ensemble.spikes");
    if (runs == 0) throw ConfigError("ensemble.runs must be >= 1");
    if (!(t_f > 0.0)) throw ConfigError("ensemble.t_f must be > 0");

    HawkesParams p = sim_params(c, m);
    const double eps = p.grid.eps();
    p.t_end = t_f / eps;
    p.record_spikes = spikes;
    const double every = observe_every(c, p.t_end);
    const fs::path dir = out_dir(c);

    const RhoReport rho = rho_squared(*m.wave);
    const EnsembleResult res = run_ensemble(p, *m.wave, runs, base_seed, every, jobs, phase_options(c),
                                            [&](std::size_t r, const PhaseRecord& rec) {
                                                write_run_csv(dir / ("run_" + std::to_string(r) + ".csv"), rec, c, m);
                                                if (spikes) write_spikes(dir / ("spikes_" + std::to_string(r) + ".ndjson"), rec, c, m);
                                            });

    json j = meta(c, m);
    j["runs"] = runs;
    j["completed"] = res.completed();
    j["rho2_quadrature"] = rho.rho2;
    j["phase_variance_rate"] = rho.phase_variance_rate;
    json failures = json::array();
    for (std::size_t r = 0; r < runs; ++r)
        if (!res.errors[r].empty()) failures.push_back({{"run", r}, {"error", res.errors[r]}});
    j["failures"] = failures;
    const bool partial = res.completed() < runs;
    j["partial"] = partial;

    std::vector<std::vector<double>> paths;
    std::vector<double> times;
    for (const auto& rec : res.records) {
        if (!rec) continue;
        if (times.empty()) times = rec->t;
        paths.push_back(rec->psi);
    }

    bool accepted = false;
    if (paths.size() >= 2) {
        DiffusionOptions opt;
        opt.enforce = false;
        const EnsembleStats s = estimate_diffusion(paths, times, eps, t_f, opt);
        const double bound = 2.0 * std::sqrt(rho.rho2 * t_f / static_cast<double>(s.runs));
        j["rho2_hat"] = s.slope;
        j["rho2_ci"] = {s.ci_low, s.ci_high};
        j["mean_slope"] = s.mean_slope;
        j["mean_final"] = s.mean_final;
        j["mean_final_bound"] = bound;
        j["sufficient"] = s.sufficient;
        j["u"] = s.u;
        j["variance"] = s.variance;
        j["mean_path"] = s.mean_path;
        json lags = json::array();
        for (const auto& l : s.lags) lags.push_back({{"lag", l.lag}, {"du", l.du}, {"stats", gauss_json(l.stats)}});
        j["gauss"] = {{"lags", lags}, {"coarse_pass", coarse_lags_gaussian(s)}};
        try {
            const double h = std::min(0.05, m.k.sigma / 10.0);
            const Grid g(h, static_cast<long>(std::lround(10.0 * m.k.sigma / h)));
            j["kappa_hat"] = spectral_gap(assemble_linearized(*m.wave, g), *m.wave).kappa;
        } catch (const Error& e) {
            j["kappa_hat"] = nullptr;
        }
        accepted = s.sufficient && s.slope >= 0.7 * rho.rho2 && s.slope <= 1.3 * rho.rho2 &&
                   std::abs(s.mean_final) <= bound && coarse_lags_gaussian(s);
        j["accepted"] = accepted;
    }
    {
        auto os = open_out(dir / "ensemble.json");
        os << j.dump(2) << '\n';
    }
    std::cout << j.dump(2) << '\n';
    if (partial) {
        std::cerr << "error: " << runs - res.completed() << " of " << runs << " runs failed; results are partial\n";
        return kExitNumerical;
    }
    if (assert_mode && !accepted) {
        std::cerr << "error: ensemble statistics fail the diffusion acceptance checks\n";
        return kExitStatistical;
    }
    return 0;
}

int cmd_spectrum(const Config& c) {
    const Model m = build_model(c);
    const double eps = c.number("spectrum.epsilon");
    const double half = c.number("spectrum.half_width");
    if (!(eps > 0.0) || !(half > eps)) throw ConfigError("spectrum.epsilon must be > 0 and below spectrum.half_width");
    auto run = [&](double h) {
        const Grid g(h, static_cast<long>(std::lround(half / h)));
        return spectral_gap(assemble_linearized(*m.wave, g), *m.wave);
    };
    const SpectrumReport r = run(eps);
    json j = meta(c, m);
    j["leading"] = r.leading;
    j["overlap"] = r.overlap;
    j["kappa_hat"] = r.kappa;
    j["max_eigenvalue"] = r.max_eigenvalue;
    if (c.flag("spectrum.refine")) {
        const SpectrumReport fine = run(0.5 * eps);
        j["kappa_hat_refined"] = fine.kappa;
        j["kappa_relative_change"] = std::abs(fine.kappa - r.kappa) / fine.kappa;
    }
    const fs::path dir = out_dir(c);
    {
        auto os = open_out(dir / "spectrum.json");
        os << j.dump(2) << '\n';
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int cmd_rates(const Config& c) {
    validate_sim(c);
    const Model m = build_model(c);
    HawkesParams p = sim_params(c, m);
    p.init = WaveInit{m.wave, 0.0};
    p.t_end = c.number("rates.T0");
    p.record_spikes = false;
    const double every = c.number("rates.observe_every");
    if (!(every > 0.0)) throw ConfigError("rates.observe_every must be > 0");
    const auto& fp = m.f.fixed_points();

    Field f_hat = Field::from_profile(p.grid, *m.wave);
    for (double& v : f_hat.values) v = m.f(v);
    f_hat.left = m.f(f_hat.left);
    f_hat.right = m.f(f_hat.right);
    auto l2 = [&](const Field& a, const Field& b) {
        double s = 0.0;
        for (std::size_t k = 0; k < a.size(); ++k) s += (a.values[k] - b.values[k]) * (a.values[k] - b.values[k]);
        return std::sqrt(s * a.grid.eps());
    };

    HawkesState s = init_state(p);
    std::optional<ConvRateAccumulator> acc;
    double sup_u = 0.0, sup_lambda = 0.0, sup_v = 0.0;
    bool pointwise = true;
    const double lip = m.f.lipschitz();
    const Field u_hat = Field::from_profile(p.grid, *m.wave);
    simulate(
        s, p.t_end,
        [&](const HawkesState& st, const SpikeLog&) {
            const Field u = voltage_profile(st);
            const Field lam = rate_profile(st);
            if (!acc) acc.emplace(conv_rate_init(f_hat, st));
            else conv_rate_update(*acc, lam);
            const double du = l2(u, u_hat);
            const double dl = l2(lam, f_hat);
            pointwise = pointwise && dl <= lip * du * (1.0 + 1e-12) + 1e-15;
            sup_u = std::max(sup_u, du);
            sup_lambda = std::max(sup_lambda, dl);
            sup_v = std::max(sup_v, l2(acc->value, f_hat));
        },
        every);

    const Grid fine(0.01, static_cast<long>(std::lround(20.0 * m.k.sigma / 0.01)));
    const Field w0 = Field::from_profile(fine, *m.wave);
    const Field back = conv_exp(deconvolve_exp(w0, m.k), m.k);
    double roundtrip = 0.0;
    for (std::size_t k = 0; k < w0.size(); ++k) roundtrip = std::max(roundtrip, std::abs(back.values[k] - w0.values[k]));

    json j = meta(c, m);
    j["seed"] = p.seed;
    j["lipschitz"] = lip;
    j["sup_u_dist"] = sup_u;
    j["sup_lambda_dist"] = sup_lambda;
    j["sup_v_dist"] = sup_v;
    j["lambda_within_budget"] = pointwise;
    j["v_within_budget"] = sup_v <= lip * sup_u + 1e-3;
    j["deconvolution_roundtrip"] = roundtrip;
    j["far_fields"] = {fp.a1, fp.a2};
    const fs::path dir = out_dir(c);
    {
        auto os = open_out(dir / "rates.json");
        os << j.dump(2) << '\n';
    }
    std::cout << j.dump(2) << '\n';
    return 0;
}

int exit_code(const Error& e) {
    switch (e.kind()) {
        case ErrorKind::config: return kExitConfig;
        case ErrorKind::statistical: return kExitStatistical;
        default: return kExitNumerical;
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Neutral bistable neural field: standing waves, Hawkes particle simulation and phase diffusion"};
    app.require_subcommand(1);

    std::string config_path;
    std::vector<std::string> sets;
    std::string out;
    std::optional<std::uint64_t> seed;
    bool assert_mode = false;
    auto common = [&](CLI::App* sub) {
        sub->add_option("-c,--config", config_path, "JSON config file (flat dotted keys or nested objects)");
        sub->add_option("--set", sets, "Override a config key: key=value (repeatable)")->take_all();
        sub->add_option("-o,--out", out, "Output directory (overrides out.dir)");
    };

    auto* profile = app.add_subcommand("profile", "Solve the standing wave, write profile.csv, print rho^2 as JSON");
    auto* nfe = app.add_subcommand("nfe", "Integrate the voltage or rate NFE, write nfe.csv (t,x,u)");
    auto* simulate = app.add_subcommand("simulate", "One Hawkes run: run_0.csv (t,psi,dist_l2,n_events) and spikes_0.ndjson");
    auto* ensemble = app.add_subcommand("ensemble", "R seeded runs, phase diffusion estimate in ensemble.json");
    auto* spectrum = app.add_subcommand("spectrum", "Spectral gap of the linearized operator, spectrum.json");
    auto* rates = app.add_subcommand("rates", "Rate and convoluted-rate tracking bounds, rates.json");
    for (auto* sub : {profile, nfe, simulate, ensemble, spectrum, rates}) common(sub);
    simulate->add_option("--seed", seed, "Seed (overrides sim.seed)");
    ensemble->add_option("--seed", seed, "Base seed (overrides ensemble.base_seed)");
    ensemble->add_flag("--assert", assert_mode, "Exit 4 when the diffusion acceptance checks fail");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

    try {
        Config c = config_path.empty() ? Config() : Config::from_file(config_path);
        for (const auto& s : sets) c.set(s);
        if (!out.empty()) c.set("out.dir", out);
        if (seed) c.set(ensemble->parsed() ? "ensemble.base_seed" : "sim.seed", *seed);
        c.resolve();
        if (profile->parsed()) return cmd_profile(c);
        if (nfe->parsed()) return cmd_nfe(c);
        if (simulate->parsed()) return cmd_simulate(c);
        if (ensemble->parsed()) return cmd_ensemble(c, assert_mode);
        if (spectrum->parsed()) return cmd_spectrum(c);
        if (rates->parsed()) return cmd_rates(c);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return exit_code(e);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitNumerical;
    }
    return 0;
}
