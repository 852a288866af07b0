// Copyright 2026 The catbreed Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CATBREED_CLI_HPP
#define CATBREED_CLI_HPP

#include <chrono>
#include <cstdlib>
#include <ctime>
#include <deque>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "catbreed/bootstrap.hpp"
#include "catbreed/config.hpp"
#include "catbreed/errors.hpp"
#include "catbreed/io.hpp"
#include "catbreed/protocol.hpp"
#include "catbreed/timeline.hpp"
#include "catbreed/tomography.hpp"

#ifndef CATBREED_VERSION
#define CATBREED_VERSION "0.0.0"
#endif

/// The `catbreed` command line: breed, curve, wigner, simulate, sample, tomography.
///
/// Exit codes: 0 success, 2 input or configuration error, 3 numerical failure,
/// 4 unexpected internal error.
namespace catbreed::cli {

enum ExitCode : int { kOk = 0, kInputError = 2, kNumericalError = 3, kInternalError = 4 };

/// Environment variable naming the default output root.
inline constexpr const char *kOutputRootEnv = "CATBREED_OUTPUT_ROOT";

/// The data cannot constrain a reconstruction.
class UnderdeterminedData : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

namespace detail {

namespace fs = std::filesystem;
using nlohmann::ordered_json;

/// Flags mirroring ProtocolConfig fields. Values given on the command line override the
/// config file.
class ConfigFlags {
  public:
    void attach(CLI::App *app) {
        app->add_option("-c,--config", config_path_, "Configuration file (sectioned key = value)")
            ->check(CLI::ExistingFile);
        real(app, "--f-rep", "Pulse repetition rate [Hz]", [](auto &c, double v) { c.f_rep = v; });
        real(app, "--f-herald", "Heralding rate [Hz]", [](auto &c, double v) { c.f_herald = v; });
        real(app, "--beta-elec", "Electronic dead-time factor", [](auto &c, double v) { c.beta_elec = v; });
        real(app, "--epsilon", "Conditioning half-width", [](auto &c, double v) { c.epsilon = v; });
        real(app, "--window-phase", "Conditioning phase [rad]", [](auto &c, double v) { c.window_phase = v; });
        integer(app, "--n-min", "Shortest first-photon storage [trips]", [](auto &c, long long v) {
            c.n_min = static_cast<int>(v);
        });
        integer(app, "--n-max", "Longest first-photon storage [trips]", [](auto &c, long long v) {
            c.n_max = static_cast<int>(v);
        });
        real(app, "--per-trip-transmission", "Cavity transmission per round trip",
             [](auto &c, double v) { c.per_trip_transmission = v; });
        integer(app, "--readout-trips", "Read-out storage [trips]", [](auto &c, long long v) {
            c.readout_trips = static_cast<int>(v);
        });
        real(app, "--eta-homodyne", "Homodyne detection efficiency", [](auto &c, double v) { c.eta_homodyne = v; });
        real(app, "--eta-conditioning", "Detector efficiency in the conditioning step",
             [](auto &c, double v) { c.eta_conditioning = v; });
        real(app, "--photon-fidelity", "Single-photon fidelity", [](auto &c, double v) { c.photon_fidelity = v; });
        real(app, "--two-photon-fraction", "Two-photon fraction of the source",
             [](auto &c, double v) { c.two_photon_fraction = v; });
        integer(app, "--dead-time-pulses", "Dead time after each attempt [pulses]", [](auto &c, long long v) {
            c.dead_time_pulses = static_cast<int>(v);
        });
        real(app, "--target-amplitude", "Target cat amplitude", [](auto &c, double v) { c.target.amplitude = v; });
        real(app, "--target-squeezing-db", "Target squeezing [dB]",
             [](auto &c, double v) { c.target.squeezing_db = v; });
        integer(app, "--cutoff", "Fock cutoff n_max of the simulation", [](auto &c, long long v) {
            c.cutoff = static_cast<int>(v);
        });
        integer(app, "--seed", "Random seed", [](auto &c, long long v) {
            if (v < 0) {
                throw ConfigError("seed", "must be >= 0");
            }
            c.rng_seed = static_cast<std::uint64_t>(v);
        });
    }

    ProtocolConfig resolve() const {
        ProtocolConfig c = config_path_.empty() ? ProtocolConfig{} : config::load(config_path_);
        for (const auto &[opt, apply] : setters_) {
            if (opt->count() > 0) {
                apply(c);
            }
        }
        c.validate();
        return c;
    }

  private:
    void real(CLI::App *app, const std::string &name, const std::string &desc,
              std::function<void(ProtocolConfig &, double)> set) {
        double &slot = reals_.emplace_back(0.0);
        CLI::Option *opt = app->add_option(name, slot, desc);
        setters_.emplace_back(opt, [&slot, set](ProtocolConfig &c) { set(c, slot); });
    }
    void integer(CLI::App *app, const std::string &name, const std::string &desc,
                 std::function<void(ProtocolConfig &, long long)> set) {
        long long &slot = integers_.emplace_back(0);
        CLI::Option *opt = app->add_option(name, slot, desc);
        setters_.emplace_back(opt, [&slot, set](ProtocolConfig &c) { set(c, slot); });
    }

    std::string config_path_;
    std::deque<double> reals_;
    std::deque<long long> integers_;
    std::vector<std::pair<CLI::Option *, std::function<void(ProtocolConfig &)>>> setters_;
};

inline ordered_json config_json(const ProtocolConfig &c) {
    ordered_json j;
    j["f_rep"] = c.f_rep;
    j["f_herald"] = c.f_herald;
    j["beta_elec"] = c.beta_elec;
    j["epsilon"] = c.epsilon;
    j["window_phase"] = c.window_phase;
    j["n_min"] = c.n_min;
    j["n_max"] = c.n_max;
    j["per_trip_transmission"] = c.per_trip_transmission;
    j["readout_trips"] = c.readout_trips;
    j["eta_homodyne"] = c.eta_homodyne;
    j["eta_conditioning"] = c.eta_conditioning;
    j["photon_fidelity"] = c.photon_fidelity;
    j["two_photon_fraction"] = c.two_photon_fraction;
    j["dead_time_pulses"] = c.dead_time_pulses;
    j["target_amplitude"] = c.target.amplitude;
    j["target_squeezing_db"] = c.target.squeezing_db;
    j["cutoff"] = c.cutoff;
    j["rng_seed"] = c.rng_seed;
    return j;
}

inline std::string utc_timestamp() {
    const std::time_t now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

/// Output directory of one command run. Every artifact goes through write(); finish() adds
/// the manifest.
class RunDirectory {
  public:
    RunDirectory(const std::string &requested, const std::string &command) : command_(command) {
        if (!requested.empty()) {
            dir_ = requested;
        } else {
            const char *root = std::getenv(kOutputRootEnv);
            dir_ = fs::path(root && *root ? root : "catbreed-output") / command;
        }
        fs::create_directories(dir_);
        remove_previous_artifacts();
        manifest_["command"] = command;
        manifest_["version"] = CATBREED_VERSION;
        manifest_["created_utc"] = utc_timestamp();
        manifest_["artifacts"] = ordered_json::array();
    }

    const fs::path &path() const { return dir_; }
    ordered_json &manifest() { return manifest_; }

    void set_config(const ProtocolConfig &c) {
        manifest_["seed"] = c.rng_seed;
        manifest_["config"] = config_json(c);
        write("config.ini", config::to_text(c));
    }

    void write(const std::string &name, const std::string &content) {
        io::atomic_write(dir_ / name, content);
        manifest_["artifacts"].push_back(name);
    }

    void finish() {
        manifest_["finished_utc"] = utc_timestamp();
        io::atomic_write(dir_ / "manifest.json", manifest_.dump(2) + "\n");
    }

  private:
    /// A rerun into the same directory first deletes what the previous manifest listed, so
    /// the directory never mixes artifacts of two runs.
    void remove_previous_artifacts() {
        const fs::path old = dir_ / "manifest.json";
        if (!fs::exists(old)) {
            return;
        }
        try {
            const auto j = nlohmann::json::parse(io::read_file(old));
            for (const auto &name : j.at("artifacts")) {
                const fs::path p = dir_ / name.get<std::string>();
                if (p.parent_path() == dir_) {
                    fs::remove(p);
                }
            }
        } catch (const nlohmann::json::exception &) {
            // Unreadable manifest: leave the directory alone, it is overwritten below.
        }
        fs::remove(old);
    }

    std::string command_;
    fs::path dir_;
    ordered_json manifest_;
};

/// "a,b,c" with optional inclusive ranges "lo:hi" as items.
inline std::vector<int> parse_int_list(const std::string &text, const std::string &field) {
    std::vector<int> out;
    for (const auto &item : io::split(text)) {
        const std::string t = io::strip(item);
        if (t.empty()) {
            continue;
        }
        const auto colon = t.find(':');
        try {
            if (colon == std::string::npos) {
                out.push_back(config::detail::to_int(field, t));
            } else {
                const int lo = config::detail::to_int(field, io::strip(t.substr(0, colon)));
                const int hi = config::detail::to_int(field, io::strip(t.substr(colon + 1)));
                if (hi < lo) {
                    throw ConfigError(field, "empty range '" + t + "'");
                }
                for (int n = lo; n <= hi; ++n) {
                    out.push_back(n);
                }
            }
        } catch (const ConfigError &) {
            throw;
        }
    }
    if (out.empty()) {
        throw ConfigError(field, "list is empty");
    }
    return out;
}

/// "lo:hi:n" grid specification.
inline std::vector<double> parse_grid(const std::string &text, const std::string &field) {
    const auto parts = io::split(text, ':');
    if (parts.size() != 3) {
        throw ConfigError(field, "expected lo:hi:n, got '" + text + "'");
    }
    const double lo = config::detail::to_double(field, io::strip(parts[0]));
    const double hi = config::detail::to_double(field, io::strip(parts[1]));
    const int n = config::detail::to_int(field, io::strip(parts[2]));
    if (!(hi > lo) || n < 2 || n > 2001) {
        throw ConfigError(field, "need lo < hi and 2 <= n <= 2001");
    }
    return linspace(lo, hi, n);
}

inline std::vector<std::string> parse_word_list(const std::string &text) {
    std::vector<std::string> out;
    for (const auto &w : io::split(text)) {
        const std::string t = io::strip(w);
        if (!t.empty()) {
            out.push_back(t);
        }
    }
    return out;
}

/// Fidelity between two states that may have different cutoffs: both are embedded in the
/// larger space.
inline double embedded_fidelity(const DensityOperator &a, const DensityOperator &b) {
    const FockCutoff common(std::max(a.cutoff().n_max(), b.cutoff().n_max()));
    return fidelity(a.with_cutoff(common), b.with_cutoff(common));
}

inline double target_fidelity(const DensityOperator &rho, const TargetCatSpec &spec) {
    const FockCutoff common(std::max(20, rho.cutoff().n_max()));
    return fidelity(rho.with_cutoff(common), target_cat(spec, common));
}

// ---------------------------------------------------------------------------

struct BreedOptions {
    std::string output;
    bool pipeline = true;
};

inline int cmd_breed(const ConfigFlags &flags, const BreedOptions &o, std::ostream &out) {
    const ProtocolConfig cfg = flags.resolve();
    RunDirectory run(o.output, "breed");
    run.set_config(cfg);

    const DensityOperator photon = cfg.photon_state();
    const HeraldOutcome outcome = breed(photon, photon, cfg.window(), cfg.eta_conditioning);
    const StateVector target = cfg.target_state();
    const double f = fidelity(outcome.state, target);
    const WignerExtremum wmin = wigner_minimum(outcome.state);

    io::KeyValueText summary;
    summary.add("herald_probability", outcome.probability)
        .add("fidelity_to_target", f)
        .add("wigner_min", wmin.value)
        .add("wigner_min_x", wmin.x)
        .add("wigner_min_p", wmin.p)
        .add("mean_photon_number", outcome.state.mean_photon_number())
        .add("purity", outcome.state.purity());
    if (o.pipeline) {
        const PipelineStates ps = simulate_pipeline(cfg);
        summary.add("pipeline_fidelity_at_creation", fidelity(ps.at_creation, target))
            .add("pipeline_fidelity_after_readout", fidelity(ps.after_readout, target))
            .add("pipeline_wigner_min_at_creation", wigner_minimum(ps.at_creation).value)
            .add("pipeline_wigner_min_after_readout", wigner_minimum(ps.after_readout).value);
        run.write("rho_pipeline_at_creation.csv", io::density_to_csv(ps.at_creation));
        run.write("rho_pipeline_after_readout.csv", io::density_to_csv(ps.after_readout));
    }
    run.write("rho.csv", io::density_to_csv(outcome.state));
    run.write("summary.txt", summary.str());
    run.finish();
    out << summary.str();
    return kOk;
}

struct CurveOptions {
    std::string output;
    std::string n_max_list = "1:100";
    double calibrate_rate = 0.0;
};

inline int cmd_curve(const ConfigFlags &flags, const CurveOptions &o, std::ostream &out) {
    ProtocolConfig cfg = flags.resolve();
    const std::vector<int> values = parse_int_list(o.n_max_list, "n_max");
    RunDirectory run(o.output, "curve");
    const double p_condition = conditioning_probability(cfg);
    io::KeyValueText summary;
    summary.add("p_condition", p_condition);
    if (o.calibrate_rate > 0.0) {
        cfg.beta_elec = calibrate_beta_elec(cfg, p_condition, o.calibrate_rate);
        summary.add("calibrated_rate_hz", o.calibrate_rate).add("calibrated_at_n_max", cfg.n_max);
    }
    summary.add("beta_elec", cfg.beta_elec);
    run.set_config(cfg);
    run.manifest()["n_max_values"] = values;
    const std::vector<CurveRow> rows = fidelity_vs_storage_curve(cfg, values);
    run.write("curve.csv", io::curve_to_csv(rows));
    run.write("summary.txt", summary.str());
    run.finish();
    out << summary.str() << "rows = " << rows.size() << "\n";
    return kOk;
}

struct WignerOptions {
    std::string output;
    std::string state_file;
    std::string corrections = "none,storage,detection,both";
    std::string x_grid = "-4:4:81";
    std::string p_grid;
};

inline int cmd_wigner(const ConfigFlags &flags, const WignerOptions &o, std::ostream &out) {
    const ProtocolConfig cfg = flags.resolve();
    const std::vector<double> xs = parse_grid(o.x_grid, "x_grid");
    const std::vector<double> ps = o.p_grid.empty() ? xs : parse_grid(o.p_grid, "p_grid");
    const std::vector<std::string> panels = parse_word_list(o.corrections);
    if (panels.empty()) {
        throw ConfigError("corrections", "list is empty");
    }
    for (const auto &p : panels) {
        if (p != "none" && p != "storage" && p != "detection" && p != "both") {
            throw ConfigError("corrections", "unknown correction '" + p + "'");
        }
    }

    // Each correction selects a stage of the chain: creation -> read-out storage -> detector.
    // "storage" removes the read-out loss, "detection" removes the detector loss.
    DensityOperator created = o.state_file.empty() ? DensityOperator(Matrix::Identity(3, 3) / 3.0, FockCutoff(2))
                                                   : io::read_density(o.state_file);
    std::map<std::string, DensityOperator> stage;
    if (o.state_file.empty()) {
        PipelineStates s = simulate_pipeline(cfg);
        stage.emplace("both", s.at_creation);
        stage.emplace("detection", s.after_readout);
        stage.emplace("storage", s.detected_at_creation);
        stage.emplace("none", s.detected_after_readout);
    } else {
        const DensityOperator stored = storage_evolve(created, cfg.readout_trips, cfg.per_trip_transmission);
        stage.emplace("both", created);
        stage.emplace("detection", stored);
        stage.emplace("storage", loss_channel(created, cfg.eta_homodyne));
        stage.emplace("none", loss_channel(stored, cfg.eta_homodyne));
    }

    RunDirectory run(o.output, "wigner");
    run.set_config(cfg);
    run.manifest()["state_file"] = o.state_file.empty() ? "pipeline" : o.state_file;
    run.manifest()["x_grid"] = o.x_grid;
    run.manifest()["p_grid"] = o.p_grid.empty() ? o.x_grid : o.p_grid;
    io::KeyValueText summary;
    for (const auto &p : panels) {
        const DensityOperator &rho = stage.at(p);
        const RealMatrix w = wigner_grid(rho, xs, ps);
        run.write("wigner_" + p + ".csv", io::wigner_to_csv(xs, ps, w));
        summary.add(p + ".grid_min", w.minCoeff())
            .add(p + ".grid_max", w.maxCoeff())
            .add(p + ".min", wigner_minimum(rho).value)
            .add(p + ".fidelity_to_target", target_fidelity(rho, cfg.target));
    }
    run.write("summary.txt", summary.str());
    run.finish();
    out << summary.str();
    return kOk;
}

struct SimulateOptions {
    std::string output;
    double duration = 1.0;
    bool events = true;
    double p_condition = -1.0;
};

inline int cmd_simulate(const ConfigFlags &flags, const SimulateOptions &o, std::ostream &out) {
    const ProtocolConfig cfg = flags.resolve();
    if (!(o.duration > 0.0) || !std::isfinite(o.duration)) {
        throw ConfigError("duration", "must be a positive number of seconds");
    }
    TimelineOptions options;
    options.p_condition = o.p_condition >= 0.0 ? o.p_condition : conditioning_probability(cfg);
    options.record_events = o.events;
    const TimelineResult result = simulate_timeline(cfg, o.duration, options);
    const double closed = generation_rate(cfg, options.p_condition);
    const RateConsistency check = rate_consistency(result.statistics, closed);

    RunDirectory run(o.output, "simulate");
    run.set_config(cfg);
    run.manifest()["duration_seconds"] = o.duration;
    run.manifest()["p_condition"] = options.p_condition;
    run.write("stats.txt", io::statistics_to_text(result.statistics));
    std::string hist = "storage_trips,count\n";
    for (const auto &[trips, count] : result.statistics.storage_histogram) {
        hist += std::to_string(trips) + "," + std::to_string(count) + "\n";
    }
    run.write("storage_histogram.csv", hist);
    if (o.events) {
        run.write("events.jsonl", io::events_to_jsonl(result.events));
    }
    io::KeyValueText summary;
    summary.add("p_condition", options.p_condition)
        .add("simulated_rate_hz", check.simulated_rate)
        .add("closed_form_rate_hz", check.closed_form_rate)
        .add("standard_error_hz", check.standard_error)
        .add("z_score", check.z_score)
        .add("within_3_sigma", check.within(3.0));
    run.write("rate_check.txt", summary.str());
    run.finish();
    out << io::statistics_to_text(result.statistics) << summary.str();
    return kOk;
}

struct SampleOptions {
    std::string output;
    std::string state_file;
    std::string stage = "measured";
    long long count = 17000;
    int phases = 12;
    double phase_noise = 0.0;
};

inline int cmd_sample(const ConfigFlags &flags, const SampleOptions &o, std::ostream &out) {
    const ProtocolConfig cfg = flags.resolve();
    if (o.count < 1) {
        throw ConfigError("count", "must be >= 1");
    }
    if (o.phases < 1) {
        throw ConfigError("phases", "must be >= 1");
    }
    if (o.phase_noise < 0.0) {
        throw ConfigError("phase_noise", "must be >= 0");
    }
    RunDirectory run(o.output, "sample");
    run.set_config(cfg);
    DensityOperator rho = DensityOperator(Matrix::Identity(3, 3) / 3.0, FockCutoff(2));
    if (!o.state_file.empty()) {
        rho = io::read_density(o.state_file);
        run.manifest()["state_file"] = o.state_file;
    } else {
        const PipelineStates s = simulate_pipeline(cfg);
        const std::map<std::string, const DensityOperator *> stages = {
            {"creation", &s.at_creation},
            {"readout", &s.after_readout},
            {"measured_creation", &s.detected_at_creation},
            {"measured", &s.detected_after_readout}};
        const auto it = stages.find(o.stage);
        if (it == stages.end()) {
            throw ConfigError("stage", "expected creation, readout, measured_creation or measured");
        }
        rho = *it->second;
        for (const auto &[name, state] : stages) {
            run.write("stage_" + name + ".csv", io::density_to_csv(*state));
        }
        run.manifest()["stage"] = o.stage;
    }
    std::mt19937_64 rng(cfg.rng_seed);
    HomodyneDataset data =
        sample_homodyne_phases(rho, o.phases, static_cast<std::size_t>(o.count), rng, o.phase_noise);
    run.manifest()["count"] = o.count;
    run.manifest()["phases"] = o.phases;
    run.manifest()["phase_noise"] = o.phase_noise;
    run.write("state.csv", io::density_to_csv(rho));
    run.write("dataset.csv", io::dataset_to_csv(data));
    run.finish();
    out << "samples = " << data.size() << "\nphases = " << o.phases << "\n";
    return kOk;
}

struct TomographyOptions {
    std::string output;
    std::string dataset;
    std::string truth;
    int cutoff = 12;
    std::string efficiency = "none";
    int max_iterations = 2000;
    double tolerance = 1e-10;
    int bootstrap = 0;
    double level = 0.95;
    int phase_bins = 12;
    int x_bins = 200;
};

inline int cmd_tomography(const ConfigFlags &flags, const TomographyOptions &o, std::ostream &out) {
    const ProtocolConfig cfg = flags.resolve();
    MaxLikOptions ml;
    ml.cutoff = o.cutoff;
    ml.max_iterations = o.max_iterations;
    ml.tolerance = o.tolerance;
    ml.binning.phase_bins = o.phase_bins;
    ml.binning.x_bins = o.x_bins;
    if (o.cutoff < 2) {
        throw ConfigError("cutoff", "must be >= 2");
    }
    if (o.max_iterations < 1) {
        throw ConfigError("max_iterations", "must be >= 1");
    }
    if (o.efficiency == "none") {
        ml.efficiency = EfficiencyModel::none();
    } else if (o.efficiency == "detection") {
        ml.efficiency = EfficiencyModel::detection(cfg.eta_homodyne);
    } else if (o.efficiency == "both") {
        ml.efficiency = EfficiencyModel::detection_and_storage(cfg.eta_homodyne, cfg.readout_transmission());
    } else {
        throw ConfigError("efficiency", "expected none, detection or both");
    }
    if (o.bootstrap != 0 && o.bootstrap < 50) {
        throw ConfigError("bootstrap", "needs at least 50 resamples");
    }
    if (!(o.level > 0.0 && o.level < 1.0)) {
        throw ConfigError("level", "must lie in (0, 1)");
    }

    const HomodyneDataset data = io::read_dataset(o.dataset);
    if (data.empty()) {
        throw IoError("dataset " + o.dataset + " has no samples");
    }
    std::optional<DensityOperator> truth;
    if (!o.truth.empty()) {
        truth = io::read_density(o.truth);
    }

    const BinnedPovm povm(ml.binning, FockCutoff(ml.cutoff), ml.efficiency);
    const ReconstructionResult r = maxlik_reconstruct(data, povm, ml);
    if (r.underdetermined) {
        throw UnderdeterminedData("reconstruction is under-determined: " + std::to_string(r.sample_count) +
                                  " samples in " + std::to_string(r.occupied_cells) + " occupied cells for " +
                                  std::to_string(povm.cutoff().dimension() * povm.cutoff().dimension() - 1) +
                                  " free parameters");
    }
    if (!r.rho_hat.is_physical()) {
        throw NumericalError("reconstruction produced a non-physical state");
    }

    auto statistics = [&](const DensityOperator &rho) {
        std::vector<double> v{target_fidelity(rho, cfg.target), wigner_minimum(rho).value};
        if (truth) {
            v.push_back(embedded_fidelity(rho, *truth));
        }
        for (int n = 0; n < rho.dimension(); ++n) {
            v.push_back(rho.population(n));
        }
        return v;
    };
    std::vector<std::string> names{"fidelity_to_target", "wigner_min"};
    if (truth) {
        names.push_back("fidelity_to_truth");
    }
    for (int n = 0; n < r.rho_hat.dimension(); ++n) {
        names.push_back("p" + std::to_string(n));
    }
    const std::vector<double> point = statistics(r.rho_hat);

    RunDirectory run(o.output, "tomography");
    run.set_config(cfg);
    run.manifest()["dataset"] = o.dataset;
    run.manifest()["reconstruction"] = {{"cutoff", o.cutoff},
                                        {"efficiency", std::string(to_string(ml.efficiency.kind))},
                                        {"transmission", ml.efficiency.transmission()},
                                        {"max_iterations", o.max_iterations},
                                        {"tolerance", o.tolerance},
                                        {"phase_bins", o.phase_bins},
                                        {"x_bins", o.x_bins},
                                        {"bootstrap", o.bootstrap}};

    io::KeyValueText meta;
    meta.add("iterations", r.iterations)
        .add("converged", r.converged)
        .add("stop_reason", r.converged ? "likelihood_gain_below_tolerance" : "max_iterations")
        .add("final_likelihood_gain", r.final_likelihood_gain)
        .add("log_likelihood_per_sample", r.log_likelihood)
        .add("efficiency_model", std::string(to_string(ml.efficiency.kind)))
        .add("efficiency_transmission", ml.efficiency.transmission())
        .add("sample_count", r.sample_count)
        .add("occupied_cells", r.occupied_cells)
        .add("floored_cells", r.floored_cells);
    for (std::size_t i = 0; i < names.size(); ++i) {
        meta.add(names[i], point[i]);
    }
    std::string trace = "iteration,log_likelihood\n";
    for (std::size_t i = 0; i < r.likelihood_trace.size(); ++i) {
        trace += std::to_string(i) + "," + io::format_double(r.likelihood_trace[i]) + "\n";
    }
    run.write("rho_hat.csv", io::density_to_csv(r.rho_hat));
    run.write("rho_hat.meta", meta.str());
    run.write("likelihood.csv", trace);
    out << meta.str();

    if (o.bootstrap > 0) {
        const BootstrapResult b = bootstrap(
            data, o.bootstrap,
            [&](const HomodyneDataset &d) {
                const ReconstructionResult rr = maxlik_reconstruct(d, povm, ml);
                if (rr.underdetermined) {
                    throw UnderdeterminedData("under-determined resample");
                }
                return statistics(rr.rho_hat);
            },
            cfg.rng_seed, o.level);
        io::KeyValueText bmeta;
        bmeta.add("resamples", b.resamples).add("failures", b.failures).add("level", o.level);
        std::string table = "statistic,estimate,mean,std_dev,ci_low,ci_high\n";
        for (std::size_t i = 0; i < names.size(); ++i) {
            const BootstrapSummary &s = b.statistics[i];
            bmeta.add(names[i] + ".mean", s.mean)
                .add(names[i] + ".std_dev", s.std_dev)
                .add(names[i] + ".ci_low", s.ci_low)
                .add(names[i] + ".ci_high", s.ci_high);
            table += names[i] + "," + io::format_double(point[i]) + "," + io::format_double(s.mean) + "," +
                     io::format_double(s.std_dev) + "," + io::format_double(s.ci_low) + "," +
                     io::format_double(s.ci_high) + "\n";
        }
        run.write("bootstrap.csv", table);
        run.write("bootstrap.meta", bmeta.str());
        out << bmeta.str();
    }
    run.finish();
    return kOk;
}

}  // namespace detail

/// Parses arguments and runs one subcommand. Diagnostics go to `err`, summaries to `out`.
inline int run_cli(int argc, const char *const *argv, std::ostream &out = std::cout, std::ostream &err = std::cerr) {
    using namespace detail;
    CLI::App app{"Cat-state breeding simulator", "catbreed"};
    app.set_version_flag("--version", std::string(CATBREED_VERSION));
    app.require_subcommand(1);

    // Each subcommand gets its own flag set; only the parsed one is resolved.
    std::deque<ConfigFlags> flag_sets;
    auto with_config = [&](CLI::App *sub, std::string &output) {
        flag_sets.emplace_back().attach(sub);
        sub->add_option("-o,--output", output,
                        std::string("Output directory (default $") + kOutputRootEnv + "/<command>)");
        return &flag_sets.back();
    };

    BreedOptions breed_o;
    CLI::App *breed_cmd = app.add_subcommand("breed", "Breed two fresh photons and characterize the heralded state");
    const ConfigFlags *breed_f = with_config(breed_cmd, breed_o.output);
    breed_cmd->add_flag("!--no-pipeline", breed_o.pipeline, "Skip the storage-averaged pipeline states");

    CurveOptions curve_o;
    CLI::App *curve_cmd = app.add_subcommand("curve", "Rate and fidelity versus maximum storage time");
    const ConfigFlags *curve_f = with_config(curve_cmd, curve_o.output);
    curve_cmd->add_option("--n-max-list", curve_o.n_max_list, "Comma list of n_max values or ranges lo:hi")
        ->capture_default_str();
    curve_cmd->add_option("--calibrate-rate", curve_o.calibrate_rate,
                          "Choose beta_elec so the rate at the configured n_max equals this value [Hz]");

    WignerOptions wigner_o;
    CLI::App *wigner_cmd = app.add_subcommand("wigner", "Wigner grids of the four correction panels");
    const ConfigFlags *wigner_f = with_config(wigner_cmd, wigner_o.output);
    wigner_cmd->add_option("--state", wigner_o.state_file, "Density-matrix CSV of the state at creation")
        ->check(CLI::ExistingFile);
    wigner_cmd->add_option("--corrections", wigner_o.corrections, "Comma list of none, storage, detection, both")
        ->capture_default_str();
    wigner_cmd->add_option("--grid", wigner_o.x_grid, "x grid lo:hi:n (also used for p)")->capture_default_str();
    wigner_cmd->add_option("--p-grid", wigner_o.p_grid, "p grid lo:hi:n");

    SimulateOptions sim_o;
    CLI::App *sim_cmd = app.add_subcommand("simulate", "Monte Carlo of the heralding and storage timeline");
    const ConfigFlags *sim_f = with_config(sim_cmd, sim_o.output);
    sim_cmd->add_option("--duration", sim_o.duration, "Simulated time [s]")->capture_default_str();
    sim_cmd->add_flag("!--no-events", sim_o.events, "Do not write the event log");
    sim_cmd->add_option("--p-condition", sim_o.p_condition,
                        "Conditioning probability (default: computed from the configuration)");

    SampleOptions sample_o;
    CLI::App *sample_cmd = app.add_subcommand("sample", "Synthetic homodyne data");
    const ConfigFlags *sample_f = with_config(sample_cmd, sample_o.output);
    sample_cmd->add_option("--state", sample_o.state_file, "Density-matrix CSV to sample")
        ->check(CLI::ExistingFile);
    sample_cmd->add_option("--stage", sample_o.stage, "Pipeline stage: creation, readout, measured_creation, measured")
        ->capture_default_str();
    sample_cmd->add_option("-n,--count", sample_o.count, "Number of samples")->capture_default_str();
    sample_cmd->add_option("--phases", sample_o.phases, "Number of uniform phases in [0, pi)")->capture_default_str();
    sample_cmd->add_option("--phase-noise", sample_o.phase_noise, "Gaussian noise on recorded phases [rad]");

    TomographyOptions tomo_o;
    CLI::App *tomo_cmd = app.add_subcommand("tomography", "Maximum-likelihood reconstruction of a dataset");
    const ConfigFlags *tomo_f = with_config(tomo_cmd, tomo_o.output);
    tomo_cmd->add_option("dataset,--dataset", tomo_o.dataset, "Homodyne dataset CSV (theta,x)")->required();
    tomo_cmd->add_option("--truth", tomo_o.truth, "Reference density matrix for fidelity reporting")
        ->check(CLI::ExistingFile);
    tomo_cmd->add_option("--reconstruction-cutoff", tomo_o.cutoff, "Fock cutoff of the estimate")
        ->capture_default_str();
    tomo_cmd->add_option("--efficiency", tomo_o.efficiency, "none, detection or both")->capture_default_str();
    tomo_cmd->add_option("--max-iterations", tomo_o.max_iterations)->capture_default_str();
    tomo_cmd->add_option("--tolerance", tomo_o.tolerance)->capture_default_str();
    tomo_cmd->add_option("--bootstrap", tomo_o.bootstrap, "Number of bootstrap resamples (0 = off)");
    tomo_cmd->add_option("--level", tomo_o.level, "Central percentile interval level")->capture_default_str();
    tomo_cmd->add_option("--phase-bins", tomo_o.phase_bins)->capture_default_str();
    tomo_cmd->add_option("--x-bins", tomo_o.x_bins)->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError &e) {
        const int rc = app.exit(e, out, err);
        return rc == 0 ? kOk : kInputError;
    }

    try {
        if (breed_cmd->parsed()) {
            return cmd_breed(*breed_f, breed_o, out);
        }
        if (curve_cmd->parsed()) {
            return cmd_curve(*curve_f, curve_o, out);
        }
        if (wigner_cmd->parsed()) {
            return cmd_wigner(*wigner_f, wigner_o, out);
        }
        if (sim_cmd->parsed()) {
            return cmd_simulate(*sim_f, sim_o, out);
        }
        if (sample_cmd->parsed()) {
            return cmd_sample(*sample_f, sample_o, out);
        }
        if (tomo_cmd->parsed()) {
            return cmd_tomography(*tomo_f, tomo_o, out);
        }
        err << "catbreed: no subcommand\n";
        return kInputError;
    } catch (const ConfigError &e) {
        err << "catbreed: configuration error: " << e.what() << "\n";
        return kInputError;
    } catch (const IoError &e) {
        err << "catbreed: input error: " << e.what() << "\n";
        return kInputError;
    } catch (const DomainError &e) {
        err << "catbreed: invalid input: " << e.what() << "\n";
        return kInputError;
    } catch (const std::filesystem::filesystem_error &e) {
        err << "catbreed: file system error: " << e.what() << "\n";
        return kInputError;
    } catch (const NumericalError &e) {
        err << "catbreed: numerical failure: " << e.what() << "\n";
        return kNumericalError;
    } catch (const std::exception &e) {
        err << "catbreed: internal error: " << e.what() << "\n";
        return kInternalError;
    }
}

}  // namespace catbreed::cli

#endif  // CATBREED_CLI_HPP
