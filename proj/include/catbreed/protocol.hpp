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

#ifndef CATBREED_PROTOCOL_HPP
#define CATBREED_PROTOCOL_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "catbreed/errors.hpp"
#include "catbreed/fock.hpp"
#include "catbreed/optics.hpp"

/// Rate and fidelity model of cat generation with a quantum-memory cavity: the first heralded
/// photon is held in the cavity (losing a fixed fraction per round trip) until a second photon
/// is heralded, then both are bred and the result is stored for read-out.
namespace catbreed {

/// (1 - total_loss)^(1/n_trips): per-round-trip transmission for an aggregate loss figure.
inline double per_trip_transmission_from_total(double total_loss, int n_trips) {
    if (!(total_loss >= 0.0 && total_loss < 1.0)) {
        throw DomainError("per_trip_transmission_from_total: total loss must lie in [0, 1)");
    }
    if (n_trips < 1) {
        throw DomainError("per_trip_transmission_from_total: n_trips must be >= 1");
    }
    return std::pow(1.0 - total_loss, 1.0 / n_trips);
}

/// Every experimental parameter of the protocol. Defaults are the published operating point.
struct ProtocolConfig {
    double f_rep = 76e6;          ///< pulse repetition rate = cavity round-trip rate [Hz]
    double f_herald = 310e3;      ///< single-photon heralding rate [Hz]
    double beta_elec = 1.0;       ///< electronic dead-time factor in [0, 1]
    double epsilon = 0.3;         ///< conditioning half-width (quadrature units)
    double window_phase = 0.0;    ///< conditioning local-oscillator phase [rad]
    int n_min = 1;                ///< first-photon storage window, round trips
    int n_max = 60;
    double per_trip_transmission = per_trip_transmission_from_total(0.159, 15);
    int readout_trips = 15;
    double eta_homodyne = 0.76;
    /// Detector efficiency assumed in the conditioning step; 1 means ideal conditioning.
    double eta_conditioning = 1.0;
    double photon_fidelity = 0.87;
    double two_photon_fraction = 0.0;
    int dead_time_pulses = 0;     ///< optional dead time after each attempt (timeline only)
    TargetCatSpec target{};
    int cutoff = 20;
    std::uint64_t rng_seed = 20240601;

    /// Throws ConfigError naming the first invalid field.
    void validate() const {
        auto require = [](bool ok, const char *field, const std::string &msg) {
            if (!ok) {
                throw ConfigError(field, msg);
            }
        };
        require(f_rep > 0.0 && std::isfinite(f_rep), "f_rep", "must be a positive finite rate");
        require(f_herald >= 0.0 && f_herald < f_rep, "f_herald", "must satisfy 0 <= f_herald < f_rep");
        require(beta_elec >= 0.0 && beta_elec <= 1.0, "beta_elec", "must lie in [0, 1]");
        require(epsilon > 0.0, "epsilon", "acceptance half-width must be > 0");
        require(std::isfinite(window_phase), "window_phase", "must be finite");
        require(n_min >= 1, "n_min", "must be >= 1");
        require(n_max >= n_min, "n_max", "must be >= n_min");
        require(per_trip_transmission > 0.0 && per_trip_transmission <= 1.0, "per_trip_transmission",
                "must lie in (0, 1]");
        require(readout_trips >= 0, "readout_trips", "must be >= 0");
        require(eta_homodyne > 0.0 && eta_homodyne <= 1.0, "eta_homodyne", "must lie in (0, 1]");
        require(eta_conditioning > 0.0 && eta_conditioning <= 1.0, "eta_conditioning", "must lie in (0, 1]");
        require(photon_fidelity >= 0.0 && photon_fidelity <= 1.0, "photon_fidelity", "must lie in [0, 1]");
        require(two_photon_fraction >= 0.0 && photon_fidelity + two_photon_fraction <= 1.0,
                "two_photon_fraction", "must be >= 0 with photon_fidelity + two_photon_fraction <= 1");
        require(dead_time_pulses >= 0, "dead_time_pulses", "must be >= 0");
        require(target.amplitude >= 0.0, "target.amplitude", "must be >= 0");
        require(std::abs(target.squeezing_db) <= 20.0, "target.squeezing_db", "must satisfy |dB| <= 20");
        require(cutoff >= 20, "cutoff", "must be >= 20 for protocol states");
    }

    /// Probability of a herald in a given pulse slot.
    double herald_probability_per_trip() const { return f_herald / f_rep; }
    AcceptanceWindow window() const { return AcceptanceWindow(epsilon, window_phase); }
    FockCutoff fock_cutoff() const { return FockCutoff(cutoff); }
    DensityOperator photon_state() const {
        return single_photon_source(photon_fidelity, fock_cutoff(), two_photon_fraction);
    }
    StateVector target_state() const { return target_cat(target, fock_cutoff()); }
    /// Transmission of the full read-out storage.
    double readout_transmission() const { return std::pow(per_trip_transmission, readout_trips); }
};

/// Loss accumulated over n_trips round trips in the cavity.
inline DensityOperator storage_evolve(const DensityOperator &rho, int n_trips, double per_trip_transmission) {
    if (n_trips < 0) {
        throw DomainError("storage_evolve: n_trips must be >= 0");
    }
    if (!(per_trip_transmission > 0.0 && per_trip_transmission <= 1.0)) {
        throw DomainError("storage_evolve: per-trip transmission must lie in (0, 1]");
    }
    return loss_channel(rho, std::pow(per_trip_transmission, n_trips));
}

/// Probability that the next herald after a trapped photon arrives between n_min and n_max
/// round trips later, with an independent herald chance p_trip in each slot:
/// (1-p)^(n_min-1) (1 - (1-p)^(n_max-n_min+1)).
inline double window_probability(double p_trip, int n_min, int n_max) {
    if (!(p_trip >= 0.0 && p_trip < 1.0)) {
        throw DomainError("window_probability: p_trip must lie in [0, 1)");
    }
    if (n_min < 1 || n_max < n_min) {
        throw DomainError("window_probability: need 1 <= n_min <= n_max");
    }
    const double q = 1.0 - p_trip;
    return std::pow(q, n_min - 1) * -std::expm1((n_max - n_min + 1) * std::log1p(-p_trip));
}

/// Probability that the partner photon arrives exactly n round trips after the first.
inline double storage_time_probability(double p_trip, int n) { return std::pow(1.0 - p_trip, n - 1) * p_trip; }

/// f_herald / 3 * beta_elec * p_condition * P(window). One herald traps, one breeds and a
/// third triggers the phase measurement, hence the factor 1/3.
inline double generation_rate(const ProtocolConfig &config, double p_condition) {
    if (!(p_condition >= 0.0 && p_condition <= 1.0)) {
        throw DomainError("generation_rate: p_condition must lie in [0, 1]");
    }
    return config.f_herald / 3.0 * config.beta_elec * p_condition *
           window_probability(config.herald_probability_per_trip(), config.n_min, config.n_max);
}

/// beta_elec such that generation_rate(config, p_condition) equals target_rate.
inline double calibrate_beta_elec(const ProtocolConfig &config, double p_condition, double target_rate) {
    ProtocolConfig unit = config;
    unit.beta_elec = 1.0;
    const double full = generation_rate(unit, p_condition);
    if (!(full > 0.0)) {
        throw DomainError("calibrate_beta_elec: rate is zero for beta_elec = 1");
    }
    const double beta = target_rate / full;
    if (!(beta >= 0.0 && beta <= 1.0)) {
        throw DomainError("calibrate_beta_elec: target rate " + std::to_string(target_rate) +
                          " Hz needs beta_elec = " + std::to_string(beta) + ", outside [0, 1]");
    }
    return beta;
}

/// Heralded-state pipeline with the first photon held n round trips, keyed by n. Outcomes are
/// computed on demand and cached; instances are not shared between threads.
class StorageBreedingTable {
  public:
    explicit StorageBreedingTable(const ProtocolConfig &config)
        : config_(config), photon_(config.photon_state()), window_(config.window()) {
        config_.validate();
    }

    const HeraldOutcome &outcome(int storage_trips) {
        auto it = cache_.find(storage_trips);
        if (it == cache_.end()) {
            const DensityOperator stored =
                storage_evolve(photon_, storage_trips, config_.per_trip_transmission);
            it = cache_.emplace(storage_trips, breed(stored, photon_, window_, config_.eta_conditioning)).first;
        }
        return it->second;
    }

    const ProtocolConfig &config() const { return config_; }
    const DensityOperator &photon() const { return photon_; }

  private:
    ProtocolConfig config_;
    DensityOperator photon_;
    AcceptanceWindow window_;
    std::map<int, HeraldOutcome> cache_;
};

/// Statistical mixture of heralded states over first-photon storage times in [n_min, n_max].
/// Each storage time is weighted by its arrival probability times its own herald probability,
/// i.e. the distribution of storage times among successful heralds.
inline DensityOperator storage_mixture(StorageBreedingTable &table, int n_min, int n_max) {
    const ProtocolConfig &cfg = table.config();
    const double p = cfg.herald_probability_per_trip();
    const int d = cfg.fock_cutoff().dimension();
    Matrix acc = Matrix::Zero(d, d);
    double total = 0.0;
    for (int n = n_min; n <= n_max; ++n) {
        const HeraldOutcome &o = table.outcome(n);
        const double w = storage_time_probability(p, n) * o.probability;
        acc += w * o.state.matrix();
        total += w;
    }
    if (!(total > 0.0)) {
        // p_trip == 0 leaves the storage time undefined; fall back to the shortest storage.
        return table.outcome(n_min).state;
    }
    return DensityOperator(acc / total, cfg.fock_cutoff()).normalized();
}

/// States of the generated cat at each point of the characterization chain.
struct PipelineStates {
    DensityOperator at_creation;             ///< fully corrected
    DensityOperator after_readout;           ///< after read-out storage, detection-corrected
    DensityOperator detected_at_creation;    ///< storage-corrected only
    DensityOperator detected_after_readout;  ///< raw, as seen by the homodyne detector
    double herald_probability;               ///< conditioning probability with fresh photons
};

inline PipelineStates simulate_pipeline(const ProtocolConfig &config) {
    StorageBreedingTable table(config);
    DensityOperator created = storage_mixture(table, config.n_min, config.n_max);
    DensityOperator stored = storage_evolve(created, config.readout_trips, config.per_trip_transmission);
    const double fresh = breed(table.photon(), table.photon(), config.window(), config.eta_conditioning).probability;
    DensityOperator detected_created = loss_channel(created, config.eta_homodyne);
    DensityOperator detected_stored = loss_channel(stored, config.eta_homodyne);
    return PipelineStates{std::move(created), std::move(stored), std::move(detected_created),
                          std::move(detected_stored), fresh};
}

/// Conditioning probability with fresh photons from the configured source.
inline double conditioning_probability(const ProtocolConfig &config) {
    const DensityOperator photon = config.photon_state();
    return breed(photon, photon, config.window(), config.eta_conditioning).probability;
}

struct CurveRow {
    int n_max = 0;
    double rate_hz = 0.0;
    double fidelity_at_creation = 0.0;
    double fidelity_after_readout = 0.0;
};

/// Rate and target fidelity as a function of the maximum first-photon storage time. Rates use
/// the fresh-photon conditioning probability; fidelities are detection-corrected, with and
/// without the read-out storage loss.
inline std::vector<CurveRow> fidelity_vs_storage_curve(const ProtocolConfig &config,
                                                       const std::vector<int> &n_max_values) {
    config.validate();
    if (n_max_values.empty()) {
        throw ConfigError("n_max", "curve needs at least one n_max value");
    }
    for (int n : n_max_values) {
        if (n < config.n_min) {
            throw ConfigError("n_max", "curve value " + std::to_string(n) + " is below n_min");
        }
    }
    StorageBreedingTable table(config);
    const StateVector target = config.target_state();
    const double p_condition = conditioning_probability(config);
    const double p = config.herald_probability_per_trip();
    const int d = config.fock_cutoff().dimension();

    // Cumulative sums make each row O(1) once the per-trip outcomes are cached.
    const int top = *std::max_element(n_max_values.begin(), n_max_values.end());
    std::vector<Matrix> cumulative;
    std::vector<double> cumulative_weight;
    Matrix acc = Matrix::Zero(d, d);
    double total = 0.0;
    for (int n = config.n_min; n <= top; ++n) {
        const HeraldOutcome &o = table.outcome(n);
        const double w = storage_time_probability(p, n) * o.probability;
        acc += w * o.state.matrix();
        total += w;
        cumulative.push_back(acc);
        cumulative_weight.push_back(total);
    }

    std::vector<CurveRow> rows;
    rows.reserve(n_max_values.size());
    for (int n_max : n_max_values) {
        ProtocolConfig row_cfg = config;
        row_cfg.n_max = n_max;
        const auto idx = static_cast<std::size_t>(n_max - config.n_min);
        DensityOperator created = cumulative_weight[idx] > 0.0
                                      ? DensityOperator(cumulative[idx] / cumulative_weight[idx],
                                                        config.fock_cutoff())
                                            .normalized()
                                      : table.outcome(config.n_min).state;
        const DensityOperator stored = storage_evolve(created, config.readout_trips, config.per_trip_transmission);
        rows.push_back(CurveRow{n_max, generation_rate(row_cfg, p_condition), fidelity(created, target),
                                fidelity(stored, target)});
    }
    return rows;
}

/// Inclusive integer range [first, last].
inline std::vector<int> integer_range(int first, int last) {
    std::vector<int> out;
    for (int n = first; n <= last; ++n) {
        out.push_back(n);
    }
    return out;
}

}  // namespace catbreed

#endif  // CATBREED_PROTOCOL_HPP
