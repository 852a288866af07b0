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

#ifndef CATBREED_TIMELINE_HPP
#define CATBREED_TIMELINE_HPP

#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <string_view>
#include <vector>

#include "catbreed/protocol.hpp"

namespace catbreed {

enum class EventKind { herald, trap, hold, breed, condition_pass, condition_fail, readout, phase_trigger, dead_time };

inline std::string_view to_string(EventKind k) {
    switch (k) {
        case EventKind::herald: return "herald";
        case EventKind::trap: return "trap";
        case EventKind::hold: return "hold";
        case EventKind::breed: return "breed";
        case EventKind::condition_pass: return "condition_pass";
        case EventKind::condition_fail: return "condition_fail";
        case EventKind::readout: return "readout";
        case EventKind::phase_trigger: return "phase_trigger";
        case EventKind::dead_time: return "dead_time";
    }
    return "unknown";
}

/// One entry of the event log. `storage_trips` is the first photon's storage time for
/// hold/breed/condition_* events and -1 otherwise; `attempt` numbers the generation attempt.
struct TimelineEvent {
    EventKind kind;
    std::int64_t pulse_index;
    std::int64_t attempt;
    int storage_trips = -1;

    friend bool operator==(const TimelineEvent &, const TimelineEvent &) = default;
};

struct RunStatistics {
    std::int64_t pulses = 0;
    std::int64_t heralds = 0;
    std::int64_t attempts = 0;
    std::int64_t successes = 0;
    double elapsed_seconds = 0.0;
    double estimated_rate = 0.0;              ///< successes / elapsed time [Hz]
    double mean_first_photon_storage = 0.0;   ///< over successes [round trips]
    std::map<int, std::int64_t> storage_histogram;
    double mean_output_fidelity = std::numeric_limits<double>::quiet_NaN();  ///< NaN when not modelled

    /// Field-wise equality; two NaN fidelities compare equal.
    friend bool operator==(const RunStatistics &a, const RunStatistics &b) {
        const bool same_fidelity = a.mean_output_fidelity == b.mean_output_fidelity ||
                                   (std::isnan(a.mean_output_fidelity) && std::isnan(b.mean_output_fidelity));
        return a.pulses == b.pulses && a.heralds == b.heralds && a.attempts == b.attempts &&
               a.successes == b.successes && a.elapsed_seconds == b.elapsed_seconds &&
               a.estimated_rate == b.estimated_rate && a.mean_first_photon_storage == b.mean_first_photon_storage &&
               a.storage_histogram == b.storage_histogram && same_fidelity;
    }
};

struct TimelineResult {
    RunStatistics statistics;
    std::vector<TimelineEvent> events;
};

struct TimelineOptions {
    double p_condition = 0.0;   ///< conditioning success probability per breeding
    bool record_events = true;
    /// Optional fidelity of the output as a function of first-photon storage trips.
    std::function<double(int)> fidelity_for_storage;
};

/// Seeded discrete-event simulation of the cavity timeline.
///
/// Heralds arrive independently in each pulse slot with probability f_herald / f_rep. Every
/// generation attempt consumes three heralds: the first photon is trapped, the next herald
/// either breeds with it (if it arrives n_min..n_max round trips later, the electronics are
/// ready with probability beta_elec, and the conditioning passes with p_condition) or is
/// wasted, and the third herald triggers the phase measurement, after which a new attempt
/// starts. A trapped photon not bred by round trip n_max is released. A successful cat is
/// read out readout_trips after its creation and is counted at its phase trigger.
/// Under these rules the expected success rate equals generation_rate(config, p_condition)
/// when dead_time_pulses is zero.
inline TimelineResult simulate_timeline(const ProtocolConfig &config, double duration_seconds,
                                        const TimelineOptions &options) {
    config.validate();
    if (!(duration_seconds > 0.0) || !std::isfinite(duration_seconds)) {
        throw ConfigError("duration", "must be a positive finite number of seconds");
    }
    if (!(options.p_condition >= 0.0 && options.p_condition <= 1.0)) {
        throw DomainError("simulate_timeline: p_condition must lie in [0, 1]");
    }

    const auto total_pulses = static_cast<std::int64_t>(std::llround(duration_seconds * config.f_rep));
    const double p = config.herald_probability_per_trip();
    std::mt19937_64 rng(config.rng_seed);
    std::uniform_real_distribution<double> uniform(0.0, 1.0);

    TimelineResult result;
    RunStatistics &stats = result.statistics;
    stats.pulses = total_pulses;
    stats.elapsed_seconds = static_cast<double>(total_pulses) / config.f_rep;

    std::vector<TimelineEvent> &log = result.events;
    std::deque<TimelineEvent> pending;  // delayed read-outs, in pulse order
    auto emit = [&](EventKind kind, std::int64_t pulse, std::int64_t attempt, int trips = -1) {
        if (!options.record_events) {
            return;
        }
        while (!pending.empty() && pending.front().pulse_index <= pulse) {
            log.push_back(pending.front());
            pending.pop_front();
        }
        log.push_back(TimelineEvent{kind, pulse, attempt, trips});
    };

    double fidelity_sum = 0.0;
    double storage_sum = 0.0;

    if (p > 0.0) {
        std::geometric_distribution<std::int64_t> gap(p);
        std::int64_t pulse = 0;
        auto next_herald = [&]() -> bool {
            pulse += 1 + gap(rng);
            if (pulse > total_pulses) {
                return false;
            }
            ++stats.heralds;
            return true;
        };

        std::int64_t ready_at = 0;
        for (;;) {
            // Heralds during the dead time after an attempt are lost.
            bool have = next_herald();
            while (have && pulse < ready_at) {
                emit(EventKind::herald, pulse, stats.attempts);
                emit(EventKind::dead_time, pulse, stats.attempts);
                have = next_herald();
            }
            if (!have) {
                break;
            }
            const std::int64_t attempt = stats.attempts++;
            const std::int64_t trap_pulse = pulse;
            emit(EventKind::herald, pulse, attempt);
            emit(EventKind::trap, pulse, attempt);

            if (!next_herald()) {
                if (total_pulses - trap_pulse > config.n_max) {
                    emit(EventKind::hold, trap_pulse + config.n_max + 1, attempt, config.n_max);
                }
                break;
            }
            const auto trips = pulse - trap_pulse;
            bool success = false;
            if (trips > config.n_max) {
                emit(EventKind::hold, trap_pulse + config.n_max + 1, attempt, config.n_max);
                emit(EventKind::herald, pulse, attempt);
            } else if (trips < config.n_min) {
                emit(EventKind::herald, pulse, attempt);
                emit(EventKind::dead_time, pulse, attempt, static_cast<int>(trips));
            } else {
                emit(EventKind::herald, pulse, attempt);
                if (uniform(rng) >= config.beta_elec) {
                    emit(EventKind::dead_time, pulse, attempt, static_cast<int>(trips));
                } else {
                    emit(EventKind::breed, pulse, attempt, static_cast<int>(trips));
                    if (uniform(rng) < options.p_condition) {
                        emit(EventKind::condition_pass, pulse, attempt, static_cast<int>(trips));
                        if (options.record_events) {
                            pending.push_back(TimelineEvent{EventKind::readout, pulse + config.readout_trips,
                                                            attempt, static_cast<int>(trips)});
                        }
                        success = true;
                    } else {
                        emit(EventKind::condition_fail, pulse, attempt, static_cast<int>(trips));
                    }
                }
            }

            if (!next_herald()) {
                break;
            }
            emit(EventKind::herald, pulse, attempt);
            emit(EventKind::phase_trigger, pulse, attempt);
            if (success) {
                ++stats.successes;
                ++stats.storage_histogram[static_cast<int>(trips)];
                storage_sum += static_cast<double>(trips);
                if (options.fidelity_for_storage) {
                    fidelity_sum += options.fidelity_for_storage(static_cast<int>(trips));
                }
            }
            ready_at = pulse + 1 + config.dead_time_pulses;
        }
    }

    if (options.record_events) {
        while (!pending.empty() && pending.front().pulse_index <= total_pulses) {
            log.push_back(pending.front());
            pending.pop_front();
        }
    }
    stats.estimated_rate = stats.elapsed_seconds > 0.0 ? stats.successes / stats.elapsed_seconds : 0.0;
    if (stats.successes > 0) {
        stats.mean_first_photon_storage = storage_sum / static_cast<double>(stats.successes);
        if (options.fidelity_for_storage) {
            stats.mean_output_fidelity = fidelity_sum / static_cast<double>(stats.successes);
        }
    }
    return result;
}

/// Comparison of a simulated rate with the closed-form rate, using the Poisson standard error
/// of the expected success count.
struct RateConsistency {
    double simulated_rate;
    double closed_form_rate;
    double standard_error;
    double z_score;
    bool within(double sigmas) const { return std::abs(z_score) <= sigmas; }
};

inline RateConsistency rate_consistency(const RunStatistics &stats, double closed_form_rate) {
    const double expected = closed_form_rate * stats.elapsed_seconds;
    const double se = std::sqrt(std::max(expected, 1.0)) / stats.elapsed_seconds;
    return RateConsistency{stats.estimated_rate, closed_form_rate, se, (stats.estimated_rate - closed_form_rate) / se};
}

}  // namespace catbreed

#endif  // CATBREED_TIMELINE_HPP
