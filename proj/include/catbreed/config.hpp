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

#ifndef CATBREED_CONFIG_HPP
#define CATBREED_CONFIG_HPP

#include <charconv>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "catbreed/errors.hpp"
#include "catbreed/io.hpp"
#include "catbreed/protocol.hpp"

/// Sectioned `key = value` configuration files for ProtocolConfig.
///
///     [source]       f_rep, f_herald, photon_fidelity, two_photon_fraction
///     [conditioning] epsilon, phase, eta_conditioning
///     [storage]      n_min, n_max, per_trip_transmission | (total_loss, loss_trips), readout_trips
///     [rate]         beta_elec, dead_time_pulses
///     [detection]    eta_homodyne
///     [target]       amplitude, squeezing_db
///     [numerics]     cutoff, seed
///
/// Missing keys keep their defaults. Unknown sections or keys are errors.
namespace catbreed::config {

namespace detail {

inline double to_double(const std::string &field, const std::string &value) {
    double v = 0.0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw ConfigError(field, "expected a number, got '" + value + "'");
    }
    return v;
}

inline long long to_integer(const std::string &field, const std::string &value) {
    long long v = 0;
    const auto res = std::from_chars(value.data(), value.data() + value.size(), v);
    if (res.ec != std::errc() || res.ptr != value.data() + value.size()) {
        throw ConfigError(field, "expected an integer, got '" + value + "'");
    }
    return v;
}

inline int to_int(const std::string &field, const std::string &value) {
    const long long v = to_integer(field, value);
    if (v < std::numeric_limits<int>::min() || v > std::numeric_limits<int>::max()) {
        throw ConfigError(field, "integer out of range");
    }
    return static_cast<int>(v);
}

/// Line of `key` inside `[section]`, for diagnostics. 0 if not found.
inline int locate(const std::string &text, const std::string &section, const std::string &key) {
    std::istringstream in(text);
    std::string line;
    std::string current;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = io::strip(line);
        if (t.size() > 2 && t.front() == '[' && t.back() == ']') {
            current = io::strip(t.substr(1, t.size() - 2));
        } else if (current == section) {
            const auto eq = t.find('=');
            if (eq != std::string::npos && io::strip(t.substr(0, eq)) == key) {
                return lineno;
            }
        }
    }
    return 0;
}

/// Intermediate values that combine into one field.
struct Pending {
    std::optional<double> total_loss;
    std::optional<int> loss_trips;
    bool per_trip_set = false;
};

using Setter = std::function<void(ProtocolConfig &, Pending &, const std::string &field, const std::string &value)>;

inline const std::map<std::string, std::map<std::string, Setter>> &schema() {
    static const std::map<std::string, std::map<std::string, Setter>> table = {
        {"source",
         {{"f_rep", [](auto &c, auto &, auto &f, auto &v) { c.f_rep = to_double(f, v); }},
          {"f_herald", [](auto &c, auto &, auto &f, auto &v) { c.f_herald = to_double(f, v); }},
          {"photon_fidelity", [](auto &c, auto &, auto &f, auto &v) { c.photon_fidelity = to_double(f, v); }},
          {"two_photon_fraction", [](auto &c, auto &, auto &f, auto &v) { c.two_photon_fraction = to_double(f, v); }}}},
        {"conditioning",
         {{"epsilon", [](auto &c, auto &, auto &f, auto &v) { c.epsilon = to_double(f, v); }},
          {"phase", [](auto &c, auto &, auto &f, auto &v) { c.window_phase = to_double(f, v); }},
          {"eta_conditioning", [](auto &c, auto &, auto &f, auto &v) { c.eta_conditioning = to_double(f, v); }}}},
        {"storage",
         {{"n_min", [](auto &c, auto &, auto &f, auto &v) { c.n_min = to_int(f, v); }},
          {"n_max", [](auto &c, auto &, auto &f, auto &v) { c.n_max = to_int(f, v); }},
          {"per_trip_transmission",
           [](auto &c, auto &p, auto &f, auto &v) {
               c.per_trip_transmission = to_double(f, v);
               p.per_trip_set = true;
           }},
          {"total_loss", [](auto &, auto &p, auto &f, auto &v) { p.total_loss = to_double(f, v); }},
          {"loss_trips", [](auto &, auto &p, auto &f, auto &v) { p.loss_trips = to_int(f, v); }},
          {"readout_trips", [](auto &c, auto &, auto &f, auto &v) { c.readout_trips = to_int(f, v); }}}},
        {"rate",
         {{"beta_elec", [](auto &c, auto &, auto &f, auto &v) { c.beta_elec = to_double(f, v); }},
          {"dead_time_pulses", [](auto &c, auto &, auto &f, auto &v) { c.dead_time_pulses = to_int(f, v); }}}},
        {"detection", {{"eta_homodyne", [](auto &c, auto &, auto &f, auto &v) { c.eta_homodyne = to_double(f, v); }}}},
        {"target",
         {{"amplitude", [](auto &c, auto &, auto &f, auto &v) { c.target.amplitude = to_double(f, v); }},
          {"squeezing_db", [](auto &c, auto &, auto &f, auto &v) { c.target.squeezing_db = to_double(f, v); }}}},
        {"numerics",
         {{"cutoff", [](auto &c, auto &, auto &f, auto &v) { c.cutoff = to_int(f, v); }},
          {"seed",
           [](auto &c, auto &, auto &f, auto &v) {
               const long long s = to_integer(f, v);
               if (s < 0) {
                   throw ConfigError(f, "seed must be >= 0");
               }
               c.rng_seed = static_cast<std::uint64_t>(s);
           }}}},
    };
    return table;
}

}  // namespace detail

/// Parses configuration text on top of `base`. Syntax errors raise IoError with the line;
/// unknown keys and invalid values raise ConfigError naming section.key and its line.
inline ProtocolConfig parse(const std::string &text, ProtocolConfig base = {}) {
    boost::property_tree::ptree tree;
    std::istringstream in(text);
    try {
        boost::property_tree::ini_parser::read_ini(in, tree);
    } catch (const boost::property_tree::ini_parser_error &e) {
        throw IoError("config: " + e.message(), static_cast<int>(e.line()));
    }
    detail::Pending pending;
    const auto &schema = detail::schema();
    for (const auto &[section, body] : tree) {
        const auto sec = schema.find(section);
        if (sec == schema.end()) {
            const int line = detail::locate(text, "", section);
            throw ConfigError(section, line > 0 ? "key outside any section (line " + std::to_string(line) + ")"
                                                : std::string("unknown section"));
        }
        for (const auto &[key, node] : body) {
            const std::string field = section + "." + key;
            const int line = detail::locate(text, section, key);
            const auto setter = sec->second.find(key);
            if (setter == sec->second.end()) {
                throw ConfigError(field, "unknown key (line " + std::to_string(line) + ")");
            }
            try {
                setter->second(base, pending, field, io::strip(node.data()));
            } catch (const ConfigError &e) {
                throw ConfigError(field, std::string(e.what()).substr(field.size() + 2) + " (line " +
                                             std::to_string(line) + ")");
            }
        }
    }
    if (pending.total_loss || pending.loss_trips) {
        if (pending.per_trip_set) {
            throw ConfigError("storage.total_loss", "give either per_trip_transmission or total_loss/loss_trips");
        }
        const double loss = pending.total_loss.value_or(0.159);
        const int trips = pending.loss_trips.value_or(15);
        if (!(loss >= 0.0 && loss < 1.0) || trips < 1) {
            throw ConfigError("storage.total_loss", "need 0 <= total_loss < 1 and loss_trips >= 1");
        }
        base.per_trip_transmission = per_trip_transmission_from_total(loss, trips);
    }
    base.validate();
    return base;
}

inline ProtocolConfig load(const std::filesystem::path &path, ProtocolConfig base = {}) {
    return parse(io::read_file(path), base);
}

/// Canonical text for a configuration; parse(to_text(c)) == c field by field.
inline std::string to_text(const ProtocolConfig &c) {
    using io::format_double;
    std::string out;
    out += "[source]\n";
    out += "f_rep = " + format_double(c.f_rep) + "\n";
    out += "f_herald = " + format_double(c.f_herald) + "\n";
    out += "photon_fidelity = " + format_double(c.photon_fidelity) + "\n";
    out += "two_photon_fraction = " + format_double(c.two_photon_fraction) + "\n";
    out += "\n[conditioning]\n";
    out += "epsilon = " + format_double(c.epsilon) + "\n";
    out += "phase = " + format_double(c.window_phase) + "\n";
    out += "eta_conditioning = " + format_double(c.eta_conditioning) + "\n";
    out += "\n[storage]\n";
    out += "n_min = " + std::to_string(c.n_min) + "\n";
    out += "n_max = " + std::to_string(c.n_max) + "\n";
    out += "per_trip_transmission = " + format_double(c.per_trip_transmission) + "\n";
    out += "readout_trips = " + std::to_string(c.readout_trips) + "\n";
    out += "\n[rate]\n";
    out += "beta_elec = " + format_double(c.beta_elec) + "\n";
    out += "dead_time_pulses = " + std::to_string(c.dead_time_pulses) + "\n";
    out += "\n[detection]\n";
    out += "eta_homodyne = " + format_double(c.eta_homodyne) + "\n";
    out += "\n[target]\n";
    out += "amplitude = " + format_double(c.target.amplitude) + "\n";
    out += "squeezing_db = " + format_double(c.target.squeezing_db) + "\n";
    out += "\n[numerics]\n";
    out += "cutoff = " + std::to_string(c.cutoff) + "\n";
    out += "seed = " + std::to_string(c.rng_seed) + "\n";
    return out;
}

}  // namespace catbreed::config

#endif  // CATBREED_CONFIG_HPP
