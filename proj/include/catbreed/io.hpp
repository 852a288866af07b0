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

#ifndef CATBREED_IO_HPP
#define CATBREED_IO_HPP

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "catbreed/errors.hpp"
#include "catbreed/fock.hpp"
#include "catbreed/protocol.hpp"
#include "catbreed/timeline.hpp"
#include "catbreed/tomography.hpp"

/// Text formats: homodyne datasets, density matrices, metadata sidecars, curve tables,
/// Wigner grids and the timeline event log.
namespace catbreed::io {

/// Shortest decimal representation that parses back to the same double.
inline std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, int line, std::string_view what) {
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    double v = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw IoError("cannot parse " + std::string(what) + " '" + std::string(s) + "'", line);
    }
    return v;
}

inline std::vector<std::string_view> split(std::string_view line, char sep = ',') {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    for (;;) {
        const auto pos = line.find(sep, start);
        out.push_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) {
            break;
        }
        start = pos + 1;
    }
    return out;
}

inline std::string strip(std::string_view s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string_view::npos) {
        return {};
    }
    const auto e = s.find_last_not_of(" \t\r\n");
    return std::string(s.substr(b, e - b + 1));
}

/// Write through a temporary file in the same directory and rename into place.
inline void atomic_write(const std::filesystem::path &path, const std::string &content) {
    if (path.has_parent_path()) {
        std::filesystem::create_directories(path.parent_path());
    }
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw IoError("cannot open " + tmp.string() + " for writing");
        }
        out << content;
        if (!out) {
            throw IoError("write to " + tmp.string() + " failed");
        }
    }
    std::filesystem::rename(tmp, path);
}

inline std::string read_file(const std::filesystem::path &path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Homodyne datasets: header `theta,x`, one sample per row.

inline std::string dataset_to_csv(const HomodyneDataset &data) {
    std::string out = "theta,x\n";
    for (const auto &s : data.samples) {
        out += format_double(s.theta);
        out += ',';
        out += format_double(s.x);
        out += '\n';
    }
    return out;
}

inline HomodyneDataset dataset_from_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    HomodyneDataset data;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = strip(line);
        if (t.empty()) {
            continue;
        }
        if (!header) {
            if (t != "theta,x") {
                throw IoError("dataset header must be 'theta,x'", lineno);
            }
            header = true;
            continue;
        }
        const auto fields = split(t);
        if (fields.size() != 2) {
            throw IoError("expected 2 fields", lineno);
        }
        const double theta = parse_double(fields[0], lineno, "theta");
        const double x = parse_double(fields[1], lineno, "x");
        if (!std::isfinite(theta) || !std::isfinite(x)) {
            throw IoError("non-finite sample", lineno);
        }
        data.samples.push_back(HomodyneSample::folded(theta, x));
    }
    if (!header) {
        throw IoError("dataset is empty (no header)");
    }
    return data;
}

inline void write_dataset(const std::filesystem::path &path, const HomodyneDataset &data) {
    atomic_write(path, dataset_to_csv(data));
}

inline HomodyneDataset read_dataset(const std::filesystem::path &path) {
    HomodyneDataset d = dataset_from_csv(read_file(path));
    d.source = path.string();
    return d;
}

// ---------------------------------------------------------------------------
// Density matrices: header re_0,im_0,...,re_{d-1},im_{d-1}; row m holds rho(m, n) for all n.

inline std::string density_to_csv(const DensityOperator &rho) {
    const int d = rho.dimension();
    std::string out;
    for (int n = 0; n < d; ++n) {
        out += (n ? ",re_" : "re_") + std::to_string(n) + ",im_" + std::to_string(n);
    }
    out += '\n';
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            if (n) {
                out += ',';
            }
            out += format_double(rho(m, n).real());
            out += ',';
            out += format_double(rho(m, n).imag());
        }
        out += '\n';
    }
    return out;
}

inline DensityOperator density_from_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    int d = -1;
    std::vector<std::vector<Complex>> rows;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = strip(line);
        if (t.empty()) {
            continue;
        }
        const auto fields = split(t);
        if (d < 0) {
            if (fields.size() % 2 != 0 || fields.empty() || strip(fields[0]) != "re_0") {
                throw IoError("density header must be re_0,im_0,...", lineno);
            }
            d = static_cast<int>(fields.size() / 2);
            continue;
        }
        if (static_cast<int>(fields.size()) != 2 * d) {
            throw IoError("expected " + std::to_string(2 * d) + " fields", lineno);
        }
        std::vector<Complex> row(static_cast<std::size_t>(d));
        for (int n = 0; n < d; ++n) {
            row[static_cast<std::size_t>(n)] = Complex(parse_double(fields[2 * n], lineno, "real part"),
                                                       parse_double(fields[2 * n + 1], lineno, "imaginary part"));
        }
        rows.push_back(std::move(row));
    }
    if (d < 0) {
        throw IoError("density file is empty");
    }
    if (static_cast<int>(rows.size()) != d) {
        throw IoError("density matrix has " + std::to_string(rows.size()) + " rows, expected " + std::to_string(d));
    }
    if (d < 3) {
        throw IoError("density matrix dimension must be >= 3");
    }
    Matrix m(d, d);
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            m(i, j) = rows[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
        }
    }
    DensityOperator rho(std::move(m), FockCutoff(d - 1));
    const auto report = rho.check();
    if (report.hermiticity_error > 1e-8 || report.trace_error > 1e-6 || report.min_eigenvalue < -1e-8) {
        throw IoError("density matrix is not a valid state (hermiticity " + format_double(report.hermiticity_error) +
                      ", trace error " + format_double(report.trace_error) + ", min eigenvalue " +
                      format_double(report.min_eigenvalue) + ")");
    }
    return rho.normalized();
}

inline void write_density(const std::filesystem::path &path, const DensityOperator &rho) {
    atomic_write(path, density_to_csv(rho));
}

inline DensityOperator read_density(const std::filesystem::path &path) { return density_from_csv(read_file(path)); }

// ---------------------------------------------------------------------------
// Structured text: `key = value` lines in insertion order.

class KeyValueText {
  public:
    KeyValueText &add(const std::string &key, const std::string &value) {
        entries_.emplace_back(key, value);
        return *this;
    }
    KeyValueText &add(const std::string &key, double value) { return add(key, format_double(value)); }
    KeyValueText &add(const std::string &key, int value) { return add(key, std::to_string(value)); }
    KeyValueText &add(const std::string &key, long long value) { return add(key, std::to_string(value)); }
    KeyValueText &add(const std::string &key, std::size_t value) { return add(key, std::to_string(value)); }
    KeyValueText &add(const std::string &key, bool value) { return add(key, std::string(value ? "true" : "false")); }
    KeyValueText &add(const std::string &key, const char *value) { return add(key, std::string(value)); }

    std::string str() const {
        std::string out;
        for (const auto &[k, v] : entries_) {
            out += k + " = " + v + "\n";
        }
        return out;
    }

    static std::map<std::string, std::string> parse(const std::string &text) {
        std::map<std::string, std::string> out;
        std::istringstream in(text);
        std::string line;
        int lineno = 0;
        while (std::getline(in, line)) {
            ++lineno;
            const std::string t = strip(line);
            if (t.empty() || t[0] == '#') {
                continue;
            }
            const auto eq = t.find('=');
            if (eq == std::string::npos) {
                throw IoError("expected 'key = value'", lineno);
            }
            out[strip(t.substr(0, eq))] = strip(t.substr(eq + 1));
        }
        return out;
    }

  private:
    std::vector<std::pair<std::string, std::string>> entries_;
};

// ---------------------------------------------------------------------------
// Tables.

inline std::string curve_to_csv(const std::vector<CurveRow> &rows) {
    std::string out = "n_max,rate_hz,fidelity_at_creation,fidelity_after_readout\n";
    for (const auto &r : rows) {
        out += std::to_string(r.n_max) + ',' + format_double(r.rate_hz) + ',' + format_double(r.fidelity_at_creation) +
               ',' + format_double(r.fidelity_after_readout) + '\n';
    }
    return out;
}

inline std::vector<CurveRow> curve_from_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<CurveRow> rows;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = strip(line);
        if (t.empty()) {
            continue;
        }
        if (!header) {
            if (t != "n_max,rate_hz,fidelity_at_creation,fidelity_after_readout") {
                throw IoError("unexpected curve header", lineno);
            }
            header = true;
            continue;
        }
        const auto f = split(t);
        if (f.size() != 4) {
            throw IoError("expected 4 fields", lineno);
        }
        rows.push_back(CurveRow{static_cast<int>(parse_double(f[0], lineno, "n_max")),
                                parse_double(f[1], lineno, "rate_hz"), parse_double(f[2], lineno, "fidelity"),
                                parse_double(f[3], lineno, "fidelity")});
    }
    return rows;
}

/// Long-format grid: header `x,p,W`, x varying slowest.
inline std::string wigner_to_csv(std::span<const double> xs, std::span<const double> ps, const RealMatrix &w) {
    std::string out = "x,p,W\n";
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            out += format_double(xs[i]) + ',' + format_double(ps[j]) + ',' +
                   format_double(w(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j))) + '\n';
        }
    }
    return out;
}

struct WignerPoint {
    double x, p, w;
};

inline std::vector<WignerPoint> wigner_from_csv(const std::string &text) {
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    std::vector<WignerPoint> pts;
    bool header = false;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string t = strip(line);
        if (t.empty()) {
            continue;
        }
        if (!header) {
            if (t != "x,p,W") {
                throw IoError("unexpected Wigner header", lineno);
            }
            header = true;
            continue;
        }
        const auto f = split(t);
        if (f.size() != 3) {
            throw IoError("expected 3 fields", lineno);
        }
        pts.push_back({parse_double(f[0], lineno, "x"), parse_double(f[1], lineno, "p"), parse_double(f[2], lineno, "W")});
    }
    return pts;
}

/// Event log as JSON lines: {"pulse":i,"kind":"...","attempt":a,"trips":n}.
inline std::string events_to_jsonl(const std::vector<TimelineEvent> &events) {
    std::string out;
    for (const auto &e : events) {
        nlohmann::ordered_json j;
        j["pulse"] = e.pulse_index;
        j["kind"] = std::string(to_string(e.kind));
        j["attempt"] = e.attempt;
        j["trips"] = e.storage_trips;
        out += j.dump();
        out += '\n';
    }
    return out;
}

inline std::vector<TimelineEvent> events_from_jsonl(const std::string &text) {
    static constexpr EventKind kinds[] = {EventKind::herald,         EventKind::trap,           EventKind::hold,
                                          EventKind::breed,          EventKind::condition_pass, EventKind::condition_fail,
                                          EventKind::readout,        EventKind::phase_trigger,  EventKind::dead_time};
    std::vector<TimelineEvent> out;
    std::istringstream in(text);
    std::string line;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (strip(line).empty()) {
            continue;
        }
        try {
            const auto j = nlohmann::json::parse(line);
            const auto name = j.at("kind").get<std::string>();
            const EventKind *kind = nullptr;
            for (const auto &k : kinds) {
                if (to_string(k) == name) {
                    kind = &k;
                }
            }
            if (!kind) {
                throw IoError("unknown event kind '" + name + "'", lineno);
            }
            out.push_back(TimelineEvent{*kind, j.at("pulse").get<std::int64_t>(), j.at("attempt").get<std::int64_t>(),
                                        j.at("trips").get<int>()});
        } catch (const nlohmann::json::exception &e) {
            throw IoError(std::string("malformed event record: ") + e.what(), lineno);
        }
    }
    return out;
}

inline std::string statistics_to_text(const RunStatistics &s) {
    KeyValueText kv;
    kv.add("pulses", static_cast<long long>(s.pulses))
        .add("heralds", static_cast<long long>(s.heralds))
        .add("attempts", static_cast<long long>(s.attempts))
        .add("successes", static_cast<long long>(s.successes))
        .add("elapsed_seconds", s.elapsed_seconds)
        .add("estimated_rate_hz", s.estimated_rate)
        .add("mean_first_photon_storage", s.mean_first_photon_storage)
        .add("mean_output_fidelity", s.mean_output_fidelity);
    std::string hist;
    for (const auto &[trips, count] : s.storage_histogram) {
        hist += (hist.empty() ? "" : " ") + std::to_string(trips) + ":" + std::to_string(count);
    }
    kv.add("storage_histogram", hist);
    return kv.str();
}

}  // namespace catbreed::io

#endif  // CATBREED_IO_HPP
