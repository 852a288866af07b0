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

#ifndef CATBREED_BOOTSTRAP_HPP
#define CATBREED_BOOTSTRAP_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <exception>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "catbreed/errors.hpp"
#include "catbreed/tomography.hpp"

namespace catbreed {

struct BootstrapSummary {
    double mean = 0.0;
    double std_dev = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.95;
    std::vector<double> values;

    double ci_width() const { return ci_high - ci_low; }
    bool covers(double v) const { return ci_low <= v && v <= ci_high; }
};

struct BootstrapResult {
    std::vector<BootstrapSummary> statistics;  ///< one per component of the statistic
    int resamples = 0;
    int failures = 0;
};

/// Too many resamples failed.
class BootstrapError : public NumericalError {
  public:
    BootstrapError(const std::string &message, int failures)
        : NumericalError(message), failures_(failures) {}
    int failures() const { return failures_; }

  private:
    int failures_;
};

/// Per-resample generator: stream i is seeded from (master_seed, i) only, so results do not
/// depend on evaluation order.
inline std::mt19937_64 resample_stream(std::uint64_t master_seed, int index) {
    std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                      static_cast<std::uint32_t>(index), 0x9e3779b9u};
    return std::mt19937_64(seq);
}

inline HomodyneDataset resample(const HomodyneDataset &data, std::mt19937_64 &rng) {
    HomodyneDataset out;
    out.source = data.source;
    out.seed = data.seed;
    out.samples.reserve(data.size());
    std::uniform_int_distribution<std::size_t> pick(0, data.size() - 1);
    for (std::size_t i = 0; i < data.size(); ++i) {
        out.samples.push_back(data.samples[pick(rng)]);
    }
    return out;
}

namespace detail {

inline double percentile(std::vector<double> sorted, double q) {
    std::sort(sorted.begin(), sorted.end());
    if (sorted.size() == 1) {
        return sorted.front();
    }
    const double pos = q * static_cast<double>(sorted.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    const double frac = pos - static_cast<double>(lo);
    return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

inline BootstrapSummary summarize(std::vector<double> values, double level) {
    BootstrapSummary s;
    s.level = level;
    const double n = static_cast<double>(values.size());
    double sum = 0.0;
    for (double v : values) {
        sum += v;
    }
    s.mean = sum / n;
    double sq = 0.0;
    for (double v : values) {
        sq += (v - s.mean) * (v - s.mean);
    }
    s.std_dev = values.size() > 1 ? std::sqrt(sq / (n - 1.0)) : 0.0;
    s.ci_low = percentile(values, 0.5 * (1.0 - level));
    s.ci_high = percentile(values, 0.5 * (1.0 + level));
    s.values = std::move(values);
    return s;
}

}  // namespace detail

/// Nonparametric bootstrap of a vector-valued dataset statistic: resample with replacement at
/// equal size, evaluate, and report mean, standard deviation and percentile interval per
/// component. A resample whose statistic throws counts as a failure; more than 10% failures
/// is an error.
inline BootstrapResult bootstrap(const HomodyneDataset &data, int n_resamples,
                                 const std::function<std::vector<double>(const HomodyneDataset &)> &statistic,
                                 std::uint64_t master_seed, double level = 0.95) {
    if (n_resamples < 50) {
        throw DomainError("bootstrap: need at least 50 resamples");
    }
    if (data.empty()) {
        throw DomainError("bootstrap: dataset is empty");
    }
    if (!(level > 0.0 && level < 1.0)) {
        throw DomainError("bootstrap: confidence level must lie in (0, 1)");
    }
    std::vector<std::vector<double>> columns;
    int failures = 0;
    for (int i = 0; i < n_resamples; ++i) {
        auto rng = resample_stream(master_seed, i);
        const HomodyneDataset sample = resample(data, rng);
        std::vector<double> value;
        try {
            value = statistic(sample);
        } catch (const std::exception &) {
            ++failures;
            continue;
        }
        if (columns.empty()) {
            columns.resize(value.size());
        }
        if (value.size() != columns.size()) {
            throw DomainError("bootstrap: statistic changed its output length");
        }
        for (std::size_t c = 0; c < value.size(); ++c) {
            columns[c].push_back(value[c]);
        }
    }
    if (failures * 10 > n_resamples) {
        throw BootstrapError("bootstrap: " + std::to_string(failures) + " of " + std::to_string(n_resamples) +
                                 " resamples failed",
                             failures);
    }
    BootstrapResult result;
    result.resamples = n_resamples;
    result.failures = failures;
    for (auto &col : columns) {
        result.statistics.push_back(detail::summarize(std::move(col), level));
    }
    return result;
}

/// Scalar convenience overload.
inline BootstrapSummary bootstrap(const HomodyneDataset &data, int n_resamples,
                                  const std::function<double(const HomodyneDataset &)> &statistic,
                                  std::uint64_t master_seed, double level = 0.95) {
    auto wrapped = [&](const HomodyneDataset &d) { return std::vector<double>{statistic(d)}; };
    return bootstrap(data, n_resamples, std::function<std::vector<double>(const HomodyneDataset &)>(wrapped),
                     master_seed, level)
        .statistics.front();
}

}  // namespace catbreed

#endif  // CATBREED_BOOTSTRAP_HPP
