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

#ifndef CATBREED_TOMOGRAPHY_HPP
#define CATBREED_TOMOGRAPHY_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <numbers>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "catbreed/errors.hpp"
#include "catbreed/fock.hpp"
#include "catbreed/optics.hpp"
#include "catbreed/quadrature.hpp"

namespace catbreed {

/// One homodyne record: local-oscillator phase and quadrature value.
struct HomodyneSample {
    double theta;
    double x;

    /// Folds theta into [0, pi). A shift by pi flips the sign of the quadrature.
    static HomodyneSample folded(double theta, double x) {
        if (!std::isfinite(theta) || !std::isfinite(x)) {
            throw DomainError("HomodyneSample: phase and value must be finite");
        }
        const double k = std::floor(theta / std::numbers::pi);
        double t = theta - k * std::numbers::pi;
        if (t >= std::numbers::pi) {
            t -= std::numbers::pi;
        }
        const bool odd = static_cast<long long>(k) % 2 != 0;
        return HomodyneSample{t, odd ? -x : x};
    }

    friend bool operator==(const HomodyneSample &, const HomodyneSample &) = default;
};

struct HomodyneDataset {
    std::vector<HomodyneSample> samples;
    std::string source;
    std::uint64_t seed = 0;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
};

/// Quadrature probability density pr(x | theta) = sum_mn rho_mn e^{i(n-m)theta} psi_m(x) psi_n(x).
class MarginalDensity {
  public:
    MarginalDensity(const DensityOperator &rho, double theta)
        : rotated_(rotate_phase(rho.matrix(), -theta)), n_max_(rho.cutoff().n_max()) {}

    double operator()(double x) const {
        const Eigen::VectorXd psi = hermite_functions(n_max_, x);
        return (psi.transpose() * rotated_.real() * psi)(0, 0);
    }

  private:
    Matrix rotated_;
    int n_max_;
};

inline MarginalDensity marginal_pdf(const DensityOperator &rho, double theta) { return MarginalDensity(rho, theta); }

/// Inverse-CDF sampler on a fixed grid over [-12, 12] with linear interpolation.
class QuadratureSampler {
  public:
    static constexpr double kSpan = 12.0;
    static constexpr int kGridPoints = 4096;

    QuadratureSampler(const DensityOperator &rho, double theta) : grid_(linspace(-kSpan, kSpan, kGridPoints)) {
        const MarginalDensity pdf(rho, theta);
        cdf_.resize(grid_.size());
        cdf_[0] = 0.0;
        double prev = std::max(0.0, pdf(grid_[0]));
        for (std::size_t i = 1; i < grid_.size(); ++i) {
            const double cur = std::max(0.0, pdf(grid_[i]));
            cdf_[i] = cdf_[i - 1] + 0.5 * (prev + cur) * (grid_[i] - grid_[i - 1]);
            prev = cur;
        }
        const double total = cdf_.back();
        if (!(total > 0.0)) {
            throw NumericalError("QuadratureSampler: marginal has no mass on the sampling grid");
        }
        for (double &c : cdf_) {
            c /= total;
        }
    }

    template <typename Rng>
    double operator()(Rng &rng) const {
        const double u = std::uniform_real_distribution<double>(0.0, 1.0)(rng);
        const auto it = std::upper_bound(cdf_.begin(), cdf_.end(), u);
        if (it == cdf_.begin()) {
            return grid_.front();
        }
        if (it == cdf_.end()) {
            return grid_.back();
        }
        const auto hi = static_cast<std::size_t>(it - cdf_.begin());
        const std::size_t lo = hi - 1;
        const double span = cdf_[hi] - cdf_[lo];
        const double frac = span > 0.0 ? (u - cdf_[lo]) / span : 0.5;
        return grid_[lo] + frac * (grid_[hi] - grid_[lo]);
    }

  private:
    std::vector<double> grid_;
    std::vector<double> cdf_;
};

/// i.i.d. samples of the quadrature at a single phase.
template <typename Rng>
HomodyneDataset sample_homodyne(const DensityOperator &rho, double theta, std::size_t count, Rng &rng) {
    if (count < 1) {
        throw DomainError("sample_homodyne: count must be >= 1");
    }
    const QuadratureSampler sampler(rho, theta);
    HomodyneDataset out;
    out.samples.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        out.samples.push_back(HomodyneSample::folded(theta, sampler(rng)));
    }
    return out;
}

/// Samples spread evenly over n_phases phases k pi / n_phases. Optional Gaussian noise of
/// width phase_noise is added to the recorded phase (the state is sampled at the true phase).
template <typename Rng>
HomodyneDataset sample_homodyne_phases(const DensityOperator &rho, int n_phases, std::size_t count, Rng &rng,
                                       double phase_noise = 0.0) {
    if (n_phases < 1) {
        throw DomainError("sample_homodyne_phases: need at least one phase");
    }
    if (count < 1) {
        throw DomainError("sample_homodyne_phases: count must be >= 1");
    }
    HomodyneDataset out;
    out.samples.reserve(count);
    std::normal_distribution<double> noise(0.0, phase_noise > 0.0 ? phase_noise : 1.0);
    for (int k = 0; k < n_phases; ++k) {
        const std::size_t share = count / static_cast<std::size_t>(n_phases) +
                                  (static_cast<std::size_t>(k) < count % static_cast<std::size_t>(n_phases) ? 1 : 0);
        if (share == 0) {
            continue;
        }
        const double theta = std::numbers::pi * k / n_phases;
        const QuadratureSampler sampler(rho, theta);
        for (std::size_t i = 0; i < share; ++i) {
            const double x = sampler(rng);
            const double recorded = phase_noise > 0.0 ? theta + noise(rng) : theta;
            out.samples.push_back(HomodyneSample::folded(recorded, x));
        }
    }
    return out;
}

/// How detector and storage loss enter the measurement model.
enum class EfficiencyKind { none, detection, detection_and_storage };

inline std::string_view to_string(EfficiencyKind k) {
    switch (k) {
        case EfficiencyKind::none: return "none";
        case EfficiencyKind::detection: return "detection";
        case EfficiencyKind::detection_and_storage: return "detection+storage";
    }
    return "unknown";
}

struct EfficiencyModel {
    EfficiencyKind kind = EfficiencyKind::none;
    double detection_eta = 1.0;
    double storage_transmission = 1.0;

    static EfficiencyModel none() { return {}; }
    static EfficiencyModel detection(double eta) { return {EfficiencyKind::detection, eta, 1.0}; }
    static EfficiencyModel detection_and_storage(double eta, double storage) {
        return {EfficiencyKind::detection_and_storage, eta, storage};
    }

    /// Overall transmission between the reconstructed state and the ideal detector.
    double transmission() const {
        switch (kind) {
            case EfficiencyKind::none: return 1.0;
            case EfficiencyKind::detection: return detection_eta;
            case EfficiencyKind::detection_and_storage: return detection_eta * storage_transmission;
        }
        return 1.0;
    }
};

/// Phase bins centred on k pi / phase_bins; x bins uniform over [-x_extent, x_extent] plus two
/// open-ended tail bins.
struct BinningScheme {
    int phase_bins = 12;
    int x_bins = 200;
    double x_extent = 6.0;

    int cells_per_phase() const { return x_bins + 2; }
    int cell_count() const { return phase_bins * cells_per_phase(); }
};

/// Binned measurement operators. For each x bin the operator is the (loss-smeared) overlap
/// matrix B_j, real symmetric; the operator for phase bin k is e^{i theta_k n} B_j e^{-i theta_k n}.
class BinnedPovm {
  public:
    BinnedPovm(const BinningScheme &binning, FockCutoff cutoff, const EfficiencyModel &efficiency)
        : binning_(binning), cutoff_(cutoff) {
        if (binning.phase_bins < 1 || binning.x_bins < 1 || !(binning.x_extent > 0.0)) {
            throw DomainError("BinnedPovm: invalid binning scheme");
        }
        const double eta = efficiency.transmission();
        if (!(eta > 0.0 && eta <= 1.0)) {
            throw DomainError("BinnedPovm: efficiency transmission must lie in (0, 1]");
        }
        const int n_max = cutoff.n_max();
        const double inf = std::numeric_limits<double>::infinity();
        const double width = 2.0 * binning.x_extent / binning.x_bins;
        bins_.reserve(static_cast<std::size_t>(binning.cells_per_phase()));
        auto add = [&](double lo, double hi) {
            RealMatrix b = hermite_overlap_integrals(n_max, lo, hi, 1e-12);
            bins_.push_back(eta < 1.0 ? loss_channel_adjoint(b, eta) : b);
        };
        add(-inf, -binning.x_extent);
        for (int j = 0; j < binning.x_bins; ++j) {
            add(-binning.x_extent + j * width, -binning.x_extent + (j + 1) * width);
        }
        add(binning.x_extent, inf);
        for (int k = 0; k < binning.phase_bins; ++k) {
            phases_.push_back(std::numbers::pi * k / binning.phase_bins);
        }
    }

    const BinningScheme &binning() const { return binning_; }
    FockCutoff cutoff() const { return cutoff_; }
    const std::vector<double> &phases() const { return phases_; }
    const RealMatrix &bin_operator(int x_bin) const { return bins_[static_cast<std::size_t>(x_bin)]; }

    /// Full operator of one cell as a complex matrix.
    Matrix cell_operator(int phase_bin, int x_bin) const {
        return rotate_phase(bin_operator(x_bin).cast<Complex>(), phases_[static_cast<std::size_t>(phase_bin)]);
    }

    /// Cell index phase_bin * cells_per_phase + x_bin of a sample. Phases are assigned to the
    /// nearest bin centre; wrapping past pi flips the quadrature sign.
    int cell_of(const HomodyneSample &s) const {
        const HomodyneSample f = HomodyneSample::folded(s.theta, s.x);
        long k = std::lround(f.theta * binning_.phase_bins / std::numbers::pi);
        double x = f.x;
        if (k >= binning_.phase_bins) {
            k -= binning_.phase_bins;
            x = -x;
        }
        int j;
        if (x < -binning_.x_extent) {
            j = 0;
        } else if (x >= binning_.x_extent) {
            j = binning_.x_bins + 1;
        } else {
            const double width = 2.0 * binning_.x_extent / binning_.x_bins;
            j = 1 + std::min(binning_.x_bins - 1, static_cast<int>((x + binning_.x_extent) / width));
        }
        return static_cast<int>(k) * binning_.cells_per_phase() + j;
    }

    /// Counts per cell.
    std::vector<double> histogram(const HomodyneDataset &data) const {
        std::vector<double> counts(static_cast<std::size_t>(binning_.cell_count()), 0.0);
        for (const auto &s : data.samples) {
            counts[static_cast<std::size_t>(cell_of(s))] += 1.0;
        }
        return counts;
    }

  private:
    BinningScheme binning_;
    FockCutoff cutoff_;
    std::vector<RealMatrix> bins_;
    std::vector<double> phases_;
};

struct MaxLikOptions {
    int cutoff = 12;
    EfficiencyModel efficiency{};
    int max_iterations = 2000;
    double tolerance = 1e-10;       ///< stop when the per-sample log-likelihood gain drops below
    BinningScheme binning{};
    double probability_floor = 1e-12;
};

struct ReconstructionResult {
    DensityOperator rho_hat;
    int iterations = 0;
    double final_likelihood_gain = 0.0;
    double log_likelihood = 0.0;    ///< per sample
    EfficiencyModel efficiency{};
    bool converged = false;         ///< false when max_iterations stopped the run
    std::vector<double> likelihood_trace{};
    std::size_t floored_cells = 0;  ///< occupied cells whose model probability hit the floor
    std::size_t occupied_cells = 0;
    std::size_t sample_count = 0;
    bool underdetermined = false;   ///< fewer samples than free parameters, or a single occupied cell
};

namespace detail {

struct LikelihoodState {
    std::vector<double> probabilities;  // per occupied cell
    double log_likelihood;
    std::size_t floored;
};

}  // namespace detail

/// Iterative maximum-likelihood reconstruction from binned homodyne data.
///
/// Each step replaces rho by (1 + s R) rho (1 + s R) / Tr(...), with
/// R = sum_j (f_j / p_j) Pi_j, f_j the observed frequencies and p_j = Tr(Pi_j rho). The plain
/// R rho R update is s -> infinity; s is reduced whenever a full step would lower the
/// likelihood, which keeps the log-likelihood non-decreasing.
inline ReconstructionResult maxlik_reconstruct(const HomodyneDataset &data, const BinnedPovm &povm,
                                               const MaxLikOptions &options) {
    if (data.empty()) {
        throw DomainError("maxlik_reconstruct: dataset is empty");
    }
    const FockCutoff cutoff = povm.cutoff();
    const int d = cutoff.dimension();
    const BinningScheme &binning = povm.binning();
    const int per_phase = binning.cells_per_phase();

    const std::vector<double> counts = povm.histogram(data);
    const double total = static_cast<double>(data.size());
    struct Cell {
        int phase;
        int x_bin;
        double frequency;
    };
    std::vector<Cell> cells;
    for (std::size_t c = 0; c < counts.size(); ++c) {
        if (counts[c] > 0.0) {
            cells.push_back(Cell{static_cast<int>(c) / per_phase, static_cast<int>(c) % per_phase, counts[c] / total});
        }
    }

    // Phase rotations e^{i theta_k n} as diagonal vectors.
    std::vector<Vector> rotations;
    for (double theta : povm.phases()) {
        Vector u(d);
        for (int n = 0; n < d; ++n) {
            u(n) = std::polar(1.0, n * theta);
        }
        rotations.push_back(std::move(u));
    }

    auto evaluate = [&](const Matrix &rho) {
        detail::LikelihoodState st{std::vector<double>(cells.size()), 0.0, 0};
        // Tr(U B U^dag rho) = Tr(B U^dag rho U) = sum_mn B_mn Re(rho'_mn), with B real symmetric.
        std::vector<RealMatrix> rotated_real(rotations.size());
        for (std::size_t k = 0; k < rotations.size(); ++k) {
            const Matrix r = rotations[k].conjugate().asDiagonal() * rho * rotations[k].asDiagonal();
            rotated_real[k] = r.real();
        }
        for (std::size_t i = 0; i < cells.size(); ++i) {
            const double p = povm.bin_operator(cells[i].x_bin)
                                 .cwiseProduct(rotated_real[static_cast<std::size_t>(cells[i].phase)])
                                 .sum();
            double clamped = p;
            if (!(p > options.probability_floor)) {
                clamped = options.probability_floor;
                ++st.floored;
            }
            st.probabilities[i] = clamped;
            st.log_likelihood += cells[i].frequency * std::log(clamped);
        }
        return st;
    };

    auto r_operator = [&](const detail::LikelihoodState &st) {
        std::vector<RealMatrix> per_phase_sum(rotations.size(), RealMatrix::Zero(d, d));
        for (std::size_t i = 0; i < cells.size(); ++i) {
            per_phase_sum[static_cast<std::size_t>(cells[i].phase)] +=
                (cells[i].frequency / st.probabilities[i]) * povm.bin_operator(cells[i].x_bin);
        }
        Matrix r = Matrix::Zero(d, d);
        for (std::size_t k = 0; k < rotations.size(); ++k) {
            r += rotations[k].asDiagonal() * per_phase_sum[k].cast<Complex>() * rotations[k].conjugate().asDiagonal();
        }
        return r;
    };

    Matrix rho = Matrix::Identity(d, d) / static_cast<double>(d);
    detail::LikelihoodState state = evaluate(rho);

    ReconstructionResult result{.rho_hat = DensityOperator(rho, cutoff)};
    result.efficiency = options.efficiency;
    result.likelihood_trace.push_back(state.log_likelihood);
    result.occupied_cells = cells.size();
    result.sample_count = data.size();
    result.underdetermined = cells.size() < 2 || data.size() < static_cast<std::size_t>(d * d - 1);

    double gain = std::numeric_limits<double>::infinity();
    int it = 0;
    for (; it < options.max_iterations; ++it) {
        // Frequencies are joint over phase and x, and each phase's operators sum to the
        // identity, so R = 1 at the likelihood maximum.
        const Matrix rn = r_operator(state);
        Matrix candidate;
        detail::LikelihoodState next;
        double dilution = std::numeric_limits<double>::infinity();
        bool accepted = false;
        for (int attempt = 0; attempt < 60; ++attempt) {
            Matrix step = std::isinf(dilution) ? rn : Matrix(Matrix::Identity(d, d) + dilution * rn);
            candidate = step * rho * step.adjoint();
            candidate = (0.5 * (candidate + candidate.adjoint())).eval();
            candidate /= candidate.trace().real();
            next = evaluate(candidate);
            if (next.log_likelihood >= state.log_likelihood - 1e-15) {
                accepted = true;
                break;
            }
            dilution = std::isinf(dilution) ? 1.0 : 0.5 * dilution;
        }
        if (!accepted) {
            gain = 0.0;
            break;
        }
        gain = next.log_likelihood - state.log_likelihood;
        rho = std::move(candidate);
        state = std::move(next);
        result.likelihood_trace.push_back(state.log_likelihood);
        if (gain < options.tolerance) {
            ++it;
            break;
        }
    }

    result.rho_hat = DensityOperator(rho, cutoff).normalized();
    result.iterations = it;
    result.final_likelihood_gain = gain;
    result.log_likelihood = state.log_likelihood;
    result.converged = gain < options.tolerance;
    result.floored_cells = state.floored;
    return result;
}

inline ReconstructionResult maxlik_reconstruct(const HomodyneDataset &data, const MaxLikOptions &options) {
    const BinnedPovm povm(options.binning, FockCutoff(options.cutoff), options.efficiency);
    return maxlik_reconstruct(data, povm, options);
}

}  // namespace catbreed

#endif  // CATBREED_TOMOGRAPHY_HPP
