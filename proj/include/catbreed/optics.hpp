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

#ifndef CATBREED_OPTICS_HPP
#define CATBREED_OPTICS_HPP

#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include "catbreed/errors.hpp"
#include "catbreed/fock.hpp"
#include "catbreed/quadrature.hpp"

namespace catbreed {

/// Density operator of two modes a and b with equal cutoffs. Basis index of |n_a, n_b> is
/// n_a * dimension + n_b.
class TwoModeState {
  public:
    TwoModeState(Matrix matrix, FockCutoff cutoff, double truncation_deficit = 0.0)
        : matrix_(std::move(matrix)), cutoff_(cutoff), truncation_deficit_(truncation_deficit) {
        const int d2 = cutoff_.dimension() * cutoff_.dimension();
        if (matrix_.rows() != d2 || matrix_.cols() != d2) {
            throw DomainError("TwoModeState: matrix shape does not match cutoff dimension squared");
        }
    }

    static TwoModeState product(const DensityOperator &a, const DensityOperator &b) {
        require_same_cutoff(a.cutoff(), b.cutoff(), "TwoModeState::product");
        const int d = a.dimension();
        Matrix m(d * d, d * d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                m.block(i * d, j * d, d, d) = a(i, j) * b.matrix();
            }
        }
        return TwoModeState(std::move(m), a.cutoff());
    }

    const Matrix &matrix() const { return matrix_; }
    FockCutoff cutoff() const { return cutoff_; }
    int mode_dimension() const { return cutoff_.dimension(); }
    int index(int n_a, int n_b) const { return n_a * cutoff_.dimension() + n_b; }
    double truncation_deficit() const { return truncation_deficit_; }
    double trace() const { return matrix_.trace().real(); }

    DensityOperator reduced_a() const {
        const int d = mode_dimension();
        Matrix out = Matrix::Zero(d, d);
        for (int b = 0; b < d; ++b) {
            for (int i = 0; i < d; ++i) {
                for (int j = 0; j < d; ++j) {
                    out(i, j) += matrix_(index(i, b), index(j, b));
                }
            }
        }
        return DensityOperator(std::move(out), cutoff_);
    }

    DensityOperator reduced_b() const {
        const int d = mode_dimension();
        Matrix out = Matrix::Zero(d, d);
        for (int a = 0; a < d; ++a) {
            out += matrix_.block(a * d, a * d, d, d);
        }
        return DensityOperator(std::move(out), cutoff_);
    }

    /// <n_a + n_b>.
    double mean_total_photons() const {
        const int d = mode_dimension();
        double acc = 0.0;
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                acc += (i + j) * matrix_(index(i, j), index(i, j)).real();
            }
        }
        return acc;
    }

    PhysicalityReport check() const {
        PhysicalityReport r;
        r.hermiticity_error = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
        r.trace_error = std::abs(matrix_.trace() - Complex(1.0, 0.0));
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (matrix_ + matrix_.adjoint()), Eigen::EigenvaluesOnly);
        r.min_eigenvalue = es.eigenvalues().minCoeff();
        return r;
    }

  private:
    Matrix matrix_;
    FockCutoff cutoff_;
    double truncation_deficit_;
};

enum class Mode { a, b };

/// Quadrature acceptance interval [-half_width, half_width] at the given local-oscillator phase.
/// An infinite half-width accepts every outcome.
class AcceptanceWindow {
  public:
    explicit AcceptanceWindow(double half_width, double phase = 0.0) : half_width_(half_width), phase_(phase) {
        if (!(half_width > 0.0)) {
            throw ConfigError("epsilon", "acceptance half-width must be > 0, got " + std::to_string(half_width));
        }
        if (!std::isfinite(phase)) {
            throw ConfigError("phase", "phase must be finite");
        }
    }

    double half_width() const { return half_width_; }
    double phase() const { return phase_; }

  private:
    double half_width_;
    double phase_;
};

/// State left in the unmeasured mode after a successful herald, and the herald probability.
struct HeraldOutcome {
    DensityOperator state;
    double probability;
};

/// Output of a two-mode linear-optics element, restricted to the shared cutoff. The two-mode
/// unitary is block diagonal in total photon number; components pushed above n_max in either
/// mode are dropped, recorded as the truncation deficit and the result renormalized.
///
/// Convention: U a^dag U^dag = sqrt(t) a^dag + e^{i phi} sqrt(1-t) b^dag,
///             U b^dag U^dag = e^{-i phi} sqrt(1-t) a^dag - sqrt(t) b^dag.
/// At t = 1/2, phi = 0 this is the real symmetric 50:50 splitter a -> (a+b)/sqrt2,
/// b -> (a-b)/sqrt2. The map is an involution.
inline Eigen::SparseMatrix<Complex> beam_splitter_unitary(FockCutoff cutoff, double t, double phi) {
    if (!(t >= 0.0 && t <= 1.0)) {
        throw DomainError("beam_splitter: transmittance must lie in [0, 1], got " + std::to_string(t));
    }
    const int d = cutoff.dimension();
    const int n_max = cutoff.n_max();
    const Complex caa(std::sqrt(t), 0.0);
    const Complex cab = std::polar(std::sqrt(1.0 - t), phi);
    const Complex cba = std::polar(std::sqrt(1.0 - t), -phi);
    const Complex cbb(-std::sqrt(t), 0.0);

    // image(n, m) holds U|n, m> in the N = n + m block, indexed by the photon count in mode a.
    auto apply_creation = [](const std::vector<Complex> &v, Complex ca, Complex cb) {
        const int n_total = static_cast<int>(v.size()) - 1;
        std::vector<Complex> out(v.size() + 1, Complex(0.0));
        for (int p = 0; p <= n_total; ++p) {
            const int q = n_total - p;
            out[p + 1] += ca * std::sqrt(static_cast<double>(p + 1)) * v[p];
            out[p] += cb * std::sqrt(static_cast<double>(q + 1)) * v[p];
        }
        return out;
    };

    std::vector<std::vector<Complex>> image(static_cast<std::size_t>(d * d));
    auto at = [&](int n, int m) -> std::vector<Complex> & { return image[static_cast<std::size_t>(n * d + m)]; };
    at(0, 0) = {Complex(1.0)};
    for (int m = 1; m <= n_max; ++m) {
        at(0, m) = apply_creation(at(0, m - 1), cba, cbb);
        for (auto &c : at(0, m)) {
            c /= std::sqrt(static_cast<double>(m));
        }
    }
    for (int n = 1; n <= n_max; ++n) {
        for (int m = 0; m <= n_max; ++m) {
            at(n, m) = apply_creation(at(n - 1, m), caa, cab);
            for (auto &c : at(n, m)) {
                c /= std::sqrt(static_cast<double>(n));
            }
        }
    }

    std::vector<Eigen::Triplet<Complex>> triplets;
    for (int n = 0; n <= n_max; ++n) {
        for (int m = 0; m <= n_max; ++m) {
            const auto &v = at(n, m);
            const int n_total = n + m;
            for (int p = std::max(0, n_total - n_max); p <= std::min(n_total, n_max); ++p) {
                if (v[p] != Complex(0.0)) {
                    triplets.emplace_back(p * d + (n_total - p), n * d + m, v[p]);
                }
            }
        }
    }
    Eigen::SparseMatrix<Complex> u(d * d, d * d);
    u.setFromTriplets(triplets.begin(), triplets.end());
    return u;
}

inline TwoModeState beam_splitter(const DensityOperator &a, const DensityOperator &b, double t, double phi = 0.0) {
    require_same_cutoff(a.cutoff(), b.cutoff(), "beam_splitter");
    const Eigen::SparseMatrix<Complex> u = beam_splitter_unitary(a.cutoff(), t, phi);
    const TwoModeState in = TwoModeState::product(a, b);
    const Matrix left = u * in.matrix();
    Matrix out = left * u.adjoint();
    const double tr = out.trace().real();
    const double deficit = std::max(0.0, in.trace() - tr);
    out = (0.5 * (out + out.adjoint()) / tr).eval();
    return TwoModeState(std::move(out), a.cutoff(), deficit);
}

namespace detail {

/// Binomial coefficients C(n, k) for n, k < size.
inline RealMatrix pascal(int size) {
    RealMatrix c = RealMatrix::Zero(size, size);
    for (int n = 0; n < size; ++n) {
        c(n, 0) = 1.0;
        for (int k = 1; k <= n; ++k) {
            c(n, k) = c(n - 1, k - 1) + (k <= n - 1 ? c(n - 1, k) : 0.0);
        }
    }
    return c;
}

/// w(m, k) = sqrt(C(m+k, k) eta^m (1-eta)^k): amplitude of losing k photons out of m + k.
inline RealMatrix loss_amplitudes(int d, double eta) {
    const RealMatrix binom = pascal(2 * d);
    RealMatrix w = RealMatrix::Zero(d, d);
    for (int m = 0; m < d; ++m) {
        for (int k = 0; m + k < d; ++k) {
            w(m, k) = std::sqrt(binom(m + k, k) * std::pow(eta, m) * std::pow(1.0 - eta, k));
        }
    }
    return w;
}

inline void require_transmission(double eta, const char *where) {
    if (!(eta >= 0.0 && eta <= 1.0)) {
        throw DomainError(std::string(where) + ": transmission must lie in [0, 1], got " + std::to_string(eta));
    }
}

}  // namespace detail

/// Pure-loss channel of transmission eta (a beam splitter with vacuum in the other port),
/// applied through its Kraus operators A_k = sum_n sqrt(C(n,k) eta^(n-k) (1-eta)^k) |n-k><n|.
inline DensityOperator loss_channel(const DensityOperator &rho, double eta) {
    detail::require_transmission(eta, "loss_channel");
    const int d = rho.dimension();
    if (eta == 1.0) {
        return rho;
    }
    const RealMatrix w = detail::loss_amplitudes(d, eta);
    const Matrix &in = rho.matrix();
    Matrix out = Matrix::Zero(d, d);
    for (int m = 0; m < d; ++m) {
        for (int n = 0; n < d; ++n) {
            Complex acc(0.0);
            for (int k = 0; m + k < d && n + k < d; ++k) {
                acc += w(m, k) * w(n, k) * in(m + k, n + k);
            }
            out(m, n) = acc;
        }
    }
    return DensityOperator(std::move(out), rho.cutoff(), rho.truncation_deficit());
}

/// Heisenberg-picture (adjoint) loss map on an observable: sum_k A_k^dag X A_k.
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>
loss_channel_adjoint(const Eigen::MatrixBase<Derived> &op, double eta) {
    detail::require_transmission(eta, "loss_channel_adjoint");
    using Out = Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, Eigen::Dynamic>;
    const int d = static_cast<int>(op.rows());
    if (eta == 1.0) {
        return Out(op);
    }
    const RealMatrix w = detail::loss_amplitudes(d, eta);
    Out out = Out::Zero(d, d);
    for (int p = 0; p < d; ++p) {
        for (int q = 0; q < d; ++q) {
            typename Derived::Scalar acc(0.0);
            for (int k = 0; k <= std::min(p, q); ++k) {
                acc += w(p - k, k) * w(q - k, k) * op(p - k, q - k);
            }
            out(p, q) = acc;
        }
    }
    return out;
}

/// Conjugation by the phase-space rotation exp(i theta n): entry (m, n) picks up e^{i(m-n)theta}.
inline Matrix rotate_phase(const Matrix &op, double theta) {
    Matrix out = op;
    for (int m = 0; m < op.rows(); ++m) {
        for (int n = 0; n < op.cols(); ++n) {
            out(m, n) *= std::polar(1.0, (m - n) * theta);
        }
    }
    return out;
}

inline DensityOperator rotate_phase(const DensityOperator &rho, double theta) {
    return DensityOperator(rotate_phase(rho.matrix(), theta), rho.cutoff(), rho.truncation_deficit());
}

/// POVM element for a quadrature outcome inside the window, measured with a detector of
/// efficiency eta_d. Entries are <m|Pi|n> = e^{i(m-n)theta} int psi_m psi_n dx over the window,
/// so that Tr(Pi rho) equals the window mass of the marginal distribution at phase theta.
/// Detector loss is folded in through the adjoint loss map.
inline Matrix homodyne_povm(const AcceptanceWindow &window, FockCutoff cutoff, double eta_d = 1.0) {
    if (!(eta_d > 0.0 && eta_d <= 1.0)) {
        throw DomainError("homodyne_povm: detector efficiency must lie in (0, 1], got " + std::to_string(eta_d));
    }
    const double eps = window.half_width();
    RealMatrix integrals = hermite_overlap_integrals(cutoff.n_max(), -eps, eps, 1e-10);
    if (eta_d < 1.0) {
        integrals = loss_channel_adjoint(integrals, eta_d);
    }
    return rotate_phase(integrals.cast<Complex>(), window.phase());
}

/// Herald probabilities below this are treated as impossible.
inline constexpr double kMinHeraldProbability = 1e-12;

/// Measure one mode of a two-mode state with the windowed homodyne POVM and return the
/// normalized state of the other mode together with the success probability.
inline HeraldOutcome condition(const TwoModeState &state, Mode measured, const AcceptanceWindow &window,
                               double eta_d = 1.0) {
    const int d = state.mode_dimension();
    const Matrix povm = homodyne_povm(window, state.cutoff(), eta_d);
    const Matrix &rho = state.matrix();
    Matrix out = Matrix::Zero(d, d);
    // out(i, j) = sum_{k,l} Pi(l, k) rho(i k, j l) with the measured mode carrying k, l.
    for (int i = 0; i < d; ++i) {
        for (int j = 0; j < d; ++j) {
            Complex acc(0.0);
            for (int k = 0; k < d; ++k) {
                for (int l = 0; l < d; ++l) {
                    const Complex element = measured == Mode::b ? rho(state.index(i, k), state.index(j, l))
                                                                : rho(state.index(k, i), state.index(l, j));
                    acc += povm(l, k) * element;
                }
            }
            out(i, j) = acc;
        }
    }
    const double probability = out.trace().real();
    if (!(probability >= kMinHeraldProbability)) {
        throw HeraldImpossible("condition: herald probability " + std::to_string(probability) + " is below " +
                                   std::to_string(kMinHeraldProbability),
                               probability);
    }
    Matrix normalized = 0.5 * (out + out.adjoint()) / probability;
    return HeraldOutcome{DensityOperator(std::move(normalized), state.cutoff(), state.truncation_deficit()),
                         std::min(probability, 1.0)};
}

/// One breeding step: mix a and b on the balanced splitter and herald on a windowed
/// quadrature measurement of output mode b.
inline HeraldOutcome breed(const DensityOperator &a, const DensityOperator &b, const AcceptanceWindow &window,
                           double eta_d = 1.0) {
    return condition(beam_splitter(a, b, 0.5, 0.0), Mode::b, window, eta_d);
}

/// Heralded single photon with vacuum admixture and optional two-photon contamination:
/// F|1><1| + p2|2><2| + (1 - F - p2)|0><0|.
inline DensityOperator single_photon_source(double photon_fidelity, FockCutoff cutoff,
                                            double two_photon_fraction = 0.0) {
    if (!(photon_fidelity >= 0.0 && photon_fidelity <= 1.0)) {
        throw ConfigError("photon_fidelity", "must lie in [0, 1]");
    }
    if (!(two_photon_fraction >= 0.0 && photon_fidelity + two_photon_fraction <= 1.0)) {
        throw ConfigError("two_photon_fraction", "must be >= 0 with photon_fidelity + two_photon_fraction <= 1");
    }
    const double populations[] = {1.0 - photon_fidelity - two_photon_fraction, photon_fidelity,
                                  two_photon_fraction};
    return DensityOperator::diagonal(populations, cutoff);
}

/// The narrow-window limit of breeding two single photons: (sqrt2 |2> + |0>)/sqrt3.
inline StateVector ideal_bred_state(FockCutoff cutoff) {
    Vector v = Vector::Zero(cutoff.dimension());
    v(0) = 1.0 / std::sqrt(3.0);
    v(2) = std::sqrt(2.0 / 3.0);
    return StateVector(std::move(v), cutoff);
}

}  // namespace catbreed

#endif  // CATBREED_OPTICS_HPP
