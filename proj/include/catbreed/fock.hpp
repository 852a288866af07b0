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

#ifndef CATBREED_FOCK_HPP
#define CATBREED_FOCK_HPP

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>
#include <unsupported/Eigen/MatrixFunctions>

#include "catbreed/errors.hpp"

/// States and phase-space functions of a single bosonic mode in a truncated
/// photon-number basis.
///
/// Quadrature convention throughout the library: x = (a + a^dag)/sqrt(2),
/// p = (a - a^dag)/(i sqrt(2)), so the vacuum has variance 1/2 in either
/// quadrature and the Wigner function is bounded by 1/pi.
namespace catbreed {

using Complex = std::complex<double>;
using Vector = Eigen::VectorXcd;
using Matrix = Eigen::MatrixXcd;
using RealMatrix = Eigen::MatrixXd;

/// Truncation deficit above which constructors flag their output.
inline constexpr double kTruncationWarning = 1e-6;

/// Photon-number truncation. Holds n_max; the Hilbert space has n_max + 1
/// basis states |0>..|n_max>.
class FockCutoff {
  public:
    explicit FockCutoff(int n_max) : n_max_(n_max) {
        if (n_max < 2) {
            throw DomainError("FockCutoff: n_max must be >= 2, got " + std::to_string(n_max));
        }
    }

    int n_max() const { return n_max_; }
    int dimension() const { return n_max_ + 1; }

    friend bool operator==(FockCutoff, FockCutoff) = default;

  private:
    int n_max_;
};

inline void require_same_cutoff(FockCutoff a, FockCutoff b, const char *where) {
    if (a != b) {
        throw DomainError(std::string(where) + ": cutoff mismatch (" + std::to_string(a.n_max()) + " vs " +
                          std::to_string(b.n_max()) + ")");
    }
}

class DensityOperator;

/// Pure state in a truncated Fock basis.
class StateVector {
  public:
    StateVector(Vector amplitudes, FockCutoff cutoff, double truncation_deficit = 0.0)
        : amplitudes_(std::move(amplitudes)), cutoff_(cutoff), truncation_deficit_(truncation_deficit) {
        if (amplitudes_.size() != cutoff_.dimension()) {
            throw DomainError("StateVector: amplitude count does not match cutoff dimension");
        }
    }

    const Vector &amplitudes() const { return amplitudes_; }
    Complex operator[](int n) const { return amplitudes_(n); }
    FockCutoff cutoff() const { return cutoff_; }

    /// Probability mass lost to truncation when the state was built (before renormalization).
    double truncation_deficit() const { return truncation_deficit_; }
    bool truncation_warning() const { return truncation_deficit_ > kTruncationWarning; }

    double norm() const { return amplitudes_.norm(); }

    StateVector normalized() const {
        const double n = norm();
        if (n == 0.0) {
            throw DomainError("StateVector::normalized: zero vector");
        }
        return StateVector(amplitudes_ / n, cutoff_, truncation_deficit_);
    }

    double mean_photon_number() const {
        double acc = 0.0;
        for (int n = 0; n < amplitudes_.size(); ++n) {
            acc += n * std::norm(amplitudes_(n));
        }
        return acc / amplitudes_.squaredNorm();
    }

    Complex overlap(const StateVector &other) const {
        require_same_cutoff(cutoff_, other.cutoff_, "StateVector::overlap");
        return amplitudes_.dot(other.amplitudes_);
    }

    DensityOperator density() const;

  private:
    Vector amplitudes_;
    FockCutoff cutoff_;
    double truncation_deficit_;
};

/// Result of checking the three physicality conditions of a density matrix.
struct PhysicalityReport {
    double hermiticity_error = 0.0;   ///< max |rho - rho^dag|
    double trace_error = 0.0;         ///< |Tr rho - 1|
    double min_eigenvalue = 0.0;

    bool ok(double herm_tol = 1e-10, double trace_tol = 1e-9, double eig_tol = 1e-9) const {
        return hermiticity_error < herm_tol && trace_error < trace_tol && min_eigenvalue > -eig_tol;
    }
};

/// Mixed state in a truncated Fock basis.
class DensityOperator {
  public:
    DensityOperator(Matrix matrix, FockCutoff cutoff, double truncation_deficit = 0.0)
        : matrix_(std::move(matrix)), cutoff_(cutoff), truncation_deficit_(truncation_deficit) {
        if (matrix_.rows() != cutoff_.dimension() || matrix_.cols() != cutoff_.dimension()) {
            throw DomainError("DensityOperator: matrix shape does not match cutoff dimension");
        }
    }

    static DensityOperator pure(const StateVector &psi) {
        const Vector &v = psi.amplitudes();
        return DensityOperator(v * v.adjoint() / v.squaredNorm(), psi.cutoff(), psi.truncation_deficit());
    }

    /// Diagonal state with the given photon-number populations (missing entries are zero).
    static DensityOperator diagonal(std::span<const double> populations, FockCutoff cutoff) {
        if (static_cast<int>(populations.size()) > cutoff.dimension()) {
            throw DomainError("DensityOperator::diagonal: more populations than basis states");
        }
        Matrix m = Matrix::Zero(cutoff.dimension(), cutoff.dimension());
        for (std::size_t n = 0; n < populations.size(); ++n) {
            if (populations[n] < 0.0) {
                throw DomainError("DensityOperator::diagonal: negative population");
            }
            m(static_cast<int>(n), static_cast<int>(n)) = populations[n];
        }
        return DensityOperator(std::move(m), cutoff);
    }

    const Matrix &matrix() const { return matrix_; }
    Complex operator()(int m, int n) const { return matrix_(m, n); }
    FockCutoff cutoff() const { return cutoff_; }
    int dimension() const { return cutoff_.dimension(); }
    double truncation_deficit() const { return truncation_deficit_; }

    double trace() const { return matrix_.trace().real(); }
    double population(int n) const { return matrix_(n, n).real(); }
    double purity() const { return (matrix_ * matrix_).trace().real(); }

    double mean_photon_number() const {
        double acc = 0.0;
        for (int n = 0; n < dimension(); ++n) {
            acc += n * matrix_(n, n).real();
        }
        return acc;
    }

    /// Hermitian part scaled to unit trace.
    DensityOperator normalized() const {
        const double tr = trace();
        if (!(tr > 0.0)) {
            throw DomainError("DensityOperator::normalized: non-positive trace");
        }
        Matrix h = 0.5 * (matrix_ + matrix_.adjoint()) / tr;
        return DensityOperator(std::move(h), cutoff_, truncation_deficit_);
    }

    Eigen::VectorXd eigenvalues() const {
        Eigen::SelfAdjointEigenSolver<Matrix> es(0.5 * (matrix_ + matrix_.adjoint()), Eigen::EigenvaluesOnly);
        return es.eigenvalues();
    }

    PhysicalityReport check() const {
        PhysicalityReport r;
        r.hermiticity_error = (matrix_ - matrix_.adjoint()).cwiseAbs().maxCoeff();
        r.trace_error = std::abs(matrix_.trace() - Complex(1.0, 0.0));
        r.min_eigenvalue = eigenvalues().minCoeff();
        return r;
    }

    bool is_physical() const { return check().ok(); }

    /// Re-express the state at another cutoff. Enlarging pads with zeros; shrinking drops the
    /// tail, records the lost mass and renormalizes.
    DensityOperator with_cutoff(FockCutoff target) const {
        const int d = target.dimension();
        Matrix m = Matrix::Zero(d, d);
        const int k = std::min(d, dimension());
        m.topLeftCorner(k, k) = matrix_.topLeftCorner(k, k);
        const double lost = trace() - m.trace().real();
        DensityOperator out(std::move(m), target, truncation_deficit_ + std::max(0.0, lost));
        return lost > 0.0 ? out.normalized() : out;
    }

  private:
    Matrix matrix_;
    FockCutoff cutoff_;
    double truncation_deficit_;
};

inline DensityOperator StateVector::density() const { return DensityOperator::pure(*this); }

/// Annihilation operator in the truncated basis.
inline RealMatrix annihilation(FockCutoff cutoff) {
    const int d = cutoff.dimension();
    RealMatrix a = RealMatrix::Zero(d, d);
    for (int n = 1; n < d; ++n) {
        a(n - 1, n) = std::sqrt(static_cast<double>(n));
    }
    return a;
}

inline StateVector fock_state(int n, FockCutoff cutoff) {
    if (n < 0 || n > cutoff.n_max()) {
        throw DomainError("fock_state: photon number " + std::to_string(n) + " outside [0, " +
                          std::to_string(cutoff.n_max()) + "]");
    }
    Vector v = Vector::Zero(cutoff.dimension());
    v(n) = 1.0;
    return StateVector(std::move(v), cutoff);
}

/// Coherent state |alpha>, renormalized after truncation. The Poisson tail beyond n_max is
/// recorded as the truncation deficit.
inline StateVector coherent_state(Complex alpha, FockCutoff cutoff) {
    const int d = cutoff.dimension();
    Vector v(d);
    v(0) = std::exp(-0.5 * std::norm(alpha));
    for (int n = 1; n < d; ++n) {
        v(n) = v(n - 1) * alpha / std::sqrt(static_cast<double>(n));
    }
    const double kept = v.squaredNorm();
    const double deficit = std::max(0.0, 1.0 - kept);
    return StateVector(v / std::sqrt(kept), cutoff, deficit);
}

/// Squeezing parameter r for a squeezing level in dB of quadrature variance.
/// Positive dB reduces the x variance by 10^(-dB/10) = e^(-2r).
inline double squeezing_parameter(double s_db) { return std::log(std::pow(10.0, s_db / 20.0)); }

/// Truncated squeezing operator with its diagnostics.
struct SqueezeOperator {
    Matrix matrix;
    double unitarity_deviation = 0.0;   ///< max |S^dag S - 1|
    double truncation_deviation = 0.0;  ///< squeezed-vacuum norm lost beyond the cutoff
};

inline constexpr double kSqueezeTruncationTolerance = 1e-6;

/// S(r) = exp(r/2 (a^2 - a^dag^2)) exponentiated inside the truncated space, so it is unitary
/// there by construction. The truncation deviation is the squeezed-vacuum weight that the
/// infinite-dimensional operator would place above n_max; construction fails if it exceeds
/// kSqueezeTruncationTolerance.
inline SqueezeOperator squeeze_matrix(double s_db, FockCutoff cutoff) {
    if (!(std::abs(s_db) <= 20.0)) {
        throw DomainError("squeeze_matrix: |s_dB| must be <= 20, got " + std::to_string(s_db));
    }
    const double r = squeezing_parameter(s_db);
    const RealMatrix a = annihilation(cutoff);
    const RealMatrix gen = 0.5 * r * (a * a - a.transpose() * a.transpose());
    const RealMatrix s = gen.exp();

    SqueezeOperator out;
    out.matrix = s.cast<Complex>();
    out.unitarity_deviation =
        (s.transpose() * s - RealMatrix::Identity(s.rows(), s.cols())).cwiseAbs().maxCoeff();

    // Squeezed vacuum amplitudes: c_0 = cosh(r)^-1/2, c_2k / c_2k-2 = -tanh(r) sqrt((2k-1)/(2k)).
    const double th = std::tanh(r);
    double c = 1.0 / std::sqrt(std::cosh(r));
    double kept = c * c;
    for (int k = 1; 2 * k <= cutoff.n_max(); ++k) {
        c *= -th * std::sqrt((2.0 * k - 1.0) / (2.0 * k));
        kept += c * c;
    }
    out.truncation_deviation = std::max(0.0, 1.0 - kept);

    const double worst = std::max(out.unitarity_deviation, out.truncation_deviation);
    if (worst > kSqueezeTruncationTolerance) {
        throw TruncationError("squeeze_matrix: truncation error too large at n_max=" +
                                  std::to_string(cutoff.n_max()) + " for " + std::to_string(s_db) + " dB",
                              worst);
    }
    return out;
}

/// Parameters of the squeezed even cat used as the breeding target.
struct TargetCatSpec {
    double amplitude = 1.63;
    double squeezing_db = 3.64;
};

/// Normalized S(r)(|alpha> + |-alpha>). Built in a padded space and truncated back to
/// `cutoff`; the lost norm is reported as the truncation deficit.
inline StateVector target_cat(const TargetCatSpec &spec, FockCutoff cutoff) {
    if (cutoff.n_max() < 20) {
        throw DomainError("target_cat: cutoff must be >= 20");
    }
    const FockCutoff work(cutoff.n_max() + 40);
    const StateVector plus = coherent_state(spec.amplitude, work);
    const StateVector minus = coherent_state(-spec.amplitude, work);
    Vector cat = plus.amplitudes() + minus.amplitudes();
    for (int n = 1; n < cat.size(); n += 2) {
        cat(n) = 0.0;
    }
    cat.normalize();
    if (spec.squeezing_db != 0.0) {
        cat = squeeze_matrix(spec.squeezing_db, work).matrix * cat;
    }
    Vector kept = cat.head(cutoff.dimension());
    const double mass = kept.squaredNorm();
    const double deficit = std::max(0.0, 1.0 - mass) + plus.truncation_deficit();
    return StateVector(kept / std::sqrt(mass), cutoff, deficit);
}

/// Harmonic-oscillator eigenfunctions psi_0(x)..psi_{n_max}(x) by the normalized upward
/// recurrence psi_{n+1} = x sqrt(2/(n+1)) psi_n - sqrt(n/(n+1)) psi_{n-1}.
inline Eigen::VectorXd hermite_functions(int n_max, double x) {
    Eigen::VectorXd psi(n_max + 1);
    psi(0) = std::pow(std::numbers::pi, -0.25) * std::exp(-0.5 * x * x);
    if (n_max >= 1) {
        psi(1) = std::sqrt(2.0) * x * psi(0);
    }
    for (int n = 1; n < n_max; ++n) {
        psi(n + 1) = x * std::sqrt(2.0 / (n + 1)) * psi(n) - std::sqrt(static_cast<double>(n) / (n + 1)) * psi(n - 1);
    }
    return psi;
}

/// Quadrature wavefunction <x|n>.
inline double quadrature_wavefunction(int n, double x) {
    if (n < 0) {
        throw DomainError("quadrature_wavefunction: n must be non-negative");
    }
    return hermite_functions(std::max(n, 1), x)(n);
}

/// Wigner function W(x, p), normalized so that the integral over dx dp is one.
///
/// Sums rho_mn W_mn(x, p) where W_mn are the Fock matrix elements of the displaced parity,
/// (-1)^m sqrt(m!/n!) (2 alpha)^(n-m) e^{-2|alpha|^2} L_m^(n-m)(4|alpha|^2) / pi with
/// alpha = (x + i p)/sqrt(2). The Laguerre factors are generated by their three-term
/// recurrences so no factorial is ever formed.
inline double wigner(const DensityOperator &rho, double x, double p) {
    const int d = rho.dimension();
    const Matrix &m = rho.matrix();
    const Complex alpha(x / std::sqrt(2.0), p / std::sqrt(2.0));
    const Complex two_alpha = 2.0 * alpha;
    const Complex two_alpha_conj = std::conj(two_alpha);

    std::vector<Complex> w(d);
    w[0] = std::exp(-2.0 * std::norm(alpha)) / std::numbers::pi;
    double acc = m(0, 0).real() * w[0].real();
    for (int n = 1; n < d; ++n) {
        w[n] = two_alpha * w[n - 1] / std::sqrt(static_cast<double>(n));
        acc += 2.0 * (m(0, n) * w[n]).real();
    }
    for (int row = 1; row < d; ++row) {
        const double sr = std::sqrt(static_cast<double>(row));
        Complex carry = w[row];
        w[row] = (two_alpha_conj * carry - sr * w[row - 1]) / sr;
        acc += (m(row, row) * w[row]).real();
        for (int col = row + 1; col < d; ++col) {
            const Complex next = (two_alpha * w[col - 1] - sr * carry) / std::sqrt(static_cast<double>(col));
            carry = w[col];
            w[col] = next;
            acc += 2.0 * (m(row, col) * w[col]).real();
        }
    }
    return acc;
}

/// Wigner function on the grid xs x ps; entry (i, j) is W(xs[i], ps[j]).
inline RealMatrix wigner_grid(const DensityOperator &rho, std::span<const double> xs, std::span<const double> ps) {
    RealMatrix out(static_cast<Eigen::Index>(xs.size()), static_cast<Eigen::Index>(ps.size()));
    for (std::size_t i = 0; i < xs.size(); ++i) {
        for (std::size_t j = 0; j < ps.size(); ++j) {
            out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = wigner(rho, xs[i], ps[j]);
        }
    }
    return out;
}

struct WignerExtremum {
    double x;
    double p;
    double value;
};

/// Global minimum of W over the square [-extent, extent]^2: a coarse grid scan followed by a
/// compass search from the best grid point.
inline WignerExtremum wigner_minimum(const DensityOperator &rho, double extent = 4.0, int grid = 61) {
    WignerExtremum best{0.0, 0.0, std::numeric_limits<double>::infinity()};
    const double h = 2.0 * extent / (grid - 1);
    for (int i = 0; i < grid; ++i) {
        for (int j = 0; j < grid; ++j) {
            const double x = -extent + i * h;
            const double p = -extent + j * h;
            const double w = wigner(rho, x, p);
            if (w < best.value) {
                best = {x, p, w};
            }
        }
    }
    static constexpr double dirs[4][2] = {{1, 0}, {-1, 0}, {0, 1}, {0, -1}};
    for (double step = h / 2; step > 1e-7;) {
        bool moved = false;
        for (const auto &dir : dirs) {
            const double x = best.x + step * dir[0];
            const double p = best.p + step * dir[1];
            const double w = wigner(rho, x, p);
            if (w < best.value) {
                best = {x, p, w};
                moved = true;
            }
        }
        if (!moved) {
            step /= 2;
        }
    }
    return best;
}

/// n uniformly spaced points spanning [lo, hi].
inline std::vector<double> linspace(double lo, double hi, int n) {
    std::vector<double> v(static_cast<std::size_t>(std::max(n, 1)));
    if (n == 1) {
        v[0] = lo;
        return v;
    }
    for (int i = 0; i < n; ++i) {
        v[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (n - 1);
    }
    return v;
}

/// Expectation of the photon-number parity (-1)^n.
inline double parity(const DensityOperator &rho) {
    double acc = 0.0;
    for (int n = 0; n < rho.dimension(); ++n) {
        acc += (n % 2 == 0 ? 1.0 : -1.0) * rho.population(n);
    }
    return acc;
}

namespace detail {

inline void require_valid_for_fidelity(const DensityOperator &rho, const char *which) {
    const auto report = rho.check();
    if (report.min_eigenvalue < -1e-9 || report.trace_error > 1e-6 || report.hermiticity_error > 1e-8) {
        throw DomainError(std::string("fidelity: ") + which + " is not a valid density operator");
    }
}

inline std::pair<bool, Vector> dominant_if_pure(const DensityOperator &rho) {
    if (rho.purity() < 1.0 - 1e-12) {
        return {false, Vector()};
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    return {true, es.eigenvectors().col(rho.dimension() - 1)};
}

}  // namespace detail

/// <psi|rho|psi>.
inline double fidelity(const DensityOperator &rho, const StateVector &psi) {
    require_same_cutoff(rho.cutoff(), psi.cutoff(), "fidelity");
    detail::require_valid_for_fidelity(rho, "rho");
    const Vector v = psi.amplitudes().normalized();
    return std::clamp((v.adjoint() * rho.matrix() * v)(0, 0).real(), 0.0, 1.0);
}

/// Uhlmann fidelity (Tr sqrt(sqrt(rho) sigma sqrt(rho)))^2. Falls back to the overlap form
/// when either argument is pure.
inline double fidelity(const DensityOperator &rho, const DensityOperator &sigma) {
    require_same_cutoff(rho.cutoff(), sigma.cutoff(), "fidelity");
    detail::require_valid_for_fidelity(rho, "rho");
    detail::require_valid_for_fidelity(sigma, "sigma");
    if (auto [pure, v] = detail::dominant_if_pure(sigma); pure) {
        return std::clamp((v.adjoint() * rho.matrix() * v)(0, 0).real(), 0.0, 1.0);
    }
    if (auto [pure, v] = detail::dominant_if_pure(rho); pure) {
        return std::clamp((v.adjoint() * sigma.matrix() * v)(0, 0).real(), 0.0, 1.0);
    }
    Eigen::SelfAdjointEigenSolver<Matrix> es(rho.matrix());
    const Eigen::VectorXd root = es.eigenvalues().cwiseMax(0.0).cwiseSqrt();
    const Matrix sqrt_rho = es.eigenvectors() * root.asDiagonal() * es.eigenvectors().adjoint();
    const Matrix inner = sqrt_rho * sigma.matrix() * sqrt_rho;
    Eigen::SelfAdjointEigenSolver<Matrix> inner_es(0.5 * (inner + inner.adjoint()), Eigen::EigenvaluesOnly);
    const double tr = inner_es.eigenvalues().cwiseMax(0.0).cwiseSqrt().sum();
    return std::clamp(tr * tr, 0.0, 1.0);
}

}  // namespace catbreed

#endif  // CATBREED_FOCK_HPP
