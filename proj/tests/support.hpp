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

// Shared helpers for the test suites: random states and small reference formulas that do
// not go through the library code under test.

#ifndef CATBREED_TESTS_SUPPORT_HPP
#define CATBREED_TESTS_SUPPORT_HPP

#include <cmath>
#include <numbers>
#include <random>

#include "catbreed/fock.hpp"

namespace testing_support {

using catbreed::Complex;
using catbreed::DensityOperator;
using catbreed::FockCutoff;
using catbreed::Matrix;
using catbreed::StateVector;
using catbreed::Vector;

/// Random mixed state rho = G G^dag / Tr with a complex Ginibre matrix of the given rank.
/// Weight is concentrated on low photon numbers so truncation effects stay small.
inline DensityOperator random_density(FockCutoff cutoff, std::mt19937_64 &rng, int rank = -1, double decay = 0.6) {
    const int d = cutoff.dimension();
    if (rank < 1) {
        rank = d;
    }
    std::normal_distribution<double> g(0.0, 1.0);
    Matrix m(d, rank);
    for (int i = 0; i < d; ++i) {
        const double scale = std::pow(decay, i);
        for (int j = 0; j < rank; ++j) {
            m(i, j) = Complex(g(rng), g(rng)) * scale;
        }
    }
    Matrix rho = m * m.adjoint();
    rho /= rho.trace().real();
    return DensityOperator(rho, cutoff);
}

inline StateVector random_pure(FockCutoff cutoff, std::mt19937_64 &rng, double decay = 0.6) {
    const int d = cutoff.dimension();
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(d);
    for (int i = 0; i < d; ++i) {
        v(i) = Complex(g(rng), g(rng)) * std::pow(decay, i);
    }
    return StateVector(v / v.norm(), cutoff);
}

/// Coherent-state amplitude e^{-|a|^2/2} a^n / sqrt(n!) via log-gamma.
inline Complex coherent_amplitude(Complex alpha, int n) {
    if (n == 0) {
        return std::exp(-0.5 * std::norm(alpha));
    }
    if (alpha == Complex(0.0)) {
        return 0.0;
    }
    const double log_mag = -0.5 * std::norm(alpha) + n * std::log(std::abs(alpha)) - 0.5 * std::lgamma(n + 1.0);
    return std::polar(std::exp(log_mag), n * std::arg(alpha));
}

/// Harmonic-oscillator eigenfunction from the physicists' Hermite polynomial.
inline double hermite_function_reference(int n, double x) {
    const double norm = std::exp(-0.5 * (n * std::log(2.0) + std::lgamma(n + 1.0) + 0.5 * std::log(std::numbers::pi)));
    return std::hermite(static_cast<unsigned>(n), x) * std::exp(-0.5 * x * x) * norm;
}

/// Integral of x^(2k) e^{-x^2} over [-e, e]: I_0 = sqrt(pi) erf(e),
/// I_k = (2k-1)/2 I_{k-1} - e^(2k-1) e^{-e^2}.
inline double even_gaussian_moment(int k, double e) {
    double acc = std::sqrt(std::numbers::pi) * std::erf(e);
    for (int j = 1; j <= k; ++j) {
        acc = 0.5 * (2 * j - 1) * acc - std::pow(e, 2 * j - 1) * std::exp(-e * e);
    }
    return acc;
}

}  // namespace testing_support

#endif  // CATBREED_TESTS_SUPPORT_HPP
