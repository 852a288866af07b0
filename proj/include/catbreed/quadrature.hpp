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

#ifndef CATBREED_QUADRATURE_HPP
#define CATBREED_QUADRATURE_HPP

#include <cmath>

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>

#include "catbreed/fock.hpp"

namespace catbreed {

namespace detail {

using GaussRule = boost::math::quadrature::gauss<double, 20>;

/// Fixed 20-point Gauss-Legendre estimate of the integral of x -> psi(x) psi(x)^T over [a, b]
/// for psi = hermite_functions(n_max, x).
inline RealMatrix gauss_hermite_products(int n_max, double a, double b) {
    const double half = 0.5 * (b - a);
    const double mid = 0.5 * (a + b);
    const int d = n_max + 1;
    RealMatrix acc = RealMatrix::Zero(d, d);
    const auto &nodes = GaussRule::abscissa();
    const auto &weights = GaussRule::weights();
    // Boost stores the non-negative half of the symmetric rule; node 0 is the centre for odd N.
    for (std::size_t i = 0; i < nodes.size(); ++i) {
        const bool centre = nodes[i] == 0.0;
        for (int sign : {1, -1}) {
            if (centre && sign < 0) {
                continue;
            }
            const Eigen::VectorXd psi = hermite_functions(n_max, mid + sign * half * nodes[i]);
            acc.noalias() += weights[i] * psi * psi.transpose();
        }
    }
    return half * acc;
}

inline RealMatrix adaptive_hermite_products(int n_max, double a, double b, const RealMatrix &whole, double tol,
                                            int depth) {
    const double mid = 0.5 * (a + b);
    RealMatrix left = gauss_hermite_products(n_max, a, mid);
    RealMatrix right = gauss_hermite_products(n_max, mid, b);
    RealMatrix halves = left + right;
    if (depth <= 0 || (halves - whole).cwiseAbs().maxCoeff() <= tol) {
        return halves;
    }
    return adaptive_hermite_products(n_max, a, mid, left, 0.5 * tol, depth - 1) +
           adaptive_hermite_products(n_max, mid, b, right, 0.5 * tol, depth - 1);
}

}  // namespace detail

/// Half-width beyond which every psi_n with n <= n_max is below double precision.
inline double quadrature_support(int n_max) { return std::sqrt(2.0 * n_max + 1.0) + 14.0; }

/// Matrix of overlap integrals I_mn = int_a^b psi_m(x) psi_n(x) dx for m, n <= n_max by adaptive
/// Gauss-Legendre subdivision to absolute tolerance `tol`. Infinite limits are clipped to the
/// numerical support of the Hermite functions.
inline RealMatrix hermite_overlap_integrals(int n_max, double a, double b, double tol = 1e-10) {
    const double support = quadrature_support(n_max);
    a = std::max(a, -support);
    b = std::min(b, support);
    const int d = n_max + 1;
    if (!(b > a)) {
        return RealMatrix::Zero(d, d);
    }
    // Pre-split long intervals so that the first estimate already resolves the oscillations.
    const double width = b - a;
    const int pieces = std::max(1, static_cast<int>(std::ceil(width / 1.0)));
    RealMatrix acc = RealMatrix::Zero(d, d);
    for (int i = 0; i < pieces; ++i) {
        const double lo = a + width * i / pieces;
        const double hi = a + width * (i + 1) / pieces;
        const RealMatrix whole = detail::gauss_hermite_products(n_max, lo, hi);
        acc += detail::adaptive_hermite_products(n_max, lo, hi, whole, tol / pieces, 30);
    }
    return acc;
}

}  // namespace catbreed

#endif  // CATBREED_QUADRATURE_HPP
