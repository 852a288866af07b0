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

#include <catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include <unsupported/Eigen/KroneckerProduct>

#include "catbreed/optics.hpp"
#include "catbreed/tomography.hpp"
#include "support.hpp"

using namespace catbreed;
using Catch::Matchers::WithinAbs;
using testing_support::even_gaussian_moment;
using testing_support::random_density;
using testing_support::random_pure;

namespace {

double binom(int n, int k) { return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0)); }

/// <p, q| U |na, nb> by expanding (A a^dag + B b^dag)^na (C a^dag + D b^dag)^nb |0>.
Complex splitter_element(int p, int q, int na, int nb, double t, double phi) {
    const Complex A(std::sqrt(t), 0.0);
    const Complex B = std::polar(std::sqrt(1.0 - t), phi);
    const Complex C = std::polar(std::sqrt(1.0 - t), -phi);
    const Complex D(-std::sqrt(t), 0.0);
    if (p + q != na + nb) {
        return 0.0;
    }
    Complex coef(0.0);
    for (int k = 0; k <= na; ++k) {
        const int l = p - k;
        if (l < 0 || l > nb) {
            continue;
        }
        coef += binom(na, k) * std::pow(A, k) * std::pow(B, na - k) * binom(nb, l) * std::pow(C, l) *
                std::pow(D, nb - l);
    }
    const double scale =
        std::exp(0.5 * (std::lgamma(p + 1.0) + std::lgamma(q + 1.0) - std::lgamma(na + 1.0) - std::lgamma(nb + 1.0)));
    return coef * scale;
}

/// Window integrals of products of the first three eigenfunctions, in closed form.
struct LowOrderWindow {
    double p00, p02, p22;
    explicit LowOrderWindow(double e) {
        const double sp = std::sqrt(std::numbers::pi);
        const double i0 = even_gaussian_moment(0, e), i1 = even_gaussian_moment(1, e), i2 = even_gaussian_moment(2, e);
        p00 = i0 / sp;
        p02 = (2.0 * i1 - i0) / (std::sqrt(2.0) * sp);
        p22 = (4.0 * i2 - 4.0 * i1 + i0) / (2.0 * sp);
    }
};

/// Simpson rule over [-eps, eps].
double window_mass(const DensityOperator &rho, double theta, double eps) {
    const MarginalDensity pdf = marginal_pdf(rho, theta);
    const int n = 2000;
    const double h = 2.0 * eps / n;
    double acc = pdf(-eps) + pdf(eps);
    for (int i = 1; i < n; ++i) {
        acc += (i % 2 ? 4.0 : 2.0) * pdf(-eps + i * h);
    }
    return acc * h / 3.0;
}

}  // namespace

TEST_CASE("beam splitter matches the mode-transformation expansion") {
    const FockCutoff c(8);
    for (double t : {0.5, 0.2, 0.93}) {
        for (double phi : {0.0, 0.7}) {
            const Eigen::SparseMatrix<Complex> u = beam_splitter_unitary(c, t, phi);
            const Matrix dense(u);
            const int d = c.dimension();
            for (int na = 0; na <= 8; ++na) {
                for (int nb = 0; na + nb <= 8; ++nb) {
                    for (int p = 0; p <= na + nb; ++p) {
                        const int q = na + nb - p;
                        const Complex ref = splitter_element(p, q, na, nb, t, phi);
                        REQUIRE(std::abs(dense(p * d + q, na * d + nb) - ref) < 1e-12);
                    }
                }
            }
        }
    }
}

TEST_CASE("balanced splitter: two-photon interference and involution") {
    const FockCutoff c(6);
    const DensityOperator one = fock_state(1, c).density();
    const TwoModeState out = beam_splitter(one, one, 0.5);
    CHECK(std::abs(out.matrix()(out.index(1, 1), out.index(1, 1))) < 1e-14);
    CHECK_THAT(out.matrix()(out.index(2, 0), out.index(2, 0)).real(), WithinAbs(0.5, 1e-14));
    CHECK_THAT(out.matrix()(out.index(0, 2), out.index(0, 2)).real(), WithinAbs(0.5, 1e-14));
    // (|2,0> - |0,2>)/sqrt2 under this convention.
    CHECK_THAT(out.matrix()(out.index(2, 0), out.index(0, 2)).real(), WithinAbs(-0.5, 1e-14));

    const Matrix u(beam_splitter_unitary(c, 0.37, 1.1));
    // U^2 = 1 on every block that fits in the space.
    const Matrix u2 = u * u;
    const int d = c.dimension();
    for (int na = 0; na <= 6; ++na) {
        for (int nb = 0; na + nb <= 6; ++nb) {
            for (int p = 0; p <= 6; ++p) {
                for (int q = 0; p + q <= 6; ++q) {
                    const double expect = (p == na && q == nb) ? 1.0 : 0.0;
                    REQUIRE(std::abs(u2(p * d + q, na * d + nb) - expect) < 1e-12);
                }
            }
        }
    }
}

TEST_CASE("beam splitter conserves energy and norm", "[property]") {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::uniform_int_distribution<int> kd(2, 4);
    for (int i = 0; i < 1000; ++i) {
        const int k = kd(rng);
        const FockCutoff small(k);
        const FockCutoff big(2 * k);
        const DensityOperator a = random_density(small, rng).with_cutoff(big);
        const DensityOperator b = random_density(small, rng).with_cutoff(big);
        const double t = ud(rng);
        const double phi = 2.0 * std::numbers::pi * ud(rng);
        const TwoModeState out = beam_splitter(a, b, t, phi);
        REQUIRE(out.truncation_deficit() < 1e-12);
        REQUIRE_THAT(out.mean_total_photons(), WithinAbs(a.mean_photon_number() + b.mean_photon_number(), 1e-10));
        REQUIRE(out.check().ok(1e-10, 1e-10, 1e-10));
    }
}

TEST_CASE("partial traces agree with expectation values of local observables") {
    std::mt19937_64 rng(7);
    const FockCutoff c(3);
    const int d = c.dimension();
    // Random entangled state from a random pure two-mode vector.
    Vector v(d * d);
    std::normal_distribution<double> g;
    for (int i = 0; i < d * d; ++i) {
        v(i) = Complex(g(rng), g(rng));
    }
    v.normalize();
    const TwoModeState s(v * v.adjoint(), c);
    for (int trial = 0; trial < 20; ++trial) {
        Matrix x(d, d);
        for (int i = 0; i < d; ++i) {
            for (int j = 0; j < d; ++j) {
                x(i, j) = Complex(g(rng), g(rng));
            }
        }
        const Matrix id = Matrix::Identity(d, d);
        const Matrix xa = Eigen::kroneckerProduct(x, id).eval();
        const Matrix xb = Eigen::kroneckerProduct(id, x).eval();
        CHECK(std::abs((s.matrix() * xa).trace() - (s.reduced_a().matrix() * x).trace()) < 1e-12);
        CHECK(std::abs((s.matrix() * xb).trace() - (s.reduced_b().matrix() * x).trace()) < 1e-12);
    }
}

TEST_CASE("loss channel on Fock and coherent states") {
    const FockCutoff c(40);
    const DensityOperator one = loss_channel(fock_state(1, c).density(), 0.3);
    CHECK_THAT(one.population(1), WithinAbs(0.3, 1e-15));
    CHECK_THAT(one.population(0), WithinAbs(0.7, 1e-15));

    const DensityOperator two = loss_channel(fock_state(2, c).density(), 0.6);
    CHECK_THAT(two.population(2), WithinAbs(0.36, 1e-14));
    CHECK_THAT(two.population(1), WithinAbs(2 * 0.6 * 0.4, 1e-14));
    CHECK_THAT(two.population(0), WithinAbs(0.16, 1e-14));

    const Complex alpha(1.2, -0.4);
    const DensityOperator out = loss_channel(coherent_state(alpha, c).density(), 0.64);
    CHECK_THAT(fidelity(out, coherent_state(0.8 * alpha, c)), WithinAbs(1.0, 1e-10));
    CHECK_THROWS_AS(loss_channel(out, 1.5), DomainError);
    CHECK_THROWS_AS(loss_channel(out, -0.1), DomainError);
}

TEST_CASE("loss channel semigroup and duality", "[property]") {
    std::mt19937_64 rng(23);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::uniform_int_distribution<int> cd(2, 12);
    std::normal_distribution<double> g;
    for (int i = 0; i < 1000; ++i) {
        const FockCutoff c(cd(rng));
        const DensityOperator rho = random_density(c, rng);
        const double e1 = ud(rng), e2 = ud(rng);
        const DensityOperator twice = loss_channel(loss_channel(rho, e1), e2);
        const DensityOperator once = loss_channel(rho, e1 * e2);
        REQUIRE((twice.matrix() - once.matrix()).cwiseAbs().maxCoeff() < 1e-12);
        REQUIRE(once.check().ok(1e-12, 1e-12, 1e-12));

        Matrix o(c.dimension(), c.dimension());
        for (int m = 0; m < c.dimension(); ++m) {
            for (int n = 0; n < c.dimension(); ++n) {
                o(m, n) = Complex(g(rng), g(rng));
            }
        }
        const Complex lhs = (loss_channel(rho, e1).matrix() * o).trace();
        const Complex rhs = (rho.matrix() * loss_channel_adjoint(o, e1)).trace();
        REQUIRE(std::abs(lhs - rhs) < 1e-12);
    }
}

TEST_CASE("window POVM low-order elements match closed-form integrals") {
    for (double eps : {1e-3, 0.1, 0.3, 1.0, 2.5}) {
        const Matrix pi = homodyne_povm(AcceptanceWindow(eps), FockCutoff(6));
        const LowOrderWindow ref(eps);
        CHECK_THAT(pi(0, 0).real(), WithinAbs(std::erf(eps), 1e-12));
        CHECK_THAT(pi(0, 0).real(), WithinAbs(ref.p00, 1e-12));
        CHECK_THAT(pi(0, 2).real(), WithinAbs(ref.p02, 1e-12));
        CHECK_THAT(pi(2, 2).real(), WithinAbs(ref.p22, 1e-12));
        // Odd-even elements vanish on a symmetric window.
        CHECK(std::abs(pi(0, 1)) < 1e-14);
        CHECK(std::abs(pi(1, 2)) < 1e-14);
    }
    CHECK_THROWS_AS(AcceptanceWindow(0.0), ConfigError);
}

TEST_CASE("POVM trace equals the window mass of the rotated marginal") {
    std::mt19937_64 rng(31);
    const FockCutoff c(8);
    for (double theta : {0.0, 0.4, 1.3, 2.9}) {
        const DensityOperator rho = random_density(c, rng);
        const Matrix pi = homodyne_povm(AcceptanceWindow(0.45, theta), c);
        const double tr = (pi * rho.matrix()).trace().real();
        CHECK_THAT(tr, WithinAbs(window_mass(rho, theta, 0.45), 1e-8));
        // Detector loss in the POVM equals loss on the state.
        const Matrix pi_eta = homodyne_povm(AcceptanceWindow(0.45, theta), c, 0.7);
        const Matrix pi_ideal = homodyne_povm(AcceptanceWindow(0.45, theta), c, 1.0);
        CHECK_THAT((pi_eta * rho.matrix()).trace().real(),
                   WithinAbs((pi_ideal * loss_channel(rho, 0.7).matrix()).trace().real(), 1e-12));
    }
}

TEST_CASE("quadrature bins partition the real line", "[property]") {
    std::mt19937_64 rng(41);
    std::uniform_real_distribution<double> xd(-5.0, 5.0);
    std::uniform_int_distribution<int> nd(2, 20);
    const double inf = std::numeric_limits<double>::infinity();
    for (int i = 0; i < 1000; ++i) {
        const int n = nd(rng);
        double a = xd(rng), b = xd(rng);
        if (a > b) {
            std::swap(a, b);
        }
        const RealMatrix sum = hermite_overlap_integrals(n, -inf, a) + hermite_overlap_integrals(n, a, b) +
                               hermite_overlap_integrals(n, b, inf);
        REQUIRE((sum - RealMatrix::Identity(n + 1, n + 1)).cwiseAbs().maxCoeff() < 1e-8);
    }
}

TEST_CASE("breeding two single photons: herald probability and heralded state") {
    const FockCutoff c(20);
    const DensityOperator one = fock_state(1, c).density();
    const double eps = 0.3;
    const HeraldOutcome out = breed(one, one, AcceptanceWindow(eps));
    const LowOrderWindow w(eps);
    // Mode b holds (|0><0| + |2><2|)/2 after interference.
    CHECK_THAT(out.probability, WithinAbs(0.5 * (w.p00 + w.p22), 1e-12));
    CHECK_THAT(out.probability, WithinAbs(0.2374, 5e-4));

    // Conditional state 1/2 [P00 |2><2| - P02 (|2><0| + |0><2|) + P22 |0><0|] / p.
    const double p = out.probability;
    CHECK_THAT(out.state(2, 2).real(), WithinAbs(0.5 * w.p00 / p, 1e-12));
    CHECK_THAT(out.state(0, 0).real(), WithinAbs(0.5 * w.p22 / p, 1e-12));
    CHECK_THAT(out.state(2, 0).real(), WithinAbs(-0.5 * w.p02 / p, 1e-12));
    CHECK(out.state.check().ok());

    // Narrow window: the ideal superposition.
    const HeraldOutcome narrow = breed(one, one, AcceptanceWindow(1e-3));
    CHECK_THAT(fidelity(narrow.state, ideal_bred_state(c)), WithinAbs(1.0, 1e-6));
}

TEST_CASE("herald probability from the reduced marginal") {
    // Cross-check through the tomography module: mass of the mode-b marginal in the window.
    const FockCutoff c(10);
    const DensityOperator one = fock_state(1, c).density();
    const TwoModeState noon = beam_splitter(one, one, 0.5);
    CHECK_THAT(window_mass(noon.reduced_b(), 0.0, 0.3), WithinAbs(breed(one, one, AcceptanceWindow(0.3)).probability, 1e-9));
}

TEST_CASE("vanishing herald probability is an error") {
    const FockCutoff c(4);
    const TwoModeState s = TwoModeState::product(fock_state(0, c).density(), fock_state(1, c).density());
    CHECK_THROWS_AS(condition(s, Mode::b, AcceptanceWindow(1e-5)), HeraldImpossible);
    CHECK_NOTHROW(condition(s, Mode::a, AcceptanceWindow(1e-5)));
}

TEST_CASE("channels and conditioning keep states physical", "[property]") {
    std::mt19937_64 rng(57);
    std::uniform_real_distribution<double> ud(0.0, 1.0);
    std::uniform_int_distribution<int> op(0, 3);
    std::uniform_int_distribution<int> cd(2, 6);
    int checked = 0;
    for (int i = 0; i < 1000; ++i) {
        const FockCutoff c(cd(rng));
        const DensityOperator a = random_density(c, rng);
        const DensityOperator b = random_density(c, rng);
        switch (op(rng)) {
            case 0: REQUIRE(loss_channel(a, ud(rng)).check().ok(1e-10, 1e-10, 1e-10)); break;
            case 1: REQUIRE(rotate_phase(a, 6.3 * ud(rng)).check().ok(1e-10, 1e-10, 1e-10)); break;
            case 2: {
                const TwoModeState s = beam_splitter(a, b, ud(rng), 6.3 * ud(rng));
                REQUIRE(s.check().ok(1e-10, 1e-10, 1e-10));
                REQUIRE(s.reduced_a().check().ok(1e-10, 1e-10, 1e-10));
                break;
            }
            default: {
                const AcceptanceWindow w(0.05 + 2.0 * ud(rng), 3.0 * ud(rng));
                const HeraldOutcome h = breed(a, b, w, 0.5 + 0.5 * ud(rng));
                REQUIRE(h.probability > 0.0);
                REQUIRE(h.probability <= 1.0);
                REQUIRE(h.state.check().ok(1e-10, 1e-10, 1e-10));
            }
        }
        ++checked;
    }
    CHECK(checked == 1000);
}

TEST_CASE("single-photon source populations") {
    const DensityOperator s = single_photon_source(0.87, FockCutoff(5), 0.02);
    CHECK_THAT(s.population(0), WithinAbs(0.11, 1e-15));
    CHECK_THAT(s.population(1), WithinAbs(0.87, 1e-15));
    CHECK_THAT(s.population(2), WithinAbs(0.02, 1e-15));
    CHECK_THROWS_AS(single_photon_source(1.2, FockCutoff(5)), ConfigError);
    CHECK_THROWS_AS(single_photon_source(0.9, FockCutoff(5), 0.2), ConfigError);
}
