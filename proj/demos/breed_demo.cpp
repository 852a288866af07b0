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

// Walks through one breeding step: two heralded photons meet on a balanced beam splitter,
// one port is measured near x = 0, and the other port is compared with the squeezed cat.

#include <cstdio>

#include "catbreed/optics.hpp"
#include "catbreed/protocol.hpp"

int main() {
    using namespace catbreed;
    const ProtocolConfig cfg;
    const FockCutoff cutoff = cfg.fock_cutoff();
    const StateVector target = cfg.target_state();

    // Pure photons, narrow window: the heralded state approaches (sqrt2 |2> + |0>)/sqrt3.
    const DensityOperator one = fock_state(1, cutoff).density();
    const HeraldOutcome ideal = breed(one, one, AcceptanceWindow(1e-3));
    std::printf("pure photons, eps=1e-3: P=%.5f  F(target)=%.4f\n", ideal.probability,
                fidelity(ideal.state, target));

    // Default window with pure and imperfect photons.
    const HeraldOutcome wide = breed(one, one, cfg.window());
    std::printf("pure photons, eps=%.2f: P=%.4f  F(target)=%.4f\n", cfg.epsilon, wide.probability,
                fidelity(wide.state, target));
    const DensityOperator photon = cfg.photon_state();
    const HeraldOutcome real = breed(photon, photon, cfg.window());
    std::printf("F_photon=%.2f,   eps=%.2f: P=%.4f  F(target)=%.4f  W_min=%.4f\n", cfg.photon_fidelity, cfg.epsilon,
                real.probability, fidelity(real.state, target), wigner_minimum(real.state).value);

    // Storage-averaged states at the operating point.
    const PipelineStates ps = simulate_pipeline(cfg);
    std::printf("n_max=%d: F at creation=%.3f  F after %d read-out trips=%.3f  W_min=%.4f\n", cfg.n_max,
                fidelity(ps.at_creation, target), cfg.readout_trips, fidelity(ps.after_readout, target),
                wigner_minimum(ps.after_readout).value);
    std::printf("closed-form rate (beta_elec=%.2f): %.0f Hz\n", cfg.beta_elec,
                generation_rate(cfg, conditioning_probability(cfg)));
    return 0;
}
