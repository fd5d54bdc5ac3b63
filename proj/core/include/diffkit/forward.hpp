#pragma once

#include "diffkit/rng.hpp"
#include "diffkit/schedule.hpp"
#include "diffkit/state.hpp"

namespace diffkit {

// One forward Markov step: sqrt(1-beta_t) x_{t-1} + sqrt(beta_t) z.
StateVector diffuse_step(const StateVector& x_prev, int t,
                         const NoiseSchedule& sched, GaussianRng& rng);

struct NoisedState {
    StateVector x_t;
    StateVector eps;  // the drawn noise, returned for round-trip tests
};

// Closed-form marginal: draws eps ~ N(0, I) and returns
// x_t = sqrt(alpha_bar_t) x0 + sqrt(1 - alpha_bar_t) eps along with eps.
NoisedState diffuse_to(const StateVector& x0, int t, const NoiseSchedule& sched,
                       GaussianRng& rng);

// Deterministic reparameterized map with caller-supplied eps. t = 0 is the
// identity in x0.
StateVector add_noise(const StateVector& x0, const StateVector& eps, int t,
                      const NoiseSchedule& sched);

}  // namespace diffkit
