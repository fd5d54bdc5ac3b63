#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "diffkit/denoise.hpp"
#include "diffkit/rng.hpp"
#include "diffkit/schedule.hpp"
#include "diffkit/state.hpp"

namespace diffkit {

enum class SamplerKind { ddpm_eps, ddpm_x0, ddim_eps, ddim_x0_pcdm };

const char* to_string(SamplerKind k);
SamplerKind sampler_kind_from_string(const std::string& s);
bool is_ddim(SamplerKind k);
Parameterization parameterization_for(SamplerKind k);

// Posterior step mean fed with an x0 prediction:
// mu = sqrt(1-beta_t)(1-abar_{t-1})/(1-abar_t) x_t + sqrt(abar_{t-1}) beta_t/(1-abar_t) x0_hat.
StateVector ddpm_mean_x0(const StateVector& x_t, int t, const StateVector& x0_hat,
                         const NoiseSchedule& sched);

// Noise-parameterized mean: mu = (x_t - beta_t/sqrt(1-abar_t) eps_hat)/sqrt(1-beta_t).
StateVector ddpm_mean_eps(const StateVector& x_t, int t, const StateVector& eps_hat,
                          const NoiseSchedule& sched);

// mu + sqrt(beta_tilde_t) z; t = 1 is deterministic (beta_tilde_1 = 0, no draw).
StateVector ddpm_step_x0(const StateVector& x_t, int t, const StateVector& x0_hat,
                         const NoiseSchedule& sched, GaussianRng& rng);
StateVector ddpm_step_eps(const StateVector& x_t, int t, const StateVector& eps_hat,
                          const NoiseSchedule& sched, GaussianRng& rng);

// One DDIM transition tau_i -> tau_{i-1} (i = 1 uses the virtual tau_0 = 0,
// collapsing to x0_hat exactly). sigma = 0 draws no noise.
StateVector ddim_step_eps(const StateVector& x_tau_i, int i, const SubSequence& sub,
                          const StateVector& eps_hat, const NoiseSchedule& sched,
                          GaussianRng& rng);

// x0-parameterized transition: x0_hat = s0_hat + y, eps reconstructed from it,
// then the same update. Identical to ddim_step_eps under consistent inputs.
StateVector ddim_step_x0_pcdm(const StateVector& x_tau_i, int i,
                              const SubSequence& sub, const StateVector& s0_hat,
                              const Condition& condition, const NoiseSchedule& sched,
                              GaussianRng& rng);

struct SamplerRun {
    SamplerKind sampler_kind = SamplerKind::ddim_x0_pcdm;
    const NoiseSchedule* schedule = nullptr;
    std::optional<SubSequence> subsequence;  // required for ddim, forbidden for ddpm
    DenoiserModel denoiser;
    std::uint64_t seed = 0;
    bool record_trajectory = false;
};

// Throws unless: schedule set, ddim<->subsequence pairing correct, and the
// denoiser parameterization matches the sampler kind.
void validate_run(const SamplerRun& run);

using Trajectory = std::vector<std::pair<int, StateVector>>;  // (t, x_t) after each step

struct ChainResult {
    StateVector x0_hat_final;
    long long denoiser_calls = 0;
    Trajectory trajectory;  // empty unless recorded; exactly S (or T) snapshots
    double wall_time = 0.0; // seconds
};

// x_T ~ N(0, I) from run.seed, then T (ddpm) or S (ddim) denoiser calls.
ChainResult run_chain(const SamplerRun& run);

struct BatchResult {
    Eigen::MatrixXd samples;  // n_chains x D, row i = final x0_hat of chain i
    long long denoiser_calls_per_chain = 0;
    long long total_denoiser_calls = 0;
    double wall_time = 0.0;  // whole batch, seconds
    std::vector<Trajectory> trajectories;  // per chain when recorded
};

// Runs n_chains chains, chain i seeded with derive_stream(base.seed, i).
// workers <= 0 means hardware concurrency. Output is ordered by chain index
// and independent of the worker count.
BatchResult run_chains(const SamplerRun& base, int n_chains, int workers = 0);

}  // namespace diffkit
