#pragma once

#include <string>
#include <vector>

namespace diffkit {

// Precomputed noise schedule. alpha_bar is indexed 0..T with alpha_bar[0] = 1;
// beta and beta_tilde are indexed 1..T (slot 0 unused, kept so beta[t] reads
// naturally). beta_tilde[1] = 0, which makes the final DDPM step deterministic.
struct NoiseSchedule {
    int T = 0;
    double s_offset = 0.0;
    double beta_max = 0.0;
    std::vector<double> alpha_bar;   // size T+1
    std::vector<double> beta;        // size T+1, [0] unused
    std::vector<double> beta_tilde;  // size T+1, [0] unused
};

enum class Strategy { uniform, quadratic };

const char* to_string(Strategy s);
Strategy strategy_from_string(const std::string& s);

// Sampling subsequence tau_1 < ... < tau_S with tau_1 = 1, tau_S = T, plus the
// per-index sigma_{tau_i}(eta). tau[0] is the virtual step 0 (alpha_bar = 1),
// so sigma[1] = 0 always and the final transition collapses to x0_hat.
struct SubSequence {
    std::vector<int> tau;      // size S+1, tau[0] = 0 virtual
    int S = 0;
    double eta = 0.0;
    std::vector<double> sigma; // size S+1, sigma[0] unused, sigma[i] for step i
};

// Cosine schedule: f(t) = cos^2(((t/T + s)/(1 + s)) * pi/2), alpha_bar_t =
// f(t)/f(0); beta_t = 1 - alpha_bar_t/alpha_bar_{t-1} clipped at beta_max,
// then alpha_bar re-accumulated as prod(1 - beta_s) so the product identity
// holds exactly. beta_tilde is evaluated from alpha_bar ratios, which keeps
// sigma_tau(t, t-1, 1) equal to sqrt(beta_tilde[t]) at float precision.
NoiseSchedule build_cosine_schedule(int T, double s_offset = 0.008,
                                    double beta_max = 0.999);

// Eq. for sigma_{tau_i}(eta): eta * sqrt((1-a_prev)/(1-a_i)) * sqrt(1 - a_i/a_prev)
// with a = alpha_bar. tau_prev = 0 means a_prev = 1 (virtual step), giving 0.
double sigma_tau(const NoiseSchedule& sched, int tau_i, int tau_prev, double eta);

// Interior points per strategy (uniform: rounded even spacing; quadratic:
// rounded squares of an even sqrt-grid, denser near t = 1), endpoints pinned
// to 1 and T. Duplicate collisions from rounding are shifted upward, then
// clamped back below the pinned endpoint; S never silently shrinks.
SubSequence build_subsequence(const NoiseSchedule& sched, int S,
                              Strategy strategy, double eta);

}  // namespace diffkit
