#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "diffkit/schedule.hpp"

namespace diffkit {

struct CheckResult {
    std::string name;
    bool pass = false;
    std::string detail;  // measured numbers, or what went wrong
};

// Individual consistency checks. Each takes the schedule under test (so a
// deliberately corrupted schedule can be probed) and, where randomized, a
// seed. All are deterministic given their arguments.
CheckResult check_schedule_product_identity(const NoiseSchedule& s);
CheckResult check_schedule_range_monotone(const NoiseSchedule& s);
CheckResult check_beta_tilde_terminal_zero(const NoiseSchedule& s);
CheckResult check_subsequence_contract(const NoiseSchedule& s);
CheckResult check_sigma_eta0_zero(const NoiseSchedule& s);
CheckResult check_sigma_eta1_beta_tilde(const NoiseSchedule& s);
CheckResult check_forward_roundtrip(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_forward_marginal_moments(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_responsibilities_normalized(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_posterior_mean_vs_mc(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_ddpm_mean_equivalence(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_ddim_param_equivalence(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_ddim_eta1_degeneration(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_ddim_final_step_collapse(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_chain_determinism(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_call_counts(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_ddim_transport_matches_recursion(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_ddpm_moment_recovery(const NoiseSchedule& s, std::uint64_t seed);
CheckResult check_energy_distance_basics(std::uint64_t seed);

// Runs every check against a freshly built default schedule with fixed
// derived seeds. Used by the CLI `verify` subcommand.
std::vector<CheckResult> run_all_checks(std::uint64_t seed = 20260813u);

}  // namespace diffkit
