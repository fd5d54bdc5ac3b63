#pragma once

#include <cstdint>

#include "diffkit/denoise.hpp"
#include "diffkit/state.hpp"

namespace diffkit {

// Above this many rows a set is subsampled (without replacement, fixed seed)
// before the all-pairs sums, keeping the estimator deterministic.
inline constexpr Eigen::Index kEnergySubsampleCap = 20000;
inline constexpr std::uint64_t kEnergySubsampleSeed = 0x5EEDD157A4CEULL;

// Energy distance V-statistic between two sample sets (rows = points):
//   2/(nm) sum ||a_i - b_j|| - 1/n^2 sum ||a_i - a_j|| - 1/m^2 sum ||b_i - b_j||.
// Symmetric in its arguments and exactly 0 for identical inputs.
double energy_distance(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b);

struct MomentReport {
    double mean_error = 0.0;  // Euclidean distance of sample mean to target mean
    double cov_error = 0.0;   // max abs entrywise deviation of unbiased covariance
    bool low_n = false;       // n == 1: covariance reported as zero
};

MomentReport moment_report(const Eigen::MatrixXd& samples, const DataLaw& target);

struct MetricsReport {
    long long n_samples = 0;
    double mean_error = 0.0;
    double cov_error = 0.0;
    double energy_distance = 0.0;
    double baseline_energy_distance = 0.0;  // two independent target draws, same n
    long long denoiser_calls = 0;
    double wall_time = 0.0;
};

}  // namespace diffkit
