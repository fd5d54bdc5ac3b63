#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "diffkit/denoise.hpp"
#include "diffkit/samplers.hpp"
#include "diffkit/schedule.hpp"

namespace diffkit {

struct ScheduleConfig {
    int T = 1000;
    double s_offset = 0.008;
    double beta_max = 0.999;
};

struct SamplerConfig {
    SamplerKind kind = SamplerKind::ddim_x0_pcdm;
    int steps = 10;  // S; ignored by ddpm kinds
    Strategy strategy = Strategy::uniform;
    double eta = 0.0;
};

struct OutputConfig {
    std::string samples_csv = "run.csv";
    std::string metrics_json = "run.metrics.json";
};

struct RunConfig {
    ScheduleConfig schedule;
    // Defaults to the 2-D reference mixture; for dim != 2 with no explicit law,
    // a standard Gaussian N(0, I_dim) is substituted at validation time.
    std::optional<DataLaw> data_law;
    std::optional<StateVector> condition_y;  // x0 kinds default to y = 0
    SamplerConfig sampler;
    long long n_chains = 1000;
    std::uint64_t seed = 42;
    int dim = 2;
    OutputConfig outputs;
    bool trajectory = false;
    int workers = 0;  // 0 = available cores
    std::vector<int> bench_steps = {10, 20, 50, 100};
};

// Fills unset defaults (law, condition) and throws std::invalid_argument with
// a field-precise message on any inconsistency.
void validate_config(RunConfig& cfg);

RunConfig config_from_json_string(const std::string& text);
std::string config_to_json_string(const RunConfig& cfg);

// Reads and parses a JSON config file. I/O problems throw std::system_error;
// malformed content throws std::invalid_argument.
RunConfig load_config(const std::string& path);

// Concrete experiment objects assembled from a validated config.
struct RunParts {
    NoiseSchedule schedule;
    std::optional<SubSequence> subsequence;
    DenoiserModel denoiser;
};

RunParts build_parts(const RunConfig& cfg);

}  // namespace diffkit
