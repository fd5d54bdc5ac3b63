#pragma once

#include <cstdint>
#include <random>

#include "diffkit/state.hpp"

namespace diffkit {

// Seeded normal/uniform source. mt19937_64 is bit-portable by the standard;
// std::normal_distribution is not, so normals come from the Marsaglia polar
// transform on 53-bit uniforms. This makes chain outputs reproducible at the
// byte level for a fixed seed.
class GaussianRng {
public:
    explicit GaussianRng(std::uint64_t seed) : eng_(seed) {}

    // uniform double in [0, 1)
    double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

    double normal();

    StateVector normal_vector(Eigen::Index dim);

    std::uint64_t raw() { return eng_(); }

private:
    std::mt19937_64 eng_;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

// Stream seed for chain `stream` under a master seed: golden-ratio increment
// followed by the splitmix64 finalizer. Streams 0..n-1 drive chains; the CLI
// reserves streams n, n+1, n+2 for the metrics reference/baseline draws.
std::uint64_t derive_stream(std::uint64_t master, std::uint64_t stream);

}  // namespace diffkit
