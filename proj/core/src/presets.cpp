#include "diffkit/presets.hpp"

#include <cmath>

namespace diffkit {

GaussianMixtureLaw reference_mixture() {
    const double r = 2.0;
    const double h = r * std::sqrt(3.0) / 2.0;
    GaussianMixtureLaw law;
    law.components.resize(3);
    for (auto& c : law.components) c.std = 0.01;
    // weights sum to 1.0 exactly
    law.components[0].weight = 1.0 / 3.0;
    law.components[1].weight = 1.0 / 3.0;
    law.components[2].weight = 1.0 - 2.0 / 3.0;
    law.components[0].mean = (StateVector(2) << 0.0, r).finished();
    law.components[1].mean = (StateVector(2) << -h, -r / 2.0).finished();
    law.components[2].mean = (StateVector(2) << h, -r / 2.0).finished();
    return law;
}

}  // namespace diffkit
