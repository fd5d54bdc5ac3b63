#pragma once

#include "diffkit/denoise.hpp"

namespace diffkit {

// Default target for sampling and benchmarks: three well-separated modes at
// radius 2 (equilateral triangle), equal weights, component std 0.01.
GaussianMixtureLaw reference_mixture();

}  // namespace diffkit
