#include "diffkit/forward.hpp"

#include <cmath>
#include <string>

namespace diffkit {

StateVector diffuse_step(const StateVector& x_prev, int t,
                         const NoiseSchedule& sched, GaussianRng& rng) {
    require(t >= 1 && t <= sched.T,
            "diffuse_step: t out of 1..T (" + std::to_string(t) + ")");
    require_finite(x_prev, "diffuse_step");
    const double b = sched.beta[static_cast<size_t>(t)];
    return std::sqrt(1.0 - b) * x_prev +
           std::sqrt(b) * rng.normal_vector(x_prev.size());
}

NoisedState diffuse_to(const StateVector& x0, int t, const NoiseSchedule& sched,
                       GaussianRng& rng) {
    require(t >= 0 && t <= sched.T,
            "diffuse_to: t out of 0..T (" + std::to_string(t) + ")");
    require_finite(x0, "diffuse_to");
    NoisedState out;
    out.eps = rng.normal_vector(x0.size());
    out.x_t = add_noise(x0, out.eps, t, sched);
    return out;
}

StateVector add_noise(const StateVector& x0, const StateVector& eps, int t,
                      const NoiseSchedule& sched) {
    require(t >= 0 && t <= sched.T,
            "add_noise: t out of 0..T (" + std::to_string(t) + ")");
    require_same_dim(x0, eps, "add_noise");
    const double a = sched.alpha_bar[static_cast<size_t>(t)];
    return std::sqrt(a) * x0 + std::sqrt(1.0 - a) * eps;
}

}  // namespace diffkit
