#pragma once

#include <optional>
#include <variant>
#include <vector>

#include "diffkit/rng.hpp"
#include "diffkit/schedule.hpp"
#include "diffkit/state.hpp"

namespace diffkit {

enum class Parameterization { noise_prediction, x0_prediction };

struct GaussianLaw {
    StateVector mean;
    double std = 1.0;
};

struct MixtureComponent {
    double weight = 0.0;
    StateVector mean;
    double std = 1.0;  // isotropic per component
};

struct GaussianMixtureLaw {
    std::vector<MixtureComponent> components;
};

using DataLaw = std::variant<GaussianLaw, GaussianMixtureLaw>;

Eigen::Index law_dim(const DataLaw& law);
StateVector law_mean(const DataLaw& law);
Eigen::MatrixXd law_cov(const DataLaw& law);
StateVector law_draw(const DataLaw& law, GaussianRng& rng);

// Oracle denoiser: the exact posterior mean under `data_law` and the
// sqrt(a) x0 + sqrt(1-a) eps noising kernel stands in for the trained
// network. Immutable after construction; predict is pure, so concurrent
// chains may share one model.
struct DenoiserModel {
    Parameterization parameterization = Parameterization::x0_prediction;
    DataLaw data_law;
    std::optional<Condition> condition;
};

// Validates: weights sum to 1 within 1e-12, stds > 0, consistent dimensions,
// and condition.y present (matching dim) for x0_prediction.
DenoiserModel make_denoiser(Parameterization param, DataLaw law,
                            std::optional<Condition> condition = std::nullopt);

// E[x0 | x_t] in closed form (responsibility-weighted per-component posterior
// means for mixtures, log-sum-exp stabilized).
StateVector posterior_mean_x0(const DataLaw& law, const StateVector& x_t, int t,
                              const NoiseSchedule& sched);

// Mixture responsibilities at (x_t, t); sums to 1 within 1e-12.
Eigen::VectorXd responsibilities(const GaussianMixtureLaw& law,
                                 const StateVector& x_t, int t,
                                 const NoiseSchedule& sched);

// x0_prediction: returns s0_hat = E[x0|x_t] - y.
// noise_prediction: returns eps_from_x0(x_t, E[x0|x_t], t).
StateVector predict(const DenoiserModel& model, const StateVector& x_t, int t,
                    const NoiseSchedule& sched);

// (x_t - sqrt(1-a) eps_hat) / sqrt(a); rejects t = 0.
StateVector x0_from_eps(const StateVector& x_t, const StateVector& eps_hat,
                        int t, const NoiseSchedule& sched);

// (x_t - sqrt(a) x0_hat) / sqrt(1-a); rejects t = 0.
StateVector eps_from_x0(const StateVector& x_t, const StateVector& x0_hat,
                        int t, const NoiseSchedule& sched);

}  // namespace diffkit
