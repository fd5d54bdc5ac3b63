#include "diffkit/denoise.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace diffkit {

Eigen::Index law_dim(const DataLaw& law) {
    if (const auto* g = std::get_if<GaussianLaw>(&law)) return g->mean.size();
    return std::get<GaussianMixtureLaw>(law).components.front().mean.size();
}

StateVector law_mean(const DataLaw& law) {
    if (const auto* g = std::get_if<GaussianLaw>(&law)) return g->mean;
    const auto& mix = std::get<GaussianMixtureLaw>(law);
    StateVector m = StateVector::Zero(law_dim(law));
    for (const auto& c : mix.components) m += c.weight * c.mean;
    return m;
}

Eigen::MatrixXd law_cov(const DataLaw& law) {
    const Eigen::Index d = law_dim(law);
    if (const auto* g = std::get_if<GaussianLaw>(&law))
        return g->std * g->std * Eigen::MatrixXd::Identity(d, d);
    const auto& mix = std::get<GaussianMixtureLaw>(law);
    const StateVector m = law_mean(law);
    Eigen::MatrixXd cov = Eigen::MatrixXd::Zero(d, d);
    for (const auto& c : mix.components)
        cov += c.weight * (c.std * c.std * Eigen::MatrixXd::Identity(d, d) +
                           c.mean * c.mean.transpose());
    cov -= m * m.transpose();
    return cov;
}

StateVector law_draw(const DataLaw& law, GaussianRng& rng) {
    if (const auto* g = std::get_if<GaussianLaw>(&law))
        return g->mean + g->std * rng.normal_vector(g->mean.size());
    const auto& mix = std::get<GaussianMixtureLaw>(law);
    const double u = rng.uniform();
    double acc = 0.0;
    const auto& comps = mix.components;
    for (size_t k = 0; k < comps.size(); ++k) {
        acc += comps[k].weight;
        if (u < acc || k + 1 == comps.size())
            return comps[k].mean + comps[k].std * rng.normal_vector(comps[k].mean.size());
    }
    throw std::logic_error("law_draw: unreachable");
}

DenoiserModel make_denoiser(Parameterization param, DataLaw law,
                            std::optional<Condition> condition) {
    if (const auto* g = std::get_if<GaussianLaw>(&law)) {
        require(g->std > 0.0, "make_denoiser: std must be > 0");
        require(g->mean.size() > 0, "make_denoiser: empty mean");
    } else {
        const auto& mix = std::get<GaussianMixtureLaw>(law);
        require(!mix.components.empty(), "make_denoiser: empty mixture");
        const Eigen::Index d = mix.components.front().mean.size();
        double wsum = 0.0;
        for (const auto& c : mix.components) {
            require(c.std > 0.0, "make_denoiser: std must be > 0");
            require(c.weight > 0.0, "make_denoiser: weights must be > 0");
            require(c.mean.size() == d, "make_denoiser: component dimension mismatch");
            wsum += c.weight;
        }
        require(std::abs(wsum - 1.0) <= 1e-12,
                "make_denoiser: mixture weights must sum to 1 within 1e-12");
    }
    if (condition && condition->y.size() > 0)
        require(condition->y.size() == law_dim(law),
                "make_denoiser: condition.y dimension mismatch");
    if (param == Parameterization::x0_prediction)
        require(condition.has_value() && condition->y.size() == law_dim(law),
                "make_denoiser: x0_prediction requires condition.y");
    DenoiserModel m;
    m.parameterization = param;
    m.data_law = std::move(law);
    m.condition = std::move(condition);
    return m;
}

Eigen::VectorXd responsibilities(const GaussianMixtureLaw& law,
                                 const StateVector& x_t, int t,
                                 const NoiseSchedule& sched) {
    require(t >= 1 && t <= sched.T, "responsibilities: t out of 1..T");
    const double a = sched.alpha_bar[static_cast<size_t>(t)];
    const double sa = std::sqrt(a);
    const auto& comps = law.components;
    const auto K = static_cast<Eigen::Index>(comps.size());
    const auto D = static_cast<double>(x_t.size());

    Eigen::VectorXd logr(K);
    for (Eigen::Index k = 0; k < K; ++k) {
        const auto& c = comps[static_cast<size_t>(k)];
        const double v = a * c.std * c.std + (1.0 - a);  // marginal variance of x_t
        const double sq = (x_t - sa * c.mean).squaredNorm();
        logr[k] = std::log(c.weight) - 0.5 * D * std::log(v) - 0.5 * sq / v;
    }
    const double mx = logr.maxCoeff();
    if (!std::isfinite(mx))
        throw std::runtime_error("responsibilities: underflow after log-sum-exp");
    Eigen::VectorXd r = (logr.array() - mx).exp();
    r /= r.sum();
    return r;
}

StateVector posterior_mean_x0(const DataLaw& law, const StateVector& x_t, int t,
                              const NoiseSchedule& sched) {
    require(t >= 1 && t <= sched.T, "posterior_mean_x0: t out of 1..T");
    require_finite(x_t, "posterior_mean_x0");
    require(x_t.size() == law_dim(law), "posterior_mean_x0: dimension mismatch");
    const double a = sched.alpha_bar[static_cast<size_t>(t)];
    const double sa = std::sqrt(a);

    if (const auto* g = std::get_if<GaussianLaw>(&law)) {
        const double s2 = g->std * g->std;
        const double v = a * s2 + (1.0 - a);
        return (sa * s2 * x_t + (1.0 - a) * g->mean) / v;
    }
    const auto& mix = std::get<GaussianMixtureLaw>(law);
    const Eigen::VectorXd r = responsibilities(mix, x_t, t, sched);
    StateVector out = StateVector::Zero(x_t.size());
    for (Eigen::Index k = 0; k < r.size(); ++k) {
        const auto& c = mix.components[static_cast<size_t>(k)];
        const double s2 = c.std * c.std;
        const double v = a * s2 + (1.0 - a);
        out += r[k] * ((sa * s2 * x_t + (1.0 - a) * c.mean) / v);
    }
    return out;
}

StateVector predict(const DenoiserModel& model, const StateVector& x_t, int t,
                    const NoiseSchedule& sched) {
    const StateVector e_x0 = posterior_mean_x0(model.data_law, x_t, t, sched);
    if (model.parameterization == Parameterization::x0_prediction)
        return e_x0 - model.condition->y;
    return eps_from_x0(x_t, e_x0, t, sched);
}

StateVector x0_from_eps(const StateVector& x_t, const StateVector& eps_hat,
                        int t, const NoiseSchedule& sched) {
    require(t >= 1 && t <= sched.T, "x0_from_eps: t out of 1..T");
    require_same_dim(x_t, eps_hat, "x0_from_eps");
    const double a = sched.alpha_bar[static_cast<size_t>(t)];
    return (x_t - std::sqrt(1.0 - a) * eps_hat) / std::sqrt(a);
}

StateVector eps_from_x0(const StateVector& x_t, const StateVector& x0_hat,
                        int t, const NoiseSchedule& sched) {
    require(t >= 1 && t <= sched.T, "eps_from_x0: t out of 1..T");
    require_same_dim(x_t, x0_hat, "eps_from_x0");
    const double a = sched.alpha_bar[static_cast<size_t>(t)];
    return (x_t - std::sqrt(a) * x0_hat) / std::sqrt(1.0 - a);
}

}  // namespace diffkit
