#include "diffkit/schedule.hpp"

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

#include "diffkit/state.hpp"

namespace diffkit {

const char* to_string(Strategy s) {
    return s == Strategy::uniform ? "uniform" : "quadratic";
}

Strategy strategy_from_string(const std::string& s) {
    if (s == "uniform") return Strategy::uniform;
    if (s == "quadratic") return Strategy::quadratic;
    throw std::invalid_argument("unknown strategy '" + s +
                                "' (expected uniform|quadratic)");
}

NoiseSchedule build_cosine_schedule(int T, double s_offset, double beta_max) {
    require(T >= 1, "build_cosine_schedule: T must be >= 1");
    require(s_offset > 0.0, "build_cosine_schedule: s_offset must be > 0");
    require(beta_max > 0.0 && beta_max < 1.0,
            "build_cosine_schedule: beta_max must be in (0,1)");

    NoiseSchedule sched;
    sched.T = T;
    sched.s_offset = s_offset;
    sched.beta_max = beta_max;
    sched.alpha_bar.assign(static_cast<size_t>(T) + 1, 0.0);
    sched.beta.assign(static_cast<size_t>(T) + 1, 0.0);
    sched.beta_tilde.assign(static_cast<size_t>(T) + 1, 0.0);

    const auto f = [&](int t) {
        const double u = (static_cast<double>(t) / T + s_offset) / (1.0 + s_offset);
        const double c = std::cos(u * std::numbers::pi / 2.0);
        return c * c;
    };

    const double f0 = f(0);
    sched.alpha_bar[0] = 1.0;
    double prev_raw = 1.0;  // f(t-1)/f(0)
    for (int t = 1; t <= T; ++t) {
        const double raw = f(t) / f0;
        double beta_t = 1.0 - raw / prev_raw;
        if (beta_t > beta_max) beta_t = beta_max;
        if (!(beta_t > 0.0 && beta_t < 1.0))
            throw std::runtime_error("build_cosine_schedule: beta out of (0,1) at t=" +
                                     std::to_string(t));
        sched.beta[t] = beta_t;
        // re-accumulate so prod(1 - beta_s) == alpha_bar[t] exactly
        sched.alpha_bar[t] = sched.alpha_bar[t - 1] * (1.0 - beta_t);
        prev_raw = raw;
    }
    for (int t = 1; t <= T; ++t) {
        const double a = sched.alpha_bar[t];
        const double a_prev = sched.alpha_bar[t - 1];
        // (1 - a_prev)/(1 - a) * (1 - a/a_prev): the alpha_bar-ratio form of the
        // posterior variance; agrees with sigma_tau at float precision.
        sched.beta_tilde[t] = (1.0 - a_prev) * (1.0 - a / a_prev) / (1.0 - a);
    }
    return sched;
}

double sigma_tau(const NoiseSchedule& sched, int tau_i, int tau_prev, double eta) {
    require(eta >= 0.0, "sigma_tau: eta must be >= 0");
    require(tau_prev >= 0, "sigma_tau: tau_prev must be >= 0");
    require(tau_i > tau_prev, "sigma_tau: requires tau_i > tau_prev");
    require(tau_i <= sched.T, "sigma_tau: tau_i out of range");
    const double a_i = sched.alpha_bar[static_cast<size_t>(tau_i)];
    const double a_prev = sched.alpha_bar[static_cast<size_t>(tau_prev)];
    return eta * std::sqrt((1.0 - a_prev) / (1.0 - a_i)) *
           std::sqrt(1.0 - a_i / a_prev);
}

SubSequence build_subsequence(const NoiseSchedule& sched, int S,
                              Strategy strategy, double eta) {
    const int T = sched.T;
    require(S >= 2, "build_subsequence: S must be >= 2");
    require(S <= T, "build_subsequence: S must be <= T");
    require(eta >= 0.0, "build_subsequence: eta must be >= 0");

    SubSequence sub;
    sub.S = S;
    sub.eta = eta;
    sub.tau.assign(static_cast<size_t>(S) + 1, 0);

    for (int i = 1; i <= S; ++i) {
        const double frac = static_cast<double>(i - 1) / (S - 1);
        double v;
        if (strategy == Strategy::uniform) {
            v = 1.0 + (static_cast<double>(T) - 1.0) * frac;
        } else {
            const double g = 1.0 + (std::sqrt(static_cast<double>(T)) - 1.0) * frac;
            v = g * g;
        }
        sub.tau[static_cast<size_t>(i)] = static_cast<int>(std::llround(v));
    }
    sub.tau[1] = 1;
    sub.tau[static_cast<size_t>(S)] = T;

    // rounding collisions: shift duplicates upward, then clamp back below the
    // pinned endpoint; S <= T guarantees room for S distinct steps
    for (int i = 2; i <= S; ++i)
        if (sub.tau[i] <= sub.tau[i - 1]) sub.tau[i] = sub.tau[i - 1] + 1;
    sub.tau[static_cast<size_t>(S)] = T;
    for (int i = S - 1; i >= 1; --i)
        if (sub.tau[i] >= sub.tau[i + 1]) sub.tau[i] = sub.tau[i + 1] - 1;

    if (sub.tau[1] != 1 || sub.tau[static_cast<size_t>(S)] != T)
        throw std::runtime_error("build_subsequence: endpoint pinning failed");
    for (int i = 1; i < S; ++i)
        if (sub.tau[i] >= sub.tau[i + 1])
            throw std::runtime_error("build_subsequence: monotonicity repair failed");

    sub.sigma.assign(static_cast<size_t>(S) + 1, 0.0);
    for (int i = 1; i <= S; ++i) {
        const double s = sigma_tau(sched, sub.tau[i], sub.tau[i - 1], eta);
        const double cap = 1.0 - sched.alpha_bar[static_cast<size_t>(sub.tau[i - 1])];
        if (s * s > cap * (1.0 + 1e-12))
            throw std::invalid_argument(
                "build_subsequence: sigma exceeds direction-term budget at i=" +
                std::to_string(i) + " (eta too large)");
        sub.sigma[static_cast<size_t>(i)] = s;
    }
    return sub;
}

}  // namespace diffkit
