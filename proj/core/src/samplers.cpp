#include "diffkit/samplers.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <mutex>
#include <stdexcept>
#include <thread>

namespace diffkit {

const char* to_string(SamplerKind k) {
    switch (k) {
        case SamplerKind::ddpm_eps: return "ddpm_eps";
        case SamplerKind::ddpm_x0: return "ddpm_x0";
        case SamplerKind::ddim_eps: return "ddim_eps";
        case SamplerKind::ddim_x0_pcdm: return "ddim_x0_pcdm";
    }
    throw std::invalid_argument("unknown sampler kind");
}

SamplerKind sampler_kind_from_string(const std::string& s) {
    if (s == "ddpm_eps") return SamplerKind::ddpm_eps;
    if (s == "ddpm_x0") return SamplerKind::ddpm_x0;
    if (s == "ddim_eps") return SamplerKind::ddim_eps;
    if (s == "ddim_x0_pcdm") return SamplerKind::ddim_x0_pcdm;
    throw std::invalid_argument("unknown sampler kind '" + s +
                                "' (expected ddpm_eps, ddpm_x0, ddim_eps, or ddim_x0_pcdm)");
}

bool is_ddim(SamplerKind k) {
    return k == SamplerKind::ddim_eps || k == SamplerKind::ddim_x0_pcdm;
}

Parameterization parameterization_for(SamplerKind k) {
    switch (k) {
        case SamplerKind::ddpm_eps:
        case SamplerKind::ddim_eps:
            return Parameterization::noise_prediction;
        case SamplerKind::ddpm_x0:
        case SamplerKind::ddim_x0_pcdm:
            return Parameterization::x0_prediction;
    }
    throw std::invalid_argument("unknown sampler kind");
}

namespace {

void check_step_time(int t, const NoiseSchedule& sched) {
    require(t >= 1 && t <= sched.T, "sampler step: t must be in 1..T");
}

}  // namespace

StateVector ddpm_mean_x0(const StateVector& x_t, int t, const StateVector& x0_hat,
                         const NoiseSchedule& sched) {
    check_step_time(t, sched);
    require_same_dim(x_t, x0_hat, "ddpm_mean_x0");
    const double beta = sched.beta[t];
    const double abar = sched.alpha_bar[t];
    const double abar_prev = sched.alpha_bar[t - 1];
    const double c_x = std::sqrt(1.0 - beta) * (1.0 - abar_prev) / (1.0 - abar);
    const double c_x0 = std::sqrt(abar_prev) * beta / (1.0 - abar);
    return c_x * x_t + c_x0 * x0_hat;
}

StateVector ddpm_mean_eps(const StateVector& x_t, int t, const StateVector& eps_hat,
                          const NoiseSchedule& sched) {
    check_step_time(t, sched);
    require_same_dim(x_t, eps_hat, "ddpm_mean_eps");
    const double beta = sched.beta[t];
    const double abar = sched.alpha_bar[t];
    return (x_t - (beta / std::sqrt(1.0 - abar)) * eps_hat) / std::sqrt(1.0 - beta);
}

namespace {

StateVector ddpm_add_noise(StateVector mu, int t, const NoiseSchedule& sched,
                           GaussianRng& rng) {
    const double bt = sched.beta_tilde[t];
    if (bt > 0.0) mu += std::sqrt(bt) * rng.normal_vector(mu.size());
    return mu;
}

}  // namespace

StateVector ddpm_step_x0(const StateVector& x_t, int t, const StateVector& x0_hat,
                         const NoiseSchedule& sched, GaussianRng& rng) {
    return ddpm_add_noise(ddpm_mean_x0(x_t, t, x0_hat, sched), t, sched, rng);
}

StateVector ddpm_step_eps(const StateVector& x_t, int t, const StateVector& eps_hat,
                          const NoiseSchedule& sched, GaussianRng& rng) {
    return ddpm_add_noise(ddpm_mean_eps(x_t, t, eps_hat, sched), t, sched, rng);
}

namespace {

StateVector ddim_update(const StateVector& x0_hat, const StateVector& eps_hat, int i,
                        const SubSequence& sub, const NoiseSchedule& sched,
                        GaussianRng& rng) {
    const int t_prev = sub.tau[static_cast<std::size_t>(i) - 1];
    const double abar_prev = sched.alpha_bar[t_prev];
    const double sigma = sub.sigma[i];
    double radicand = 1.0 - abar_prev - sigma * sigma;
    require(radicand >= -1e-12, "ddim step: direction radicand below -1e-12");
    if (radicand < 0.0) radicand = 0.0;
    StateVector out = std::sqrt(abar_prev) * x0_hat + std::sqrt(radicand) * eps_hat;
    if (sigma > 0.0) out += sigma * rng.normal_vector(out.size());
    return out;
}

void check_ddim_index(int i, const SubSequence& sub, const NoiseSchedule& sched) {
    require(i >= 1 && i <= sub.S, "ddim step: i must be in 1..S");
    require(sub.tau[sub.S] == sched.T, "ddim step: subsequence does not match schedule");
}

}  // namespace

StateVector ddim_step_eps(const StateVector& x_tau_i, int i, const SubSequence& sub,
                          const StateVector& eps_hat, const NoiseSchedule& sched,
                          GaussianRng& rng) {
    check_ddim_index(i, sub, sched);
    require_same_dim(x_tau_i, eps_hat, "ddim_step_eps");
    const StateVector x0_hat = x0_from_eps(x_tau_i, eps_hat, sub.tau[i], sched);
    return ddim_update(x0_hat, eps_hat, i, sub, sched, rng);
}

StateVector ddim_step_x0_pcdm(const StateVector& x_tau_i, int i, const SubSequence& sub,
                              const StateVector& s0_hat, const Condition& condition,
                              const NoiseSchedule& sched, GaussianRng& rng) {
    check_ddim_index(i, sub, sched);
    require_same_dim(x_tau_i, s0_hat, "ddim_step_x0_pcdm");
    require(condition.y.size() == s0_hat.size(),
            "ddim_step_x0_pcdm: condition dimension mismatch");
    const StateVector x0_hat = s0_hat + condition.y;
    const StateVector eps_hat = eps_from_x0(x_tau_i, x0_hat, sub.tau[i], sched);
    return ddim_update(x0_hat, eps_hat, i, sub, sched, rng);
}

void validate_run(const SamplerRun& run) {
    require(run.schedule != nullptr, "sampler run: schedule is required");
    if (is_ddim(run.sampler_kind)) {
        require(run.subsequence.has_value(), "sampler run: ddim kinds require a subsequence");
        require(run.subsequence->tau.back() == run.schedule->T,
                "sampler run: subsequence endpoint does not match schedule");
    } else {
        require(!run.subsequence.has_value(), "sampler run: ddpm kinds forbid a subsequence");
    }
    require(run.denoiser.parameterization == parameterization_for(run.sampler_kind),
            "sampler run: denoiser parameterization does not match sampler kind");
}

namespace {

ChainResult run_one(const SamplerRun& run, std::uint64_t seed) {
    const NoiseSchedule& sched = *run.schedule;
    const DenoiserModel& model = run.denoiser;
    const Eigen::Index dim = law_dim(model.data_law);

    const auto t0 = std::chrono::steady_clock::now();
    GaussianRng rng(seed);
    StateVector x = rng.normal_vector(dim);

    ChainResult res;
    if (run.record_trajectory)
        res.trajectory.reserve(is_ddim(run.sampler_kind)
                                   ? static_cast<std::size_t>(run.subsequence->S)
                                   : static_cast<std::size_t>(sched.T));

    if (is_ddim(run.sampler_kind)) {
        const SubSequence& sub = *run.subsequence;
        for (int i = sub.S; i >= 1; --i) {
            const int t = sub.tau[i];
            const StateVector pred = predict(model, x, t, sched);
            ++res.denoiser_calls;
            if (run.sampler_kind == SamplerKind::ddim_eps)
                x = ddim_step_eps(x, i, sub, pred, sched, rng);
            else
                x = ddim_step_x0_pcdm(x, i, sub, pred, *model.condition, sched, rng);
            if (run.record_trajectory) res.trajectory.emplace_back(sub.tau[i - 1], x);
        }
    } else {
        for (int t = sched.T; t >= 1; --t) {
            const StateVector pred = predict(model, x, t, sched);
            ++res.denoiser_calls;
            if (run.sampler_kind == SamplerKind::ddpm_x0)
                x = ddpm_step_x0(x, t, pred + model.condition->y, sched, rng);
            else
                x = ddpm_step_eps(x, t, pred, sched, rng);
            if (run.record_trajectory) res.trajectory.emplace_back(t - 1, x);
        }
    }

    res.x0_hat_final = std::move(x);
    res.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return res;
}

}  // namespace

ChainResult run_chain(const SamplerRun& run) {
    validate_run(run);
    return run_one(run, run.seed);
}

BatchResult run_chains(const SamplerRun& base, int n_chains, int workers) {
    validate_run(base);
    require(n_chains >= 1, "run_chains: n_chains must be >= 1");

    const Eigen::Index dim = law_dim(base.denoiser.data_law);
    BatchResult out;
    out.samples.resize(n_chains, dim);
    if (base.record_trajectory) out.trajectories.resize(static_cast<std::size_t>(n_chains));
    out.denoiser_calls_per_chain =
        is_ddim(base.sampler_kind) ? base.subsequence->S : base.schedule->T;

    int n_workers = workers > 0 ? workers : static_cast<int>(std::thread::hardware_concurrency());
    if (n_workers < 1) n_workers = 1;
    if (n_workers > n_chains) n_workers = n_chains;

    const auto t0 = std::chrono::steady_clock::now();
    std::atomic<int> next{0};
    std::atomic<long long> calls{0};
    std::exception_ptr first_error;
    std::mutex error_mutex;

    auto worker = [&] {
        try {
            for (;;) {
                const int i = next.fetch_add(1, std::memory_order_relaxed);
                if (i >= n_chains) return;
                ChainResult r = run_one(base, derive_stream(base.seed, static_cast<std::uint64_t>(i)));
                calls.fetch_add(r.denoiser_calls, std::memory_order_relaxed);
                out.samples.row(i) = r.x0_hat_final.transpose();
                if (base.record_trajectory)
                    out.trajectories[static_cast<std::size_t>(i)] = std::move(r.trajectory);
            }
        } catch (...) {
            std::lock_guard<std::mutex> lock(error_mutex);
            if (!first_error) first_error = std::current_exception();
            next.store(n_chains, std::memory_order_relaxed);  // stop other workers
        }
    };

    if (n_workers == 1) {
        worker();
    } else {
        std::vector<std::thread> pool;
        pool.reserve(static_cast<std::size_t>(n_workers));
        for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
        for (auto& th : pool) th.join();
    }
    if (first_error) std::rethrow_exception(first_error);

    out.total_denoiser_calls = calls.load();
    out.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return out;
}

}  // namespace diffkit
