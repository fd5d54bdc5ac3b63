#include "diffkit/selfcheck.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "diffkit/forward.hpp"
#include "diffkit/metrics.hpp"
#include "diffkit/presets.hpp"
#include "diffkit/samplers.hpp"

namespace diffkit {

namespace {

std::string num(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.6g", v);
    return buf;
}

CheckResult made(std::string name, bool pass, std::string detail) {
    return CheckResult{std::move(name), pass, std::move(detail)};
}

double rel_gap(const StateVector& a, const StateVector& b) {
    return (a - b).norm() / std::max(1.0, a.norm());
}

GaussianLaw wide_gaussian() {
    GaussianLaw g;
    g.mean = (StateVector(2) << 0.4, -0.3).finished();
    g.std = 0.8;
    return g;
}

// Exact moment transport of the eta=0 DDIM chain for a Gaussian target: every
// step is linear in x, so mean and variance obey a closed recursion.
void ddim_gaussian_recursion(const NoiseSchedule& s, const SubSequence& sub,
                             const GaussianLaw& law, StateVector& mean_out,
                             double& std_out) {
    StateVector m = StateVector::Zero(law.mean.size());
    double v = 1.0;
    const double s2 = law.std * law.std;
    for (int i = sub.S; i >= 1; --i) {
        const double a = s.alpha_bar[sub.tau[i]];
        const double ap = s.alpha_bar[sub.tau[static_cast<std::size_t>(i) - 1]];
        const double denom = a * s2 + 1.0 - a;
        const double c = std::sqrt(a) * s2 / denom;           // x0_hat = c x + d mu
        const double e1 = (1.0 - std::sqrt(a) * c) / std::sqrt(1.0 - a);
        const double e0 = -std::sqrt(a) * (1.0 - a) / denom / std::sqrt(1.0 - a);
        const double rad = std::max(1.0 - ap, 0.0);
        const double A = std::sqrt(ap) * c + std::sqrt(rad) * e1;
        const double B = std::sqrt(ap) * (1.0 - a) / denom + std::sqrt(rad) * e0;
        m = A * m + B * law.mean;
        v = A * A * v;
    }
    mean_out = m;
    std_out = std::sqrt(v);
}

}  // namespace

CheckResult check_schedule_product_identity(const NoiseSchedule& s) {
    if (s.alpha_bar[0] != 1.0)
        return made("schedule.product_identity", false, "alpha_bar[0] != 1");
    double prod = 1.0, worst = 0.0;
    for (int t = 1; t <= s.T; ++t) {
        prod *= 1.0 - s.beta[t];
        worst = std::max(worst, std::abs(prod / s.alpha_bar[t] - 1.0));
    }
    return made("schedule.product_identity", worst <= 1e-10,
                "max rel gap " + num(worst) + " (tol 1e-10)");
}

CheckResult check_schedule_range_monotone(const NoiseSchedule& s) {
    for (int t = 1; t <= s.T; ++t) {
        if (!(s.alpha_bar[t] > 0.0 && s.alpha_bar[t] < s.alpha_bar[t - 1]))
            return made("schedule.range_monotone", false,
                        "alpha_bar not strictly decreasing in (0,1] at t=" + std::to_string(t));
        if (!(s.beta[t] > 0.0 && s.beta[t] <= s.beta_max))
            return made("schedule.range_monotone", false,
                        "beta out of (0, beta_max] at t=" + std::to_string(t));
        if (!(s.beta_tilde[t] >= 0.0 && s.beta_tilde[t] <= s.beta[t] * (1.0 + 1e-12)))
            return made("schedule.range_monotone", false,
                        "beta_tilde out of [0, beta] at t=" + std::to_string(t));
    }
    return made("schedule.range_monotone", true,
                "alpha_bar[T] = " + num(s.alpha_bar[s.T]));
}

CheckResult check_beta_tilde_terminal_zero(const NoiseSchedule& s) {
    return made("schedule.beta_tilde_terminal_zero", s.beta_tilde[1] == 0.0,
                "beta_tilde[1] = " + num(s.beta_tilde[1]));
}

CheckResult check_subsequence_contract(const NoiseSchedule& s) {
    const std::string name = "subsequence.contract";
    if (s.T < 2) return made(name, true, "T < 2, nothing to check");
    std::vector<int> lengths = {2, 5, 10, s.T - 1, s.T};
    for (const Strategy strat : {Strategy::uniform, Strategy::quadratic}) {
        for (int S : lengths) {
            if (S < 2 || S > s.T) continue;
            const SubSequence sub = build_subsequence(s, S, strat, 1.0);
            if (sub.tau[0] != 0 || sub.tau[1] != 1 || sub.tau[S] != s.T)
                return made(name, false, std::string(to_string(strat)) + " S=" +
                                              std::to_string(S) + ": endpoints wrong");
            for (int i = 1; i <= S; ++i) {
                if (sub.tau[i] <= sub.tau[i - 1])
                    return made(name, false, std::string(to_string(strat)) + " S=" +
                                                  std::to_string(S) + ": not strictly increasing");
                const double cap = 1.0 - s.alpha_bar[sub.tau[static_cast<std::size_t>(i) - 1]];
                if (sub.sigma[i] * sub.sigma[i] > cap * (1.0 + 1e-12))
                    return made(name, false, std::string(to_string(strat)) + " S=" +
                                                  std::to_string(S) + ": sigma exceeds cap");
            }
        }
    }
    return made(name, true, "endpoints, monotonicity, sigma cap hold for both strategies");
}

CheckResult check_sigma_eta0_zero(const NoiseSchedule& s) {
    const int S = std::min(10, s.T);
    const std::string name = "subsequence.sigma_eta0_zero";
    if (S < 2) return made(name, true, "T < 2, nothing to check");
    const SubSequence sub = build_subsequence(s, S, Strategy::uniform, 0.0);
    for (int i = 1; i <= S; ++i)
        if (sub.sigma[i] != 0.0) return made(name, false, "sigma != 0 at i=" + std::to_string(i));
    return made(name, true, "all sigma exactly 0 at eta=0");
}

CheckResult check_sigma_eta1_beta_tilde(const NoiseSchedule& s) {
    const std::string name = "subsequence.sigma_eta1_beta_tilde";
    double worst = 0.0;
    for (int t = 1; t <= s.T; ++t) {
        const double sig = sigma_tau(s, t, t - 1, 1.0);
        const double ref = std::sqrt(s.beta_tilde[t]);
        if (t == 1) {
            if (sig != 0.0 || ref != 0.0)
                return made(name, false, "t=1 should be exactly deterministic");
            continue;
        }
        worst = std::max(worst, std::abs(sig / ref - 1.0));
    }
    return made(name, worst <= 1e-12, "max rel gap " + num(worst) + " (tol 1e-12)");
}

CheckResult check_forward_roundtrip(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "forward.roundtrip";
    GaussianRng rng(seed);
    const double mach = std::numeric_limits<double>::epsilon();
    double worst_x0 = 0.0, worst_eps = 0.0;
    for (int trial = 0; trial < 400; ++trial) {
        const int t = 1 + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(s.T));
        const double scale = (trial % 2 == 0) ? 0.5 : 3.0;
        const StateVector x0 = scale * rng.normal_vector(2);
        const StateVector eps = rng.normal_vector(2);
        const StateVector x_t = add_noise(x0, eps, t, s);

        const StateVector x0r = x0_from_eps(x_t, eps, t, s);
        const double err0 = (x0r - x0).norm() / std::max(1.0, x0.norm());
        const double bound0 = 64.0 * mach *
                              std::max(1.0, x_t.norm() / std::max(x0.norm(), 1e-300)) /
                              std::sqrt(s.alpha_bar[t]);
        if (err0 > std::max(bound0, 64.0 * mach))
            return made(name, false, "x0 round trip err " + num(err0) + " > bound " +
                                         num(bound0) + " at t=" + std::to_string(t));
        worst_x0 = std::max(worst_x0, err0);

        const StateVector epsr = eps_from_x0(x_t, x0, t, s);
        const double err1 = (epsr - eps).norm() / std::max(1.0, eps.norm());
        if (err1 > 1e-12)
            return made(name, false,
                        "eps round trip err " + num(err1) + " at t=" + std::to_string(t));
        worst_eps = std::max(worst_eps, err1);
    }
    return made(name, true,
                "max x0 err " + num(worst_x0) + ", max eps err " + num(worst_eps));
}

CheckResult check_forward_marginal_moments(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "forward.marginal_moments";
    GaussianRng rng(seed);
    const int t = std::min(500, s.T);
    const StateVector x0 = (StateVector(2) << 1.2, -0.7).finished();
    const int m = 20000;
    const double abar = s.alpha_bar[t];
    StateVector sum = StateVector::Zero(2), sumsq = StateVector::Zero(2);
    for (int i = 0; i < m; ++i) {
        const NoisedState ns = diffuse_to(x0, t, s, rng);
        const StateVector resid = ns.x_t - std::sqrt(abar) * x0 - std::sqrt(1.0 - abar) * ns.eps;
        if (resid.norm() > 1e-14 * (1.0 + ns.x_t.norm()))
            return made(name, false, "returned eps inconsistent with x_t");
        sum += ns.x_t;
        sumsq += ns.x_t.cwiseProduct(ns.x_t);
    }
    const StateVector mean = sum / m;
    const StateVector target = std::sqrt(abar) * x0;
    const double se_mean = std::sqrt((1.0 - abar) / m);
    for (int j = 0; j < 2; ++j) {
        if (std::abs(mean[j] - target[j]) > 4.0 * se_mean)
            return made(name, false, "mean off by " + num(std::abs(mean[j] - target[j])) +
                                         " (4SE " + num(4.0 * se_mean) + ")");
        const double var = sumsq[j] / m - mean[j] * mean[j];
        const double se_var = (1.0 - abar) * std::sqrt(2.0 / m);
        if (std::abs(var - (1.0 - abar)) > 4.0 * se_var)
            return made(name, false, "variance off by " + num(std::abs(var - (1.0 - abar))) +
                                         " (4SE " + num(4.0 * se_var) + ")");
    }
    return made(name, true, "mean and variance at t=" + std::to_string(t) + " within 4 SE");
}

CheckResult check_responsibilities_normalized(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "denoise.responsibilities_normalized";
    const GaussianMixtureLaw law = reference_mixture();
    GaussianRng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
        const int t = 1 + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(s.T));
        const StateVector x0 = law_draw(law, rng);
        const NoisedState ns = diffuse_to(x0, t, s, rng);
        const StateVector r = responsibilities(law, ns.x_t, t, s);
        if (r.minCoeff() < 0.0) return made(name, false, "negative responsibility");
        worst = std::max(worst, std::abs(r.sum() - 1.0));
    }
    // Far-field point: only log-sum-exp keeps this from underflowing.
    const StateVector far = (StateVector(2) << 500.0, -300.0).finished();
    const StateVector r = responsibilities(law, far, std::min(3, s.T), s);
    worst = std::max(worst, std::abs(r.sum() - 1.0));
    return made(name, worst <= 1e-12, "max |sum - 1| = " + num(worst) + " (tol 1e-12)");
}

namespace {

// Self-normalized importance sampling of E[x0 | x_t] with the data law as
// proposal and the forward kernel as weight; delta-method standard errors.
void snis_posterior(const DataLaw& law, const StateVector& x_t, int t,
                    const NoiseSchedule& s, GaussianRng& rng, int m, StateVector& mean,
                    StateVector& se) {
    const double abar = s.alpha_bar[t];
    const double sqab = std::sqrt(abar);
    const double two_var = 2.0 * (1.0 - abar);
    const Eigen::Index d = x_t.size();
    Eigen::MatrixXd draws(m, d);
    Eigen::VectorXd logw(m);
    for (int i = 0; i < m; ++i) {
        const StateVector x0 = law_draw(law, rng);
        draws.row(i) = x0.transpose();
        logw[i] = -(x_t - sqab * x0).squaredNorm() / two_var;
    }
    const double lmax = logw.maxCoeff();
    Eigen::VectorXd w = (logw.array() - lmax).exp();
    w /= w.sum();
    mean = (draws.transpose() * w);
    se.resize(d);
    for (Eigen::Index j = 0; j < d; ++j) {
        const Eigen::ArrayXd dev = draws.col(j).array() - mean[j];
        se[j] = std::sqrt((w.array().square() * dev.square()).sum());
    }
}

}  // namespace

CheckResult check_posterior_mean_vs_mc(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "denoise.posterior_mean_vs_mc";
    GaussianRng rng(seed);
    const std::vector<DataLaw> laws = {wide_gaussian(), reference_mixture()};
    const int m = 30000;
    for (const DataLaw& law : laws) {
        for (int t : {std::min(250, s.T), std::min(700, s.T)}) {
            for (int rep = 0; rep < 2; ++rep) {
                const StateVector x0 = law_draw(law, rng);
                const NoisedState ns = diffuse_to(x0, t, s, rng);
                const StateVector closed = posterior_mean_x0(law, ns.x_t, t, s);
                StateVector mc, se;
                snis_posterior(law, ns.x_t, t, s, rng, m, mc, se);
                for (Eigen::Index j = 0; j < closed.size(); ++j) {
                    if (std::abs(closed[j] - mc[j]) > 4.0 * se[j] + 1e-10)
                        return made(name, false,
                                    "gap " + num(std::abs(closed[j] - mc[j])) + " > 4SE " +
                                        num(4.0 * se[j]) + " at t=" + std::to_string(t));
                }
            }
        }
    }
    return made(name, true, "closed form within 4 SE of importance-sampling MC");
}

CheckResult check_ddpm_mean_equivalence(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "samplers.ddpm_mean_equivalence";
    GaussianRng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int t = 1 + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(s.T));
        const StateVector x = rng.normal_vector(2);
        const StateVector x0_hat = rng.normal_vector(2);
        const StateVector eps_hat = eps_from_x0(x, x0_hat, t, s);
        const StateVector m1 = ddpm_mean_x0(x, t, x0_hat, s);
        const StateVector m2 = ddpm_mean_eps(x, t, eps_hat, s);
        worst = std::max(worst, rel_gap(m1, m2));
    }
    return made(name, worst <= 1e-10, "max rel gap " + num(worst) + " (tol 1e-10)");
}

CheckResult check_ddim_param_equivalence(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "samplers.ddim_param_equivalence";
    if (s.T < 2) return made(name, true, "T < 2, nothing to check");
    const int S = std::min(10, s.T);
    const SubSequence sub = build_subsequence(s, S, Strategy::uniform, 0.4);
    GaussianRng rng(seed);
    double worst = 0.0;
    for (int trial = 0; trial < 200; ++trial) {
        const int i = 1 + static_cast<int>(rng.raw() % static_cast<std::uint64_t>(S));
        const StateVector x = rng.normal_vector(2);
        const StateVector s0 = rng.normal_vector(2);
        const Condition cond{rng.normal_vector(2), std::string()};
        const StateVector eps = eps_from_x0(x, s0 + cond.y, sub.tau[i], s);
        const std::uint64_t step_seed = rng.raw();
        GaussianRng r1(step_seed), r2(step_seed);
        const StateVector out_eps = ddim_step_eps(x, i, sub, eps, s, r1);
        const StateVector out_x0 = ddim_step_x0_pcdm(x, i, sub, s0, cond, s, r2);
        worst = std::max(worst, rel_gap(out_eps, out_x0));
    }
    return made(name, worst <= 1e-12, "max rel gap " + num(worst) + " (tol 1e-12)");
}

CheckResult check_ddim_eta1_degeneration(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "samplers.ddim_eta1_degeneration";
    if (s.T < 2) return made(name, true, "T < 2, nothing to check");
    const SubSequence full = build_subsequence(s, s.T, Strategy::uniform, 1.0);
    GaussianRng rng(seed);
    double worst_mean = 0.0, worst_sigma = 0.0;
    for (int t = 1; t <= s.T; t = (t < 20 || t > s.T - 3) ? t + 1 : t + 17) {
        const double sig = full.sigma[t];
        const double ref = std::sqrt(s.beta_tilde[t]);
        if (t == 1) {
            if (sig != 0.0) return made(name, false, "sigma(1) != 0 at t=1");
        } else {
            worst_sigma = std::max(worst_sigma, std::abs(sig / ref - 1.0));
        }
        for (int trial = 0; trial < 4; ++trial) {
            const StateVector x = rng.normal_vector(2);
            const StateVector x0_hat = rng.normal_vector(2);
            const StateVector eps_hat = eps_from_x0(x, x0_hat, t, s);
            const double abar_prev = s.alpha_bar[t - 1];
            double rad = 1.0 - abar_prev - sig * sig;
            if (rad < 0.0) rad = 0.0;
            const StateVector ddim_mean =
                std::sqrt(abar_prev) * x0_hat + std::sqrt(rad) * eps_hat;
            worst_mean = std::max(worst_mean, rel_gap(ddpm_mean_x0(x, t, x0_hat, s), ddim_mean));
        }
    }
    const bool ok = worst_mean <= 1e-10 && worst_sigma <= 1e-12;
    return made(name, ok, "max mean gap " + num(worst_mean) + " (tol 1e-10), max sigma gap " +
                              num(worst_sigma) + " (tol 1e-12)");
}

CheckResult check_ddim_final_step_collapse(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "samplers.ddim_final_step_collapse";
    if (s.T < 2) return made(name, true, "T < 2, nothing to check");
    const SubSequence sub = build_subsequence(s, std::min(10, s.T), Strategy::uniform, 0.7);
    GaussianRng rng(seed);
    for (int trial = 0; trial < 50; ++trial) {
        const StateVector x = rng.normal_vector(2);
        const StateVector eps = rng.normal_vector(2);
        const StateVector x0_hat = x0_from_eps(x, eps, sub.tau[1], s);
        GaussianRng r1(rng.raw());
        if (ddim_step_eps(x, 1, sub, eps, s, r1) != x0_hat)
            return made(name, false, "i=1 eps step did not collapse to x0_hat exactly");
        const StateVector s0 = rng.normal_vector(2);
        const Condition cond{rng.normal_vector(2), std::string()};
        GaussianRng r2(rng.raw());
        const StateVector expect = s0 + cond.y;
        if (ddim_step_x0_pcdm(x, 1, sub, s0, cond, s, r2) != expect)
            return made(name, false, "i=1 pcdm step did not collapse to s0_hat + y exactly");
    }
    return made(name, true, "final step returns the x0 prediction bit-exactly");
}

CheckResult check_chain_determinism(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "samplers.chain_determinism";
    if (s.T < 2) return made(name, true, "T < 2, nothing to check");
    SamplerRun run;
    run.sampler_kind = SamplerKind::ddim_x0_pcdm;
    run.schedule = &s;
    run.subsequence = build_subsequence(s, std::min(10, s.T), Strategy::uniform, 0.0);
    run.denoiser = make_denoiser(Parameterization::x0_prediction, reference_mixture(),
                                 Condition{StateVector::Zero(2), std::string()});
    run.seed = seed;
    run.record_trajectory = true;
    const ChainResult a = run_chain(run);
    const ChainResult b = run_chain(run);
    if (a.x0_hat_final != b.x0_hat_final)
        return made(name, false, "same seed produced different final states");
    for (std::size_t k = 0; k < a.trajectory.size(); ++k)
        if (a.trajectory[k].first != b.trajectory[k].first ||
            a.trajectory[k].second != b.trajectory[k].second)
            return made(name, false, "same seed produced different trajectories");

    run.record_trajectory = false;
    const BatchResult w1 = run_chains(run, 8, 1);
    const BatchResult w3 = run_chains(run, 8, 3);
    if (w1.samples != w3.samples)
        return made(name, false, "worker count changed the sample matrix");
    return made(name, true, "repeat runs and worker counts are bit-identical");
}

CheckResult check_call_counts(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "samplers.call_counts";
    const NoiseSchedule small = build_cosine_schedule(40, s.s_offset, s.beta_max);
    SamplerRun run;
    run.schedule = &small;
    run.seed = seed;
    run.denoiser = make_denoiser(Parameterization::noise_prediction, wide_gaussian());

    run.sampler_kind = SamplerKind::ddpm_eps;
    if (run_chain(run).denoiser_calls != 40)
        return made(name, false, "ddpm chain call count != T");

    run.sampler_kind = SamplerKind::ddim_eps;
    run.subsequence = build_subsequence(small, 7, Strategy::uniform, 0.0);
    if (run_chain(run).denoiser_calls != 7)
        return made(name, false, "ddim chain call count != S");
    const BatchResult batch = run_chains(run, 5, 2);
    if (batch.denoiser_calls_per_chain != 7 || batch.total_denoiser_calls != 35)
        return made(name, false, "batch call accounting wrong");
    return made(name, true, "T for ddpm, S for ddim, exactly");
}

CheckResult check_ddim_transport_matches_recursion(const NoiseSchedule& s,
                                                   std::uint64_t seed) {
    const std::string name = "samplers.ddim_transport_matches_recursion";
    if (s.T < 2) return made(name, true, "T < 2, nothing to check");
    const GaussianLaw law = wide_gaussian();
    SamplerRun run;
    run.sampler_kind = SamplerKind::ddim_eps;
    run.schedule = &s;
    run.subsequence = build_subsequence(s, std::min(10, s.T), Strategy::uniform, 0.0);
    run.denoiser = make_denoiser(Parameterization::noise_prediction, law);
    run.seed = seed;
    const int n = 1500;
    const BatchResult batch = run_chains(run, n, 0);

    StateVector pred_mean;
    double pred_std = 0.0;
    ddim_gaussian_recursion(s, *run.subsequence, law, pred_mean, pred_std);

    for (Eigen::Index j = 0; j < 2; ++j) {
        const double mean_j = batch.samples.col(j).mean();
        if (std::abs(mean_j - pred_mean[j]) > 4.0 * pred_std / std::sqrt(double(n)))
            return made(name, false, "mean " + num(mean_j) + " vs predicted " +
                                         num(pred_mean[j]) + " beyond 4 SE");
        const Eigen::ArrayXd dev = batch.samples.col(j).array() - mean_j;
        const double sd = std::sqrt(dev.square().sum() / (n - 1));
        if (std::abs(sd / pred_std - 1.0) > 4.0 / std::sqrt(2.0 * n))
            return made(name, false, "std " + num(sd) + " vs predicted " + num(pred_std) +
                                         " beyond 4 SE");
    }
    return made(name, true, "S=10 chain moments match the exact linear recursion, std " +
                                num(pred_std) + " (target std " + num(law.std) + ")");
}

CheckResult check_ddpm_moment_recovery(const NoiseSchedule& s, std::uint64_t seed) {
    const std::string name = "samplers.ddpm_moment_recovery";
    const GaussianLaw law = wide_gaussian();
    SamplerRun run;
    run.sampler_kind = SamplerKind::ddpm_eps;
    run.schedule = &s;
    run.denoiser = make_denoiser(Parameterization::noise_prediction, law);
    run.seed = seed;
    const int n = 1200;
    const BatchResult batch = run_chains(run, n, 0);
    const MomentReport rep = moment_report(batch.samples, DataLaw(law));
    const double mean_tol = 4.0 * law.std * std::sqrt(2.0 / n);
    const double cov_tol = 4.0 * law.std * law.std * std::sqrt(2.0 / n) + 0.01 * law.std * law.std;
    const bool ok = rep.mean_error <= mean_tol && rep.cov_error <= cov_tol;
    return made(name, ok, "mean err " + num(rep.mean_error) + " (tol " + num(mean_tol) +
                              "), cov err " + num(rep.cov_error) + " (tol " + num(cov_tol) + ")");
}

CheckResult check_energy_distance_basics(std::uint64_t seed) {
    const std::string name = "metrics.energy_distance_basics";
    GaussianRng rng(seed);
    Eigen::MatrixXd a(600, 2), b(600, 2);
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
        a.row(i) = rng.normal_vector(2).transpose();
        b.row(i) = (rng.normal_vector(2) + (StateVector(2) << 0.3, -0.1).finished()).transpose();
    }
    if (energy_distance(a, a) != 0.0) return made(name, false, "identical sets gave nonzero");
    if (energy_distance(a, b) != energy_distance(b, a))
        return made(name, false, "not exactly symmetric");
    if (!(energy_distance(a, b) > 0.0))
        return made(name, false, "different laws gave non-positive value");

    const int n = 3000;
    Eigen::MatrixXd u(n, 1), v(n, 1);
    for (int i = 0; i < n; ++i) {
        u(i, 0) = rng.normal();
        v(i, 0) = 10.0 + rng.normal();
    }
    const double ed = energy_distance(u, v);
    const double closed = 20.0 - 4.0 / std::sqrt(std::acos(-1.0));  // 2E|a-b| - 2E|a-a'|
    if (std::abs(ed - closed) > 0.5)
        return made(name, false,
                    "1-D separation " + num(ed) + " vs closed form " + num(closed));
    return made(name, true, "identity, symmetry, and 1-D closed form (" + num(ed) + " vs " +
                                num(closed) + ") hold");
}

std::vector<CheckResult> run_all_checks(std::uint64_t seed) {
    const NoiseSchedule s = build_cosine_schedule(1000, 0.008, 0.999);
    std::uint64_t k = 0;
    auto next = [&] { return derive_stream(seed, k++); };
    std::vector<CheckResult> out;
    auto add = [&](const char* name, auto&& fn) {
        try {
            out.push_back(fn());
        } catch (const std::exception& e) {
            out.push_back({name, false, std::string("exception: ") + e.what()});
        }
    };
    add("schedule.product_identity", [&] { return check_schedule_product_identity(s); });
    add("schedule.range_monotone", [&] { return check_schedule_range_monotone(s); });
    add("schedule.beta_tilde_terminal_zero", [&] { return check_beta_tilde_terminal_zero(s); });
    add("subsequence.contract", [&] { return check_subsequence_contract(s); });
    add("subsequence.sigma_eta0_zero", [&] { return check_sigma_eta0_zero(s); });
    add("subsequence.sigma_eta1_beta_tilde", [&] { return check_sigma_eta1_beta_tilde(s); });
    add("forward.roundtrip", [&] { return check_forward_roundtrip(s, next()); });
    add("forward.marginal_moments", [&] { return check_forward_marginal_moments(s, next()); });
    add("denoise.responsibilities_normalized",
        [&] { return check_responsibilities_normalized(s, next()); });
    add("denoise.posterior_mean_vs_mc", [&] { return check_posterior_mean_vs_mc(s, next()); });
    add("samplers.ddpm_mean_equivalence", [&] { return check_ddpm_mean_equivalence(s, next()); });
    add("samplers.ddim_param_equivalence",
        [&] { return check_ddim_param_equivalence(s, next()); });
    add("samplers.ddim_eta1_degeneration",
        [&] { return check_ddim_eta1_degeneration(s, next()); });
    add("samplers.ddim_final_step_collapse",
        [&] { return check_ddim_final_step_collapse(s, next()); });
    add("samplers.chain_determinism", [&] { return check_chain_determinism(s, next()); });
    add("samplers.call_counts", [&] { return check_call_counts(s, next()); });
    add("samplers.ddim_transport_matches_recursion",
        [&] { return check_ddim_transport_matches_recursion(s, next()); });
    add("samplers.ddpm_moment_recovery", [&] { return check_ddpm_moment_recovery(s, next()); });
    add("metrics.energy_distance_basics", [&] { return check_energy_distance_basics(next()); });
    return out;
}

}  // namespace diffkit
