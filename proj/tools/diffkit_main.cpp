#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "diffkit/config.hpp"
#include "diffkit/metrics.hpp"
#include "diffkit/selfcheck.hpp"

namespace {

using namespace diffkit;

struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

std::string fmt17(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

// All writes go through a temp file + rename so no partial file survives a
// failure; files already completed in the same command are removed too.
class OutputSet {
  public:
    void write(const std::string& path, const std::string& content) {
        const std::string tmp = path + ".tmp";
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw IoError("cannot open '" + tmp + "' for writing");
            out << content;
            out.flush();
            if (!out) {
                std::remove(tmp.c_str());
                throw IoError("write failed for '" + tmp + "'");
            }
        }
        if (std::rename(tmp.c_str(), path.c_str()) != 0) {
            std::remove(tmp.c_str());
            throw IoError("cannot rename '" + tmp + "' to '" + path + "'");
        }
        written_.push_back(path);
    }
    void discard_all() {
        for (const std::string& p : written_) std::remove(p.c_str());
        written_.clear();
    }

  private:
    std::vector<std::string> written_;
};

struct FlagValues {
    std::string config;
    std::string sampler;
    int steps = 0;
    std::string steps_list;
    double eta = 0.0;
    std::string strategy;
    int T = 0;
    long long n = 0;
    int dim = 0;
    std::uint64_t seed = 0;
    std::string out;
    bool trajectory = false;
    int workers = 0;
};

struct FlagPresence {
    CLI::Option* sampler = nullptr;
    CLI::Option* steps = nullptr;
    CLI::Option* eta = nullptr;
    CLI::Option* strategy = nullptr;
    CLI::Option* T = nullptr;
    CLI::Option* n = nullptr;
    CLI::Option* dim = nullptr;
    CLI::Option* seed = nullptr;
    CLI::Option* out = nullptr;
    CLI::Option* trajectory = nullptr;
    CLI::Option* workers = nullptr;
};

// --out PATH is a base path; a trailing .csv is accepted as-is.
std::string out_base(const std::string& path) {
    const std::string suffix = ".csv";
    if (path.size() > suffix.size() &&
        path.compare(path.size() - suffix.size(), suffix.size(), suffix) == 0)
        return path.substr(0, path.size() - suffix.size());
    return path;
}

RunConfig assemble_config(const FlagValues& v, const FlagPresence& p, bool steps_is_list) {
    RunConfig cfg;
    if (!v.config.empty()) cfg = load_config(v.config);
    if (p.sampler && p.sampler->count()) cfg.sampler.kind = sampler_kind_from_string(v.sampler);
    if (p.steps && p.steps->count()) {
        if (steps_is_list) {
            cfg.bench_steps.clear();
            std::stringstream ss(v.steps_list);
            std::string item;
            while (std::getline(ss, item, ',')) {
                try {
                    std::size_t used = 0;
                    const int s = std::stoi(item, &used);
                    if (used != item.size()) throw std::invalid_argument(item);
                    cfg.bench_steps.push_back(s);
                } catch (const std::exception&) {
                    throw std::invalid_argument("config: --steps: '" + item +
                                                "' is not an integer");
                }
            }
            if (cfg.bench_steps.empty())
                throw std::invalid_argument("config: --steps: empty list");
        } else {
            cfg.sampler.steps = v.steps;
        }
    }
    if (p.eta && p.eta->count()) cfg.sampler.eta = v.eta;
    if (p.strategy && p.strategy->count())
        cfg.sampler.strategy = strategy_from_string(v.strategy);
    if (p.T && p.T->count()) cfg.schedule.T = v.T;
    if (p.n && p.n->count()) cfg.n_chains = v.n;
    if (p.dim && p.dim->count()) cfg.dim = v.dim;
    if (p.seed && p.seed->count()) cfg.seed = v.seed;
    if (p.trajectory && p.trajectory->count()) cfg.trajectory = true;
    if (p.workers && p.workers->count()) cfg.workers = v.workers;
    if (p.out && p.out->count()) {
        const std::string base = out_base(v.out);
        cfg.outputs.samples_csv = base + ".csv";
        cfg.outputs.metrics_json = base + ".metrics.json";
    }
    return cfg;
}

Eigen::MatrixXd draw_set(const DataLaw& law, long long n, std::uint64_t stream_seed) {
    GaussianRng rng(stream_seed);
    Eigen::MatrixXd out(n, law_dim(law));
    for (long long i = 0; i < n; ++i) out.row(i) = law_draw(law, rng).transpose();
    return out;
}

MetricsReport compute_metrics(const Eigen::MatrixXd& samples, const DataLaw& law,
                              std::uint64_t master_seed, long long n_chains,
                              long long total_calls, double wall_time,
                              double* baseline_out = nullptr) {
    MetricsReport rep;
    rep.n_samples = samples.rows();
    const MomentReport mom = moment_report(samples, law);
    rep.mean_error = mom.mean_error;
    rep.cov_error = mom.cov_error;
    const auto nu = static_cast<std::uint64_t>(n_chains);
    rep.energy_distance =
        energy_distance(samples, draw_set(law, samples.rows(), derive_stream(master_seed, nu)));
    rep.baseline_energy_distance = energy_distance(
        draw_set(law, samples.rows(), derive_stream(master_seed, nu + 1)),
        draw_set(law, samples.rows(), derive_stream(master_seed, nu + 2)));
    rep.denoiser_calls = total_calls;
    rep.wall_time = wall_time;
    if (baseline_out) *baseline_out = rep.baseline_energy_distance;
    return rep;
}

std::string samples_csv(const BatchResult& batch, bool trajectory) {
    std::string out;
    const Eigen::Index dim = batch.samples.cols();
    out += "chain_index";
    if (trajectory) out += ",t";
    for (Eigen::Index j = 0; j < dim; ++j) out += ",x" + std::to_string(j);
    out += "\n";
    if (trajectory) {
        for (std::size_t i = 0; i < batch.trajectories.size(); ++i)
            for (const auto& [t, state] : batch.trajectories[i]) {
                out += std::to_string(i) + "," + std::to_string(t);
                for (Eigen::Index j = 0; j < dim; ++j) out += "," + fmt17(state[j]);
                out += "\n";
            }
    } else {
        for (Eigen::Index i = 0; i < batch.samples.rows(); ++i) {
            out += std::to_string(i);
            for (Eigen::Index j = 0; j < dim; ++j) out += "," + fmt17(batch.samples(i, j));
            out += "\n";
        }
    }
    return out;
}

std::string metrics_json(const MetricsReport& rep, const RunConfig& cfg,
                         long long calls_per_chain) {
    nlohmann::json j;
    j["n_samples"] = rep.n_samples;
    j["mean_error"] = rep.mean_error;
    j["cov_error"] = rep.cov_error;
    j["energy_distance"] = rep.energy_distance;
    j["baseline_energy_distance"] = rep.baseline_energy_distance;
    j["denoiser_calls"] = rep.denoiser_calls;
    j["wall_time"] = rep.wall_time;
    j["denoiser_calls_per_chain"] = calls_per_chain;
    j["sampler"] = to_string(cfg.sampler.kind);
    j["steps"] = is_ddim(cfg.sampler.kind) ? cfg.sampler.steps : cfg.schedule.T;
    j["eta"] = cfg.sampler.eta;
    j["strategy"] = to_string(cfg.sampler.strategy);
    j["T"] = cfg.schedule.T;
    j["dim"] = cfg.dim;
    j["seed"] = cfg.seed;
    return j.dump(2) + "\n";
}

int cmd_sample(const FlagValues& v, const FlagPresence& p) {
    RunConfig cfg = assemble_config(v, p, /*steps_is_list=*/false);
    validate_config(cfg);
    const RunParts parts = build_parts(cfg);

    SamplerRun run;
    run.sampler_kind = cfg.sampler.kind;
    run.schedule = &parts.schedule;
    run.subsequence = parts.subsequence;
    run.denoiser = parts.denoiser;
    run.seed = cfg.seed;
    run.record_trajectory = cfg.trajectory;
    const BatchResult batch = run_chains(run, static_cast<int>(cfg.n_chains), cfg.workers);

    const MetricsReport rep =
        compute_metrics(batch.samples, *cfg.data_law, cfg.seed, cfg.n_chains,
                        batch.total_denoiser_calls, batch.wall_time);

    OutputSet outputs;
    try {
        outputs.write(cfg.outputs.samples_csv, samples_csv(batch, cfg.trajectory));
        outputs.write(cfg.outputs.metrics_json,
                      metrics_json(rep, cfg, batch.denoiser_calls_per_chain));
    } catch (...) {
        outputs.discard_all();
        throw;
    }
    std::cout << "sample: wrote " << cfg.outputs.samples_csv << " and "
              << cfg.outputs.metrics_json << " (n=" << rep.n_samples
              << ", calls/chain=" << batch.denoiser_calls_per_chain
              << ", energy_distance=" << fmt17(rep.energy_distance) << ")\n";
    return 0;
}

int cmd_bench(const FlagValues& v, const FlagPresence& p) {
    RunConfig cfg = assemble_config(v, p, /*steps_is_list=*/true);
    validate_config(cfg);
    for (std::size_t i = 0; i < cfg.bench_steps.size(); ++i)
        if (cfg.bench_steps[i] > cfg.schedule.T)
            throw std::invalid_argument("config: bench_steps[" + std::to_string(i) +
                                        "]: must be <= schedule.T");

    const SamplerKind ddim_kind = is_ddim(cfg.sampler.kind)
                                      ? cfg.sampler.kind
                                      : (cfg.sampler.kind == SamplerKind::ddpm_x0
                                             ? SamplerKind::ddim_x0_pcdm
                                             : SamplerKind::ddim_eps),
                      ddpm_kind = parameterization_for(cfg.sampler.kind) ==
                                          Parameterization::x0_prediction
                                      ? SamplerKind::ddpm_x0
                                      : SamplerKind::ddpm_eps;

    const NoiseSchedule sched =
        build_cosine_schedule(cfg.schedule.T, cfg.schedule.s_offset, cfg.schedule.beta_max);
    std::optional<Condition> cond;
    if (cfg.condition_y) cond = Condition{*cfg.condition_y, std::string()};

    const auto nu = static_cast<std::uint64_t>(cfg.n_chains);
    const Eigen::MatrixXd reference =
        draw_set(*cfg.data_law, cfg.n_chains, derive_stream(cfg.seed, nu));
    const double baseline = energy_distance(
        draw_set(*cfg.data_law, cfg.n_chains, derive_stream(cfg.seed, nu + 1)),
        draw_set(*cfg.data_law, cfg.n_chains, derive_stream(cfg.seed, nu + 2)));

    struct Row {
        int length;
        long long calls;
        double wall, speedup, ed;
    };
    std::vector<Row> rows;
    auto run_row = [&](SamplerKind kind, int steps) {
        SamplerRun run;
        run.sampler_kind = kind;
        run.schedule = &sched;
        if (is_ddim(kind))
            run.subsequence =
                build_subsequence(sched, steps, cfg.sampler.strategy, cfg.sampler.eta);
        run.denoiser = make_denoiser(parameterization_for(kind), *cfg.data_law, cond);
        run.seed = cfg.seed;
        const BatchResult batch =
            run_chains(run, static_cast<int>(cfg.n_chains), cfg.workers);
        rows.push_back(Row{steps, batch.denoiser_calls_per_chain, batch.wall_time,
                           static_cast<double>(cfg.schedule.T) / steps,
                           energy_distance(batch.samples, reference)});
    };
    for (int S : cfg.bench_steps) run_row(ddim_kind, S);
    run_row(ddpm_kind, cfg.schedule.T);

    std::string csv = "length,denoiser_calls,wall_time,speedup_vs_T,energy_distance,"
                      "baseline_energy_distance\n";
    for (const Row& r : rows)
        csv += std::to_string(r.length) + "," + std::to_string(r.calls) + "," +
               fmt17(r.wall) + "," + fmt17(r.speedup) + "," + fmt17(r.ed) + "," +
               fmt17(baseline) + "\n";

    std::ostringstream md;
    md << "| length | denoiser_calls | wall_time | speedup_vs_T | energy_distance | "
          "baseline_energy_distance |\n";
    md << "|---|---|---|---|---|---|\n";
    char line[256];
    for (const Row& r : rows) {
        std::snprintf(line, sizeof line, "| %d | %lld | %.3f | %.1f | %.6g | %.6g |\n",
                      r.length, r.calls, r.wall, r.speedup, r.ed, baseline);
        md << line;
    }

    const std::string base = (p.out && p.out->count()) ? out_base(v.out) : "bench";
    OutputSet outputs;
    try {
        outputs.write(base + ".csv", csv);
        outputs.write(base + ".md", md.str());
    } catch (...) {
        outputs.discard_all();
        throw;
    }
    std::cout << md.str();
    std::cout << "bench: wrote " << base << ".csv and " << base << ".md\n";
    return 0;
}

int cmd_verify() {
    const std::vector<CheckResult> results = run_all_checks();
    std::string first_fail;
    for (const CheckResult& r : results) {
        std::cout << (r.pass ? "[PASS] " : "[FAIL] ") << r.name << ": " << r.detail << "\n";
        if (!r.pass && first_fail.empty()) first_fail = r.name;
    }
    if (!first_fail.empty()) {
        std::cout << "FIRST FAILURE: " << first_fail << "\n";
        return 1;
    }
    std::cout << "verify: all " << results.size() << " checks passed\n";
    return 0;
}

int cmd_schedule_dump(const FlagValues& v, const FlagPresence& p) {
    RunConfig cfg = assemble_config(v, p, /*steps_is_list=*/false);
    if (cfg.schedule.T < 1) throw std::invalid_argument("config: schedule.T: must be >= 1");
    const NoiseSchedule sched =
        build_cosine_schedule(cfg.schedule.T, cfg.schedule.s_offset, cfg.schedule.beta_max);

    std::string csv = "t,alpha_bar,beta,beta_tilde\n";
    csv += "0," + fmt17(sched.alpha_bar[0]) + ",,\n";  // beta undefined at t=0
    for (int t = 1; t <= sched.T; ++t)
        csv += std::to_string(t) + "," + fmt17(sched.alpha_bar[t]) + "," +
               fmt17(sched.beta[t]) + "," + fmt17(sched.beta_tilde[t]) + "\n";

    const std::string path =
        ((p.out && p.out->count()) ? out_base(v.out) : std::string("schedule")) + ".csv";
    OutputSet outputs;
    outputs.write(path, csv);
    std::cout << "schedule-dump: wrote " << path << " (T=" << sched.T << ")\n";
    return 0;
}

void add_common_flags(CLI::App* cmd, FlagValues& v, FlagPresence& p, bool steps_is_list) {
    p.sampler = cmd->add_option("--sampler", v.sampler,
                                "sampler kind: ddpm_eps, ddpm_x0, ddim_eps, ddim_x0_pcdm");
    if (steps_is_list)
        p.steps = cmd->add_option("--steps", v.steps_list,
                                  "comma-separated list of subsequence lengths");
    else
        p.steps = cmd->add_option("--steps", v.steps, "subsequence length S (ddim kinds)");
    p.eta = cmd->add_option("--eta", v.eta, "DDIM stochasticity (0 = deterministic)");
    p.strategy = cmd->add_option("--strategy", v.strategy, "tau spacing: uniform or quadratic");
    p.T = cmd->add_option("--T", v.T, "total diffusion steps");
    p.n = cmd->add_option("--n", v.n, "number of chains");
    p.dim = cmd->add_option("--dim", v.dim, "state dimension D");
    p.seed = cmd->add_option("--seed", v.seed, "master seed");
    p.out = cmd->add_option("--out", v.out, "output base path");
    p.trajectory = cmd->add_flag("--trajectory", v.trajectory, "record full trajectories");
    p.workers = cmd->add_option("--workers", v.workers, "worker threads (0 = cores)");
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"diffusion schedule/sampler toolkit"};
    app.require_subcommand(1);

    FlagValues vs, vb, vd;
    FlagPresence ps, pb, pd;

    CLI::App* sample = app.add_subcommand("sample", "run chains, write samples + metrics");
    sample->add_option("--config", vs.config, "JSON config file");
    add_common_flags(sample, vs, ps, false);

    CLI::App* bench = app.add_subcommand("bench", "sweep subsequence lengths, write table");
    bench->add_option("--config", vb.config, "JSON config file");
    add_common_flags(bench, vb, pb, true);

    CLI::App* verify = app.add_subcommand("verify", "run the consistency check suite");

    CLI::App* dump = app.add_subcommand("schedule-dump", "write the schedule as CSV");
    dump->add_option("--config", vd.config, "JSON config file");
    add_common_flags(dump, vd, pd, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return e.get_exit_code() == 0 ? 0 : 1;
    }

    try {
        if (sample->parsed()) return cmd_sample(vs, ps);
        if (bench->parsed()) return cmd_bench(vb, pb);
        if (verify->parsed()) return cmd_verify();
        if (dump->parsed()) return cmd_schedule_dump(vd, pd);
        return 1;
    } catch (const IoError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::system_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
