#include "diffkit/config.hpp"

#include <cerrno>
#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>
#include <system_error>

#include <json.hpp>

#include "diffkit/presets.hpp"

namespace diffkit {

namespace {

using nlohmann::json;

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw std::invalid_argument("config: " + path + ": " + what);
}

std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
}

void check_keys(const json& j, const std::string& path,
                std::initializer_list<const char*> allowed) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool known = false;
        for (const char* k : allowed)
            if (it.key() == k) { known = true; break; }
        if (!known) fail(join(path, it.key()), "unknown key");
    }
}

const json* find(const json& j, const char* key) {
    auto it = j.find(key);
    return it == j.end() ? nullptr : &*it;
}

double as_double(const json& j, const std::string& path) {
    if (!j.is_number()) fail(path, "expected a number");
    return j.get<double>();
}

long long as_int(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    return j.get<long long>();
}

std::uint64_t as_uint64(const json& j, const std::string& path) {
    if (!j.is_number_integer()) fail(path, "expected an integer");
    if (j.is_number_unsigned()) return j.get<std::uint64_t>();
    const long long v = j.get<long long>();
    if (v < 0) fail(path, "expected a non-negative integer");
    return static_cast<std::uint64_t>(v);
}

bool as_bool(const json& j, const std::string& path) {
    if (!j.is_boolean()) fail(path, "expected true or false");
    return j.get<bool>();
}

std::string as_string(const json& j, const std::string& path) {
    if (!j.is_string()) fail(path, "expected a string");
    return j.get<std::string>();
}

StateVector as_vector(const json& j, const std::string& path) {
    if (!j.is_array() || j.empty()) fail(path, "expected a non-empty array of numbers");
    StateVector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i)
        v[static_cast<Eigen::Index>(i)] = as_double(j[i], path + "[" + std::to_string(i) + "]");
    return v;
}

DataLaw parse_data_law(const json& j, const std::string& path) {
    if (!j.is_object()) fail(path, "expected an object");
    const json* kind = find(j, "kind");
    if (!kind) fail(join(path, "kind"), "missing");
    const std::string k = as_string(*kind, join(path, "kind"));
    if (k == "gaussian") {
        check_keys(j, path, {"kind", "mean", "std"});
        GaussianLaw law;
        const json* mean = find(j, "mean");
        if (!mean) fail(join(path, "mean"), "missing");
        law.mean = as_vector(*mean, join(path, "mean"));
        if (const json* s = find(j, "std")) law.std = as_double(*s, join(path, "std"));
        return law;
    }
    if (k == "gaussian_mixture") {
        check_keys(j, path, {"kind", "weights", "means", "stds"});
        const json* weights = find(j, "weights");
        const json* means = find(j, "means");
        const json* stds = find(j, "stds");
        if (!weights || !means || !stds)
            fail(path, "gaussian_mixture needs weights, means, and stds");
        if (!weights->is_array() || !means->is_array() || !stds->is_array() ||
            weights->size() != means->size() || weights->size() != stds->size() ||
            weights->empty())
            fail(path, "weights, means, and stds must be equal-length non-empty arrays");
        GaussianMixtureLaw law;
        law.components.resize(weights->size());
        for (std::size_t i = 0; i < weights->size(); ++i) {
            const std::string idx = "[" + std::to_string(i) + "]";
            law.components[i].weight = as_double((*weights)[i], join(path, "weights") + idx);
            law.components[i].mean = as_vector((*means)[i], join(path, "means") + idx);
            law.components[i].std = as_double((*stds)[i], join(path, "stds") + idx);
        }
        return law;
    }
    fail(join(path, "kind"), "expected 'gaussian' or 'gaussian_mixture'");
}

json data_law_to_json(const DataLaw& law) {
    json j;
    if (const auto* g = std::get_if<GaussianLaw>(&law)) {
        j["kind"] = "gaussian";
        j["mean"] = std::vector<double>(g->mean.begin(), g->mean.end());
        j["std"] = g->std;
    } else {
        const auto& m = std::get<GaussianMixtureLaw>(law);
        j["kind"] = "gaussian_mixture";
        json weights = json::array(), means = json::array(), stds = json::array();
        for (const auto& c : m.components) {
            weights.push_back(c.weight);
            means.push_back(std::vector<double>(c.mean.begin(), c.mean.end()));
            stds.push_back(c.std);
        }
        j["weights"] = weights;
        j["means"] = means;
        j["stds"] = stds;
    }
    return j;
}

}  // namespace

RunConfig config_from_json_string(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw std::invalid_argument(std::string("config: not valid JSON: ") + e.what());
    }
    if (!j.is_object()) fail("", "top level must be an object");
    check_keys(j, "", {"schedule", "data_law", "condition_y", "sampler", "n_chains", "seed",
                       "dim", "outputs", "trajectory", "workers", "bench_steps"});

    RunConfig cfg;
    if (const json* s = find(j, "schedule")) {
        if (!s->is_object()) fail("schedule", "expected an object");
        check_keys(*s, "schedule", {"T", "s_offset", "beta_max"});
        if (const json* v = find(*s, "T"))
            cfg.schedule.T = static_cast<int>(as_int(*v, "schedule.T"));
        if (const json* v = find(*s, "s_offset"))
            cfg.schedule.s_offset = as_double(*v, "schedule.s_offset");
        if (const json* v = find(*s, "beta_max"))
            cfg.schedule.beta_max = as_double(*v, "schedule.beta_max");
    }
    if (const json* v = find(j, "data_law")) cfg.data_law = parse_data_law(*v, "data_law");
    if (const json* v = find(j, "condition_y")) cfg.condition_y = as_vector(*v, "condition_y");
    if (const json* s = find(j, "sampler")) {
        if (!s->is_object()) fail("sampler", "expected an object");
        check_keys(*s, "sampler", {"kind", "steps", "strategy", "eta"});
        if (const json* v = find(*s, "kind")) {
            try {
                cfg.sampler.kind = sampler_kind_from_string(as_string(*v, "sampler.kind"));
            } catch (const std::invalid_argument& e) {
                fail("sampler.kind", e.what());
            }
        }
        if (const json* v = find(*s, "steps"))
            cfg.sampler.steps = static_cast<int>(as_int(*v, "sampler.steps"));
        if (const json* v = find(*s, "strategy")) {
            try {
                cfg.sampler.strategy = strategy_from_string(as_string(*v, "sampler.strategy"));
            } catch (const std::invalid_argument& e) {
                fail("sampler.strategy", e.what());
            }
        }
        if (const json* v = find(*s, "eta")) cfg.sampler.eta = as_double(*v, "sampler.eta");
    }
    if (const json* v = find(j, "n_chains")) cfg.n_chains = as_int(*v, "n_chains");
    if (const json* v = find(j, "seed")) cfg.seed = as_uint64(*v, "seed");
    if (const json* v = find(j, "dim")) cfg.dim = static_cast<int>(as_int(*v, "dim"));
    if (const json* o = find(j, "outputs")) {
        if (!o->is_object()) fail("outputs", "expected an object");
        check_keys(*o, "outputs", {"samples_csv", "metrics_json"});
        if (const json* v = find(*o, "samples_csv"))
            cfg.outputs.samples_csv = as_string(*v, "outputs.samples_csv");
        if (const json* v = find(*o, "metrics_json"))
            cfg.outputs.metrics_json = as_string(*v, "outputs.metrics_json");
    }
    if (const json* v = find(j, "trajectory")) cfg.trajectory = as_bool(*v, "trajectory");
    if (const json* v = find(j, "workers")) cfg.workers = static_cast<int>(as_int(*v, "workers"));
    if (const json* v = find(j, "bench_steps")) {
        if (!v->is_array() || v->empty()) fail("bench_steps", "expected a non-empty array");
        cfg.bench_steps.clear();
        for (std::size_t i = 0; i < v->size(); ++i)
            cfg.bench_steps.push_back(static_cast<int>(
                as_int((*v)[i], "bench_steps[" + std::to_string(i) + "]")));
    }
    return cfg;
}

std::string config_to_json_string(const RunConfig& cfg) {
    json j;
    j["schedule"] = {{"T", cfg.schedule.T},
                     {"s_offset", cfg.schedule.s_offset},
                     {"beta_max", cfg.schedule.beta_max}};
    if (cfg.data_law) j["data_law"] = data_law_to_json(*cfg.data_law);
    if (cfg.condition_y)
        j["condition_y"] = std::vector<double>(cfg.condition_y->begin(), cfg.condition_y->end());
    j["sampler"] = {{"kind", to_string(cfg.sampler.kind)},
                    {"steps", cfg.sampler.steps},
                    {"strategy", to_string(cfg.sampler.strategy)},
                    {"eta", cfg.sampler.eta}};
    j["n_chains"] = cfg.n_chains;
    j["seed"] = cfg.seed;
    j["dim"] = cfg.dim;
    j["outputs"] = {{"samples_csv", cfg.outputs.samples_csv},
                    {"metrics_json", cfg.outputs.metrics_json}};
    j["trajectory"] = cfg.trajectory;
    j["workers"] = cfg.workers;
    j["bench_steps"] = cfg.bench_steps;
    return j.dump(2) + "\n";
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw std::system_error(errno, std::generic_category(),
                                "cannot open config file '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    if (in.bad())
        throw std::system_error(errno, std::generic_category(),
                                "cannot read config file '" + path + "'");
    return config_from_json_string(buf.str());
}

void validate_config(RunConfig& cfg) {
    if (cfg.schedule.T < 1) fail("schedule.T", "must be >= 1");
    if (!(cfg.schedule.s_offset > 0.0)) fail("schedule.s_offset", "must be > 0");
    if (!(cfg.schedule.beta_max > 0.0 && cfg.schedule.beta_max < 1.0))
        fail("schedule.beta_max", "must be in (0, 1)");
    if (cfg.dim < 1) fail("dim", "must be >= 1");
    if (cfg.n_chains < 1) fail("n_chains", "must be >= 1");
    if (cfg.workers < 0) fail("workers", "must be >= 0");
    if (!(cfg.sampler.eta >= 0.0)) fail("sampler.eta", "must be >= 0");

    if (!cfg.data_law) {
        if (cfg.dim == 2) {
            cfg.data_law = reference_mixture();
        } else {
            GaussianLaw g;
            g.mean = StateVector::Zero(cfg.dim);
            g.std = 1.0;
            cfg.data_law = g;
        }
    }
    if (law_dim(*cfg.data_law) != cfg.dim) fail("dim", "does not match data_law dimension");

    if (cfg.condition_y && cfg.condition_y->size() != cfg.dim)
        fail("condition_y", "does not match dim");
    if (parameterization_for(cfg.sampler.kind) == Parameterization::x0_prediction &&
        !cfg.condition_y)
        cfg.condition_y = StateVector::Zero(cfg.dim);

    if (is_ddim(cfg.sampler.kind)) {
        if (cfg.sampler.steps < 2) fail("sampler.steps", "must be >= 2 for ddim kinds");
        if (cfg.sampler.steps > cfg.schedule.T) fail("sampler.steps", "must be <= schedule.T");
    }
    // Only `bench` consumes bench_steps, so the <= T cross-check lives there;
    // rejecting it here would let the default sweep veto unrelated runs.
    for (std::size_t i = 0; i < cfg.bench_steps.size(); ++i) {
        if (cfg.bench_steps[i] < 2)
            fail("bench_steps[" + std::to_string(i) + "]", "must be >= 2");
    }
}

RunParts build_parts(const RunConfig& cfg) {
    RunParts parts;
    parts.schedule = build_cosine_schedule(cfg.schedule.T, cfg.schedule.s_offset,
                                           cfg.schedule.beta_max);
    if (is_ddim(cfg.sampler.kind))
        parts.subsequence = build_subsequence(parts.schedule, cfg.sampler.steps,
                                              cfg.sampler.strategy, cfg.sampler.eta);
    std::optional<Condition> cond;
    if (cfg.condition_y) cond = Condition{*cfg.condition_y, std::string()};
    parts.denoiser =
        make_denoiser(parameterization_for(cfg.sampler.kind), *cfg.data_law, cond);
    return parts;
}

}  // namespace diffkit
