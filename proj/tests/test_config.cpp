#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <string>
#include <system_error>

#include "diffkit/config.hpp"
#include "diffkit/presets.hpp"

using namespace diffkit;

namespace {
// what() must mention the offending field so CLI users can find it
void check_message(const std::string& text, const std::string& fragment) {
    INFO("message: " << text << "\nexpected fragment: " << fragment);
    CHECK(text.find(fragment) != std::string::npos);
}

template <typename Fn>
std::string capture_invalid(Fn&& fn) {
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        return e.what();
    }
    FAIL("expected std::invalid_argument");
    return "";
}
}  // namespace

TEST_CASE("defaults: empty object validates to the reference setup") {
    RunConfig cfg = config_from_json_string("{}");
    validate_config(cfg);
    CHECK(cfg.schedule.T == 1000);
    CHECK(cfg.dim == 2);
    CHECK(cfg.sampler.kind == SamplerKind::ddim_x0_pcdm);
    CHECK(cfg.sampler.steps == 10);
    REQUIRE(cfg.data_law.has_value());
    const auto* mix = std::get_if<GaussianMixtureLaw>(&*cfg.data_law);
    REQUIRE(mix != nullptr);
    CHECK(mix->components.size() == 3);
    REQUIRE(cfg.condition_y.has_value());  // x0 kind gets y = 0 by default
    CHECK(cfg.condition_y->isZero(0.0));
    CHECK(cfg.bench_steps == std::vector<int>{10, 20, 50, 100});
}

TEST_CASE("defaults: dim != 2 without a law falls back to a standard Gaussian") {
    RunConfig cfg = config_from_json_string(R"({"dim": 3})");
    validate_config(cfg);
    const auto* g = std::get_if<GaussianLaw>(&*cfg.data_law);
    REQUIRE(g != nullptr);
    CHECK(g->mean.size() == 3);
    CHECK(g->mean.isZero(0.0));
    CHECK(g->std == 1.0);
}

TEST_CASE("noise-parameterized kinds get no implicit condition") {
    RunConfig cfg = config_from_json_string(R"({"sampler": {"kind": "ddim_eps"}})");
    validate_config(cfg);
    CHECK(!cfg.condition_y.has_value());
}

TEST_CASE("serialize -> parse -> serialize is the identity") {
    RunConfig cfg = config_from_json_string(R"({
        "schedule": {"T": 500, "s_offset": 0.01, "beta_max": 0.99},
        "data_law": {"kind": "gaussian_mixture",
                     "weights": [0.25, 0.75],
                     "means": [[1.0, 2.0], [-1.0, 0.5]],
                     "stds": [0.3, 1.2]},
        "condition_y": [0.1, -0.2],
        "sampler": {"kind": "ddim_x0_pcdm", "steps": 25, "strategy": "quadratic", "eta": 0.5},
        "n_chains": 77,
        "seed": 12345,
        "dim": 2,
        "outputs": {"samples_csv": "a.csv", "metrics_json": "a.json"},
        "trajectory": true,
        "workers": 4,
        "bench_steps": [5, 25]
    })");
    validate_config(cfg);
    const std::string once = config_to_json_string(cfg);
    RunConfig back = config_from_json_string(once);
    validate_config(back);
    CHECK(config_to_json_string(back) == once);
    CHECK(back.n_chains == 77);
    CHECK(back.seed == 12345);
    CHECK(back.sampler.strategy == Strategy::quadratic);
    CHECK(back.sampler.eta == 0.5);
    CHECK(back.trajectory);
    CHECK(back.bench_steps == std::vector<int>{5, 25});
}

TEST_CASE("parse errors name the offending field") {
    check_message(capture_invalid([] { config_from_json_string("[1,2]"); }),
                  "top level");
    check_message(capture_invalid([] { config_from_json_string("{nope"); }),
                  "not valid JSON");
    check_message(capture_invalid([] { config_from_json_string(R"({"turbo": 1})"); }),
                  "turbo");
    check_message(
        capture_invalid([] { config_from_json_string(R"({"sampler": {"kind": "fancy"}})"); }),
        "sampler.kind");
    check_message(
        capture_invalid([] { config_from_json_string(R"({"sampler": {"steps": "ten"}})"); }),
        "sampler.steps");
    check_message(
        capture_invalid([] { config_from_json_string(R"({"schedule": {"T": 10.5}})"); }),
        "schedule.T");
    check_message(capture_invalid([] { config_from_json_string(R"({"seed": -4})"); }),
                  "seed");
    check_message(
        capture_invalid([] {
            config_from_json_string(
                R"({"data_law": {"kind": "gaussian_mixture",
                                 "weights": [0.5, 0.5],
                                 "means": [[0.0, 0.0]],
                                 "stds": [1.0, 1.0]}})");
        }),
        "equal-length");
    check_message(
        capture_invalid([] {
            config_from_json_string(R"({"data_law": {"kind": "laplace", "mean": [0]}})");
        }),
        "data_law.kind");
}

TEST_CASE("validation errors name the offending field") {
    auto invalid = [](const std::string& text) {
        return capture_invalid([&] {
            RunConfig cfg = config_from_json_string(text);
            validate_config(cfg);
        });
    };
    check_message(invalid(R"({"schedule": {"T": 0}})"), "schedule.T");
    check_message(invalid(R"({"schedule": {"s_offset": 0.0}})"), "schedule.s_offset");
    check_message(invalid(R"({"schedule": {"beta_max": 1.0}})"), "schedule.beta_max");
    check_message(invalid(R"({"dim": 0})"), "dim");
    check_message(invalid(R"({"n_chains": 0})"), "n_chains");
    check_message(invalid(R"({"workers": -1})"), "workers");
    check_message(invalid(R"({"sampler": {"eta": -0.5}})"), "sampler.eta");
    check_message(invalid(R"({"sampler": {"steps": 1}})"), "sampler.steps");
    check_message(invalid(R"({"sampler": {"steps": 2000}})"), "sampler.steps");
    check_message(invalid(R"({"bench_steps": [10, 1]})"), "bench_steps[1]");
    // declared dim disagrees with the law's dimension
    check_message(invalid(R"({"dim": 3,
                              "data_law": {"kind": "gaussian", "mean": [0, 0], "std": 1}})"),
                  "dim");
    // condition length disagrees with dim
    check_message(invalid(R"({"condition_y": [1, 2, 3]})"), "condition_y");
}

TEST_CASE("load_config: missing file raises a system error") {
    CHECK_THROWS_AS(load_config("/nonexistent/dir/conf.json"), std::system_error);
}

TEST_CASE("build_parts assembles matching experiment objects") {
    RunConfig cfg = config_from_json_string(R"({
        "schedule": {"T": 200},
        "sampler": {"kind": "ddim_x0_pcdm", "steps": 8, "strategy": "quadratic", "eta": 0.3},
        "condition_y": [0.5, -0.5]
    })");
    validate_config(cfg);
    const RunParts parts = build_parts(cfg);
    CHECK(parts.schedule.T == 200);
    REQUIRE(parts.subsequence.has_value());
    CHECK(parts.subsequence->S == 8);
    CHECK(parts.subsequence->eta == 0.3);
    CHECK(parts.subsequence->tau.back() == 200);
    CHECK(parts.denoiser.parameterization == Parameterization::x0_prediction);
    REQUIRE(parts.denoiser.condition.has_value());
    CHECK(parts.denoiser.condition->y[0] == 0.5);

    RunConfig ddpm = config_from_json_string(R"({"sampler": {"kind": "ddpm_eps"}})");
    validate_config(ddpm);
    const RunParts dparts = build_parts(ddpm);
    CHECK(!dparts.subsequence.has_value());
    CHECK(dparts.denoiser.parameterization == Parameterization::noise_prediction);
    CHECK(!dparts.denoiser.condition.has_value());
    CHECK(dparts.schedule.T == 1000);
}
