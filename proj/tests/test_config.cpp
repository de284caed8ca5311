#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "liquidsense/config.hpp"

using namespace liquidsense;

TEST_CASE("config documents parse sections, scalars, arrays and comments") {
    const ConfigDoc doc = ConfigDoc::parse_string(R"(
# run configuration
[sim]
zeta_min = 0.03      # floor
noise_sigma_ratio = 0.1

[eval]
trials = 5
bin_edges = [0, 20, 200]
fills = "one-third,half"

[plot]
grid = false
format = "png"
)");
    CHECK(doc.get_double("sim.zeta_min", 0) == doctest::Approx(0.03));
    CHECK(doc.get_double("sim.noise_sigma_ratio", 0) == doctest::Approx(0.1));
    CHECK(doc.get_int("eval.trials", 0) == 5);
    const auto edges = doc.get_double_array("eval.bin_edges", {});
    REQUIRE(edges.size() == 3);
    CHECK(edges[1] == doctest::Approx(20.0));
    CHECK(doc.get_string("eval.fills", "") == "one-third,half");
    CHECK(doc.get_bool("plot.grid", true) == false);
    CHECK(doc.get_string("plot.format", "") == "png");
    CHECK(!doc.has("sim.zeta_max"));
}

TEST_CASE("malformed config lines are rejected") {
    CHECK_THROWS_AS(ConfigDoc::parse_string("[sim\nzeta_min = 1"), MalformedConfig);
    CHECK_THROWS_AS(ConfigDoc::parse_string("[sim]\nzeta_min 0.3"), MalformedConfig);
    CHECK_THROWS_AS(ConfigDoc::parse_string("[sim]\nzeta_min ="), MalformedConfig);
    CHECK_THROWS_AS(ConfigDoc::parse_string("[eval]\nbin_edges = [1, 2"), MalformedConfig);
}

TEST_CASE("unknown keys are rejected when applied to a run config") {
    RunConfig config = default_run_config();
    CHECK_THROWS_AS(
        apply_config(config, ConfigDoc::parse_string("[sim]\nzeta_typo = 0.5")),
        MalformedConfig);
}

TEST_CASE("file values override defaults") {
    RunConfig config = default_run_config();
    apply_config(config, ConfigDoc::parse_string(R"(
[sim]
zeta_k = 0.11
[dsp]
min_prominence = 0.25
[agent]
actions = "scene,shake"
mode = "image"
fill = "half"
[eval]
trials = 3
fills = "one-third"
bin_edges = [0, 50]
)"));
    CHECK(config.sim.zeta_k == doctest::Approx(0.11));
    CHECK(config.dsp.min_prominence == doctest::Approx(0.25));
    CHECK(config.mask.look_scene);
    CHECK(config.mask.shake);
    CHECK(!config.mask.look_container);
    CHECK(config.mode == EnvMode::ImageMode);
    CHECK(config.episode_fill == FillLevel::Half);
    CHECK(config.eval.trials == 3);
    REQUIRE(config.eval.fills.size() == 1);
    CHECK(config.eval.fills[0] == FillLevel::OneThird);
    REQUIRE(config.eval.bin_edges.size() == 2);
    // Untouched keys keep their defaults.
    CHECK(config.sim.zeta_min == doctest::Approx(0.02));
    CHECK(config.dsp.cutoff_hz == doctest::Approx(2.0));
}

TEST_CASE("serialized snapshots reload to an equivalent config") {
    RunConfig config = default_run_config();
    config.sim.zeta_k = 0.09;
    config.eval.trials = 7;
    config.eval.seed_base = 1234;
    config.mask = ActionMask::from_string("scene,container");
    config.plot.format = ImageFormat::PNG;
    config.backend = BackendKind::RuleBased;

    const std::string text = serialize_run_config(config);
    RunConfig reloaded = default_run_config();
    apply_config(reloaded, ConfigDoc::parse_string(text));

    CHECK(reloaded.sim.zeta_k == doctest::Approx(0.09));
    CHECK(reloaded.eval.trials == 7);
    CHECK(reloaded.eval.seed_base == 1234);
    CHECK(reloaded.mask.to_string() == "scene,container");
    CHECK(reloaded.plot.format == ImageFormat::PNG);
    CHECK(reloaded.backend == BackendKind::RuleBased);
    CHECK(reloaded.registry_path == config.registry_path);

    // Serialization is a fixed point.
    CHECK(serialize_run_config(reloaded) == text);
}

TEST_CASE("validation flags missing paths and bad ranges") {
    RunConfig config = default_run_config();
    CHECK_NOTHROW(validate_run_config(config));

    RunConfig missing = config;
    missing.registry_path = "/nonexistent/registry.json";
    CHECK_THROWS_AS(validate_run_config(missing), MalformedConfig);

    RunConfig bad_zeta = config;
    bad_zeta.sim.zeta_min = -0.1;
    CHECK_THROWS_AS(validate_run_config(bad_zeta), MalformedConfig);

    RunConfig bad_edges = config;
    bad_edges.eval.bin_edges = {10.0, 5.0};
    CHECK_THROWS_AS(validate_run_config(bad_edges), MalformedConfig);

    RunConfig bad_trials = config;
    bad_trials.eval.trials = 0;
    CHECK_THROWS_AS(validate_run_config(bad_trials), MalformedConfig);
}
