#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <stdexcept>
#include <string>

#include "sctree/config.hpp"

using namespace sctree;

namespace {

std::string error_of(const std::string& json_text) {
    try {
        config_from_json(json_text);
    } catch (const std::runtime_error& err) {
        return err.what();
    }
    return "";
}

}  // namespace

TEST_CASE("empty config yields the documented defaults") {
    const RunConfig config = config_from_json("{}");
    CHECK(config.plant.a == 0.9);
    CHECK(config.plant.x0 == 1.8);
    CHECK(config.plant.target == -2.0);
    CHECK(config.grid.x_step == 0.02);
    CHECK(config.grid.u_step == 0.02);
    CHECK(config.generator.family == GenFamily::SimpleConverging);
    CHECK(config.generator.horizon == 10);
    CHECK(config.solve.methods.size() == 3);
    CHECK(config.solve.value_mode == ValueMode::Nearest);
    CHECK(config.solve.penalty == 1000.0);
    CHECK(config.solve.threads == 1);
    CHECK(config.clustering.clusters == 10);
    CHECK(config.markov.bins == 10);
    CHECK(config.markov.placement == BinPlacement::Uniform);
    CHECK(config.simulation.mode == SimulationMode::Quantized);
    CHECK(config.paths.scenarios == "scenarios.json");
}

TEST_CASE("config survives a serialization round trip") {
    RunConfig config;
    config.plant.a = 0.75;
    config.plant.x0 = 0.25;
    config.plant.x_min = -1.0;
    config.grid.x_step = 0.1;
    config.generator.family = GenFamily::BranchingWalk;
    config.generator.count = 500;
    config.generator.seed = 42;
    config.generator.convergence_steps = {2, 3};
    config.solve.methods = {Method::Exact, Method::Markov};
    config.solve.value_mode = ValueMode::Interpolate;
    config.solve.penalty = 77.5;
    config.solve.threads = 4;
    config.solve.sample_size = 12;
    config.solve.use_transition_table = true;
    config.clustering.clusters = 7;
    config.clustering.weighted = false;
    config.markov.bins = 5;
    config.markov.placement = BinPlacement::Quantile;
    config.simulation.mode = SimulationMode::Continuous;
    config.paths.out_dir = "/tmp/runs";

    const RunConfig parsed = config_from_json(config_to_json(config));
    CHECK(parsed.plant.a == config.plant.a);
    CHECK(parsed.plant.x0 == config.plant.x0);
    CHECK(parsed.plant.x_min == config.plant.x_min);
    CHECK(parsed.grid.x_step == config.grid.x_step);
    CHECK(parsed.generator.family == GenFamily::BranchingWalk);
    CHECK(parsed.generator.count == 500);
    CHECK(parsed.generator.seed == 42);
    CHECK(parsed.generator.convergence_steps == config.generator.convergence_steps);
    CHECK(parsed.solve.methods == config.solve.methods);
    CHECK(parsed.solve.value_mode == ValueMode::Interpolate);
    CHECK(parsed.solve.penalty == 77.5);
    CHECK(parsed.solve.threads == 4);
    CHECK(parsed.solve.sample_size == 12);
    CHECK(parsed.solve.use_transition_table);
    CHECK(parsed.clustering.clusters == 7);
    CHECK(!parsed.clustering.weighted);
    CHECK(parsed.markov.bins == 5);
    CHECK(parsed.markov.placement == BinPlacement::Quantile);
    CHECK(parsed.simulation.mode == SimulationMode::Continuous);
    CHECK(parsed.paths.out_dir == "/tmp/runs");
}

TEST_CASE("unknown keys are rejected by name") {
    CHECK(error_of(R"({"plnat": {}})").find("plnat") != std::string::npos);
    CHECK(error_of(R"({"grid": {"x_stpe": 0.1}})").find("x_stpe") != std::string::npos);
    CHECK(error_of(R"({"solve": {"method": "exact"}})").find("method") != std::string::npos);
    CHECK(error_of(R"({"paths": {"outdir": "x"}})").find("outdir") != std::string::npos);
}

TEST_CASE("malformed config values are reported as config errors") {
    CHECK(error_of("not json").substr(0, 7) == "config:");
    CHECK(error_of(R"({"grid": {"x_step": "wide"}})").substr(0, 7) == "config:");
    CHECK(error_of(R"({"grid": 3})").find("grid") != std::string::npos);
    CHECK_THROWS(config_from_json(R"({"solve": {"methods": []}})"));
    CHECK_THROWS(config_from_json(R"({"solve": {"methods": ["fancy"]}})"));
    CHECK_THROWS(config_from_json(R"({"solve": {"value_mode": "psychic"}})"));
    CHECK_THROWS(config_from_json(R"({"simulation": {"mode": "dreamy"}})"));
}

TEST_CASE("config files load from disk") {
    const char* dir = std::getenv("TMPDIR");
    const std::string path = std::string(dir ? dir : "/tmp") + "/sctree_config_test.json";
    {
        std::ofstream out(path);
        out << R"({"markov": {"bins": 4}, "solve": {"threads": 2}})";
    }
    const RunConfig config = load_config(path);
    std::remove(path.c_str());
    CHECK(config.markov.bins == 4);
    CHECK(config.solve.threads == 2);
    CHECK(config.plant.a == 0.9);

    CHECK_THROWS(load_config("/nonexistent/config.json"));
}

TEST_CASE("the default plant matches the built-in reference instance") {
    const SystemModel configured = make_model(PlantConfig{}, 10);
    const SystemModel reference = reference_plant(10);
    CHECK(configured.x_min == reference.x_min);
    CHECK(configured.u_max == reference.u_max);
    CHECK(configured.x0 == reference.x0);
    for (const double x : {-2.0, 0.3, 1.8}) {
        CHECK(configured.dynamics(0, x, 0.5, 0.3) == reference.dynamics(0, x, 0.5, 0.3));
        CHECK(configured.running_cost(0, x, 0.5, 0.3) == reference.running_cost(0, x, 0.5, 0.3));
        CHECK(configured.terminal_cost(x) == reference.terminal_cost(x));
    }

    const Grid grid = make_grid(PlantConfig{}, GridConfig{});
    CHECK(grid.x_values.size() == 201);
    CHECK(grid.u_values.size() == 81);
}

TEST_CASE("solver options copy every solve field") {
    SolveConfig solve;
    solve.value_mode = ValueMode::Interpolate;
    solve.penalty = 5.0;
    solve.threads = 3;
    solve.sample_size = 9;
    solve.sample_seed = 17;
    solve.use_transition_table = true;
    const SolveOptions options = to_solve_options(solve);
    CHECK(options.value_mode == ValueMode::Interpolate);
    CHECK(options.infeasibility_penalty == 5.0);
    CHECK(options.threads == 3);
    CHECK(options.sample_size == 9);
    CHECK(options.sample_seed == 17);
    CHECK(options.use_transition_table);
}
