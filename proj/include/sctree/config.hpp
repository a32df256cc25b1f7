#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "sctree/clustering.hpp"
#include "sctree/controller.hpp"
#include "sctree/dp.hpp"
#include "sctree/generator.hpp"
#include "sctree/markov.hpp"
#include "sctree/system_model.hpp"

namespace sctree {

/// Linear plant family x+ = a*x + u - w with control cost u^2 and terminal
/// cost (target - x)^2. The defaults are the worked reference instance used
/// across the test suite.
struct PlantConfig {
    double a = 0.9;
    double x_min = -2.0;
    double x_max = 2.0;
    double u_min = 0.0;
    double u_max = 1.6;
    double x0 = 1.8;
    double target = -2.0;
};

struct GridConfig {
    double x_step = 0.02;
    double u_step = 0.02;
};

/// Solver knobs shared by every method.
struct SolveConfig {
    std::vector<Method> methods{Method::Exact, Method::Clustered, Method::Markov};
    ValueMode value_mode = ValueMode::Nearest;
    double penalty = 1000.0;
    int threads = 1;
    std::size_t sample_size = 0;
    std::uint64_t sample_seed = 0;
    bool use_transition_table = false;
};

struct MarkovConfig {
    int bins = 10;
    BinPlacement placement = BinPlacement::Uniform;
};

struct SimulationConfig {
    SimulationMode mode = SimulationMode::Quantized;
};

struct PathsConfig {
    std::string scenarios = "scenarios.json";
    std::string policy = "policy.json";
    std::string out_dir = "";  // empty falls back to $SCTREE_OUT_DIR, then "."
};

/// Everything one experiment needs, parseable from a single JSON file. Every
/// key is optional and defaults to the value in these structs; unknown keys
/// are rejected by name so typos cannot silently fall back to defaults.
struct RunConfig {
    PlantConfig plant;
    GridConfig grid;
    GenSpec generator;
    SolveConfig solve;
    ClusteringSpec clustering;
    MarkovConfig markov;
    SimulationConfig simulation;
    PathsConfig paths;
};

RunConfig config_from_json(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Serializes every field, so the output doubles as a template that lists
/// all recognized keys with their current values.
std::string config_to_json(const RunConfig& config);

/// Builds the configured plant over the given horizon.
SystemModel make_model(const PlantConfig& plant, int horizon);

/// Grid over the plant bounds with the configured steps.
Grid make_grid(const PlantConfig& plant, const GridConfig& grid);

SolveOptions to_solve_options(const SolveConfig& solve);

}  // namespace sctree
