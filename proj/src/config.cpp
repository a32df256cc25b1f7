#include "sctree/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>
#include <stdexcept>
#include <string>

#include <json.hpp>

namespace sctree {

namespace {

using nlohmann::json;

void check_keys(const json& js, const std::string& where,
                std::initializer_list<const char*> allowed) {
    if (!js.is_object())
        throw std::runtime_error("config: \"" + where + "\" must be a JSON object");
    for (const auto& item : js.items()) {
        bool known = false;
        for (const char* key : allowed) {
            if (item.key() == key) {
                known = true;
                break;
            }
        }
        if (!known)
            throw std::runtime_error("config: unknown key \"" + item.key() + "\" in " + where);
    }
}

template <typename T>
void read(const json& js, const char* key, T& out) {
    if (js.contains(key)) out = js.at(key).get<T>();
}

PlantConfig parse_plant(const json& js) {
    check_keys(js, "plant", {"a", "x_min", "x_max", "u_min", "u_max", "x0", "target"});
    PlantConfig out;
    read(js, "a", out.a);
    read(js, "x_min", out.x_min);
    read(js, "x_max", out.x_max);
    read(js, "u_min", out.u_min);
    read(js, "u_max", out.u_max);
    read(js, "x0", out.x0);
    read(js, "target", out.target);
    return out;
}

GridConfig parse_grid(const json& js) {
    check_keys(js, "grid", {"x_step", "u_step"});
    GridConfig out;
    read(js, "x_step", out.x_step);
    read(js, "u_step", out.u_step);
    return out;
}

GenSpec parse_generator(const json& js) {
    check_keys(js, "generator",
               {"family", "horizon", "count", "w_lo", "w_hi", "branch_factor",
                "convergence_steps", "step_bound", "seed"});
    GenSpec out;
    if (js.contains("family")) out.family = gen_family_from_name(js.at("family").get<std::string>());
    read(js, "horizon", out.horizon);
    read(js, "count", out.count);
    read(js, "w_lo", out.w_lo);
    read(js, "w_hi", out.w_hi);
    read(js, "branch_factor", out.branch_factor);
    read(js, "convergence_steps", out.convergence_steps);
    read(js, "step_bound", out.step_bound);
    read(js, "seed", out.seed);
    return out;
}

SolveConfig parse_solve(const json& js) {
    check_keys(js, "solve",
               {"methods", "value_mode", "penalty", "threads", "sample_size", "sample_seed",
                "use_transition_table"});
    SolveConfig out;
    if (js.contains("methods")) {
        out.methods.clear();
        for (const auto& name : js.at("methods"))
            out.methods.push_back(method_from_name(name.get<std::string>()));
        if (out.methods.empty()) throw std::runtime_error("config: solve.methods is empty");
    }
    if (js.contains("value_mode"))
        out.value_mode = value_mode_from_name(js.at("value_mode").get<std::string>());
    read(js, "penalty", out.penalty);
    read(js, "threads", out.threads);
    read(js, "sample_size", out.sample_size);
    read(js, "sample_seed", out.sample_seed);
    read(js, "use_transition_table", out.use_transition_table);
    return out;
}

ClusteringSpec parse_clustering(const json& js) {
    check_keys(js, "clustering",
               {"clusters", "seed", "restarts", "max_iters", "weighted", "kmeanspp",
                "key_decimals"});
    ClusteringSpec out;
    read(js, "clusters", out.clusters);
    read(js, "seed", out.seed);
    read(js, "restarts", out.restarts);
    read(js, "max_iters", out.max_iters);
    read(js, "weighted", out.weighted);
    read(js, "kmeanspp", out.kmeanspp);
    read(js, "key_decimals", out.key_decimals);
    return out;
}

MarkovConfig parse_markov(const json& js) {
    check_keys(js, "markov", {"bins", "placement"});
    MarkovConfig out;
    read(js, "bins", out.bins);
    if (js.contains("placement"))
        out.placement = bin_placement_from_name(js.at("placement").get<std::string>());
    return out;
}

SimulationConfig parse_simulation(const json& js) {
    check_keys(js, "simulation", {"mode"});
    SimulationConfig out;
    if (js.contains("mode")) out.mode = sim_mode_from_name(js.at("mode").get<std::string>());
    return out;
}

PathsConfig parse_paths(const json& js) {
    check_keys(js, "paths", {"scenarios", "policy", "out_dir"});
    PathsConfig out;
    read(js, "scenarios", out.scenarios);
    read(js, "policy", out.policy);
    read(js, "out_dir", out.out_dir);
    return out;
}

}  // namespace

RunConfig config_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& err) {
        throw std::runtime_error(std::string("config: ") + err.what());
    }
    check_keys(doc, "the top level",
               {"plant", "grid", "generator", "solve", "clustering", "markov", "simulation",
                "paths"});
    RunConfig out;
    try {
        if (doc.contains("plant")) out.plant = parse_plant(doc.at("plant"));
        if (doc.contains("grid")) out.grid = parse_grid(doc.at("grid"));
        if (doc.contains("generator")) out.generator = parse_generator(doc.at("generator"));
        if (doc.contains("solve")) out.solve = parse_solve(doc.at("solve"));
        if (doc.contains("clustering")) out.clustering = parse_clustering(doc.at("clustering"));
        if (doc.contains("markov")) out.markov = parse_markov(doc.at("markov"));
        if (doc.contains("simulation")) out.simulation = parse_simulation(doc.at("simulation"));
        if (doc.contains("paths")) out.paths = parse_paths(doc.at("paths"));
    } catch (const json::exception& err) {
        throw std::runtime_error(std::string("config: ") + err.what());
    }
    return out;
}

RunConfig load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open config file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return config_from_json(buffer.str());
}

std::string config_to_json(const RunConfig& config) {
    json methods = json::array();
    for (const Method method : config.solve.methods) methods.push_back(method_name(method));
    const json doc = {
        {"plant",
         {{"a", config.plant.a},
          {"x_min", config.plant.x_min},
          {"x_max", config.plant.x_max},
          {"u_min", config.plant.u_min},
          {"u_max", config.plant.u_max},
          {"x0", config.plant.x0},
          {"target", config.plant.target}}},
        {"grid", {{"x_step", config.grid.x_step}, {"u_step", config.grid.u_step}}},
        {"generator",
         {{"family", gen_family_name(config.generator.family)},
          {"horizon", config.generator.horizon},
          {"count", config.generator.count},
          {"w_lo", config.generator.w_lo},
          {"w_hi", config.generator.w_hi},
          {"branch_factor", config.generator.branch_factor},
          {"convergence_steps", config.generator.convergence_steps},
          {"step_bound", config.generator.step_bound},
          {"seed", config.generator.seed}}},
        {"solve",
         {{"methods", methods},
          {"value_mode", value_mode_name(config.solve.value_mode)},
          {"penalty", config.solve.penalty},
          {"threads", config.solve.threads},
          {"sample_size", config.solve.sample_size},
          {"sample_seed", config.solve.sample_seed},
          {"use_transition_table", config.solve.use_transition_table}}},
        {"clustering",
         {{"clusters", config.clustering.clusters},
          {"seed", config.clustering.seed},
          {"restarts", config.clustering.restarts},
          {"max_iters", config.clustering.max_iters},
          {"weighted", config.clustering.weighted},
          {"kmeanspp", config.clustering.kmeanspp},
          {"key_decimals", config.clustering.key_decimals}}},
        {"markov",
         {{"bins", config.markov.bins},
          {"placement", bin_placement_name(config.markov.placement)}}},
        {"simulation", {{"mode", sim_mode_name(config.simulation.mode)}}},
        {"paths",
         {{"scenarios", config.paths.scenarios},
          {"policy", config.paths.policy},
          {"out_dir", config.paths.out_dir}}},
    };
    return doc.dump(2) + "\n";
}

SystemModel make_model(const PlantConfig& plant, int horizon) {
    SystemModel model;
    model.horizon = horizon;
    model.x_min = plant.x_min;
    model.x_max = plant.x_max;
    model.u_min = plant.u_min;
    model.u_max = plant.u_max;
    model.x0 = plant.x0;
    const double a = plant.a;
    const double target = plant.target;
    model.dynamics = [a](int, double x, double u, double w) { return a * x + u - w; };
    model.running_cost = [](int, double, double u, double) { return u * u; };
    model.terminal_cost = [target](double x) { return (target - x) * (target - x); };
    validate_model(model);
    return model;
}

Grid make_grid(const PlantConfig& plant, const GridConfig& grid) {
    return make_grid(plant.x_min, plant.x_max, grid.x_step, plant.u_min, plant.u_max,
                     grid.u_step);
}

SolveOptions to_solve_options(const SolveConfig& solve) {
    SolveOptions options;
    options.value_mode = solve.value_mode;
    options.infeasibility_penalty = solve.penalty;
    options.threads = solve.threads;
    options.sample_size = solve.sample_size;
    options.sample_seed = solve.sample_seed;
    options.use_transition_table = solve.use_transition_table;
    return options;
}

}  // namespace sctree
