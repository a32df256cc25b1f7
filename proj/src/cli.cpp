#include "sctree/cli.hpp"

#include <chrono>
#include <cstdlib>
#include <iomanip>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "sctree/clustering.hpp"
#include "sctree/controller.hpp"
#include "sctree/dp.hpp"
#include "sctree/generator.hpp"
#include "sctree/markov.hpp"
#include "sctree/node_graph.hpp"
#include "sctree/scenario.hpp"
#include "sctree/text.hpp"

namespace sctree {

namespace {

double seconds_since(std::chrono::steady_clock::time_point start) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

/// Probability-weighted mean disturbance per step, the reference trajectory
/// for the nominal method.
std::vector<double> mean_sequence(const ScenarioSet& scenarios) {
    std::vector<double> mean(static_cast<std::size_t>(scenarios.horizon), 0.0);
    for (const DisturbanceSequence& seq : scenarios.sequences)
        for (std::size_t k = 0; k < mean.size(); ++k) mean[k] += seq.probability * seq.values[k];
    return mean;
}

struct SolveOutcome {
    SolveResult result;
    double build_seconds = 0.0;  // representation build plus in-solver build
};

SolveOutcome solve_method(const RunConfig& config, Method method, const SystemModel& model,
                          const Grid& grid, const ScenarioSet& scenarios) {
    const SolveOptions options = to_solve_options(config.solve);
    const auto start = std::chrono::steady_clock::now();
    SolveOutcome outcome;
    switch (method) {
        case Method::Nominal: {
            const std::vector<double> nominal = mean_sequence(scenarios);
            const double built = seconds_since(start);
            outcome.result = solve_nominal(model, grid, nominal, options);
            outcome.build_seconds = built;
            break;
        }
        case Method::Exact: {
            const NodeGraph tree = build_exact_tree(scenarios);
            const double built = seconds_since(start);
            outcome.result = solve_node_dp(model, grid, tree, scenarios, options);
            outcome.build_seconds = built;
            break;
        }
        case Method::Clustered: {
            const ClusterModel clusters = build_cluster_model(scenarios, config.clustering);
            const double built = seconds_since(start);
            outcome.result = solve_cluster_dp(model, grid, clusters, scenarios, options);
            outcome.build_seconds = built;
            break;
        }
        case Method::Markov: {
            const Quantization quant =
                quantize_disturbance(scenarios, config.markov.bins, config.markov.placement);
            const MarkovModel markov = estimate_transition(scenarios, quant);
            const double built = seconds_since(start);
            outcome.result = solve_markov_dp(model, grid, markov, options);
            outcome.build_seconds = built;
            break;
        }
    }
    outcome.build_seconds += outcome.result.build_seconds;
    return outcome;
}

struct EvaluationRun {
    std::vector<ClosedLoopTrace> traces;
    double average_cost = 0.0;
    int infeasible_events = 0;
};

EvaluationRun run_closed_loop(const SolveResult& policy, const SystemModel& model,
                              const ScenarioSet& scenarios, SimulationMode mode) {
    EvaluationRun run;
    run.traces.reserve(scenarios.sequences.size());
    for (std::size_t i = 0; i < scenarios.sequences.size(); ++i) {
        run.traces.push_back(
            simulate_sequence(policy, model, scenarios.sequences[i], static_cast<int>(i), mode));
        run.average_cost += scenarios.sequences[i].probability * run.traces.back().total_cost;
        run.infeasible_events += run.traces.back().infeasible_events;
    }
    return run;
}

std::string seconds_text(double s) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(3) << s << " s";
    return out.str();
}

std::string cost_text(double c) {
    std::ostringstream out;
    out << std::fixed << std::setprecision(4) << c;
    return out.str();
}

}  // namespace

std::string resolve_out_dir(const PathsConfig& paths) {
    if (!paths.out_dir.empty()) return paths.out_dir;
    if (const char* env = std::getenv("SCTREE_OUT_DIR"); env && *env) return env;
    return ".";
}

std::string resolve_path(const std::string& name, const std::string& out_dir) {
    if (!name.empty() && name.front() == '/') return name;
    return out_dir + "/" + name;
}

int cmd_generate(const RunConfig& config, std::ostream& out) {
    const ScenarioSet scenarios = generate_scenarios(config.generator);
    const std::string path =
        resolve_path(config.paths.scenarios, resolve_out_dir(config.paths));
    save_scenarios(scenarios, path);
    out << "generated " << scenarios.sequences.size() << " sequences over horizon "
        << scenarios.horizon << " (family " << gen_family_name(config.generator.family)
        << ", seed " << config.generator.seed << ") -> " << path << "\n";
    return 0;
}

int cmd_solve(const RunConfig& config, Method method, std::ostream& out) {
    const std::string out_dir = resolve_out_dir(config.paths);
    const ScenarioSet scenarios =
        load_scenarios(resolve_path(config.paths.scenarios, out_dir));
    const SystemModel model = make_model(config.plant, scenarios.horizon);
    const Grid grid = make_grid(config.plant, config.grid);

    const SolveOutcome outcome = solve_method(config, method, model, grid, scenarios);
    const std::string path = resolve_path(config.paths.policy, out_dir);
    save_policy(outcome.result, path);

    out << method_name(method) << ": model build " << seconds_text(outcome.build_seconds)
        << ", backward induction " << seconds_text(outcome.result.solve_seconds) << "\n";
    out << "information states per step:";
    for (const int n : outcome.result.catalog.states_per_step) out << ' ' << n;
    out << "\nroot value " << cost_text(outcome.result.root_value) << " -> " << path << "\n";
    return 0;
}

int cmd_simulate(const RunConfig& config, std::ostream& out) {
    const std::string out_dir = resolve_out_dir(config.paths);
    const SolveResult policy = load_policy(resolve_path(config.paths.policy, out_dir));
    const ScenarioSet scenarios =
        load_scenarios(resolve_path(config.paths.scenarios, out_dir));
    const SystemModel model = make_model(config.plant, policy.horizon);

    const auto start = std::chrono::steady_clock::now();
    const EvaluationRun run =
        run_closed_loop(policy, model, scenarios, config.simulation.mode);
    const double elapsed = seconds_since(start);

    const std::string path =
        resolve_path("trajectory_" + method_name(policy.method) + ".csv", out_dir);
    write_trajectory_csv(run.traces, scenarios, path);

    out << method_name(policy.method) << " closed loop over " << scenarios.sequences.size()
        << " sequences (" << sim_mode_name(config.simulation.mode) << " mode)\n";
    out << "average cost " << cost_text(run.average_cost) << ", policy root value "
        << cost_text(policy.root_value) << ", infeasible events " << run.infeasible_events
        << ", simulation " << seconds_text(elapsed) << "\n";
    out << "trajectories -> " << path << "\n";
    return 0;
}

int cmd_compare(const RunConfig& config, std::ostream& out) {
    const std::string out_dir = resolve_out_dir(config.paths);
    std::string stage = "load scenarios";
    try {
        const ScenarioSet scenarios =
            load_scenarios(resolve_path(config.paths.scenarios, out_dir));
        const SystemModel model = make_model(config.plant, scenarios.horizon);
        const Grid grid = make_grid(config.plant, config.grid);

        std::vector<SummaryRow> rows;
        std::optional<double> exact_cost;
        for (const Method method : config.solve.methods) {
            stage = "solve " + method_name(method);
            const SolveOutcome outcome = solve_method(config, method, model, grid, scenarios);

            stage = "simulate " + method_name(method);
            const EvaluationRun run =
                run_closed_loop(outcome.result, model, scenarios, config.simulation.mode);
            write_trajectory_csv(
                run.traces, scenarios,
                resolve_path("trajectory_" + method_name(method) + ".csv", out_dir));
            if (method == Method::Clustered) {
                const ClusterModel clusters = build_cluster_model(scenarios, config.clustering);
                write_cluster_report_csv(scenarios, clusters.stages,
                                         resolve_path("cluster_report.csv", out_dir));
            }

            rows.push_back({method_name(method), run.average_cost,
                            outcome.build_seconds + outcome.result.solve_seconds,
                            run.infeasible_events});
            if (method == Method::Exact) exact_cost = run.average_cost;
        }

        stage = "report";
        write_summary_csv(rows, resolve_path("summary.csv", out_dir));

        out << std::left << std::setw(12) << "Method" << " | " << std::right << std::setw(12)
            << "Average cost" << " | " << std::setw(16) << "Computation time" << "\n";
        out << std::string(12, '-') << "-+-" << std::string(12, '-') << "-+-"
            << std::string(16, '-') << "\n";
        for (const SummaryRow& row : rows) {
            out << std::left << std::setw(12) << row.method << " | " << std::right
                << std::setw(12) << cost_text(row.average_cost) << " | " << std::setw(16)
                << seconds_text(row.wall_seconds) << "\n";
        }

        bool ordered = true;
        if (exact_cost && config.simulation.mode == SimulationMode::Quantized) {
            for (const SummaryRow& row : rows)
                if (row.average_cost + 1e-9 < *exact_cost) ordered = false;
            if (!ordered)
                out << "warning: a method beat the exact-tree average cost in quantized mode\n";
        }
        return ordered ? 0 : 1;
    } catch (const std::exception& err) {
        throw std::runtime_error("compare stage \"" + stage + "\": " + err.what());
    }
}

int cmd_cluster_report(const RunConfig& config, std::ostream& out) {
    const std::string out_dir = resolve_out_dir(config.paths);
    const ScenarioSet scenarios =
        load_scenarios(resolve_path(config.paths.scenarios, out_dir));
    const std::vector<StageClustering> stages = cluster_all_steps(scenarios, config.clustering);

    const std::string path = resolve_path("cluster_report.csv", out_dir);
    write_cluster_report_csv(scenarios, stages, path);

    for (const StageClustering& stage : stages) {
        out << "step " << stage.step << ": " << stage.distinct_points
            << " distinct prefixes -> " << stage.centers.size() << " clusters, potential "
            << format_double(stage.potential) << ", " << stage.iterations << " iterations\n";
    }
    out << "assignments -> " << path << "\n";
    return 0;
}

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Predictive optimal control against predicted disturbance-sequence sets"};
    app.require_subcommand(1);
    app.footer("Config keys and their defaults:\n" + config_to_json(RunConfig{}));

    std::string config_path;
    app.add_option("--config", config_path, "JSON config file; omitted keys use defaults")
        ->check(CLI::ExistingFile);

    std::optional<std::string> scenarios_path;
    std::optional<std::string> policy_path;
    std::optional<std::string> out_dir;
    std::optional<std::uint64_t> seed;
    std::optional<int> threads;
    std::optional<std::string> sim_mode;
    std::optional<std::string> value_mode;
    std::string method = "exact";

    const auto add_common = [&](CLI::App* cmd, bool takes_policy) {
        cmd->add_option("--scenarios", scenarios_path, "scenario JSON file name");
        if (takes_policy) cmd->add_option("--policy", policy_path, "policy JSON file name");
        cmd->add_option("--out", out_dir, "output directory (default $SCTREE_OUT_DIR or .)");
        cmd->add_option("--seed", seed, "overrides generator, clustering and sampling seeds");
        cmd->add_option("--threads", threads, "solver worker threads");
        cmd->add_option("--sim-mode", sim_mode, "quantized or continuous");
        cmd->add_option("--value-mode", value_mode, "nearest or interpolate");
    };

    CLI::App* generate = app.add_subcommand("generate", "write a scenario set from the config");
    add_common(generate, false);
    CLI::App* solve = app.add_subcommand("solve", "solve one method and store its policy");
    solve->add_option("--method", method, "nominal, exact, clustered or markov");
    add_common(solve, true);
    CLI::App* simulate =
        app.add_subcommand("simulate", "roll a stored policy over a scenario set");
    add_common(simulate, true);
    CLI::App* compare =
        app.add_subcommand("compare", "solve, simulate and tabulate all configured methods");
    add_common(compare, false);
    CLI::App* cluster_report =
        app.add_subcommand("cluster-report", "cluster prefixes and write the assignment CSV");
    add_common(cluster_report, false);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err);
    }

    try {
        RunConfig config = config_path.empty() ? RunConfig{} : load_config(config_path);
        if (scenarios_path) config.paths.scenarios = *scenarios_path;
        if (policy_path) config.paths.policy = *policy_path;
        if (out_dir) config.paths.out_dir = *out_dir;
        if (seed) {
            config.generator.seed = *seed;
            config.clustering.seed = *seed;
            config.solve.sample_seed = *seed;
        }
        if (threads) config.solve.threads = *threads;
        if (sim_mode) config.simulation.mode = sim_mode_from_name(*sim_mode);
        if (value_mode) config.solve.value_mode = value_mode_from_name(*value_mode);

        if (generate->parsed()) return cmd_generate(config, out);
        if (solve->parsed()) return cmd_solve(config, method_from_name(method), out);
        if (simulate->parsed()) return cmd_simulate(config, out);
        if (compare->parsed()) return cmd_compare(config, out);
        if (cluster_report->parsed()) return cmd_cluster_report(config, out);
        err << "error: no subcommand\n";
        return 2;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return 1;
    }
}

}  // namespace sctree
