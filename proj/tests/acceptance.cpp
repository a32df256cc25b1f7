// End-to-end acceptance suite. Each numbered check prints one [PASS]/[FAIL]
// line; the process exits nonzero when any required check fails. Check 8 is
// a reported performance target ([SOFT-PASS]/[SOFT-FAIL]) and never affects
// the exit code.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "oracle.hpp"
#include "sctree/clustering.hpp"
#include "sctree/controller.hpp"
#include "sctree/dp.hpp"
#include "sctree/generator.hpp"
#include "sctree/markov.hpp"
#include "sctree/node_graph.hpp"
#include "sctree/rng.hpp"
#include "sctree/scenario.hpp"
#include "sctree/system_model.hpp"

namespace {

using namespace sctree;

struct Outcome {
    bool pass = false;
    std::string detail;
};

template <typename... Args>
std::string text(const char* format, Args... args) {
    char buffer[512];
    std::snprintf(buffer, sizeof(buffer), format, args...);
    return std::string(buffer);
}

double now_seconds() {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
}

SolveOptions fast_options() {
    SolveOptions options;
    options.threads = 8;
    return options;
}

ScenarioSet make_walk(int count, std::uint64_t seed) {
    GenSpec spec;
    spec.family = GenFamily::BranchingWalk;
    spec.count = count;
    spec.seed = seed;
    return generate_scenarios(spec);
}

std::vector<double> mean_sequence(const ScenarioSet& scenarios) {
    std::vector<double> mean(static_cast<std::size_t>(scenarios.horizon), 0.0);
    for (const DisturbanceSequence& seq : scenarios.sequences)
        for (int k = 0; k < scenarios.horizon; ++k)
            mean[static_cast<std::size_t>(k)] +=
                seq.probability * seq.values[static_cast<std::size_t>(k)];
    return mean;
}

SolveResult solve_exact(const SystemModel& model, const Grid& grid, const ScenarioSet& scenarios,
                        const SolveOptions& options) {
    return solve_node_dp(model, grid, build_exact_tree(scenarios), scenarios, options);
}

SolveResult solve_clustered(const SystemModel& model, const Grid& grid,
                            const ScenarioSet& scenarios, int clusters,
                            const SolveOptions& options, ClusterModel* model_out = nullptr) {
    ClusteringSpec spec;
    spec.clusters = clusters;
    ClusterModel clustering = build_cluster_model(scenarios, spec);
    SolveResult result = solve_cluster_dp(model, grid, clustering, scenarios, options);
    if (model_out != nullptr) *model_out = std::move(clustering);
    return result;
}

SolveResult solve_markov(const SystemModel& model, const Grid& grid, const ScenarioSet& scenarios,
                         int bins, const SolveOptions& options, MarkovModel* model_out = nullptr) {
    MarkovModel chain = estimate_transition(scenarios, quantize_disturbance(scenarios, bins));
    SolveResult result = solve_markov_dp(model, grid, chain, options);
    if (model_out != nullptr) *model_out = std::move(chain);
    return result;
}

// 1. Exact-tree DP matches the memoized recursive reference solver on
// randomized tiny instances: short horizons, few sequences, coarse grids,
// randomized linear plant.
Outcome check_oracle() {
    const double start = now_seconds();
    double worst = 0.0;
    for (int trial = 0; trial < 50; ++trial) {
        Rng rng = Rng::stream(99, static_cast<std::uint64_t>(trial));
        const int horizon = 1 + static_cast<int>(rng.below(4));
        const int count = 1 + static_cast<int>(rng.below(8));
        const int nx = 5 + static_cast<int>(rng.below(17));
        const int nu = 2 + static_cast<int>(rng.below(8));

        SystemModel model;
        model.horizon = horizon;
        const double a = rng.uniform(0.6, 1.2);
        model.x_min = -rng.uniform(1.0, 2.0);
        model.x_max = rng.uniform(1.0, 2.0);
        model.u_min = rng.uniform(-0.5, 0.1);
        model.u_max = model.u_min + rng.uniform(0.5, 1.5);
        model.x0 = rng.uniform(model.x_min, model.x_max);
        const double target = rng.uniform(model.x_min, model.x_max);
        model.dynamics = [a](int, double x, double u, double w) { return a * x + u - w; };
        model.running_cost = [](int, double x, double u, double) {
            return u * u + 0.1 * x * x;
        };
        model.terminal_cost = [target](double x) { return (x - target) * (x - target); };

        const Grid grid = make_grid(
            model.x_min, model.x_max, (model.x_max - model.x_min) / static_cast<double>(nx - 1),
            model.u_min, model.u_max, (model.u_max - model.u_min) / static_cast<double>(nu - 1));

        // A three-letter alphabet per step keeps shared prefixes common, so
        // the tree branches and nodes carry several member sequences.
        std::vector<std::vector<double>> alphabet(static_cast<std::size_t>(horizon));
        for (auto& letters : alphabet)
            for (int i = 0; i < 3; ++i) letters.push_back(rng.uniform(-0.5, 0.5));

        ScenarioSet scenarios;
        scenarios.horizon = horizon;
        double total = 0.0;
        for (int s = 0; s < count; ++s) {
            DisturbanceSequence seq;
            for (int k = 0; k < horizon; ++k)
                seq.values.push_back(alphabet[static_cast<std::size_t>(k)][rng.below(3)]);
            seq.probability = rng.uniform(0.1, 1.0);
            total += seq.probability;
            scenarios.sequences.push_back(std::move(seq));
        }
        for (DisturbanceSequence& seq : scenarios.sequences) seq.probability /= total;

        const NodeGraph tree = build_exact_tree(scenarios);
        const SolveOptions options = fast_options();
        const SolveResult result = solve_node_dp(model, grid, tree, scenarios, options);

        refsolve::Reference reference(model, grid, scenarios, refsolve::structure_from_graph(tree),
                                      options.infeasibility_penalty);
        worst = std::max(worst, std::abs(result.root_value - reference.root()));
    }
    const double elapsed = now_seconds() - start;
    return {worst <= 1e-9,
            text("max root gap %.3e over 50 random instances in %.1f s", worst, elapsed)};
}

// 2. Probability-weighted closed-loop cost in quantized mode reproduces each
// solver's root value on the distribution that solver was built from: member
// sequences for the exact tree, the cluster branch process for the clustered
// model, enumerated chain paths for the Markov baseline, the mean sequence
// for the nominal policy.
Outcome check_self_consistency(const ScenarioSet& set4, const ScenarioSet& set200) {
    double worst = 0.0;
    std::string worst_label = "none";
    int infeasible = 0;
    const auto note = [&](const char* label, std::size_t size, double gap) {
        if (gap > worst) {
            worst = gap;
            worst_label = text("%s on %zu sequences", label, size);
        }
    };

    for (const ScenarioSet* scenarios : {&set4, &set200}) {
        const SystemModel model = reference_plant(scenarios->horizon);
        const Grid grid = make_grid(model);
        const SolveOptions options = fast_options();

        const SolveResult exact = solve_exact(model, grid, *scenarios, options);
        const EvaluationSummary exact_eval =
            evaluate_policy(exact, model, *scenarios, SimulationMode::Quantized);
        infeasible += exact_eval.infeasible_events;
        note("exact", scenarios->size(),
             std::abs(exact_eval.average_cost - exact.root_value));

        ClusterModel clustering;
        const SolveResult clustered =
            solve_clustered(model, grid, *scenarios, 10, options, &clustering);
        note("clustered", scenarios->size(),
             std::abs(closed_loop_model_value(clustered, model, clustering.graph, *scenarios) -
                      clustered.root_value));
        if (scenarios == &set4) {
            // Ten clusters saturate the four-sequence set, so the branch
            // process coincides with the raw sequences and the per-sequence
            // rollout average must match as well.
            const EvaluationSummary clustered_eval =
                evaluate_policy(clustered, model, *scenarios, SimulationMode::Quantized);
            infeasible += clustered_eval.infeasible_events;
            note("clustered rollouts", scenarios->size(),
                 std::abs(clustered_eval.average_cost - clustered.root_value));
        }

        MarkovModel chain;
        const SolveResult markov = solve_markov(model, grid, *scenarios, 10, options, &chain);
        double markov_cost = 0.0;
        try {
            const ScenarioSet paths = enumerate_chain_paths(chain, 200000);
            const EvaluationSummary markov_eval =
                evaluate_policy(markov, model, paths, SimulationMode::Quantized);
            infeasible += markov_eval.infeasible_events;
            markov_cost = markov_eval.average_cost;
        } catch (const std::runtime_error&) {
            markov_cost = closed_loop_model_value(markov, model, chain);
        }
        note("markov", scenarios->size(), std::abs(markov_cost - markov.root_value));

        const std::vector<double> mean = mean_sequence(*scenarios);
        const SolveResult nominal = solve_nominal(model, grid, mean, options);
        const ClosedLoopTrace trace = simulate_sequence(
            nominal, model, DisturbanceSequence{mean, 1.0}, 0, SimulationMode::Quantized);
        infeasible += trace.infeasible_events;
        note("nominal", 1, std::abs(trace.total_cost - nominal.root_value));
    }

    return {worst <= 1e-9 && infeasible == 0,
            text("worst gap %.3e (%s), %d infeasible events", worst, worst_label.c_str(),
                 infeasible)};
}

// 3. Closed-loop cost ordering on raw sequence sets: exact beats the Markov
// baseline strictly on the simple converging set; on a large walk set exact
// is best and the clustered relative gap stays below the Markov one.
Outcome check_ordering(const ScenarioSet& set4, const ScenarioSet& set600) {
    const SolveOptions options = fast_options();

    const SystemModel model4 = reference_plant(set4.horizon);
    const Grid grid4 = make_grid(model4);
    const EvaluationSummary simple_exact = evaluate_policy(
        solve_exact(model4, grid4, set4, options), model4, set4, SimulationMode::Quantized);
    const EvaluationSummary simple_markov =
        evaluate_policy(solve_markov(model4, grid4, set4, 10, options), model4, set4,
                        SimulationMode::Quantized);

    const SystemModel model600 = reference_plant(set600.horizon);
    const Grid grid600 = make_grid(model600);
    const EvaluationSummary exact = evaluate_policy(
        solve_exact(model600, grid600, set600, options), model600, set600,
        SimulationMode::Quantized);
    const EvaluationSummary clustered = evaluate_policy(
        solve_clustered(model600, grid600, set600, 10, options), model600, set600,
        SimulationMode::Quantized);
    const EvaluationSummary markov = evaluate_policy(
        solve_markov(model600, grid600, set600, 10, options), model600, set600,
        SimulationMode::Quantized);

    const double gap_clustered = (clustered.average_cost - exact.average_cost) / exact.average_cost;
    const double gap_markov = (markov.average_cost - exact.average_cost) / exact.average_cost;
    const int infeasible = simple_exact.infeasible_events + simple_markov.infeasible_events +
                           exact.infeasible_events + clustered.infeasible_events +
                           markov.infeasible_events;

    const bool pass = simple_exact.average_cost < simple_markov.average_cost &&
                      exact.average_cost <= clustered.average_cost + 1e-9 &&
                      exact.average_cost <= markov.average_cost + 1e-9 &&
                      gap_clustered < gap_markov && infeasible == 0;
    return {pass,
            text("simple %.4f < %.4f; %zu-sequence set exact %.4f, clustered +%.2f%%, "
                 "markov +%.2f%%, %d infeasible events",
                 simple_exact.average_cost, simple_markov.average_cost, set600.size(),
                 exact.average_cost, 100.0 * gap_clustered, 100.0 * gap_markov, infeasible)};
}

// 4. A clustered solve with at least as many clusters as distinct prefixes at
// every step reproduces the exact-tree root value.
Outcome check_saturation(const ScenarioSet& set4, const ScenarioSet& set50) {
    const SolveOptions options = fast_options();
    double worst = 0.0;
    for (const auto& [scenarios, clusters] :
         {std::pair<const ScenarioSet*, int>{&set4, 10}, {&set50, 50}}) {
        const SystemModel model = reference_plant(scenarios->horizon);
        const Grid grid = make_grid(model);
        ClusterModel clustering;
        const SolveResult clustered =
            solve_clustered(model, grid, *scenarios, clusters, options, &clustering);
        for (const StageClustering& stage : clustering.stages)
            if (stage.distinct_points > clusters)
                return {false, text("step %d has %d distinct prefixes for %d clusters",
                                    stage.step, stage.distinct_points, clusters)};
        const SolveResult exact = solve_exact(model, grid, *scenarios, options);
        worst = std::max(worst, std::abs(clustered.root_value - exact.root_value));
    }
    return {worst <= 1e-12, text("max root gap %.3e across both saturated solves", worst)};
}

// 5. Clustering behaves like k-means should: the Lloyd potential never
// increases, results are deterministic in the seed, and enough clusters
// drive the potential to zero.
Outcome check_clustering_properties(const ScenarioSet& set4, const ScenarioSet& set200) {
    for (int trial = 0; trial < 20; ++trial) {
        Rng rng = Rng::stream(99, 1000 + static_cast<std::uint64_t>(trial));
        const std::size_t dims = 1 + rng.below(4);
        const std::size_t count = 5 + rng.below(40);
        const int clusters = 2 + static_cast<int>(rng.below(6));
        std::vector<std::vector<double>> points(count);
        std::vector<double> weights(count);
        for (std::size_t p = 0; p < count; ++p) {
            for (std::size_t d = 0; d < dims; ++d) points[p].push_back(rng.uniform(-1.0, 1.0));
            weights[p] = rng.uniform(0.1, 1.0);
        }
        std::vector<std::vector<double>> centers = kmeans_pp_seed(points, weights, clusters, rng);
        const LloydResult lloyd = lloyd_iterate(points, weights, centers, 100);
        for (std::size_t i = 1; i < lloyd.potential_history.size(); ++i)
            if (lloyd.potential_history[i] > lloyd.potential_history[i - 1] + 1e-12)
                return {false, text("potential rose on trial %d at pass %zu", trial, i)};

        std::vector<std::vector<double>> exhaustive = points;
        const LloydResult saturated =
            lloyd_iterate(points, weights, exhaustive, 100);
        if (saturated.potential != 0.0)
            return {false, text("potential %.3e with one center per point", saturated.potential)};
    }

    ClusteringSpec spec;
    spec.clusters = 7;
    spec.seed = 3;
    const std::vector<StageClustering> first = cluster_all_steps(set200, spec);
    const std::vector<StageClustering> second = cluster_all_steps(set200, spec);
    for (std::size_t k = 0; k < first.size(); ++k)
        if (first[k].assignment != second[k].assignment || first[k].centers != second[k].centers ||
            first[k].potential != second[k].potential)
            return {false, text("repeated clustering differs at step %zu", k)};

    ClusteringSpec saturated_spec;
    saturated_spec.clusters = 10;
    for (const StageClustering& stage : cluster_all_steps(set4, saturated_spec))
        if (stage.potential != 0.0)
            return {false,
                    text("step %d potential %.3e at saturation", stage.step, stage.potential)};

    return {true, "20 random Lloyd runs monotone, repeat runs bitwise equal, saturated "
                  "potentials exactly zero"};
}

// 6. The structural validators accept every generated set used by this
// suite: exact-tree partition and nesting, node probability sums, stochastic
// transition rows, and the Markov marginal recursion.
Outcome check_validators(const std::vector<std::pair<const ScenarioSet*, int>>& sets) {
    for (const auto& [scenarios, clusters] : sets) {
        validate_graph(build_exact_tree(*scenarios), *scenarios);
        ClusteringSpec spec;
        spec.clusters = clusters;
        validate_graph(build_cluster_model(*scenarios, spec).graph, *scenarios);
        validate_markov(estimate_transition(*scenarios, quantize_disturbance(*scenarios, 10)));
    }
    return {true, text("exact, clustered and Markov validators clean on %zu sets", sets.size())};
}

// 7. The precomputed transition table changes nothing: value tables, policy
// tables, terminal values and the root are bit-identical with and without it.
Outcome check_table_transparency(const ScenarioSet& set4) {
    const SystemModel model = reference_plant(set4.horizon);
    const Grid grid = make_grid(model);
    SolveOptions plain = fast_options();
    SolveOptions tabled = plain;
    tabled.use_transition_table = true;

    const SolveResult direct = solve_exact(model, grid, set4, plain);
    const SolveResult stored = solve_exact(model, grid, set4, tabled);
    bool same = direct.root_value == stored.root_value && direct.terminal == stored.terminal;
    for (std::size_t k = 0; same && k < direct.stages.size(); ++k)
        same = direct.stages[k].values == stored.stages[k].values &&
               direct.stages[k].policy == stored.stages[k].policy;
    return {same, same ? "value and policy tables bit-identical with the static table"
                       : "tables differ with the static table enabled"};
}

// 8. Reported solve-time target on a large generated set, single threaded.
void report_performance(const ScenarioSet& large) {
    const SystemModel model = reference_plant(large.horizon);
    const Grid grid = make_grid(model);
    SolveOptions options;
    options.threads = 1;

    const SolveResult exact = solve_exact(model, grid, large, options);
    const double exact_seconds = exact.build_seconds + exact.solve_seconds;
    const SolveResult clustered = solve_clustered(model, grid, large, 10, options);
    const double clustered_seconds = clustered.build_seconds + clustered.solve_seconds;

    const bool pass = exact_seconds < 60.0 && clustered_seconds < 10.0;
    std::printf("[%s] 8. solve time, single thread: exact %.2f s (target 60) and clustered "
                "%.2f s (target 10) on %zu sequences, %d x %d grid\n",
                pass ? "SOFT-PASS" : "SOFT-FAIL", exact_seconds, clustered_seconds, large.size(),
                grid.nx(), grid.nu());
}

// 9. The two-level control projection reproduces its documented cases on the
// benchmark plant.
Outcome check_projection() {
    const SystemModel model = reference_plant(10);
    const Grid grid = make_grid(model);
    const double x = grid.x(grid.resolve_x(model.x0));

    const std::vector<double> admissible = admissible_controls(model, grid, 0, x, 0.3);
    if (admissible.size() != 35 || admissible.front() != 0.0 ||
        std::abs(admissible.back() - 0.68) > 1e-12)
        return {false, text("admissible set at (x0, w=0.3): %zu controls, last %.4f",
                            admissible.size(), admissible.empty() ? 0.0 : admissible.back())};

    const ControlDecision pass_through = apply_two_level(model, grid, 0, x, 0.5, 0.3);
    const ControlDecision clamped = apply_two_level(model, grid, 0, x, 1.0, 0.3);
    const ControlDecision fallback = apply_two_level(model, grid, 0, 2.0, 0.0, -1.6);
    const bool pass = std::abs(pass_through.u - 0.5) <= 1e-12 && !pass_through.infeasible &&
                      std::abs(clamped.u - 0.68) <= 1e-12 && !clamped.infeasible &&
                      fallback.u == 0.0 && fallback.infeasible;
    return {pass, text("admissible pass-through u=%.2f, bound clamp u=%.2f, empty-set "
                       "fallback u=%.2f flagged=%d",
                       pass_through.u, clamped.u, fallback.u, fallback.infeasible ? 1 : 0)};
}

}  // namespace

int main() {
    const ScenarioSet set4 = generate_scenarios(GenSpec{});
    const ScenarioSet set50 = make_walk(50, 2);
    const ScenarioSet set200 = make_walk(200, 7);
    const ScenarioSet set600 = make_walk(600, 4);
    const ScenarioSet set1447 = make_walk(1447, 4);

    int failures = 0;
    const auto run = [&failures](int id, const char* name, const auto& check) {
        Outcome outcome;
        try {
            outcome = check();
        } catch (const std::exception& error) {
            outcome = {false, text("exception: %s", error.what())};
        }
        std::printf("[%s] %d. %s: %s\n", outcome.pass ? "PASS" : "FAIL", id, name,
                    outcome.detail.c_str());
        if (!outcome.pass) ++failures;
    };

    run(1, "exact DP vs reference solver", [] { return check_oracle(); });
    run(2, "closed-loop self-consistency",
        [&] { return check_self_consistency(set4, set200); });
    run(3, "closed-loop cost ordering", [&] { return check_ordering(set4, set600); });
    run(4, "saturated clustering equivalence", [&] { return check_saturation(set4, set50); });
    run(5, "clustering properties", [&] { return check_clustering_properties(set4, set200); });
    run(6, "structural validators", [&] {
        return check_validators({{&set4, 10}, {&set50, 50}, {&set200, 10}, {&set600, 10},
                                 {&set1447, 10}});
    });
    run(7, "static-table transparency", [&] { return check_table_transparency(set4); });
    report_performance(set1447);
    run(9, "control projection cases", [] { return check_projection(); });

    std::printf("acceptance: %d/8 required checks passed\n", 8 - failures);
    return failures == 0 ? 0 : 1;
}
