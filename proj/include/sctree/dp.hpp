#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sctree/clustering.hpp"
#include "sctree/markov.hpp"
#include "sctree/node_graph.hpp"
#include "sctree/scenario.hpp"
#include "sctree/system_model.hpp"

namespace sctree {

enum class Method { Nominal, Exact, Clustered, Markov };

std::string method_name(Method method);
Method method_from_name(const std::string& name);

enum class ValueMode { Nearest, Interpolate };

std::string value_mode_name(ValueMode mode);
ValueMode value_mode_from_name(const std::string& name);

struct SolveOptions {
    ValueMode value_mode = ValueMode::Nearest;
    double infeasibility_penalty = 1000.0;
    int threads = 1;               // x grid rows computed concurrently per step
    std::size_t sample_size = 0;   // per-node member subsample; 0 = use all
    std::uint64_t sample_seed = 0;
    bool use_transition_table = false;
};

/// Value/policy tables for one step: column-major in the information state,
/// entry (x, s) lives at index s * nx + x. Policy entries are u grid indices.
struct StageTable {
    int states = 0;
    std::vector<double> values;
    std::vector<std::uint16_t> policy;
};

/// What a policy needs at runtime to resolve an observed prefix to an
/// information state. Only the fields of the owning method are filled.
struct InfoCatalog {
    std::vector<int> states_per_step;
    // Exact: canonical prefix keys per node, in node order, plus the rounding.
    int key_decimals = kDefaultKeyDecimals;
    std::vector<std::vector<std::vector<std::int64_t>>> prefix_keys;
    // Clustered: per-step cluster centers (dimension step+1).
    std::vector<std::vector<std::vector<double>>> centers;
    // Markov: per-step bin centers and reachability.
    std::vector<std::vector<double>> bin_centers;
    std::vector<std::vector<std::uint8_t>> bin_reachable;
    // Nominal: the sequence the policy was solved for.
    std::vector<double> nominal_sequence;
};

struct SolveResult {
    Method method = Method::Nominal;
    int horizon = 0;
    Grid grid;
    SolveOptions options;
    InfoCatalog catalog;
    std::vector<StageTable> stages;    // k = 0..horizon-1
    std::vector<double> terminal;      // J_N on the x grid
    std::vector<double> root_weights;  // probability of each step-0 state
    double root_value = 0.0;           // sum_i root_weights[i] * J_0(x0, i)
    double build_seconds = 0.0;        // model preparation (e.g. static table)
    double solve_seconds = 0.0;        // backward induction

    double value(int step, int x_index, int state) const {
        return stages[static_cast<std::size_t>(step)]
            .values[static_cast<std::size_t>(state) *
                        static_cast<std::size_t>(grid.x_values.size()) +
                    static_cast<std::size_t>(x_index)];
    }
    int policy(int step, int x_index, int state) const {
        return stages[static_cast<std::size_t>(step)]
            .policy[static_cast<std::size_t>(state) *
                        static_cast<std::size_t>(grid.x_values.size()) +
                    static_cast<std::size_t>(x_index)];
    }
};

/// Static map from (x grid index, u grid index, distinct step-k disturbance)
/// to the exact dynamics/cost evaluations. Lookups reproduce direct calls
/// bit for bit.
struct TransitionTable {
    std::vector<std::vector<double>> w_values;  // [step], sorted distinct values
    std::vector<std::vector<double>> next_x;    // [step], (w, x, u) row-major
    std::vector<std::vector<double>> cost;      // [step], same layout
};

TransitionTable precompute_transition_table(const SystemModel& model, const Grid& grid,
                                            const ScenarioSet& scenarios);

/// Deterministic-disturbance dynamic programming along one nominal sequence.
SolveResult solve_nominal(const SystemModel& model, const Grid& grid,
                          const std::vector<double>& nominal_w, const SolveOptions& options = {});

/// Backward induction over the augmented state (x grid point, graph node),
/// for exact trees and clustered graphs alike. Stage expectations run over
/// the node's member sequences with conditional weights; each member's
/// control is the two-level projection of the candidate v for that member's
/// observed disturbance.
SolveResult solve_node_dp(const SystemModel& model, const Grid& grid, const NodeGraph& graph,
                          const ScenarioSet& scenarios, const SolveOptions& options = {});

/// solve_node_dp on the cluster graph, with the cluster centers attached to
/// the catalog for runtime prefix resolution.
SolveResult solve_cluster_dp(const SystemModel& model, const Grid& grid,
                             const ClusterModel& clusters, const ScenarioSet& scenarios,
                             const SolveOptions& options = {});

/// Backward induction over (x grid point, step-k bin): stage disturbance is
/// the bin center, successors weighted by the transition row. Unreachable
/// bins are skipped (zero value/policy entries, never visited).
SolveResult solve_markov_dp(const SystemModel& model, const Grid& grid, const MarkovModel& markov,
                            const SolveOptions& options = {});

/// Expected closed-loop cost of the stored policy on the disturbance process
/// the policy was solved against, by forward propagation of the joint
/// (x grid point, information state) distribution through the same branch
/// structure the solver used. Matches the root value up to floating-point
/// regrouping for a correctly recorded policy.
double closed_loop_model_value(const SolveResult& result, const SystemModel& model,
                               const NodeGraph& graph, const ScenarioSet& scenarios);
double closed_loop_model_value(const SolveResult& result, const SystemModel& model,
                               const MarkovModel& markov);
double closed_loop_model_value(const SolveResult& result, const SystemModel& model,
                               const std::vector<double>& nominal_w);

/// Policy JSON round trip; bit-exact for every numeric field.
std::string policy_to_json(const SolveResult& result);
SolveResult policy_from_json(const std::string& json_text);
void save_policy(const SolveResult& result, const std::string& path);
SolveResult load_policy(const std::string& path);

}  // namespace sctree
