#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sctree/scenario.hpp"

namespace sctree {

enum class GraphKind { Exact, Clustered };

/// One information-state node at a given step: a set of disturbance
/// sequences, its total probability, and the step-k values present among
/// its members (a singleton for exact trees).
struct StageNode {
    int step = 0;
    std::vector<int> member_ids;          // ascending sequence indices
    std::vector<double> member_weights;   // parallel to member_ids, sums to probability
    double probability = 0.0;
    std::vector<double> representative_w; // distinct step-k values, ascending
};

/// Sparse transition entry: P(child | this node).
struct Transition {
    int child = 0;
    double probability = 0.0;
};

/// Per-step partition (exact tree) or covering (clustered approximation) of
/// the sequence set, with stage transition probabilities between consecutive
/// steps. Immutable once built.
struct NodeGraph {
    GraphKind kind = GraphKind::Exact;
    int horizon = 0;
    int key_decimals = kDefaultKeyDecimals;  // rounding used to group prefixes

    // stages[k] lists the nodes at step k, k in 0..horizon-1.
    std::vector<std::vector<StageNode>> stages;
    // transitions[k][i] lists nonzero P(j | i) from step k to k+1, k < horizon-1.
    std::vector<std::vector<std::vector<Transition>>> transitions;
    // membership[k][seq] = index of the node containing sequence seq at step k.
    std::vector<std::vector<int>> membership;

    int num_nodes(int step) const { return static_cast<int>(stages[static_cast<std::size_t>(step)].size()); }
    const StageNode& node(int step, int id) const {
        return stages[static_cast<std::size_t>(step)][static_cast<std::size_t>(id)];
    }
};

/// Builds the exact scenario tree: nodes at step k are the classes of
/// sequences sharing the same prefix w_0..w_k under canonical rounding,
/// ordered lexicographically by prefix. Node probability is the summed
/// member probability; P(j|i) = p(j)/p(i) for child nodes, 0 otherwise.
NodeGraph build_exact_tree(const ScenarioSet& scenarios, int decimals = kDefaultKeyDecimals);

/// Dense transition row from node `node` at step `step` to every node at
/// step+1. Throws on out-of-range step or node id.
std::vector<double> transition_row(const NodeGraph& graph, int step, int node);

/// Checks the structural invariants of a graph against its scenario set:
/// per-step probability sums, row-stochastic transitions, membership
/// consistency, and (exact kind) partition plus nested-set structure.
/// Throws std::runtime_error naming the first violated invariant.
void validate_graph(const NodeGraph& graph, const ScenarioSet& scenarios);

/// Debug/plot export: per step, node member lists, probabilities and sparse
/// transition rows.
std::string node_graph_to_json(const NodeGraph& graph);

}  // namespace sctree
