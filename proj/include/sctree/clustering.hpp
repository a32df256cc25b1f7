#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sctree/node_graph.hpp"
#include "sctree/rng.hpp"
#include "sctree/scenario.hpp"

namespace sctree {

struct ClusteringSpec {
    int clusters = 10;     // target cluster count per step
    std::uint64_t seed = 1;
    int restarts = 5;      // independent seedings, lowest potential wins
    int max_iters = 100;   // Lloyd iteration cap per run
    bool weighted = true;  // weight points by sequence probability
    bool kmeanspp = true;  // k-means++ seeding; uniform random picks when off
    int key_decimals = kDefaultKeyDecimals;
};

struct LloydResult {
    std::vector<int> assignment;  // per point, index into centers
    double potential = 0.0;       // weighted sum of squared distances
    int iterations = 0;
    std::vector<double> potential_history;  // one entry per assignment pass
};

/// k-means++ seeding over weighted points: the first center is drawn by
/// weight, each further center by weight times squared distance to the
/// nearest chosen center. Returns `clusters` centers, fewer when the
/// remaining points all coincide with chosen centers.
std::vector<std::vector<double>> kmeans_pp_seed(const std::vector<std::vector<double>>& points,
                                                const std::vector<double>& weights, int clusters,
                                                Rng& rng);

/// Lloyd iteration from the given initial centers until the assignment is
/// stable or max_iters passes run. Centers are updated in place; the final
/// assignment is always consistent with the final centers. Empty clusters
/// keep their previous center; a cluster whose points are all bit-identical
/// snaps its center to that exact point.
LloydResult lloyd_iterate(const std::vector<std::vector<double>>& points,
                          const std::vector<double>& weights,
                          std::vector<std::vector<double>>& centers, int max_iters);

/// Result of clustering the step-k prefixes w_0..w_k of a scenario set.
struct StageClustering {
    int step = 0;
    std::vector<std::vector<double>> centers;  // each of dimension step+1
    std::vector<int> assignment;               // per sequence, cluster label
    double potential = 0.0;
    int iterations = 0;        // of the winning restart
    int distinct_points = 0;   // distinct prefixes under canonical rounding
};

/// Clusters the step-k prefix vectors of all sequences. Prefixes identical
/// under canonical rounding are collapsed into one point whose weight is the
/// summed sequence probability (or 1 when unweighted). Runs spec.restarts
/// seedings and keeps the lowest potential; labels are ordered by center
/// value and empty clusters are dropped, so the result is deterministic in
/// (scenarios, spec).
StageClustering cluster_prefixes(const ScenarioSet& scenarios, int step,
                                 const ClusteringSpec& spec);

std::vector<StageClustering> cluster_all_steps(const ScenarioSet& scenarios,
                                               const ClusteringSpec& spec);

/// Builds the cluster transition graph: nodes are the per-step clusters,
/// transition probability from node i to node j is the probability mass of
/// sequences in both, divided by the mass of i. Children may have several
/// parents, so the result is a graph rather than a tree.
NodeGraph build_cluster_graph(const ScenarioSet& scenarios,
                              const std::vector<StageClustering>& stages);

/// Per-step clusterings plus the induced transition graph.
struct ClusterModel {
    std::vector<StageClustering> stages;
    NodeGraph graph;
};

ClusterModel build_cluster_model(const ScenarioSet& scenarios, const ClusteringSpec& spec);

/// Draws `sample_size` member sequences from a node, without replacement,
/// proportionally to member weight. Kept weights are rescaled so they still
/// sum to the node probability, which is left unchanged. Returns the node
/// as is when it has at most `sample_size` members.
StageNode sample_node(const StageNode& node, const ScenarioSet& scenarios,
                      std::size_t sample_size, Rng& rng);

/// One CSV row per (sequence, step): the cluster label assigned to the
/// sequence's prefix at that step and the disturbance value it contributes,
/// ready for plotting sequences colored by cluster.
void write_cluster_report_csv(const ScenarioSet& scenarios,
                              const std::vector<StageClustering>& stages,
                              const std::string& path);

}  // namespace sctree
