#include "sctree/clustering.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <numeric>
#include <stdexcept>

#include "sctree/text.hpp"

namespace sctree {

namespace {

double squared_distance(const std::vector<double>& a, const std::vector<double>& b) {
    double d2 = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double d = a[i] - b[i];
        d2 += d * d;
    }
    return d2;
}

// Nearest center by squared distance, ties to the lowest center index.
int nearest_center(const std::vector<double>& point,
                   const std::vector<std::vector<double>>& centers) {
    int best = 0;
    double best_d2 = squared_distance(point, centers[0]);
    for (std::size_t c = 1; c < centers.size(); ++c) {
        const double d2 = squared_distance(point, centers[c]);
        if (d2 < best_d2) {
            best_d2 = d2;
            best = static_cast<int>(c);
        }
    }
    return best;
}

std::vector<int> assign_points(const std::vector<std::vector<double>>& points,
                               const std::vector<std::vector<double>>& centers) {
    std::vector<int> assignment(points.size());
    for (std::size_t p = 0; p < points.size(); ++p) {
        assignment[p] = nearest_center(points[p], centers);
    }
    return assignment;
}

double compute_potential(const std::vector<std::vector<double>>& points,
                         const std::vector<double>& weights, const std::vector<int>& assignment,
                         const std::vector<std::vector<double>>& centers) {
    double phi = 0.0;
    for (std::size_t p = 0; p < points.size(); ++p) {
        phi += weights[p] *
               squared_distance(points[p], centers[static_cast<std::size_t>(assignment[p])]);
    }
    return phi;
}

// Weighted mean per cluster. An empty cluster keeps its previous center. A
// cluster whose points are all bit-identical pins its center to that exact
// point, so a saturated clustering reproduces the prefixes bit for bit.
void update_centers(const std::vector<std::vector<double>>& points,
                    const std::vector<double>& weights, const std::vector<int>& assignment,
                    std::vector<std::vector<double>>& centers) {
    const std::size_t dim = points.front().size();
    std::vector<double> weight_sum(centers.size(), 0.0);
    std::vector<std::vector<double>> coord_sum(centers.size(), std::vector<double>(dim, 0.0));
    std::vector<int> first_point(centers.size(), -1);
    std::vector<bool> uniform(centers.size(), true);

    for (std::size_t p = 0; p < points.size(); ++p) {
        const auto c = static_cast<std::size_t>(assignment[p]);
        weight_sum[c] += weights[p];
        for (std::size_t d = 0; d < dim; ++d) coord_sum[c][d] += weights[p] * points[p][d];
        if (first_point[c] < 0) {
            first_point[c] = static_cast<int>(p);
        } else if (points[p] != points[static_cast<std::size_t>(first_point[c])]) {
            uniform[c] = false;
        }
    }

    for (std::size_t c = 0; c < centers.size(); ++c) {
        if (first_point[c] < 0) continue;
        if (uniform[c]) {
            centers[c] = points[static_cast<std::size_t>(first_point[c])];
            continue;
        }
        for (std::size_t d = 0; d < dim; ++d) centers[c][d] = coord_sum[c][d] / weight_sum[c];
    }
}

}  // namespace

std::vector<std::vector<double>> kmeans_pp_seed(const std::vector<std::vector<double>>& points,
                                                const std::vector<double>& weights, int clusters,
                                                Rng& rng) {
    if (points.empty()) throw std::invalid_argument("kmeans_pp_seed: no points");
    if (weights.size() != points.size())
        throw std::invalid_argument("kmeans_pp_seed: weight count mismatch");
    if (clusters <= 0) throw std::invalid_argument("kmeans_pp_seed: clusters must be positive");

    std::vector<std::vector<double>> centers;
    centers.reserve(static_cast<std::size_t>(clusters));
    centers.push_back(points[rng.weighted_index(weights)]);

    std::vector<double> d2(points.size());
    while (centers.size() < static_cast<std::size_t>(clusters)) {
        double total = 0.0;
        for (std::size_t p = 0; p < points.size(); ++p) {
            double best = squared_distance(points[p], centers[0]);
            for (std::size_t c = 1; c < centers.size(); ++c) {
                best = std::min(best, squared_distance(points[p], centers[c]));
            }
            d2[p] = weights[p] * best;
            total += d2[p];
        }
        if (!(total > 0.0)) break;  // every remaining point already is a center
        centers.push_back(points[rng.weighted_index(d2)]);
    }
    return centers;
}

LloydResult lloyd_iterate(const std::vector<std::vector<double>>& points,
                          const std::vector<double>& weights,
                          std::vector<std::vector<double>>& centers, int max_iters) {
    if (points.empty()) throw std::invalid_argument("lloyd_iterate: no points");
    if (centers.empty()) throw std::invalid_argument("lloyd_iterate: no centers");
    if (weights.size() != points.size())
        throw std::invalid_argument("lloyd_iterate: weight count mismatch");

    LloydResult result;
    result.assignment = assign_points(points, centers);
    result.potential = compute_potential(points, weights, result.assignment, centers);
    result.potential_history.push_back(result.potential);

    while (result.iterations < max_iters) {
        update_centers(points, weights, result.assignment, centers);
        auto next = assign_points(points, centers);
        ++result.iterations;
        result.potential = compute_potential(points, weights, next, centers);
        result.potential_history.push_back(result.potential);
        const bool stable = next == result.assignment;
        result.assignment = std::move(next);
        if (stable) break;
    }
    return result;
}

namespace {

struct PrefixGroup {
    std::vector<double> point;  // first-seen raw prefix of the class
    double weight = 0.0;
    std::vector<int> sequence_ids;
};

// Distinct step-k prefixes under canonical rounding, in canonical key order.
std::vector<PrefixGroup> distinct_prefixes(const ScenarioSet& scenarios, int step, int decimals,
                                           bool weighted) {
    std::map<std::vector<std::int64_t>, PrefixGroup> groups;
    for (std::size_t s = 0; s < scenarios.size(); ++s) {
        const auto& seq = scenarios.sequences[s];
        auto key = prefix_key(seq, step, decimals);
        auto it = groups.find(key);
        if (it == groups.end()) {
            PrefixGroup g;
            g.point.assign(seq.values.begin(), seq.values.begin() + step + 1);
            it = groups.emplace(std::move(key), std::move(g)).first;
        }
        it->second.weight += weighted ? seq.probability : 0.0;
        it->second.sequence_ids.push_back(static_cast<int>(s));
    }
    std::vector<PrefixGroup> out;
    out.reserve(groups.size());
    for (auto& [key, group] : groups) {
        if (!weighted) group.weight = 1.0;
        out.push_back(std::move(group));
    }
    return out;
}

}  // namespace

StageClustering cluster_prefixes(const ScenarioSet& scenarios, int step,
                                 const ClusteringSpec& spec) {
    if (step < 0 || step >= scenarios.horizon)
        throw std::out_of_range("cluster_prefixes: step out of range");
    if (spec.clusters <= 0)
        throw std::invalid_argument("cluster_prefixes: clusters must be positive");
    if (spec.restarts <= 0)
        throw std::invalid_argument("cluster_prefixes: restarts must be positive");

    const auto groups = distinct_prefixes(scenarios, step, spec.key_decimals, spec.weighted);
    std::vector<std::vector<double>> points;
    std::vector<double> weights;
    points.reserve(groups.size());
    weights.reserve(groups.size());
    for (const auto& g : groups) {
        points.push_back(g.point);
        weights.push_back(g.weight);
    }
    const int target = std::min<int>(spec.clusters, static_cast<int>(points.size()));

    std::vector<std::vector<double>> best_centers;
    LloydResult best;
    bool have_best = false;
    for (int run = 0; run < spec.restarts; ++run) {
        Rng rng = Rng::stream(spec.seed, static_cast<std::uint64_t>(step),
                              static_cast<std::uint64_t>(run));
        std::vector<std::vector<double>> centers;
        if (spec.kmeanspp) {
            centers = kmeans_pp_seed(points, weights, target, rng);
        } else {
            // Uniform picks of distinct points, without replacement.
            std::vector<std::size_t> pool(points.size());
            std::iota(pool.begin(), pool.end(), 0);
            for (int c = 0; c < target; ++c) {
                const std::size_t pick = rng.below(pool.size());
                centers.push_back(points[pool[pick]]);
                pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(pick));
            }
        }
        auto result = lloyd_iterate(points, weights, centers, spec.max_iters);
        if (!have_best || result.potential < best.potential) {
            best = std::move(result);
            best_centers = std::move(centers);
            have_best = true;
        }
    }

    // Deterministic labels: order surviving clusters by canonical key of the
    // center, then by raw center value; drop clusters with no points.
    std::vector<int> cluster_size(best_centers.size(), 0);
    for (int a : best.assignment) ++cluster_size[static_cast<std::size_t>(a)];
    std::vector<std::size_t> order;
    for (std::size_t c = 0; c < best_centers.size(); ++c) {
        if (cluster_size[c] > 0) order.push_back(c);
    }
    auto center_key = [&](std::size_t c) {
        std::vector<std::int64_t> key(best_centers[c].size());
        for (std::size_t d = 0; d < key.size(); ++d) {
            key[d] = value_key(best_centers[c][d], spec.key_decimals);
        }
        return key;
    };
    std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        const auto ka = center_key(a);
        const auto kb = center_key(b);
        if (ka != kb) return ka < kb;
        return best_centers[a] < best_centers[b];
    });
    std::vector<int> relabel(best_centers.size(), -1);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        relabel[order[rank]] = static_cast<int>(rank);
    }

    StageClustering out;
    out.step = step;
    out.potential = best.potential;
    out.iterations = best.iterations;
    out.distinct_points = static_cast<int>(points.size());
    out.centers.reserve(order.size());
    for (std::size_t c : order) out.centers.push_back(best_centers[c]);
    out.assignment.assign(scenarios.size(), -1);
    for (std::size_t p = 0; p < groups.size(); ++p) {
        const int label = relabel[static_cast<std::size_t>(best.assignment[p])];
        for (int seq : groups[p].sequence_ids) {
            out.assignment[static_cast<std::size_t>(seq)] = label;
        }
    }
    return out;
}

std::vector<StageClustering> cluster_all_steps(const ScenarioSet& scenarios,
                                               const ClusteringSpec& spec) {
    std::vector<StageClustering> stages;
    stages.reserve(static_cast<std::size_t>(scenarios.horizon));
    for (int k = 0; k < scenarios.horizon; ++k) {
        stages.push_back(cluster_prefixes(scenarios, k, spec));
    }
    return stages;
}

NodeGraph build_cluster_graph(const ScenarioSet& scenarios,
                              const std::vector<StageClustering>& stages) {
    validate_scenarios(scenarios);
    if (stages.size() != static_cast<std::size_t>(scenarios.horizon))
        throw std::invalid_argument("build_cluster_graph: one clustering per step required");

    NodeGraph graph;
    graph.kind = GraphKind::Clustered;
    graph.horizon = scenarios.horizon;
    graph.key_decimals = kDefaultKeyDecimals;
    graph.stages.resize(static_cast<std::size_t>(scenarios.horizon));
    graph.membership.assign(static_cast<std::size_t>(scenarios.horizon),
                            std::vector<int>(scenarios.size(), -1));
    if (scenarios.horizon > 1) {
        graph.transitions.resize(static_cast<std::size_t>(scenarios.horizon - 1));
    }

    for (int k = 0; k < scenarios.horizon; ++k) {
        const auto& clustering = stages[static_cast<std::size_t>(k)];
        if (clustering.step != k)
            throw std::invalid_argument("build_cluster_graph: clustering step mismatch");
        if (clustering.assignment.size() != scenarios.size())
            throw std::invalid_argument("build_cluster_graph: assignment size mismatch");
        auto& stage = graph.stages[static_cast<std::size_t>(k)];
        stage.resize(clustering.centers.size());
        for (std::size_t c = 0; c < stage.size(); ++c) stage[c].step = k;

        for (std::size_t s = 0; s < scenarios.size(); ++s) {
            const int label = clustering.assignment[s];
            if (label < 0 || static_cast<std::size_t>(label) >= stage.size())
                throw std::invalid_argument("build_cluster_graph: assignment label out of range");
            StageNode& node = stage[static_cast<std::size_t>(label)];
            const double p = scenarios.sequences[s].probability;
            node.member_ids.push_back(static_cast<int>(s));
            node.member_weights.push_back(p);
            node.probability += p;
            graph.membership[static_cast<std::size_t>(k)][s] = label;
        }

        for (StageNode& node : stage) {
            if (node.member_ids.empty())
                throw std::invalid_argument("build_cluster_graph: empty cluster");
            // Distinct step-k values among members, ascending.
            std::map<std::int64_t, double> values;
            for (int id : node.member_ids) {
                const double w = scenarios.sequences[static_cast<std::size_t>(id)]
                                     .values[static_cast<std::size_t>(k)];
                values.emplace(value_key(w), w);
            }
            node.representative_w.reserve(values.size());
            for (const auto& [key, w] : values) node.representative_w.push_back(w);
        }
    }

    for (int k = 0; k + 1 < scenarios.horizon; ++k) {
        auto& rows = graph.transitions[static_cast<std::size_t>(k)];
        rows.resize(graph.stages[static_cast<std::size_t>(k)].size());
        const auto& next_member = graph.membership[static_cast<std::size_t>(k + 1)];
        for (std::size_t i = 0; i < rows.size(); ++i) {
            const StageNode& node = graph.stages[static_cast<std::size_t>(k)][i];
            std::map<int, double> mass;  // child -> joint probability
            for (int id : node.member_ids) {
                mass[next_member[static_cast<std::size_t>(id)]] +=
                    scenarios.sequences[static_cast<std::size_t>(id)].probability;
            }
            for (const auto& [child, joint] : mass) {
                rows[i].push_back({child, joint / node.probability});
            }
        }
    }
    return graph;
}

ClusterModel build_cluster_model(const ScenarioSet& scenarios, const ClusteringSpec& spec) {
    ClusterModel model;
    model.stages = cluster_all_steps(scenarios, spec);
    model.graph = build_cluster_graph(scenarios, model.stages);
    return model;
}

StageNode sample_node(const StageNode& node, const ScenarioSet& scenarios,
                      std::size_t sample_size, Rng& rng) {
    if (sample_size == 0) throw std::invalid_argument("sample_node: sample_size must be positive");
    if (node.member_ids.size() <= sample_size) return node;

    std::vector<double> pool = node.member_weights;
    std::vector<std::size_t> chosen;
    chosen.reserve(sample_size);
    for (std::size_t t = 0; t < sample_size; ++t) {
        const std::size_t pick = rng.weighted_index(pool);
        chosen.push_back(pick);
        pool[pick] = 0.0;
    }
    std::sort(chosen.begin(), chosen.end());

    StageNode out;
    out.step = node.step;
    out.probability = node.probability;
    double kept = 0.0;
    for (std::size_t idx : chosen) kept += node.member_weights[idx];
    const double rescale = node.probability / kept;
    std::map<std::int64_t, double> values;
    for (std::size_t idx : chosen) {
        const int id = node.member_ids[idx];
        out.member_ids.push_back(id);
        out.member_weights.push_back(node.member_weights[idx] * rescale);
        const double w = scenarios.sequences[static_cast<std::size_t>(id)]
                             .values[static_cast<std::size_t>(node.step)];
        values.emplace(value_key(w), w);
    }
    out.representative_w.reserve(values.size());
    for (const auto& [key, w] : values) out.representative_w.push_back(w);
    return out;
}

void write_cluster_report_csv(const ScenarioSet& scenarios,
                              const std::vector<StageClustering>& stages,
                              const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write cluster report: " + path);
    out << "sequence,step,cluster,w\n";
    for (std::size_t i = 0; i < scenarios.sequences.size(); ++i) {
        const auto& values = scenarios.sequences[i].values;
        for (const auto& stage : stages) {
            out << i << ',' << stage.step << ',' << stage.assignment[i] << ','
                << format_double(values[static_cast<std::size_t>(stage.step)]) << '\n';
        }
    }
}

}  // namespace sctree
