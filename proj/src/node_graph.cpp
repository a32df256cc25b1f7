#include "sctree/node_graph.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace sctree {

namespace {

constexpr double kProbTol = 1e-12;

[[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("node graph invariant violated: " + what);
}

// Probability mass of the intersection of two ascending member-id lists.
double intersection_mass(const std::vector<int>& a, const std::vector<int>& b,
                         const ScenarioSet& scenarios) {
    double mass = 0.0;
    std::size_t ia = 0;
    std::size_t ib = 0;
    while (ia < a.size() && ib < b.size()) {
        if (a[ia] < b[ib]) {
            ++ia;
        } else if (b[ib] < a[ia]) {
            ++ib;
        } else {
            mass += scenarios.sequences[static_cast<std::size_t>(a[ia])].probability;
            ++ia;
            ++ib;
        }
    }
    return mass;
}

}  // namespace

NodeGraph build_exact_tree(const ScenarioSet& scenarios, int decimals) {
    validate_scenarios(scenarios);

    NodeGraph graph;
    graph.kind = GraphKind::Exact;
    graph.horizon = scenarios.horizon;
    graph.key_decimals = decimals;
    graph.stages.resize(static_cast<std::size_t>(scenarios.horizon));
    graph.membership.assign(static_cast<std::size_t>(scenarios.horizon),
                            std::vector<int>(scenarios.size(), -1));
    if (scenarios.horizon > 1) {
        graph.transitions.resize(static_cast<std::size_t>(scenarios.horizon - 1));
    }

    for (int k = 0; k < scenarios.horizon; ++k) {
        // std::map keeps prefix keys in lexicographic order, which fixes the
        // node numbering at this step.
        std::map<std::vector<std::int64_t>, std::vector<int>> groups;
        for (std::size_t s = 0; s < scenarios.size(); ++s) {
            groups[prefix_key(scenarios.sequences[s], k, decimals)].push_back(static_cast<int>(s));
        }

        auto& stage = graph.stages[static_cast<std::size_t>(k)];
        stage.reserve(groups.size());
        for (const auto& [key, members] : groups) {
            StageNode node;
            node.step = k;
            node.member_ids = members;
            node.member_weights.reserve(members.size());
            for (int id : members) {
                const double p = scenarios.sequences[static_cast<std::size_t>(id)].probability;
                node.member_weights.push_back(p);
                node.probability += p;
                graph.membership[static_cast<std::size_t>(k)][static_cast<std::size_t>(id)] =
                    static_cast<int>(stage.size());
            }
            node.representative_w.push_back(
                scenarios.sequences[static_cast<std::size_t>(members.front())]
                    .values[static_cast<std::size_t>(k)]);
            stage.push_back(std::move(node));
        }
    }

    for (int k = 0; k + 1 < scenarios.horizon; ++k) {
        auto& rows = graph.transitions[static_cast<std::size_t>(k)];
        rows.resize(graph.stages[static_cast<std::size_t>(k)].size());
        const auto& next = graph.stages[static_cast<std::size_t>(k + 1)];
        for (std::size_t j = 0; j < next.size(); ++j) {
            const int parent =
                graph.membership[static_cast<std::size_t>(k)]
                                [static_cast<std::size_t>(next[j].member_ids.front())];
            const double parent_prob =
                graph.stages[static_cast<std::size_t>(k)][static_cast<std::size_t>(parent)]
                    .probability;
            rows[static_cast<std::size_t>(parent)].push_back(
                {static_cast<int>(j), next[j].probability / parent_prob});
        }
    }

    return graph;
}

std::vector<double> transition_row(const NodeGraph& graph, int step, int node) {
    if (step < 0 || step + 1 >= graph.horizon) {
        throw std::out_of_range("transition_row: step " + std::to_string(step) +
                                " has no successor stage");
    }
    if (node < 0 || node >= graph.num_nodes(step)) {
        throw std::out_of_range("transition_row: node " + std::to_string(node) +
                                " out of range at step " + std::to_string(step));
    }
    std::vector<double> row(static_cast<std::size_t>(graph.num_nodes(step + 1)), 0.0);
    for (const Transition& t :
         graph.transitions[static_cast<std::size_t>(step)][static_cast<std::size_t>(node)]) {
        row[static_cast<std::size_t>(t.child)] = t.probability;
    }
    return row;
}

void validate_graph(const NodeGraph& graph, const ScenarioSet& scenarios) {
    if (graph.horizon != scenarios.horizon) fail("horizon mismatch with scenario set");
    if (graph.stages.size() != static_cast<std::size_t>(graph.horizon)) fail("stage count");
    if (graph.membership.size() != static_cast<std::size_t>(graph.horizon)) fail("membership size");
    const std::size_t expect_rows =
        graph.horizon > 1 ? static_cast<std::size_t>(graph.horizon - 1) : 0;
    if (graph.transitions.size() != expect_rows) fail("transition stage count");

    for (int k = 0; k < graph.horizon; ++k) {
        const auto& stage = graph.stages[static_cast<std::size_t>(k)];
        const auto& member_of = graph.membership[static_cast<std::size_t>(k)];
        if (member_of.size() != scenarios.size()) fail("membership row size");
        if (stage.empty()) fail("empty stage");

        double stage_mass = 0.0;
        std::vector<int> seen(scenarios.size(), 0);
        for (std::size_t i = 0; i < stage.size(); ++i) {
            const StageNode& node = stage[i];
            if (node.step != k) fail("node step field");
            if (node.member_ids.empty()) fail("empty node");
            if (node.member_weights.size() != node.member_ids.size()) fail("weight list size");
            if (node.representative_w.empty()) fail("missing representative value");
            double mass = 0.0;
            int prev = -1;
            for (std::size_t m = 0; m < node.member_ids.size(); ++m) {
                const int id = node.member_ids[m];
                if (id <= prev) fail("member ids not strictly ascending");
                prev = id;
                if (id < 0 || static_cast<std::size_t>(id) >= scenarios.size()) {
                    fail("member id out of range");
                }
                const double p = scenarios.sequences[static_cast<std::size_t>(id)].probability;
                if (node.member_weights[m] != p) fail("member weight mismatch");
                mass += p;
                ++seen[static_cast<std::size_t>(id)];
                if (member_of[static_cast<std::size_t>(id)] != static_cast<int>(i)) {
                    fail("membership inconsistent with node members");
                }
            }
            if (std::abs(mass - node.probability) > kProbTol) fail("node probability sum");
            stage_mass += node.probability;
        }
        if (std::abs(stage_mass - 1.0) > kProbTol) fail("stage probability sum");
        for (int count : seen) {
            if (count != 1) fail("sequences must partition into nodes at each step");
        }
    }

    for (int k = 0; k + 1 < graph.horizon; ++k) {
        const auto& stage = graph.stages[static_cast<std::size_t>(k)];
        const auto& next = graph.stages[static_cast<std::size_t>(k + 1)];
        const auto& rows = graph.transitions[static_cast<std::size_t>(k)];
        if (rows.size() != stage.size()) fail("transition row count");
        for (std::size_t i = 0; i < stage.size(); ++i) {
            double row_sum = 0.0;
            int prev_child = -1;
            for (const Transition& t : rows[i]) {
                if (t.child <= prev_child) fail("transition children not strictly ascending");
                prev_child = t.child;
                if (t.child < 0 || static_cast<std::size_t>(t.child) >= next.size()) {
                    fail("transition child out of range");
                }
                if (!(t.probability > 0.0)) fail("transition probability not positive");
                const double mass = intersection_mass(stage[i].member_ids,
                                                      next[static_cast<std::size_t>(t.child)]
                                                          .member_ids,
                                                      scenarios);
                if (std::abs(t.probability - mass / stage[i].probability) > kProbTol) {
                    fail("transition probability differs from conditional member mass");
                }
                row_sum += t.probability;
            }
            if (std::abs(row_sum - 1.0) > kProbTol) fail("transition row sum");
        }
        // Every positive-mass pair must be listed.
        for (std::size_t i = 0; i < stage.size(); ++i) {
            for (std::size_t j = 0; j < next.size(); ++j) {
                const double mass = intersection_mass(stage[i].member_ids, next[j].member_ids,
                                                      scenarios);
                const bool listed =
                    std::any_of(rows[i].begin(), rows[i].end(), [&](const Transition& t) {
                        return t.child == static_cast<int>(j);
                    });
                if ((mass > 0.0) != listed) fail("transition sparsity mismatch");
            }
        }
    }

    if (graph.kind == GraphKind::Exact) {
        for (int k = 0; k + 1 < graph.horizon; ++k) {
            const auto& next = graph.stages[static_cast<std::size_t>(k + 1)];
            for (const StageNode& child : next) {
                // Nesting: all members of a child share one parent node.
                const int parent = graph.membership[static_cast<std::size_t>(k)]
                                                   [static_cast<std::size_t>(
                                                       child.member_ids.front())];
                for (int id : child.member_ids) {
                    if (graph.membership[static_cast<std::size_t>(k)]
                                        [static_cast<std::size_t>(id)] != parent) {
                        fail("child node spans multiple parents in exact tree");
                    }
                }
            }
        }
        for (int k = 0; k < graph.horizon; ++k) {
            for (const StageNode& node : graph.stages[static_cast<std::size_t>(k)]) {
                if (node.representative_w.size() != 1) fail("exact node value not unique");
                const std::int64_t key = value_key(node.representative_w.front());
                for (int id : node.member_ids) {
                    const double w = scenarios.sequences[static_cast<std::size_t>(id)]
                                         .values[static_cast<std::size_t>(k)];
                    if (value_key(w) != key) fail("exact node members disagree on value");
                }
            }
        }
    }
}

std::string node_graph_to_json(const NodeGraph& graph) {
    nlohmann::json root;
    root["kind"] = graph.kind == GraphKind::Exact ? "exact" : "clustered";
    root["horizon"] = graph.horizon;

    nlohmann::json stages = nlohmann::json::array();
    for (const auto& stage : graph.stages) {
        nlohmann::json stage_json = nlohmann::json::array();
        for (const StageNode& node : stage) {
            nlohmann::json n;
            n["step"] = node.step;
            n["members"] = node.member_ids;
            n["probability"] = node.probability;
            n["values"] = node.representative_w;
            stage_json.push_back(std::move(n));
        }
        stages.push_back(std::move(stage_json));
    }
    root["stages"] = std::move(stages);

    nlohmann::json trans = nlohmann::json::array();
    for (const auto& rows : graph.transitions) {
        nlohmann::json step_json = nlohmann::json::array();
        for (const auto& row : rows) {
            nlohmann::json row_json = nlohmann::json::array();
            for (const Transition& t : row) {
                row_json.push_back({{"child", t.child}, {"p", t.probability}});
            }
            step_json.push_back(std::move(row_json));
        }
        trans.push_back(std::move(step_json));
    }
    root["transitions"] = std::move(trans);

    return root.dump(2);
}

}  // namespace sctree
