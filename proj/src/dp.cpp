#include "sctree/dp.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>
#include <thread>
#include <utility>

#include <json.hpp>

#include "sctree/controller.hpp"

namespace sctree {

namespace {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point start) {
    return std::chrono::duration<double>(Clock::now() - start).count();
}

/// One information-state branch: observe disturbance w, move to successor
/// state `succ` at the next step, with conditional probability `weight`.
struct Branch {
    double w = 0.0;
    int succ = 0;
    double weight = 0.0;
};

/// The per-step information process every solver reduces to: a state count
/// per step, the branch list of each state (sorted by (w, succ), weights
/// summing to one), and the step-0 state distribution. Branches at the last
/// step use successor 0, which indexes the terminal cost row.
struct InfoProcess {
    int horizon = 0;
    std::vector<int> states;
    std::vector<std::vector<std::vector<Branch>>> branches;  // [step][state]
    std::vector<double> root_weights;
};

InfoProcess process_from_nominal(const std::vector<double>& nominal_w) {
    InfoProcess proc;
    proc.horizon = static_cast<int>(nominal_w.size());
    proc.states.assign(static_cast<std::size_t>(proc.horizon), 1);
    proc.branches.resize(static_cast<std::size_t>(proc.horizon));
    for (int k = 0; k < proc.horizon; ++k) {
        proc.branches[static_cast<std::size_t>(k)] = {
            {Branch{nominal_w[static_cast<std::size_t>(k)], 0, 1.0}}};
    }
    proc.root_weights = {1.0};
    return proc;
}

InfoProcess process_from_graph(const NodeGraph& graph, const ScenarioSet& scenarios,
                               const SolveOptions& options) {
    InfoProcess proc;
    proc.horizon = graph.horizon;
    proc.states.resize(static_cast<std::size_t>(graph.horizon));
    proc.branches.resize(static_cast<std::size_t>(graph.horizon));
    for (int k = 0; k < graph.horizon; ++k) {
        const int count = graph.num_nodes(k);
        proc.states[static_cast<std::size_t>(k)] = count;
        auto& stage = proc.branches[static_cast<std::size_t>(k)];
        stage.resize(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            const StageNode* node = &graph.node(k, i);
            StageNode sampled;
            if (options.sample_size > 0 && node->member_ids.size() > options.sample_size) {
                Rng rng = Rng::stream(options.sample_seed, static_cast<std::uint64_t>(k),
                                      static_cast<std::uint64_t>(i));
                sampled = sample_node(*node, scenarios, options.sample_size, rng);
                node = &sampled;
            }
            std::map<std::pair<double, int>, double> grouped;
            for (std::size_t m = 0; m < node->member_ids.size(); ++m) {
                const int id = node->member_ids[m];
                const double w =
                    scenarios.sequences[static_cast<std::size_t>(id)].values[static_cast<std::size_t>(k)];
                const int succ =
                    k + 1 < graph.horizon
                        ? graph.membership[static_cast<std::size_t>(k) + 1][static_cast<std::size_t>(id)]
                        : 0;
                grouped[{w, succ}] += node->member_weights[m];
            }
            auto& list = stage[static_cast<std::size_t>(i)];
            list.reserve(grouped.size());
            for (const auto& [key, mass] : grouped) {
                list.push_back(Branch{key.first, key.second, mass / node->probability});
            }
        }
    }
    proc.root_weights.reserve(graph.stages[0].size());
    for (const StageNode& node : graph.stages[0]) proc.root_weights.push_back(node.probability);
    return proc;
}

InfoProcess process_from_markov(const MarkovModel& markov) {
    InfoProcess proc;
    proc.horizon = markov.horizon;
    proc.states.resize(static_cast<std::size_t>(markov.horizon));
    proc.branches.resize(static_cast<std::size_t>(markov.horizon));
    for (int k = 0; k < markov.horizon; ++k) {
        const int count = markov.bins(k);
        proc.states[static_cast<std::size_t>(k)] = count;
        auto& stage = proc.branches[static_cast<std::size_t>(k)];
        stage.resize(static_cast<std::size_t>(count));
        for (int i = 0; i < count; ++i) {
            if (!markov.reachable(k, i)) continue;
            const double center =
                markov.quant.centers[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            auto& list = stage[static_cast<std::size_t>(i)];
            if (k + 1 < markov.horizon) {
                const auto& row =
                    markov.transition[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
                for (std::size_t j = 0; j < row.size(); ++j) {
                    if (row[j] > 0.0) list.push_back(Branch{center, static_cast<int>(j), row[j]});
                }
            } else {
                list.push_back(Branch{center, 0, 1.0});
            }
        }
    }
    proc.root_weights = markov.marginal[0];
    return proc;
}

/// Reusable per-thread buffers for one (x grid point, disturbance) pair.
struct Scratch {
    std::vector<double> fx, gx;   // direct-evaluation buffers, one entry per u
    std::vector<char> admissible;
    std::vector<int> u_of_v;
    std::vector<int> lo;          // resolved next-state index per u
    std::vector<double> alpha;    // interpolation weight per u (0 in nearest mode)
    std::vector<double> contrib;  // candidate value per v
    const double* fxp = nullptr;
    const double* gxp = nullptr;
    bool infeasible = false;

    explicit Scratch(int nu)
        : fx(static_cast<std::size_t>(nu)),
          gx(static_cast<std::size_t>(nu)),
          admissible(static_cast<std::size_t>(nu)),
          u_of_v(static_cast<std::size_t>(nu)),
          lo(static_cast<std::size_t>(nu)),
          alpha(static_cast<std::size_t>(nu)),
          contrib(static_cast<std::size_t>(nu)) {}
};

/// Points s.fxp/s.gxp at the dynamics/cost evaluations for every control at
/// (step, x grid point, w): table rows when a table is given, otherwise
/// fresh evaluations into the scratch buffers. Both paths yield bit-identical
/// numbers because the table stores direct evaluations.
void eval_pair(const SystemModel& model, const Grid& grid, int step, int x_index, double w,
               const TransitionTable* table, Scratch& s) {
    const int nu = grid.nu();
    if (table != nullptr) {
        const auto& ws = table->w_values[static_cast<std::size_t>(step)];
        const auto it = std::lower_bound(ws.begin(), ws.end(), w);
        if (it == ws.end() || *it != w)
            throw std::runtime_error("transition table: step disturbance value missing");
        const std::size_t offset =
            (static_cast<std::size_t>(it - ws.begin()) * static_cast<std::size_t>(grid.nx()) +
             static_cast<std::size_t>(x_index)) *
            static_cast<std::size_t>(nu);
        s.fxp = table->next_x[static_cast<std::size_t>(step)].data() + offset;
        s.gxp = table->cost[static_cast<std::size_t>(step)].data() + offset;
        return;
    }
    const double x = grid.x(x_index);
    for (int u = 0; u < nu; ++u) {
        const double uv = grid.u(u);
        s.fx[static_cast<std::size_t>(u)] = model.dynamics(step, x, uv, w);
        s.gx[static_cast<std::size_t>(u)] = model.running_cost(step, x, uv, w);
    }
    s.fxp = s.fx.data();
    s.gxp = s.gx.data();
}

/// Fills u_of_v with the projected control for every candidate v, and the
/// infeasible flag when no control is admissible.
void select_controls(const SystemModel& model, const Grid& grid, Scratch& s) {
    const int nu = grid.nu();
    bool any = false;
    for (int u = 0; u < nu; ++u) {
        const bool ok = next_state_admissible(model, s.fxp[u]);
        s.admissible[static_cast<std::size_t>(u)] = ok ? 1 : 0;
        any = any || ok;
    }
    s.infeasible = !any;
    if (any) {
        for (int v = 0; v < nu; ++v)
            s.u_of_v[static_cast<std::size_t>(v)] = pick_nearest_admissible(grid, s.admissible, v);
    } else {
        const int fb = pick_fallback_control(model, grid, s.fxp);
        std::fill(s.u_of_v.begin(), s.u_of_v.end(), fb);
    }
}

/// Resolves the (clamped) next state of every control onto the x grid:
/// nearest mode fills lo with the rounded index and zero alpha, interpolation
/// mode fills (lo, alpha) so the value reads (1-alpha) J[lo] + alpha J[lo+1].
void resolve_next_states(const SystemModel& model, const Grid& grid, ValueMode mode, Scratch& s) {
    const int nu = grid.nu();
    const int nx = grid.nx();
    for (int u = 0; u < nu; ++u) {
        double c = s.fxp[u];
        if (c < model.x_min) c = model.x_min;
        if (c > model.x_max) c = model.x_max;
        if (mode == ValueMode::Nearest || nx < 2) {
            s.lo[static_cast<std::size_t>(u)] = grid.resolve_x(c);
            s.alpha[static_cast<std::size_t>(u)] = 0.0;
            continue;
        }
        const double spacing = (grid.x_max - grid.x_min) / static_cast<double>(nx - 1);
        int i0 = static_cast<int>(std::floor((c - grid.x_min) / spacing));
        if (i0 < 0) i0 = 0;
        if (i0 > nx - 2) i0 = nx - 2;
        double a = (c - grid.x(i0)) / (grid.x(i0 + 1) - grid.x(i0));
        if (a < 0.0) a = 0.0;
        if (a > 1.0) a = 1.0;
        s.lo[static_cast<std::size_t>(u)] = i0;
        s.alpha[static_cast<std::size_t>(u)] = a;
    }
}

/// Backward induction over (x grid point, information state). Every (x, i)
/// cell is computed independently, so chunking the x rows across threads
/// changes nothing in the results.
SolveResult solve_process(const SystemModel& model, const Grid& grid, const InfoProcess& proc,
                          Method method, const SolveOptions& options,
                          const TransitionTable* table) {
    validate_model(model);
    if (proc.horizon != model.horizon)
        throw std::runtime_error("solve: information process horizon does not match the model");
    if (grid.nx() < 1 || grid.nu() < 1) throw std::runtime_error("solve: empty grid");
    if (grid.nu() > 65535) throw std::runtime_error("solve: control grid too large for the policy table");
    if (options.threads < 1) throw std::runtime_error("solve: thread count must be positive");

    const int nx = grid.nx();
    const int nu = grid.nu();
    const int horizon = proc.horizon;

    SolveResult result;
    result.method = method;
    result.horizon = horizon;
    result.grid = grid;
    result.options = options;
    result.catalog.states_per_step = proc.states;
    result.stages.resize(static_cast<std::size_t>(horizon));
    result.terminal.resize(static_cast<std::size_t>(nx));
    for (int x = 0; x < nx; ++x)
        result.terminal[static_cast<std::size_t>(x)] = model.terminal_cost(grid.x(x));

    const auto induction_start = Clock::now();
    const double* next_values = result.terminal.data();
    for (int k = horizon - 1; k >= 0; --k) {
        const int state_count = proc.states[static_cast<std::size_t>(k)];
        StageTable& cur = result.stages[static_cast<std::size_t>(k)];
        cur.states = state_count;
        cur.values.assign(static_cast<std::size_t>(state_count) * static_cast<std::size_t>(nx), 0.0);
        cur.policy.assign(static_cast<std::size_t>(state_count) * static_cast<std::size_t>(nx), 0);
        const auto& stage_branches = proc.branches[static_cast<std::size_t>(k)];

        auto run_rows = [&](int x_begin, int x_end) {
            Scratch s(nu);
            for (int x = x_begin; x < x_end; ++x) {
                for (int i = 0; i < state_count; ++i) {
                    const auto& branches = stage_branches[static_cast<std::size_t>(i)];
                    const std::size_t cell =
                        static_cast<std::size_t>(i) * static_cast<std::size_t>(nx) +
                        static_cast<std::size_t>(x);
                    if (branches.empty()) continue;
                    std::fill(s.contrib.begin(), s.contrib.end(), 0.0);
                    std::size_t b = 0;
                    while (b < branches.size()) {
                        const double w = branches[b].w;
                        std::size_t e = b;
                        while (e < branches.size() && branches[e].w == w) ++e;
                        eval_pair(model, grid, k, x, w, table, s);
                        select_controls(model, grid, s);
                        resolve_next_states(model, grid, options.value_mode, s);
                        const double penalty = s.infeasible ? options.infeasibility_penalty : 0.0;
                        for (std::size_t t = b; t < e; ++t) {
                            const double* succ_values =
                                next_values +
                                static_cast<std::size_t>(branches[t].succ) * static_cast<std::size_t>(nx);
                            const double weight = branches[t].weight;
                            for (int v = 0; v < nu; ++v) {
                                const int u = s.u_of_v[static_cast<std::size_t>(v)];
                                const std::size_t ui = static_cast<std::size_t>(u);
                                const double continuation =
                                    s.alpha[ui] == 0.0
                                        ? succ_values[s.lo[ui]]
                                        : (1.0 - s.alpha[ui]) * succ_values[s.lo[ui]] +
                                              s.alpha[ui] * succ_values[s.lo[ui] + 1];
                                s.contrib[static_cast<std::size_t>(v)] +=
                                    weight * (s.gxp[u] + penalty + continuation);
                            }
                        }
                        b = e;
                    }
                    double best = s.contrib[0];
                    int best_v = 0;
                    for (int v = 1; v < nu; ++v) {
                        if (s.contrib[static_cast<std::size_t>(v)] < best) {
                            best = s.contrib[static_cast<std::size_t>(v)];
                            best_v = v;
                        }
                    }
                    cur.values[cell] = best;
                    cur.policy[cell] = static_cast<std::uint16_t>(best_v);
                }
            }
        };

        const int workers = std::min(options.threads, nx);
        if (workers <= 1) {
            run_rows(0, nx);
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(workers));
            const int chunk = (nx + workers - 1) / workers;
            for (int t = 0; t < workers; ++t) {
                const int begin = t * chunk;
                const int end = std::min(nx, begin + chunk);
                if (begin >= end) break;
                pool.emplace_back(run_rows, begin, end);
            }
            for (std::thread& th : pool) th.join();
        }
        next_values = cur.values.data();
    }
    result.solve_seconds = seconds_since(induction_start);

    const int x0 = grid.resolve_x(model.x0);
    double root = 0.0;
    for (int i = 0; i < proc.states[0]; ++i)
        root += proc.root_weights[static_cast<std::size_t>(i)] * result.value(0, x0, i);
    result.root_weights = proc.root_weights;
    result.root_value = root;
    return result;
}

/// Forward propagation of the joint (x grid point, information state) mass
/// through the same branch structure and control selection the solver used.
double forward_value(const SolveResult& result, const SystemModel& model, const InfoProcess& proc) {
    if (proc.horizon != result.horizon)
        throw std::runtime_error("closed-loop value: process horizon does not match the policy");
    for (int k = 0; k < proc.horizon; ++k) {
        if (proc.states[static_cast<std::size_t>(k)] !=
            result.stages[static_cast<std::size_t>(k)].states)
            throw std::runtime_error("closed-loop value: state counts do not match the policy");
    }
    const Grid& grid = result.grid;
    const int nx = grid.nx();
    const int horizon = proc.horizon;
    const double penalty_cost = result.options.infeasibility_penalty;

    std::vector<double> mass(static_cast<std::size_t>(proc.states[0]) * static_cast<std::size_t>(nx),
                             0.0);
    const int x0 = grid.resolve_x(model.x0);
    for (int i = 0; i < proc.states[0]; ++i)
        mass[static_cast<std::size_t>(i) * static_cast<std::size_t>(nx) +
             static_cast<std::size_t>(x0)] = proc.root_weights[static_cast<std::size_t>(i)];

    double total = 0.0;
    Scratch s(grid.nu());
    for (int k = 0; k < horizon; ++k) {
        const int state_count = proc.states[static_cast<std::size_t>(k)];
        const int next_count = k + 1 < horizon ? proc.states[static_cast<std::size_t>(k) + 1] : 1;
        std::vector<double> next_mass(
            static_cast<std::size_t>(next_count) * static_cast<std::size_t>(nx), 0.0);
        for (int i = 0; i < state_count; ++i) {
            const auto& branches = proc.branches[static_cast<std::size_t>(k)][static_cast<std::size_t>(i)];
            if (branches.empty()) continue;
            for (int x = 0; x < nx; ++x) {
                const double m = mass[static_cast<std::size_t>(i) * static_cast<std::size_t>(nx) +
                                      static_cast<std::size_t>(x)];
                if (m == 0.0) continue;
                const int v = result.policy(k, x, i);
                std::size_t b = 0;
                while (b < branches.size()) {
                    const double w = branches[b].w;
                    std::size_t e = b;
                    while (e < branches.size() && branches[e].w == w) ++e;
                    eval_pair(model, grid, k, x, w, nullptr, s);
                    select_controls(model, grid, s);
                    resolve_next_states(model, grid, result.options.value_mode, s);
                    const int u = s.u_of_v[static_cast<std::size_t>(v)];
                    const std::size_t ui = static_cast<std::size_t>(u);
                    const double stage =
                        s.gxp[u] + (s.infeasible ? penalty_cost : 0.0);
                    for (std::size_t t = b; t < e; ++t) {
                        const double flow = m * branches[t].weight;
                        total += flow * stage;
                        const std::size_t base =
                            static_cast<std::size_t>(branches[t].succ) * static_cast<std::size_t>(nx);
                        if (s.alpha[ui] == 0.0) {
                            next_mass[base + static_cast<std::size_t>(s.lo[ui])] += flow;
                        } else {
                            next_mass[base + static_cast<std::size_t>(s.lo[ui])] +=
                                flow * (1.0 - s.alpha[ui]);
                            next_mass[base + static_cast<std::size_t>(s.lo[ui]) + 1] +=
                                flow * s.alpha[ui];
                        }
                    }
                    b = e;
                }
            }
        }
        mass.swap(next_mass);
    }
    for (int x = 0; x < nx; ++x)
        total += mass[static_cast<std::size_t>(x)] * result.terminal[static_cast<std::size_t>(x)];
    return total;
}


}  // namespace

std::string value_mode_name(ValueMode mode) {
    return mode == ValueMode::Nearest ? "nearest" : "interpolate";
}

ValueMode value_mode_from_name(const std::string& name) {
    if (name == "nearest") return ValueMode::Nearest;
    if (name == "interpolate") return ValueMode::Interpolate;
    throw std::runtime_error("unknown value mode: " + name);
}

std::string method_name(Method method) {
    switch (method) {
        case Method::Nominal: return "nominal";
        case Method::Exact: return "exact";
        case Method::Clustered: return "clustered";
        case Method::Markov: return "markov";
    }
    throw std::runtime_error("unknown method");
}

Method method_from_name(const std::string& name) {
    if (name == "nominal") return Method::Nominal;
    if (name == "exact") return Method::Exact;
    if (name == "clustered") return Method::Clustered;
    if (name == "markov") return Method::Markov;
    throw std::runtime_error("unknown method: " + name);
}

TransitionTable precompute_transition_table(const SystemModel& model, const Grid& grid,
                                            const ScenarioSet& scenarios) {
    validate_model(model);
    if (scenarios.horizon != model.horizon)
        throw std::runtime_error("transition table: scenario horizon does not match the model");
    const int nx = grid.nx();
    const int nu = grid.nu();
    TransitionTable table;
    table.w_values.resize(static_cast<std::size_t>(model.horizon));
    table.next_x.resize(static_cast<std::size_t>(model.horizon));
    table.cost.resize(static_cast<std::size_t>(model.horizon));

    std::size_t entries = 0;
    for (int k = 0; k < model.horizon; ++k) {
        auto& ws = table.w_values[static_cast<std::size_t>(k)];
        ws.reserve(scenarios.sequences.size());
        for (const DisturbanceSequence& seq : scenarios.sequences)
            ws.push_back(seq.values[static_cast<std::size_t>(k)]);
        std::sort(ws.begin(), ws.end());
        ws.erase(std::unique(ws.begin(), ws.end()), ws.end());
        entries += ws.size() * static_cast<std::size_t>(nx) * static_cast<std::size_t>(nu);
    }
    constexpr std::size_t kMaxEntries = 200'000'000;
    if (entries > kMaxEntries) {
        throw std::runtime_error("transition table would hold " + std::to_string(entries) +
                                 " entries, above the " + std::to_string(kMaxEntries) + " cap");
    }

    for (int k = 0; k < model.horizon; ++k) {
        const auto& ws = table.w_values[static_cast<std::size_t>(k)];
        auto& fx = table.next_x[static_cast<std::size_t>(k)];
        auto& gx = table.cost[static_cast<std::size_t>(k)];
        fx.resize(ws.size() * static_cast<std::size_t>(nx) * static_cast<std::size_t>(nu));
        gx.resize(fx.size());
        std::size_t at = 0;
        for (const double w : ws) {
            for (int x = 0; x < nx; ++x) {
                const double xv = grid.x(x);
                for (int u = 0; u < nu; ++u, ++at) {
                    const double uv = grid.u(u);
                    fx[at] = model.dynamics(k, xv, uv, w);
                    gx[at] = model.running_cost(k, xv, uv, w);
                }
            }
        }
    }
    return table;
}

SolveResult solve_nominal(const SystemModel& model, const Grid& grid,
                          const std::vector<double>& nominal_w, const SolveOptions& options) {
    if (static_cast<int>(nominal_w.size()) != model.horizon)
        throw std::runtime_error("nominal solve: sequence length does not match the horizon");
    const auto start = Clock::now();
    const InfoProcess proc = process_from_nominal(nominal_w);
    const double build = seconds_since(start);
    SolveResult result = solve_process(model, grid, proc, Method::Nominal, options, nullptr);
    result.build_seconds = build;
    result.catalog.nominal_sequence = nominal_w;
    return result;
}

SolveResult solve_node_dp(const SystemModel& model, const Grid& grid, const NodeGraph& graph,
                          const ScenarioSet& scenarios, const SolveOptions& options) {
    if (graph.horizon != model.horizon)
        throw std::runtime_error("node solve: graph horizon does not match the model");
    if (scenarios.horizon != graph.horizon)
        throw std::runtime_error("node solve: scenario horizon does not match the graph");
    const auto start = Clock::now();
    const InfoProcess proc = process_from_graph(graph, scenarios, options);
    TransitionTable table;
    const bool tabled = options.use_transition_table;
    if (tabled) table = precompute_transition_table(model, grid, scenarios);
    const double build = seconds_since(start);

    const Method method = graph.kind == GraphKind::Exact ? Method::Exact : Method::Clustered;
    SolveResult result =
        solve_process(model, grid, proc, method, options, tabled ? &table : nullptr);
    result.build_seconds = build;
    result.catalog.key_decimals = graph.key_decimals;
    if (graph.kind == GraphKind::Exact) {
        result.catalog.prefix_keys.resize(static_cast<std::size_t>(graph.horizon));
        for (int k = 0; k < graph.horizon; ++k) {
            auto& keys = result.catalog.prefix_keys[static_cast<std::size_t>(k)];
            keys.reserve(graph.stages[static_cast<std::size_t>(k)].size());
            for (const StageNode& node : graph.stages[static_cast<std::size_t>(k)]) {
                const auto& seq =
                    scenarios.sequences[static_cast<std::size_t>(node.member_ids.front())];
                keys.push_back(prefix_key(seq, k, graph.key_decimals));
            }
        }
    }
    return result;
}

SolveResult solve_cluster_dp(const SystemModel& model, const Grid& grid,
                             const ClusterModel& clusters, const ScenarioSet& scenarios,
                             const SolveOptions& options) {
    SolveResult result = solve_node_dp(model, grid, clusters.graph, scenarios, options);
    result.catalog.centers.resize(clusters.stages.size());
    for (std::size_t k = 0; k < clusters.stages.size(); ++k)
        result.catalog.centers[k] = clusters.stages[k].centers;
    return result;
}

SolveResult solve_markov_dp(const SystemModel& model, const Grid& grid, const MarkovModel& markov,
                            const SolveOptions& options) {
    if (markov.horizon != model.horizon)
        throw std::runtime_error("markov solve: chain horizon does not match the model");
    const auto start = Clock::now();
    const InfoProcess proc = process_from_markov(markov);
    const double build = seconds_since(start);
    SolveResult result = solve_process(model, grid, proc, Method::Markov, options, nullptr);
    result.build_seconds = build;
    result.catalog.bin_centers = markov.quant.centers;
    result.catalog.bin_reachable.resize(static_cast<std::size_t>(markov.horizon));
    for (int k = 0; k < markov.horizon; ++k) {
        auto& row = result.catalog.bin_reachable[static_cast<std::size_t>(k)];
        row.resize(static_cast<std::size_t>(markov.bins(k)));
        for (int b = 0; b < markov.bins(k); ++b) row[static_cast<std::size_t>(b)] =
            markov.reachable(k, b) ? 1 : 0;
    }
    return result;
}

double closed_loop_model_value(const SolveResult& result, const SystemModel& model,
                               const NodeGraph& graph, const ScenarioSet& scenarios) {
    return forward_value(result, model, process_from_graph(graph, scenarios, result.options));
}

double closed_loop_model_value(const SolveResult& result, const SystemModel& model,
                               const MarkovModel& markov) {
    return forward_value(result, model, process_from_markov(markov));
}

double closed_loop_model_value(const SolveResult& result, const SystemModel& model,
                               const std::vector<double>& nominal_w) {
    return forward_value(result, model, process_from_nominal(nominal_w));
}

std::string policy_to_json(const SolveResult& result) {
    json doc;
    doc["method"] = method_name(result.method);
    doc["horizon"] = result.horizon;
    doc["grid"] = {{"x_min", result.grid.x_min}, {"x_max", result.grid.x_max},
                   {"x_step", result.grid.x_step}, {"u_min", result.grid.u_min},
                   {"u_max", result.grid.u_max}, {"u_step", result.grid.u_step}};
    doc["options"] = {{"value_mode", value_mode_name(result.options.value_mode)},
                      {"infeasibility_penalty", result.options.infeasibility_penalty},
                      {"threads", result.options.threads},
                      {"sample_size", result.options.sample_size},
                      {"sample_seed", result.options.sample_seed},
                      {"use_transition_table", result.options.use_transition_table}};
    json catalog;
    catalog["states_per_step"] = result.catalog.states_per_step;
    catalog["key_decimals"] = result.catalog.key_decimals;
    catalog["prefix_keys"] = result.catalog.prefix_keys;
    catalog["centers"] = result.catalog.centers;
    catalog["bin_centers"] = result.catalog.bin_centers;
    catalog["bin_reachable"] = result.catalog.bin_reachable;
    catalog["nominal_sequence"] = result.catalog.nominal_sequence;
    doc["catalog"] = std::move(catalog);
    json stages = json::array();
    for (const StageTable& stage : result.stages) {
        stages.push_back(
            {{"states", stage.states}, {"values", stage.values}, {"policy", stage.policy}});
    }
    doc["stages"] = std::move(stages);
    doc["terminal"] = result.terminal;
    doc["root_weights"] = result.root_weights;
    doc["root_value"] = result.root_value;
    doc["build_seconds"] = result.build_seconds;
    doc["solve_seconds"] = result.solve_seconds;
    return doc.dump(2);
}

SolveResult policy_from_json(const std::string& json_text) {
    json doc;
    try {
        doc = json::parse(json_text);
    } catch (const json::exception& err) {
        throw std::runtime_error(std::string("policy: invalid JSON: ") + err.what());
    }
    try {
        SolveResult result;
        result.method = method_from_name(doc.at("method").get<std::string>());
        result.horizon = doc.at("horizon").get<int>();
        const json& g = doc.at("grid");
        result.grid = make_grid(g.at("x_min").get<double>(), g.at("x_max").get<double>(),
                                g.at("x_step").get<double>(), g.at("u_min").get<double>(),
                                g.at("u_max").get<double>(), g.at("u_step").get<double>());
        const json& o = doc.at("options");
        result.options.value_mode = value_mode_from_name(o.at("value_mode").get<std::string>());
        result.options.infeasibility_penalty = o.at("infeasibility_penalty").get<double>();
        result.options.threads = o.at("threads").get<int>();
        result.options.sample_size = o.at("sample_size").get<std::size_t>();
        result.options.sample_seed = o.at("sample_seed").get<std::uint64_t>();
        result.options.use_transition_table = o.at("use_transition_table").get<bool>();
        const json& c = doc.at("catalog");
        result.catalog.states_per_step = c.at("states_per_step").get<std::vector<int>>();
        result.catalog.key_decimals = c.at("key_decimals").get<int>();
        result.catalog.prefix_keys =
            c.at("prefix_keys").get<std::vector<std::vector<std::vector<std::int64_t>>>>();
        result.catalog.centers =
            c.at("centers").get<std::vector<std::vector<std::vector<double>>>>();
        result.catalog.bin_centers = c.at("bin_centers").get<std::vector<std::vector<double>>>();
        result.catalog.bin_reachable =
            c.at("bin_reachable").get<std::vector<std::vector<std::uint8_t>>>();
        result.catalog.nominal_sequence = c.at("nominal_sequence").get<std::vector<double>>();

        if (result.horizon <= 0) throw std::runtime_error("policy: horizon must be positive");
        if (static_cast<int>(result.catalog.states_per_step.size()) != result.horizon)
            throw std::runtime_error("policy: states_per_step length does not match the horizon");
        const std::size_t nx = result.grid.x_values.size();
        const json& stages = doc.at("stages");
        if (static_cast<int>(stages.size()) != result.horizon)
            throw std::runtime_error("policy: stage count does not match the horizon");
        result.stages.resize(stages.size());
        for (std::size_t k = 0; k < stages.size(); ++k) {
            StageTable& stage = result.stages[k];
            stage.states = stages[k].at("states").get<int>();
            if (stage.states != result.catalog.states_per_step[k])
                throw std::runtime_error("policy: stage state count disagrees with the catalog");
            stage.values = stages[k].at("values").get<std::vector<double>>();
            stage.policy = stages[k].at("policy").get<std::vector<std::uint16_t>>();
            const std::size_t expected = static_cast<std::size_t>(stage.states) * nx;
            if (stage.values.size() != expected || stage.policy.size() != expected)
                throw std::runtime_error("policy: stage table size mismatch");
            for (const std::uint16_t v : stage.policy) {
                if (static_cast<std::size_t>(v) >= result.grid.u_values.size())
                    throw std::runtime_error("policy: control index out of range");
            }
        }
        result.terminal = doc.at("terminal").get<std::vector<double>>();
        if (result.terminal.size() != nx)
            throw std::runtime_error("policy: terminal table size mismatch");
        result.root_weights = doc.at("root_weights").get<std::vector<double>>();
        if (static_cast<int>(result.root_weights.size()) != result.catalog.states_per_step[0])
            throw std::runtime_error("policy: root weight count mismatch");
        result.root_value = doc.at("root_value").get<double>();
        result.build_seconds = doc.at("build_seconds").get<double>();
        result.solve_seconds = doc.at("solve_seconds").get<double>();
        return result;
    } catch (const json::exception& err) {
        throw std::runtime_error(std::string("policy: missing or mistyped field: ") + err.what());
    }
}

void save_policy(const SolveResult& result, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write policy file: " + path);
    out << policy_to_json(result) << '\n';
    if (!out) throw std::runtime_error("failed while writing policy file: " + path);
}

SolveResult load_policy(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot read policy file: " + path);
    std::ostringstream buffer;
    buffer << in.rdbuf();
    return policy_from_json(buffer.str());
}

}  // namespace sctree
