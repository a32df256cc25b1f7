#include "sctree/controller.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <stdexcept>

#include "sctree/text.hpp"

namespace sctree {

namespace {

using Clock = std::chrono::steady_clock;

int resolve_u(const Grid& grid, double value) {
    if (grid.u_values.size() < 2) return 0;
    const double spacing =
        (grid.u_max - grid.u_min) / static_cast<double>(grid.u_values.size() - 1);
    const long idx = std::lround((value - grid.u_min) / spacing);
    if (idx < 0) return 0;
    if (idx >= static_cast<long>(grid.u_values.size())) return grid.nu() - 1;
    return static_cast<int>(idx);
}

double distance_to_bounds(const SystemModel& model, double next_x) {
    if (next_x < model.x_min) return model.x_min - next_x;
    if (next_x > model.x_max) return next_x - model.x_max;
    return 0.0;
}

/// Resolves an observed prefix to the policy's information state at `step`.
/// Keeps the running prefix across steps so each call is incremental.
class PrefixResolver {
  public:
    PrefixResolver(const SolveResult& policy, int sequence_length)
        : policy_(policy) {
        if (policy.method == Method::Exact && policy.catalog.prefix_keys.empty())
            throw std::runtime_error("policy lacks the prefix key catalog");
        if (policy.method == Method::Clustered && policy.catalog.centers.empty())
            throw std::runtime_error("policy lacks the cluster center catalog");
        if (policy.method == Method::Markov && policy.catalog.bin_centers.empty())
            throw std::runtime_error("policy lacks the bin center catalog");
        key_prefix_.reserve(static_cast<std::size_t>(sequence_length));
        raw_prefix_.reserve(static_cast<std::size_t>(sequence_length));
    }

    int resolve(int step, double w) {
        switch (policy_.method) {
            case Method::Nominal:
                return 0;
            case Method::Exact: {
                key_prefix_.push_back(value_key(w, policy_.catalog.key_decimals));
                const auto& keys = policy_.catalog.prefix_keys[static_cast<std::size_t>(step)];
                const auto it = std::lower_bound(keys.begin(), keys.end(), key_prefix_);
                if (it == keys.end() || *it != key_prefix_)
                    throw std::runtime_error(
                        "observed disturbance prefix is not a node of the solved tree");
                return static_cast<int>(it - keys.begin());
            }
            case Method::Clustered: {
                raw_prefix_.push_back(w);
                const auto& centers = policy_.catalog.centers[static_cast<std::size_t>(step)];
                int best = 0;
                double best_d2 = squared_distance(centers[0]);
                for (std::size_t c = 1; c < centers.size(); ++c) {
                    const double d2 = squared_distance(centers[c]);
                    if (d2 < best_d2) {
                        best_d2 = d2;
                        best = static_cast<int>(c);
                    }
                }
                return best;
            }
            case Method::Markov: {
                const auto& centers = policy_.catalog.bin_centers[static_cast<std::size_t>(step)];
                const auto& reachable =
                    policy_.catalog.bin_reachable[static_cast<std::size_t>(step)];
                int best = -1;
                double best_d = 0.0;
                for (std::size_t b = 0; b < centers.size(); ++b) {
                    if (!reachable[b]) continue;
                    const double d = std::abs(w - centers[b]);
                    if (best < 0 || d < best_d) {
                        best_d = d;
                        best = static_cast<int>(b);
                    }
                }
                if (best < 0) throw std::runtime_error("no reachable bin at this step");
                return best;
            }
        }
        throw std::runtime_error("unknown policy method");
    }

  private:
    double squared_distance(const std::vector<double>& center) const {
        double total = 0.0;
        for (std::size_t d = 0; d < center.size(); ++d) {
            const double diff = raw_prefix_[d] - center[d];
            total += diff * diff;
        }
        return total;
    }

    const SolveResult& policy_;
    std::vector<std::int64_t> key_prefix_;
    std::vector<double> raw_prefix_;
};

}  // namespace

std::vector<double> admissible_controls(const SystemModel& model, const Grid& grid, int step,
                                        double x, double w) {
    std::vector<double> controls;
    for (int u = 0; u < grid.nu(); ++u) {
        if (next_state_admissible(model, model.dynamics(step, x, grid.u(u), w)))
            controls.push_back(grid.u(u));
    }
    return controls;
}

int pick_nearest_admissible(const Grid& grid, const std::vector<char>& admissible, int v_index) {
    const double v = grid.u(v_index);
    int best = -1;
    double best_d = 0.0;
    for (int u = 0; u < grid.nu(); ++u) {
        if (!admissible[static_cast<std::size_t>(u)]) continue;
        const double d = std::abs(grid.u(u) - v);
        if (best < 0 || d < best_d) {
            best_d = d;
            best = u;
        }
    }
    return best;
}

int pick_fallback_control(const SystemModel& model, const Grid& grid,
                          const double* next_x_of_u) {
    int best = 0;
    double best_d = distance_to_bounds(model, next_x_of_u[0]);
    for (int u = 1; u < grid.nu(); ++u) {
        const double d = distance_to_bounds(model, next_x_of_u[u]);
        if (d < best_d) {
            best_d = d;
            best = u;
        }
    }
    return best;
}

ControlDecision project_control(const SystemModel& model, const Grid& grid, int step, double x,
                                int v_index, double w) {
    std::vector<double> next_x(static_cast<std::size_t>(grid.nu()));
    std::vector<char> admissible(static_cast<std::size_t>(grid.nu()));
    bool any = false;
    for (int u = 0; u < grid.nu(); ++u) {
        next_x[static_cast<std::size_t>(u)] = model.dynamics(step, x, grid.u(u), w);
        const bool ok = next_state_admissible(model, next_x[static_cast<std::size_t>(u)]);
        admissible[static_cast<std::size_t>(u)] = ok ? 1 : 0;
        any = any || ok;
    }
    ControlDecision decision;
    if (any) {
        decision.u_index = pick_nearest_admissible(grid, admissible, v_index);
        decision.infeasible = false;
    } else {
        decision.u_index = pick_fallback_control(model, grid, next_x.data());
        decision.infeasible = true;
    }
    decision.u = grid.u(decision.u_index);
    return decision;
}

ControlDecision apply_two_level(const SystemModel& model, const Grid& grid, int step, double x,
                                double v, double w) {
    return project_control(model, grid, step, x, resolve_u(grid, v), w);
}

std::string sim_mode_name(SimulationMode mode) {
    return mode == SimulationMode::Quantized ? "quantized" : "continuous";
}

SimulationMode sim_mode_from_name(const std::string& name) {
    if (name == "quantized") return SimulationMode::Quantized;
    if (name == "continuous") return SimulationMode::Continuous;
    throw std::runtime_error("unknown simulation mode: " + name);
}

ClosedLoopTrace simulate_sequence(const SolveResult& policy, const SystemModel& model,
                                  const DisturbanceSequence& sequence, int sequence_id,
                                  SimulationMode mode) {
    validate_model(model);
    if (model.horizon != policy.horizon)
        throw std::runtime_error("simulate: model horizon does not match the policy");
    if (static_cast<int>(sequence.values.size()) != policy.horizon)
        throw std::runtime_error("simulate: sequence length does not match the policy");
    const Grid& grid = policy.grid;

    PrefixResolver resolver(policy, policy.horizon);
    ClosedLoopTrace trace;
    trace.sequence_id = sequence_id;
    double x = mode == SimulationMode::Quantized ? grid.x(grid.resolve_x(model.x0)) : model.x0;
    trace.states.push_back(x);
    double running = 0.0;
    for (int k = 0; k < policy.horizon; ++k) {
        const double w = sequence.values[static_cast<std::size_t>(k)];
        const int info = resolver.resolve(k, w);
        const int v_index = policy.policy(k, grid.resolve_x(x), info);
        const ControlDecision decision = project_control(model, grid, k, x, v_index, w);
        double stage = model.running_cost(k, x, decision.u, w);
        if (decision.infeasible) stage += policy.options.infeasibility_penalty;

        double next_x = model.dynamics(k, x, decision.u, w);
        if (decision.infeasible) {
            if (next_x < model.x_min) next_x = model.x_min;
            if (next_x > model.x_max) next_x = model.x_max;
        }
        x = mode == SimulationMode::Quantized ? grid.x(grid.resolve_x(next_x)) : next_x;

        trace.states.push_back(x);
        trace.high_level.push_back(grid.u(v_index));
        trace.controls.push_back(decision.u);
        trace.info_states.push_back(info);
        trace.stage_costs.push_back(stage);
        trace.infeasible_steps.push_back(decision.infeasible ? 1 : 0);
        if (decision.infeasible) ++trace.infeasible_events;
        running += stage;
    }
    trace.terminal_cost = model.terminal_cost(x);
    trace.total_cost = running + trace.terminal_cost;
    return trace;
}

EvaluationSummary evaluate_policy(const SolveResult& policy, const SystemModel& model,
                                  const ScenarioSet& scenarios, SimulationMode mode) {
    if (scenarios.horizon != policy.horizon)
        throw std::runtime_error("evaluate: scenario horizon does not match the policy");
    const auto start = Clock::now();
    EvaluationSummary summary;
    summary.sequence_costs.reserve(scenarios.sequences.size());
    for (std::size_t i = 0; i < scenarios.sequences.size(); ++i) {
        const ClosedLoopTrace trace =
            simulate_sequence(policy, model, scenarios.sequences[i], static_cast<int>(i), mode);
        summary.sequence_costs.push_back(trace.total_cost);
        summary.average_cost += scenarios.sequences[i].probability * trace.total_cost;
        summary.infeasible_events += trace.infeasible_events;
    }
    summary.wall_seconds =
        std::chrono::duration<double>(Clock::now() - start).count();
    return summary;
}

void write_trajectory_csv(const std::vector<ClosedLoopTrace>& traces,
                          const ScenarioSet& scenarios, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write trajectory file: " + path);
    out << "step,sequence,info_state,x,v,u,w,stage_cost\n";
    for (const ClosedLoopTrace& trace : traces) {
        const auto& values =
            scenarios.sequences[static_cast<std::size_t>(trace.sequence_id)].values;
        for (std::size_t k = 0; k < trace.controls.size(); ++k) {
            out << k << ',' << trace.sequence_id << ',' << trace.info_states[k] << ','
                << format_double(trace.states[k]) << ',' << format_double(trace.high_level[k])
                << ',' << format_double(trace.controls[k]) << ',' << format_double(values[k])
                << ',' << format_double(trace.stage_costs[k]) << '\n';
        }
        out << trace.controls.size() << ',' << trace.sequence_id << ",,"
            << format_double(trace.states.back()) << ",,,,"
            << format_double(trace.terminal_cost) << '\n';
    }
    if (!out) throw std::runtime_error("failed while writing trajectory file: " + path);
}

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write summary file: " + path);
    out << "method,average_cost,wall_seconds,infeasible_events\n";
    for (const SummaryRow& row : rows) {
        out << row.method << ',' << format_double(row.average_cost) << ','
            << format_double(row.wall_seconds) << ',' << row.infeasible_events << '\n';
    }
    if (!out) throw std::runtime_error("failed while writing summary file: " + path);
}

}  // namespace sctree
