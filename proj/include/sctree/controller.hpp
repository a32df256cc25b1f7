#pragma once

#include <string>
#include <vector>

#include "sctree/dp.hpp"
#include "sctree/scenario.hpp"
#include "sctree/system_model.hpp"

namespace sctree {

/// The one admissibility rule shared by the solver and the simulator: a
/// control is admissible at (x, w) when the continuous next state stays
/// inside the state bounds. No grid rounding is involved.
inline bool next_state_admissible(const SystemModel& model, double next_x) {
    return next_x >= model.x_min && next_x <= model.x_max;
}

/// All admissible u grid values at (x, w), ascending. May be empty.
std::vector<double> admissible_controls(const SystemModel& model, const Grid& grid, int step,
                                        double x, double w);

/// Index of the admissible control nearest to grid.u(v_index) by value,
/// ties to the lower control. -1 when no control is admissible.
/// `admissible` holds one flag per u grid point.
int pick_nearest_admissible(const Grid& grid, const std::vector<char>& admissible, int v_index);

/// Fallback for an empty admissible set: the control whose raw next state
/// (next_x_of_u, one entry per u grid point) is closest to the state bounds,
/// ties to the lower control.
int pick_fallback_control(const SystemModel& model, const Grid& grid,
                          const double* next_x_of_u);

struct ControlDecision {
    int u_index = 0;
    double u = 0.0;
    bool infeasible = false;
};

/// Two-level projection: the admissible control nearest to the high-level
/// candidate v, or the fallback control with the infeasible flag set.
ControlDecision project_control(const SystemModel& model, const Grid& grid, int step, double x,
                                int v_index, double w);

/// project_control for an on-grid v given by value.
ControlDecision apply_two_level(const SystemModel& model, const Grid& grid, int step, double x,
                                double v, double w);

enum class SimulationMode { Quantized, Continuous };

std::string sim_mode_name(SimulationMode mode);
SimulationMode sim_mode_from_name(const std::string& name);

struct ClosedLoopTrace {
    int sequence_id = 0;
    std::vector<double> states;       // x_0..x_N
    std::vector<double> high_level;   // v_0..v_{N-1}
    std::vector<double> controls;     // u_0..u_{N-1}
    std::vector<int> info_states;     // resolved information state per step
    std::vector<double> stage_costs;  // g_k plus any infeasibility penalty
    std::vector<char> infeasible_steps;
    double terminal_cost = 0.0;
    double total_cost = 0.0;
    int infeasible_events = 0;
};

/// Rolls the closed loop over one disturbance sequence. Quantized mode
/// starts from the grid point nearest x0 and rounds the state to the grid
/// after every transition, so the rollout matches the solver's transitions
/// exactly; continuous mode keeps the state continuous and rounds only for
/// policy lookups. When no control is admissible the state is clamped to
/// the bounds and the policy's infeasibility penalty is added to the stage
/// cost.
ClosedLoopTrace simulate_sequence(const SolveResult& policy, const SystemModel& model,
                                  const DisturbanceSequence& sequence, int sequence_id,
                                  SimulationMode mode);

struct EvaluationSummary {
    double average_cost = 0.0;             // probability-weighted
    std::vector<double> sequence_costs;    // per sequence, in input order
    int infeasible_events = 0;
    double wall_seconds = 0.0;
};

EvaluationSummary evaluate_policy(const SolveResult& policy, const SystemModel& model,
                                  const ScenarioSet& scenarios, SimulationMode mode);

/// One row per (sequence, step) with columns step, sequence id, information
/// state, x, v, u, w, stage cost, plus a terminal row per sequence.
void write_trajectory_csv(const std::vector<ClosedLoopTrace>& traces,
                          const ScenarioSet& scenarios, const std::string& path);

struct SummaryRow {
    std::string method;
    double average_cost = 0.0;
    double wall_seconds = 0.0;
    int infeasible_events = 0;
};

void write_summary_csv(const std::vector<SummaryRow>& rows, const std::string& path);

}  // namespace sctree
