#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include "sctree/scenario.hpp"

namespace sctree {

enum class BinPlacement { Uniform, Quantile };

std::string bin_placement_name(BinPlacement placement);
BinPlacement bin_placement_from_name(const std::string& name);

/// Per-step disturbance bins: centers and the bin index of every sequence.
struct Quantization {
    int bins = 0;  // requested count; a step collapses to one center when min = max
    std::vector<std::vector<double>> centers;       // [step], strictly increasing
    std::vector<std::vector<int>> sequence_bins;    // [step][sequence id]
};

/// Nearest center index for w, ties to the lower index. Centers ascending.
int nearest_bin(const std::vector<double>& centers, double w);

/// Bins each step's observed disturbance values. Uniform placement spaces
/// centers evenly between the min and max observed value (endpoints are
/// centers); quantile placement puts centers at the (i+1/2)/bins weighted
/// quantiles, deduplicated to keep centers strictly increasing.
Quantization quantize_disturbance(const ScenarioSet& scenarios, int bins_per_step,
                                  BinPlacement placement = BinPlacement::Uniform);

/// Non-stationary Markov chain over disturbance bins. A bin is reachable at
/// step k when some sequence maps to it; unreachable bins have zero marginal
/// mass and an all-zero transition row, and are never visited.
struct MarkovModel {
    int horizon = 0;
    Quantization quant;
    std::vector<std::vector<double>> marginal;  // [step][bin] visit probability mass
    // transition[k][i][j] = P[bin_{k+1} = j | bin_k = i], k in 0..horizon-2.
    std::vector<std::vector<std::vector<double>>> transition;

    int bins(int step) const {
        return static_cast<int>(quant.centers[static_cast<std::size_t>(step)].size());
    }
    bool reachable(int step, int bin) const {
        return marginal[static_cast<std::size_t>(step)][static_cast<std::size_t>(bin)] > 0.0;
    }
};

/// Estimates the time-dependent transition matrices from the sequence data:
/// T_k(i,j) = (mass of sequences with bin i at k and bin j at k+1) / (mass
/// of sequences with bin i at k).
MarkovModel estimate_transition(const ScenarioSet& scenarios, const Quantization& quant);

/// Nearest reachable bin at a step, ties to the lower index. Used to resolve
/// an observed disturbance to a Markov state at simulation time.
int resolve_bin(const MarkovModel& model, int step, double w);

/// Expands the chain into the full set of bin-center paths with their chain
/// probabilities. Throws when the path count would exceed max_paths.
ScenarioSet enumerate_chain_paths(const MarkovModel& model, std::size_t max_paths);

/// Per-step centers, marginals and transition rows.
std::string markov_to_json(const MarkovModel& model);

/// Checks the chain invariants: strictly increasing centers, reachable rows
/// row-stochastic within 1e-12, marginals summing to 1, and the step-k
/// marginal pushed through T_k matching the step-(k+1) marginal within
/// 1e-12. Throws std::runtime_error naming the first violation.
void validate_markov(const MarkovModel& model);

}  // namespace sctree
