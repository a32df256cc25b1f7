#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace sctree {

/// One predicted disturbance realization over the full horizon, with its
/// a priori probability.
struct DisturbanceSequence {
    std::vector<double> values;  // w_0 .. w_{N-1}
    double probability = 0.0;    // in (0, 1]
};

/// A predicted set of disturbance sequences. Probabilities sum to 1.
struct ScenarioSet {
    int horizon = 0;
    std::vector<DisturbanceSequence> sequences;

    std::size_t size() const { return sequences.size(); }
};

/// Default decimal precision used when comparing real-valued disturbances
/// for prefix grouping and duplicate merging.
inline constexpr int kDefaultKeyDecimals = 9;

/// Canonical integer key for a disturbance value: the value rounded to
/// `decimals` decimal places, scaled to an integer. Two values compare equal
/// exactly when their keys match.
std::int64_t value_key(double w, int decimals = kDefaultKeyDecimals);

/// Canonical key vector for the prefix w_0..w_k of a sequence.
std::vector<std::int64_t> prefix_key(const DisturbanceSequence& seq, int step,
                                     int decimals = kDefaultKeyDecimals);

/// Validates invariants shared by every ScenarioSet: nonempty, uniform
/// sequence length, positive probabilities, total probability 1 within 1e-12.
/// Throws std::runtime_error on violation.
void validate_scenarios(const ScenarioSet& set);

/// Merges sequences whose value vectors are identical under canonical
/// rounding, summing their probabilities. Order of first appearance is kept.
ScenarioSet merge_duplicates(const ScenarioSet& set, int decimals = kDefaultKeyDecimals);

/// Parses a scenario JSON file:
///   {"horizon": N, "sequences": [{"values": [...], "probability": p}, ...]}
/// Probabilities are normalized when their sum is within 1% of 1, otherwise
/// the file is rejected. Identical duplicate sequences are merged. The result
/// always passes validate_scenarios.
ScenarioSet load_scenarios(const std::string& path, int decimals = kDefaultKeyDecimals);

/// Same as load_scenarios but from an in-memory JSON string.
ScenarioSet parse_scenarios(const std::string& json_text, int decimals = kDefaultKeyDecimals);

/// Serializes to the scenario JSON format. Deterministic byte output.
std::string scenarios_to_json(const ScenarioSet& set);
void save_scenarios(const ScenarioSet& set, const std::string& path);

}  // namespace sctree
