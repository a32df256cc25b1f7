#include "sctree/markov.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include <json.hpp>

namespace sctree {

namespace {

constexpr double kProbTol = 1e-12;

std::vector<double> uniform_centers(double lo, double hi, int bins) {
    if (lo == hi) return {lo};
    if (bins == 1) return {0.5 * (lo + hi)};
    std::vector<double> centers(static_cast<std::size_t>(bins));
    for (int i = 0; i < bins; ++i) {
        centers[static_cast<std::size_t>(i)] =
            lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(bins - 1);
    }
    return centers;
}

std::vector<double> quantile_centers(const std::vector<std::pair<double, double>>& weighted_values,
                                     int bins) {
    // weighted_values: (value, probability mass), sorted ascending by value.
    double total = 0.0;
    for (const auto& [v, p] : weighted_values) total += p;
    std::vector<double> centers;
    std::size_t cursor = 0;
    double cum = 0.0;
    for (int i = 0; i < bins; ++i) {
        const double target = total * (static_cast<double>(i) + 0.5) / static_cast<double>(bins);
        while (cursor < weighted_values.size() && cum + weighted_values[cursor].second < target) {
            cum += weighted_values[cursor].second;
            ++cursor;
        }
        const double v = weighted_values[std::min(cursor, weighted_values.size() - 1)].first;
        if (centers.empty() || v > centers.back()) centers.push_back(v);
    }
    return centers;
}

[[noreturn]] void fail(const std::string& what) {
    throw std::runtime_error("markov invariant violated: " + what);
}

}  // namespace

int nearest_bin(const std::vector<double>& centers, double w) {
    int best = 0;
    double best_d = std::abs(w - centers[0]);
    for (std::size_t i = 1; i < centers.size(); ++i) {
        const double d = std::abs(w - centers[i]);
        if (d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    return best;
}

std::string bin_placement_name(BinPlacement placement) {
    return placement == BinPlacement::Uniform ? "uniform" : "quantile";
}

BinPlacement bin_placement_from_name(const std::string& name) {
    if (name == "uniform") return BinPlacement::Uniform;
    if (name == "quantile") return BinPlacement::Quantile;
    throw std::runtime_error("unknown bin placement: " + name);
}

Quantization quantize_disturbance(const ScenarioSet& scenarios, int bins_per_step,
                                  BinPlacement placement) {
    validate_scenarios(scenarios);
    if (bins_per_step < 1)
        throw std::invalid_argument("quantize_disturbance: bins_per_step must be at least 1");

    Quantization quant;
    quant.bins = bins_per_step;
    quant.centers.resize(static_cast<std::size_t>(scenarios.horizon));
    quant.sequence_bins.assign(static_cast<std::size_t>(scenarios.horizon),
                               std::vector<int>(scenarios.size(), 0));

    for (int k = 0; k < scenarios.horizon; ++k) {
        if (placement == BinPlacement::Uniform) {
            double lo = scenarios.sequences[0].values[static_cast<std::size_t>(k)];
            double hi = lo;
            for (const auto& s : scenarios.sequences) {
                lo = std::min(lo, s.values[static_cast<std::size_t>(k)]);
                hi = std::max(hi, s.values[static_cast<std::size_t>(k)]);
            }
            quant.centers[static_cast<std::size_t>(k)] = uniform_centers(lo, hi, bins_per_step);
        } else {
            std::vector<std::pair<double, double>> weighted;
            weighted.reserve(scenarios.size());
            for (const auto& s : scenarios.sequences) {
                weighted.emplace_back(s.values[static_cast<std::size_t>(k)], s.probability);
            }
            std::sort(weighted.begin(), weighted.end());
            quant.centers[static_cast<std::size_t>(k)] = quantile_centers(weighted, bins_per_step);
        }
        const auto& centers = quant.centers[static_cast<std::size_t>(k)];
        for (std::size_t s = 0; s < scenarios.size(); ++s) {
            quant.sequence_bins[static_cast<std::size_t>(k)][s] =
                nearest_bin(centers, scenarios.sequences[s].values[static_cast<std::size_t>(k)]);
        }
    }
    return quant;
}

MarkovModel estimate_transition(const ScenarioSet& scenarios, const Quantization& quant) {
    if (quant.centers.size() != static_cast<std::size_t>(scenarios.horizon) ||
        quant.sequence_bins.size() != static_cast<std::size_t>(scenarios.horizon)) {
        throw std::invalid_argument("estimate_transition: quantization horizon mismatch");
    }

    MarkovModel model;
    model.horizon = scenarios.horizon;
    model.quant = quant;
    model.marginal.resize(static_cast<std::size_t>(scenarios.horizon));
    for (int k = 0; k < scenarios.horizon; ++k) {
        auto& marg = model.marginal[static_cast<std::size_t>(k)];
        marg.assign(quant.centers[static_cast<std::size_t>(k)].size(), 0.0);
        for (std::size_t s = 0; s < scenarios.size(); ++s) {
            marg[static_cast<std::size_t>(quant.sequence_bins[static_cast<std::size_t>(k)][s])] +=
                scenarios.sequences[s].probability;
        }
    }

    if (scenarios.horizon > 1) {
        model.transition.resize(static_cast<std::size_t>(scenarios.horizon - 1));
        for (int k = 0; k + 1 < scenarios.horizon; ++k) {
            const auto& from = quant.sequence_bins[static_cast<std::size_t>(k)];
            const auto& to = quant.sequence_bins[static_cast<std::size_t>(k + 1)];
            const std::size_t rows = quant.centers[static_cast<std::size_t>(k)].size();
            const std::size_t cols = quant.centers[static_cast<std::size_t>(k + 1)].size();
            auto& T = model.transition[static_cast<std::size_t>(k)];
            T.assign(rows, std::vector<double>(cols, 0.0));
            for (std::size_t s = 0; s < scenarios.size(); ++s) {
                T[static_cast<std::size_t>(from[s])][static_cast<std::size_t>(to[s])] +=
                    scenarios.sequences[s].probability;
            }
            for (std::size_t i = 0; i < rows; ++i) {
                const double mass = model.marginal[static_cast<std::size_t>(k)][i];
                if (mass > 0.0) {
                    for (double& t : T[i]) t /= mass;
                }
            }
        }
    }
    return model;
}

int resolve_bin(const MarkovModel& model, int step, double w) {
    const auto& centers = model.quant.centers[static_cast<std::size_t>(step)];
    const auto& marg = model.marginal[static_cast<std::size_t>(step)];
    int best = -1;
    double best_d = 0.0;
    for (std::size_t i = 0; i < centers.size(); ++i) {
        if (!(marg[i] > 0.0)) continue;
        const double d = std::abs(w - centers[i]);
        if (best < 0 || d < best_d) {
            best_d = d;
            best = static_cast<int>(i);
        }
    }
    if (best < 0) throw std::runtime_error("resolve_bin: no reachable bin at step");
    return best;
}

ScenarioSet enumerate_chain_paths(const MarkovModel& model, std::size_t max_paths) {
    // Count reachable paths first so an explosion is reported, not attempted.
    std::vector<double> counts(model.marginal.back().size(), 1.0);
    for (int k = model.horizon - 2; k >= 0; --k) {
        const auto& T = model.transition[static_cast<std::size_t>(k)];
        std::vector<double> prev(T.size(), 0.0);
        for (std::size_t i = 0; i < T.size(); ++i) {
            if (!model.reachable(k, static_cast<int>(i))) continue;
            for (std::size_t j = 0; j < T[i].size(); ++j) {
                if (T[i][j] > 0.0) prev[i] += counts[j];
            }
        }
        counts = std::move(prev);
    }
    double total_paths = 0.0;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (model.reachable(0, static_cast<int>(i))) total_paths += counts[i];
    }
    if (!(total_paths <= static_cast<double>(max_paths))) {
        throw std::runtime_error("enumerate_chain_paths: " + std::to_string(total_paths) +
                                 " paths exceed the cap of " + std::to_string(max_paths));
    }

    ScenarioSet out;
    out.horizon = model.horizon;
    std::vector<double> values(static_cast<std::size_t>(model.horizon));
    std::vector<int> bins(static_cast<std::size_t>(model.horizon));

    // Depth-first expansion in bin order keeps the output deterministic.
    auto expand = [&](auto&& self, int step, double prob) -> void {
        if (step == model.horizon) {
            out.sequences.push_back({values, prob});
            return;
        }
        const auto& centers = model.quant.centers[static_cast<std::size_t>(step)];
        for (std::size_t j = 0; j < centers.size(); ++j) {
            double p;
            if (step == 0) {
                p = model.marginal[0][j];
            } else {
                const auto& row =
                    model.transition[static_cast<std::size_t>(step - 1)]
                                    [static_cast<std::size_t>(bins[static_cast<std::size_t>(
                                        step - 1)])];
                p = row[j];
            }
            if (!(p > 0.0)) continue;
            values[static_cast<std::size_t>(step)] = centers[j];
            bins[static_cast<std::size_t>(step)] = static_cast<int>(j);
            self(self, step + 1, prob * p);
        }
    };
    expand(expand, 0, 1.0);
    validate_scenarios(out);
    return out;
}

void validate_markov(const MarkovModel& model) {
    if (model.horizon <= 0) fail("horizon must be positive");
    if (model.marginal.size() != static_cast<std::size_t>(model.horizon)) fail("marginal size");
    const std::size_t expect_rows =
        model.horizon > 1 ? static_cast<std::size_t>(model.horizon - 1) : 0;
    if (model.transition.size() != expect_rows) fail("transition stage count");

    for (int k = 0; k < model.horizon; ++k) {
        const auto& centers = model.quant.centers[static_cast<std::size_t>(k)];
        if (centers.empty()) fail("no centers at step");
        for (std::size_t i = 1; i < centers.size(); ++i) {
            if (!(centers[i] > centers[i - 1])) fail("centers not strictly increasing");
        }
        const auto& marg = model.marginal[static_cast<std::size_t>(k)];
        if (marg.size() != centers.size()) fail("marginal row size");
        double total = 0.0;
        for (double m : marg) {
            if (m < 0.0) fail("negative marginal mass");
            total += m;
        }
        if (std::abs(total - 1.0) > kProbTol) fail("marginal does not sum to 1");
    }

    for (int k = 0; k + 1 < model.horizon; ++k) {
        const auto& T = model.transition[static_cast<std::size_t>(k)];
        const auto& marg = model.marginal[static_cast<std::size_t>(k)];
        const auto& next_marg = model.marginal[static_cast<std::size_t>(k + 1)];
        if (T.size() != marg.size()) fail("transition row count");
        std::vector<double> pushed(next_marg.size(), 0.0);
        for (std::size_t i = 0; i < T.size(); ++i) {
            if (T[i].size() != next_marg.size()) fail("transition column count");
            double row_sum = 0.0;
            for (double t : T[i]) {
                if (t < 0.0) fail("negative transition probability");
                row_sum += t;
            }
            if (marg[i] > 0.0) {
                if (std::abs(row_sum - 1.0) > kProbTol) fail("reachable row not stochastic");
                for (std::size_t j = 0; j < T[i].size(); ++j) pushed[j] += marg[i] * T[i][j];
            } else if (row_sum != 0.0) {
                fail("unreachable row carries mass");
            }
        }
        for (std::size_t j = 0; j < pushed.size(); ++j) {
            if (std::abs(pushed[j] - next_marg[j]) > kProbTol) {
                fail("pushed marginal disagrees with the data marginal");
            }
        }
    }
}

std::string markov_to_json(const MarkovModel& model) {
    nlohmann::json root;
    root["horizon"] = model.horizon;
    root["bins"] = model.quant.bins;
    root["centers"] = model.quant.centers;
    root["marginal"] = model.marginal;
    root["transition"] = model.transition;
    return root.dump(2);
}

}  // namespace sctree
