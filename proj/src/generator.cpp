#include "sctree/generator.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

#include "sctree/rng.hpp"

namespace sctree {

namespace {

double clip(double value, double lo, double hi) {
    if (value < lo) return lo;
    if (value > hi) return hi;
    return value;
}

std::vector<std::int64_t> sequence_key(const std::vector<double>& values) {
    std::vector<std::int64_t> key;
    key.reserve(values.size());
    for (const double v : values) key.push_back(value_key(v, kDefaultKeyDecimals));
    return key;
}

}  // namespace

std::string gen_family_name(GenFamily family) {
    return family == GenFamily::SimpleConverging ? "simple_converging" : "branching_walk";
}

GenFamily gen_family_from_name(const std::string& name) {
    if (name == "simple_converging") return GenFamily::SimpleConverging;
    if (name == "branching_walk") return GenFamily::BranchingWalk;
    throw std::runtime_error("unknown generator family: " + name);
}

void validate_gen_spec(const GenSpec& spec) {
    if (spec.horizon <= 0) throw std::runtime_error("generator: horizon must be positive");
    if (spec.count < 1) throw std::runtime_error("generator: sequence count must be positive");
    if (!(spec.w_lo < spec.w_hi)) throw std::runtime_error("generator: value range is inverted");
    if (!(spec.step_bound > 0.0))
        throw std::runtime_error("generator: step bound must be positive");
    if (spec.family == GenFamily::SimpleConverging) {
        for (const int step : spec.convergence_steps) {
            if (step < 0 || step >= spec.horizon)
                throw std::runtime_error("generator: convergence step outside the horizon");
        }
    }
    if (spec.family == GenFamily::BranchingWalk && spec.branch_factor < 2)
        throw std::runtime_error("generator: branch factor must be at least 2");
}

ScenarioSet generate_simple_converging(const GenSpec& spec) {
    validate_gen_spec(spec);
    if (spec.count != 4)
        throw std::runtime_error("simple_converging generates exactly 4 sequences");

    std::vector<int> converge = spec.convergence_steps;
    std::sort(converge.begin(), converge.end());
    converge.erase(std::unique(converge.begin(), converge.end()), converge.end());
    if (!converge.empty() && converge.front() == 0)
        throw std::runtime_error(
            "simple_converging needs step 0 free for the two-way split");
    const int last_converge = converge.empty() ? -1 : converge.back();

    Rng rng = Rng::stream(spec.seed, 0xA11CE);
    const double range = spec.w_hi - spec.w_lo;
    auto draw = [&] { return spec.w_lo + range * rng.uniform(); };

    const int n = spec.horizon;
    std::vector<std::vector<double>> values(4, std::vector<double>(static_cast<std::size_t>(n)));

    // Step 0: two distinct starting values, one per pair of sequences.
    double a = draw();
    double b = draw();
    while (value_key(b, kDefaultKeyDecimals) == value_key(a, kDefaultKeyDecimals)) b = draw();
    values[0][0] = values[1][0] = a;
    values[2][0] = values[3][0] = b;

    for (int k = 1; k < n; ++k) {
        const bool is_converge =
            std::binary_search(converge.begin(), converge.end(), k);
        if (is_converge) {
            const double shared = draw();
            for (int s = 0; s < 4; ++s) values[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] = shared;
            continue;
        }
        const bool force_distinct = k > last_converge && last_converge >= 0;
        for (int s = 0; s < 4; ++s) {
            const double prev = values[static_cast<std::size_t>(s)][static_cast<std::size_t>(k - 1)];
            values[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)] =
                clip(prev + rng.uniform(-spec.step_bound, spec.step_bound), spec.w_lo, spec.w_hi);
        }
        if (force_distinct) {
            for (int guard = 0; guard < 1000; ++guard) {
                std::set<std::int64_t> seen;
                int colliding = -1;
                for (int s = 0; s < 4; ++s) {
                    const double v = values[static_cast<std::size_t>(s)][static_cast<std::size_t>(k)];
                    if (!seen.insert(value_key(v, kDefaultKeyDecimals)).second) {
                        colliding = s;
                        break;
                    }
                }
                if (colliding < 0) break;
                values[static_cast<std::size_t>(colliding)][static_cast<std::size_t>(k)] = draw();
            }
        }
    }

    ScenarioSet set;
    set.horizon = n;
    for (int s = 0; s < 4; ++s)
        set.sequences.push_back({values[static_cast<std::size_t>(s)], 0.25});
    return set;
}

ScenarioSet generate_branching_walk(const GenSpec& spec) {
    validate_gen_spec(spec);
    if (spec.branch_factor < 2)
        throw std::runtime_error("generator: branch factor must be at least 2");

    const int n = spec.horizon;
    const int window_lo = static_cast<int>(std::floor(0.9 * spec.count));
    const int window_hi = static_cast<int>(std::ceil(1.1 * spec.count));
    const double reachable =
        std::pow(static_cast<double>(spec.branch_factor), static_cast<double>(n - 1));
    if (reachable < static_cast<double>(std::max(1, window_lo))) {
        throw std::runtime_error(
            "branching_walk cannot reach " + std::to_string(spec.count) + " sequences over " +
            std::to_string(n) + " steps; the achievable maximum is " +
            std::to_string(static_cast<long long>(reachable)));
    }

    // Per-step branching rate whose expected growth hits the target count.
    const double growth =
        n > 1 ? std::pow(static_cast<double>(spec.count), 1.0 / static_cast<double>(n - 1)) : 1.0;
    const double base_rate =
        std::clamp((growth - 1.0) / static_cast<double>(spec.branch_factor - 1), 0.0, 1.0);

    const double range = spec.w_hi - spec.w_lo;
    // Typical per-step trend sized so a family spans about the value range
    // over the horizon; step_bound stays the hard cap on any increment.
    const double trend_cap =
        std::min(spec.step_bound, 1.5 * range / static_cast<double>(std::max(1, n - 1)));
    constexpr int kAttempts = 12;
    for (int attempt = 0; attempt < kAttempts; ++attempt) {
        const double rate = std::min(1.0, base_rate * std::pow(1.2, attempt));
        Rng rng = Rng::stream(spec.seed, 0xB4A9C, static_cast<std::uint64_t>(attempt));

        struct WalkPath {
            std::vector<double> values;
            double trend;
        };
        std::vector<WalkPath> paths;
        paths.push_back(
            {{spec.w_lo + range * rng.uniform()}, rng.uniform(-trend_cap, trend_cap)});
        for (int k = 1; k < n; ++k) {
            // Early branches spread trends far apart and found the distinct
            // families; later branches diverge less and stay within one.
            const double spread = trend_cap * std::pow(0.6, k - 1);
            std::vector<WalkPath> next;
            next.reserve(paths.size() * 2);
            for (const WalkPath& path : paths) {
                const int children = rng.uniform() < rate ? spec.branch_factor : 1;
                for (int c = 0; c < children; ++c) {
                    const double jitter = children > 1 ? spread : 0.05 * trend_cap;
                    double trend = std::clamp(path.trend + rng.uniform(-jitter, jitter),
                                              -trend_cap, trend_cap);
                    double value = path.values.back() + trend;
                    // Hitting a range bound reflects the trend.
                    if (value < spec.w_lo || value > spec.w_hi) {
                        value = clip(value, spec.w_lo, spec.w_hi);
                        trend = -trend;
                    }
                    WalkPath grown{path.values, trend};
                    grown.values.push_back(value);
                    next.push_back(std::move(grown));
                }
            }
            paths = std::move(next);
        }

        std::set<std::vector<std::int64_t>> seen;
        std::vector<std::vector<double>> distinct;
        distinct.reserve(paths.size());
        for (WalkPath& path : paths) {
            if (seen.insert(sequence_key(path.values)).second)
                distinct.push_back(std::move(path.values));
        }
        if (static_cast<int>(distinct.size()) < window_lo) continue;
        if (static_cast<int>(distinct.size()) > window_hi)
            distinct.resize(static_cast<std::size_t>(spec.count));

        ScenarioSet set;
        set.horizon = n;
        const double probability = 1.0 / static_cast<double>(distinct.size());
        for (std::vector<double>& path : distinct)
            set.sequences.push_back({std::move(path), probability});
        return set;
    }
    throw std::runtime_error(
        "branching_walk could not reach the target count after " + std::to_string(kAttempts) +
        " attempts; lower the target or raise the branch factor");
}

ScenarioSet generate_scenarios(const GenSpec& spec) {
    return spec.family == GenFamily::SimpleConverging ? generate_simple_converging(spec)
                                                      : generate_branching_walk(spec);
}

}  // namespace sctree
