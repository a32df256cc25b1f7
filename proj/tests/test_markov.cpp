#include <doctest.h>

#include <algorithm>
#include <stdexcept>
#include <vector>

#include "sctree/markov.hpp"
#include "sctree/rng.hpp"
#include "sctree/scenario.hpp"

using namespace sctree;

namespace {

ScenarioSet make_set(int horizon, std::vector<DisturbanceSequence> seqs) {
    ScenarioSet set;
    set.horizon = horizon;
    set.sequences = std::move(seqs);
    return set;
}

ScenarioSet three_sequences() {
    const double p = 1.0 / 3.0;
    return make_set(2, {{{0.0, 0.0}, p}, {{0.0, 1.0}, p}, {{1.0, 1.0}, p}});
}

}  // namespace

TEST_CASE("nearest_bin breaks ties toward the lower center") {
    const std::vector<double> centers = {0.0, 0.5, 1.0};
    CHECK(nearest_bin(centers, -3.0) == 0);
    CHECK(nearest_bin(centers, 0.2) == 0);
    CHECK(nearest_bin(centers, 0.25) == 0);  // exact midpoint
    CHECK(nearest_bin(centers, 0.3) == 1);
    CHECK(nearest_bin(centers, 0.75) == 1);  // exact midpoint
    CHECK(nearest_bin(centers, 2.0) == 2);
}

TEST_CASE("quantize_disturbance uniform placement") {
    SUBCASE("constant step collapses to one center") {
        auto set = make_set(1, {{{0.5}, 0.5}, {{0.5}, 0.5}});
        auto quant = quantize_disturbance(set, 10);
        CHECK(quant.centers[0] == std::vector<double>{0.5});
        CHECK(quant.sequence_bins[0] == std::vector<int>{0, 0});
    }
    SUBCASE("endpoints map to endpoint centers") {
        auto set = make_set(1, {{{0.0}, 0.5}, {{1.0}, 0.5}});
        auto quant = quantize_disturbance(set, 10);
        REQUIRE(quant.centers[0].size() == 10);
        CHECK(quant.centers[0].front() == 0.0);
        CHECK(quant.centers[0].back() == 1.0);
        CHECK(quant.sequence_bins[0] == std::vector<int>{0, 9});
    }
    SUBCASE("five centers over [0,1] and the 0.26 midpoint rule") {
        const double p = 1.0 / 3.0;
        auto set = make_set(1, {{{0.0}, p}, {{0.26}, p}, {{1.0}, p}});
        auto quant = quantize_disturbance(set, 5);
        CHECK(quant.centers[0] == std::vector<double>{0.0, 0.25, 0.5, 0.75, 1.0});
        CHECK(quant.sequence_bins[0] == std::vector<int>{0, 1, 4});
    }
    SUBCASE("single bin sits at the range midpoint") {
        auto set = make_set(1, {{{0.0}, 0.5}, {{1.0}, 0.5}});
        auto quant = quantize_disturbance(set, 1);
        CHECK(quant.centers[0] == std::vector<double>{0.5});
    }
    CHECK_THROWS_AS(quantize_disturbance(three_sequences(), 0), std::invalid_argument);
}

TEST_CASE("quantile placement follows the weighted distribution") {
    auto set = make_set(1, {{{0.0}, 0.5}, {{1.0}, 0.5}});
    auto quant = quantize_disturbance(set, 2, BinPlacement::Quantile);
    CHECK(quant.centers[0] == std::vector<double>{0.0, 1.0});

    auto skewed = make_set(1, {{{0.0}, 0.75}, {{1.0}, 0.25}});
    auto qskew = quantize_disturbance(skewed, 2, BinPlacement::Quantile);
    // Both half-quantiles land on 0; centers deduplicate.
    CHECK(qskew.centers[0] == std::vector<double>{0.0});
}

TEST_CASE("estimate_transition reproduces the three-sequence chain") {
    auto set = three_sequences();
    auto quant = quantize_disturbance(set, 2);
    auto model = estimate_transition(set, quant);

    CHECK(model.quant.centers[0] == std::vector<double>{0.0, 1.0});
    // First-order insufficiency: the first two sequences share the step-0 bin.
    CHECK(model.quant.sequence_bins[0][0] == model.quant.sequence_bins[0][1]);

    CHECK(model.marginal[0][0] == doctest::Approx(2.0 / 3.0).epsilon(1e-15));
    CHECK(model.marginal[0][1] == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
    CHECK(model.transition[0][0][0] == 0.5);
    CHECK(model.transition[0][0][1] == 0.5);
    CHECK(model.transition[0][1][0] == 0.0);
    CHECK(model.transition[0][1][1] == 1.0);
    CHECK_NOTHROW(validate_markov(model));
}

TEST_CASE("single sequence gives unit transition rows") {
    auto set = make_set(3, {{{0.2, 0.4, 0.6}, 1.0}});
    auto model = estimate_transition(set, quantize_disturbance(set, 10));
    for (int k = 0; k < 3; ++k) {
        CHECK(model.quant.centers[static_cast<std::size_t>(k)].size() == 1);
        CHECK(model.reachable(k, 0));
    }
    for (int k = 0; k < 2; ++k) CHECK(model.transition[static_cast<std::size_t>(k)][0][0] == 1.0);
    CHECK_NOTHROW(validate_markov(model));
}

TEST_CASE("identical values at both steps give a single unit entry") {
    auto set = make_set(2, {{{0.3, 0.3}, 0.5}, {{0.3, 0.3}, 0.5}});
    auto model = estimate_transition(set, quantize_disturbance(set, 4));
    CHECK(model.quant.centers[0].size() == 1);
    CHECK(model.transition[0][0][0] == 1.0);
    CHECK_NOTHROW(validate_markov(model));
}

TEST_CASE("unreachable bins carry no mass and resolve_bin skips them") {
    auto set = make_set(2, {{{0.0, 0.0}, 0.5}, {{1.0, 1.0}, 0.5}});
    auto model = estimate_transition(set, quantize_disturbance(set, 10));
    for (int k = 0; k < 2; ++k) {
        for (int i = 1; i < 9; ++i) {
            CHECK_FALSE(model.reachable(k, i));
        }
        CHECK(model.reachable(k, 0));
        CHECK(model.reachable(k, 9));
    }
    for (int i = 1; i < 9; ++i) {
        double row_sum = 0.0;
        for (double t : model.transition[0][static_cast<std::size_t>(i)]) row_sum += t;
        CHECK(row_sum == 0.0);
    }
    // 0.4 is nearer to several unreachable centers; only 0 and 1 count.
    CHECK(resolve_bin(model, 0, 0.4) == 0);
    CHECK(resolve_bin(model, 0, 0.6) == 9);
    CHECK_NOTHROW(validate_markov(model));
}

TEST_CASE("enumerate_chain_paths expands the three-sequence chain exactly") {
    auto set = three_sequences();
    auto model = estimate_transition(set, quantize_disturbance(set, 2));
    auto paths = enumerate_chain_paths(model, 100);
    REQUIRE(paths.size() == 3);
    CHECK(paths.horizon == 2);

    std::vector<std::vector<double>> values;
    for (const auto& s : paths.sequences) values.push_back(s.values);
    std::sort(values.begin(), values.end());
    CHECK(values[0] == std::vector<double>{0.0, 0.0});
    CHECK(values[1] == std::vector<double>{0.0, 1.0});
    CHECK(values[2] == std::vector<double>{1.0, 1.0});
    for (const auto& s : paths.sequences) {
        CHECK(s.probability == doctest::Approx(1.0 / 3.0).epsilon(1e-14));
    }

    CHECK_THROWS_AS(enumerate_chain_paths(model, 2), std::runtime_error);
}

TEST_CASE("markov invariants hold on random scenario sets") {
    const double alphabet[] = {0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    for (std::uint64_t trial = 0; trial < 30; ++trial) {
        Rng rng = Rng::stream(90210, trial);
        const int horizon = 1 + static_cast<int>(rng.below(6));
        const std::size_t count = 1 + rng.below(12);
        ScenarioSet set;
        set.horizon = horizon;
        double total = 0.0;
        for (std::size_t s = 0; s < count; ++s) {
            DisturbanceSequence seq;
            for (int k = 0; k < horizon; ++k) seq.values.push_back(alphabet[rng.below(6)]);
            seq.probability = 0.1 + rng.uniform();
            total += seq.probability;
            set.sequences.push_back(std::move(seq));
        }
        for (auto& seq : set.sequences) seq.probability /= total;
        set = merge_duplicates(set);

        const int bins = 1 + static_cast<int>(rng.below(10));
        auto model = estimate_transition(set, quantize_disturbance(set, bins));
        CHECK_NOTHROW(validate_markov(model));
    }
}

TEST_CASE("markov JSON export names every section") {
    auto model = estimate_transition(three_sequences(), quantize_disturbance(three_sequences(), 2));
    const auto text = markov_to_json(model);
    CHECK(text.find("\"centers\"") != std::string::npos);
    CHECK(text.find("\"marginal\"") != std::string::npos);
    CHECK(text.find("\"transition\"") != std::string::npos);
}
