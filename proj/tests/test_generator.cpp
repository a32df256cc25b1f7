#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "sctree/generator.hpp"
#include "sctree/node_graph.hpp"
#include "sctree/scenario.hpp"

using namespace sctree;

namespace {

int distinct_values_at(const ScenarioSet& set, int step) {
    std::set<std::int64_t> keys;
    for (const DisturbanceSequence& seq : set.sequences)
        keys.insert(value_key(seq.values[static_cast<std::size_t>(step)], kDefaultKeyDecimals));
    return static_cast<int>(keys.size());
}

bool same_values(const ScenarioSet& a, const ScenarioSet& b) {
    if (a.sequences.size() != b.sequences.size()) return false;
    for (std::size_t i = 0; i < a.sequences.size(); ++i) {
        if (a.sequences[i].values != b.sequences[i].values) return false;
        if (a.sequences[i].probability != b.sequences[i].probability) return false;
    }
    return true;
}

std::string temp_path(const char* name) {
    const char* dir = std::getenv("TMPDIR");
    return std::string(dir ? dir : "/tmp") + "/" + name;
}

}  // namespace

TEST_CASE("simple converging family has the documented shape") {
    GenSpec spec;
    const ScenarioSet set = generate_simple_converging(spec);

    REQUIRE(set.sequences.size() == 4);
    REQUIRE(set.horizon == 10);
    for (const DisturbanceSequence& seq : set.sequences) {
        CHECK(seq.probability == 0.25);
        for (const double w : seq.values) {
            CHECK(w >= spec.w_lo);
            CHECK(w <= spec.w_hi);
        }
    }

    CHECK(distinct_values_at(set, 0) == 2);
    CHECK(distinct_values_at(set, 4) == 1);
    CHECK(distinct_values_at(set, 5) == 1);
    for (int k = 6; k < 10; ++k) CHECK(distinct_values_at(set, k) == 4);

    // The pre-convergence split keeps at least two tree nodes alive through
    // the shared steps, and the forced divergence separates all four after.
    const NodeGraph tree = build_exact_tree(set);
    CHECK(tree.num_nodes(0) == 2);
    CHECK(tree.num_nodes(4) >= 2);
    CHECK(tree.num_nodes(6) >= 2);
    CHECK(tree.num_nodes(9) == 4);
    validate_graph(tree, set);
}

TEST_CASE("simple converging family is deterministic in the seed") {
    GenSpec spec;
    spec.seed = 2024;
    const ScenarioSet a = generate_simple_converging(spec);
    const ScenarioSet b = generate_simple_converging(spec);
    CHECK(same_values(a, b));

    spec.seed = 2025;
    const ScenarioSet c = generate_simple_converging(spec);
    CHECK(!same_values(a, c));
}

TEST_CASE("convergence steps are configurable") {
    GenSpec spec;
    spec.horizon = 6;
    spec.convergence_steps = {3};
    spec.seed = 7;
    const ScenarioSet set = generate_simple_converging(spec);
    CHECK(distinct_values_at(set, 3) == 1);
    CHECK(distinct_values_at(set, 4) == 4);
    CHECK(distinct_values_at(set, 5) == 4);
}

TEST_CASE("simple converging rejects invalid specs") {
    GenSpec spec;
    spec.count = 5;
    CHECK_THROWS(generate_simple_converging(spec));

    spec = GenSpec{};
    spec.convergence_steps = {0, 4};
    CHECK_THROWS(generate_simple_converging(spec));

    spec = GenSpec{};
    spec.convergence_steps = {12};
    CHECK_THROWS(generate_simple_converging(spec));

    spec = GenSpec{};
    spec.w_lo = 1.0;
    spec.w_hi = 0.0;
    CHECK_THROWS(generate_simple_converging(spec));
}

TEST_CASE("branching walk hits the target window") {
    GenSpec spec;
    spec.family = GenFamily::BranchingWalk;
    spec.count = 1447;
    spec.seed = 5;
    const ScenarioSet set = generate_branching_walk(spec);

    CHECK(set.sequences.size() >= 1302);
    CHECK(set.sequences.size() <= 1592);
    const double each = 1.0 / static_cast<double>(set.sequences.size());
    double total = 0.0;
    for (const DisturbanceSequence& seq : set.sequences) {
        CHECK(seq.values.size() == 10);
        CHECK(seq.probability == each);
        total += seq.probability;
        for (const double w : seq.values) {
            CHECK(w >= 0.0);
            CHECK(w <= 1.0);
        }
    }
    CHECK(std::abs(total - 1.0) <= 1e-12);

    // Deduplicated: merging changes nothing.
    CHECK(merge_duplicates(set).sequences.size() == set.sequences.size());

    // Deterministic in the seed.
    CHECK(same_values(set, generate_branching_walk(spec)));
}

TEST_CASE("branching walk output round-trips through the scenario file format") {
    GenSpec spec;
    spec.family = GenFamily::BranchingWalk;
    spec.count = 60;
    spec.seed = 11;
    const ScenarioSet set = generate_branching_walk(spec);

    const std::string path = temp_path("sctree_gen_roundtrip.json");
    save_scenarios(set, path);
    const ScenarioSet loaded = load_scenarios(path);
    std::remove(path.c_str());

    // Disturbance values survive bitwise; the loader renormalizes
    // probabilities, which can move them by an ulp.
    REQUIRE(loaded.sequences.size() == set.sequences.size());
    for (std::size_t i = 0; i < set.sequences.size(); ++i) {
        CHECK(loaded.sequences[i].values == set.sequences[i].values);
        CHECK(std::abs(loaded.sequences[i].probability - set.sequences[i].probability) <=
              1e-15);
    }

    const NodeGraph tree = build_exact_tree(loaded);
    validate_graph(tree, loaded);
    for (int k = 1; k < tree.horizon; ++k) CHECK(tree.num_nodes(k) >= tree.num_nodes(k - 1));
}

TEST_CASE("branching walk reports unreachable targets") {
    GenSpec spec;
    spec.family = GenFamily::BranchingWalk;
    spec.count = 100;
    spec.branch_factor = 2;
    spec.horizon = 3;
    try {
        generate_branching_walk(spec);
        FAIL("expected an unreachable-target error");
    } catch (const std::runtime_error& err) {
        CHECK(std::string(err.what()).find("achievable maximum is 4") != std::string::npos);
    }
}

TEST_CASE("small branching walk targets work") {
    GenSpec spec;
    spec.family = GenFamily::BranchingWalk;
    spec.count = 8;
    spec.horizon = 5;
    spec.branch_factor = 2;
    spec.seed = 3;
    const ScenarioSet set = generate_branching_walk(spec);
    CHECK(set.sequences.size() >= 7);
    CHECK(set.sequences.size() <= 9);
}

TEST_CASE("generate_scenarios dispatches on the family") {
    GenSpec simple;
    const ScenarioSet a = generate_scenarios(simple);
    CHECK(a.sequences.size() == 4);

    GenSpec walk;
    walk.family = GenFamily::BranchingWalk;
    walk.count = 30;
    const ScenarioSet b = generate_scenarios(walk);
    CHECK(b.sequences.size() >= 27);

    CHECK(gen_family_from_name(gen_family_name(GenFamily::BranchingWalk)) ==
          GenFamily::BranchingWalk);
    CHECK_THROWS(gen_family_from_name("mystery"));
}
