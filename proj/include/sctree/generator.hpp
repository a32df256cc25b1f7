#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "sctree/scenario.hpp"

namespace sctree {

enum class GenFamily { SimpleConverging, BranchingWalk };

std::string gen_family_name(GenFamily family);
GenFamily gen_family_from_name(const std::string& name);

struct GenSpec {
    GenFamily family = GenFamily::SimpleConverging;
    int horizon = 10;
    int count = 4;                              // sequence count target
    double w_lo = 0.0;
    double w_hi = 1.0;
    int branch_factor = 3;                      // children per branching event
    std::vector<int> convergence_steps = {4, 5};
    double step_bound = 0.2;                    // per-step walk increment bound
    std::uint64_t seed = 1;
};

/// Throws std::runtime_error on an invalid spec: nonpositive horizon or
/// count, an inverted value range, a nonpositive step bound, convergence
/// steps outside 0..horizon-1, or a branch factor below 2 for walks.
void validate_gen_spec(const GenSpec& spec);

/// Four equal-probability sequences that take two distinct values at step 0,
/// share a single common value at every convergence step, and take four
/// distinct values at every later step. The first-order chain forgets which
/// branch entered the shared value, so the exact tree genuinely carries more
/// information. Deterministic in the seed. Requires count = 4 and
/// convergence steps that exclude step 0.
ScenarioSet generate_simple_converging(const GenSpec& spec);

/// Trending random walks that branch into `branch_factor` children at
/// random steps, clipped to the value range and deduplicated, with the
/// branching rate tuned (and retried, then truncated) until the sequence
/// count lands within 10% of the target. Every branch child draws a fresh
/// per-step trend and keeps it (with small drift) until the next branch, so
/// the current value alone does not determine the continuation: a
/// first-order chain on values mixes rising and falling families, while
/// prefix clustering can separate them. Equal probabilities; deterministic
/// in the seed. Throws when the target is unreachable, reporting the
/// achievable maximum.
ScenarioSet generate_branching_walk(const GenSpec& spec);

/// Dispatch on spec.family.
ScenarioSet generate_scenarios(const GenSpec& spec);

}  // namespace sctree
