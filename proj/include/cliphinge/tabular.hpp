#pragma once

#include "cliphinge/emda.hpp"
#include "cliphinge/metrics.hpp"
#include "cliphinge/oracle.hpp"

#include <cstdint>
#include <optional>
#include <random>

namespace cliphinge {

enum class BatchScheme { all_pairs, trajectory_sampled };

struct TabularRunConfig {
    ClassifierSpec classifier;
    EmdaConfig emda;
    int n_outer_iters = 500;
    BatchScheme batch_scheme = BatchScheme::all_pairs;
    int trajectories_per_iter = 5;  // trajectory mode
    int horizon = 20;               // trajectory mode
    std::uint64_t rng_seed = 0;

    void validate() const;
};

/// One batch for the current policy. all_pairs attaches every action's exact
/// advantage per state; trajectory mode rolls out, then subsamples to at most
/// one (s,a) per state (uniform tie-break). Advantages within 1e-9 of zero
/// are recorded as exactly 0; a batch with no nonzero-advantage state comes
/// back empty and the caller skips the update. Sample weights follow the
/// classifier's canonical weighting.
BatchSample collect_batch(const TabularMdp& mdp, const TabularPolicy& policy,
                          const ValueTables& values, const TabularRunConfig& config,
                          std::mt19937_64& rng);

struct TabularRunResult {
    std::vector<RunMetrics> metrics;  // one record per iteration, plus iter 0
    TabularPolicy final_policy;
};

/// Full tabular loop: exact evaluation, batch collection, EMDA update on
/// batch states (other rows untouched). Starts from the uniform policy unless
/// an initial policy is given.
TabularRunResult run_tabular(const TabularMdp& mdp, const TabularRunConfig& config,
                             const std::optional<TabularPolicy>& init = std::nullopt);

}  // namespace cliphinge
