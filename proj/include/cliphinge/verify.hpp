#pragma once

#include "cliphinge/hinge.hpp"
#include "cliphinge/mdp.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace cliphinge {

struct VerifyResult {
    std::string name;
    bool pass = false;
    std::string detail;
};

/// Random Dirichlet(1) policy rows.
TabularPolicy random_policy(int n_states, int n_actions, std::mt19937_64& rng);

VerifyResult verify_gradient_equivalence(std::uint64_t seed, int n_points);
VerifyResult verify_constant_offset(std::uint64_t seed, int n_batches, int n_candidates);
VerifyResult verify_prop1_logform(std::uint64_t seed, int n_runs);
VerifyResult verify_improvement(std::uint64_t seed, int n_states, int run_iters);
VerifyResult verify_ct_range(std::uint64_t seed, int n_states);
VerifyResult verify_epsilon_invariance(std::uint64_t seed, int n_states);
VerifyResult verify_performance_difference(std::uint64_t seed, int n_triples);

/// The hermetic `verify` suite at default scales.
std::vector<VerifyResult> run_verify_suites(std::uint64_t seed);

}  // namespace cliphinge
