#pragma once

#include "cliphinge/mdp.hpp"

namespace cliphinge {

/// Ground truth for a given MDP: optimal values, a greedy deterministic
/// optimal policy (ties broken by lowest action index) and its visitation.
struct OptimalSolution {
    std::vector<double> v_star;
    std::vector<std::vector<double>> q_star;
    TabularPolicy pi_star;          // one-hot rows
    std::vector<double> nu_star;
};

/// Value iteration to sup-norm tolerance, then greedy extraction and exact
/// evaluation of the greedy policy. Iteration cap 1e6 as a safety rail.
OptimalSolution solve_optimal(const TabularMdp& mdp, double tol = 1e-10);

/// L(pi*) - L(pi) with nu_star as the outer distribution; >= 0 up to solver
/// residual for every policy.
double optimality_gap(const TabularMdp& mdp, const TabularPolicy& policy,
                      const OptimalSolution& opt);

}  // namespace cliphinge
