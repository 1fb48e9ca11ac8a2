#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cliphinge {

/// Finite MDP with dense transition tensor P(s'|s,a) and reward table
/// R(s,a) in [0, r_max]. Immutable after construction; construction
/// validates row-stochasticity, reward bounds and gamma in (0,1).
struct TabularMdp {
    int n_states = 0;
    int n_actions = 0;
    std::vector<double> transition;  // [s][a][s'] row-major, each (s,a) row sums to 1
    std::vector<double> reward;      // [s][a]
    double gamma = 0.9;
    std::vector<double> mu;          // initial state distribution
    double r_max = 1.0;

    TabularMdp() = default;
    TabularMdp(int states, int actions, std::vector<double> trans, std::vector<double> rew,
               double discount, std::vector<double> initial, double reward_max = 1.0);

    double p(int s, int a, int s2) const { return transition[(static_cast<size_t>(s) * n_actions + a) * n_states + s2]; }
    double r(int s, int a) const { return reward[static_cast<size_t>(s) * n_actions + a]; }
    const double* transition_row(int s, int a) const {
        return transition.data() + (static_cast<size_t>(s) * n_actions + a) * n_states;
    }

    void validate() const;  // throws std::invalid_argument on any violated invariant
};

/// Direct parameterization: the policy is its own probability table,
/// one simplex row per state.
struct TabularPolicy {
    std::vector<std::vector<double>> probs;  // [s][a]

    static TabularPolicy uniform(int n_states, int n_actions);
    int n_states() const { return static_cast<int>(probs.size()); }
    int n_actions() const { return probs.empty() ? 0 : static_cast<int>(probs[0].size()); }
    void validate() const;
    double min_prob() const;
};

struct ValueTables {
    std::vector<double> v;                    // V^pi
    std::vector<std::vector<double>> q;       // Q^pi
    std::vector<std::vector<double>> adv;     // A^pi = Q - V
};

struct VisitationDist {
    std::vector<double> nu;                          // nu_pi over states
    std::vector<std::vector<double>> sigma;          // nu(s) * pi(a|s)
    std::vector<std::vector<double>> sigma_tilde;    // nu(s) / |A|
};

/// Exact policy evaluation by direct linear solve of V = r_pi + gamma P_pi V.
/// Post: Bellman residual <= 1e-10.
ValueTables evaluate_policy(const TabularMdp& mdp, const TabularPolicy& policy);

/// Discounted state visitation nu = (1-gamma) mu^T (I - gamma P_pi)^-1,
/// renormalized, plus the induced state-action distributions.
VisitationDist discounted_visitation(const TabularMdp& mdp, const TabularPolicy& policy);

/// Total expected reward over a given state distribution: sum_s nu*(s) V^pi(s).
double total_expected_reward(const TabularMdp& mdp, const TabularPolicy& policy,
                             const std::vector<double>& nu_star);

/// Text round-trip. Reload matches within 1e-12 (exactly, with 17-digit output).
void save_mdp(std::ostream& os, const TabularMdp& mdp);
TabularMdp load_mdp(std::istream& is);
void save_mdp_file(const std::string& path, const TabularMdp& mdp);
TabularMdp load_mdp_file(const std::string& path);

}  // namespace cliphinge
