#pragma once

#include "cliphinge/emda.hpp"
#include "cliphinge/metrics.hpp"
#include "cliphinge/mdp.hpp"
#include "cliphinge/nnet.hpp"

#include <cstdint>
#include <iosfwd>
#include <random>
#include <vector>

namespace cliphinge {

/// Energy-based policy pi(a|s) proportional to exp(beta * f(s,a)) where beta
/// is the inverse temperature. beta = 0 is the exactly-uniform policy.
struct EnergyPolicy {
    TwoLayerNet net;
    double inv_temperature = 0.0;
};

std::vector<double> action_probs(const EnergyPolicy& policy, const FeatureMap& fm, int state);
std::vector<std::vector<double>> policy_table(const EnergyPolicy& policy, const FeatureMap& fm);

struct NeuralRunConfig {
    int T = 64;
    double alpha_exp = 0.5;  // in [1/2, 1)
    int K = 2;
    double eta = 0.0;        // <= 0 derives eta = T^-alpha_exp
    int m_f = 64;
    int m_q = 64;
    int t_upd = 10000;
    ClassifierKind classifier = ClassifierKind::ratio;
    double epsilon = 0.3;
    double r_f = 10.0;
    double r_q = 10.0;
    std::uint64_t rng_seed = 0;

    double effective_eta() const;
    double tau(int t) const;  // T^alpha / (K t), defined for t >= 1
    /// Validates sizes and the temperature-schedule condition
    /// tau_{t+1}^2 (U_C^2 + tau_t^-2) <= 1 with U_C = K eta, for 1 <= t < T.
    void validate() const;
};

struct SampleTuple {
    int s = 0, a = 0, a0 = 0, s_next = 0, a_next = 0;
    double reward = 0.0;
};

/// Geometric-stopping rollouts: from s0 ~ mu, emit the current (s,a) with
/// probability 1-gamma and stop, else transition. Emitted pairs are exact
/// sigma_pi samples; a0 is uniform, s_next ~ P(.|s,a), a_next ~ pi(.|s_next).
std::vector<SampleTuple> sample_sigma_t(const TabularMdp& mdp,
                                        const std::vector<std::vector<double>>& probs,
                                        int n, std::mt19937_64& rng);

struct NetFitResult {
    TwoLayerNet net;        // path-averaged weights, projected once
    double mean_abs_error;  // mean |residual| over the inner steps
};

/// Semi-gradient TD on the tuples with per-step radial projection and step
/// size t_upd^-1/2; starts from q_net's current weights.
NetFitResult td_policy_evaluation(const TabularMdp& mdp, TwoLayerNet q_net, const FeatureMap& fm,
                                  const std::vector<SampleTuple>& tuples, int t_upd);

/// adv(s,a) = Q(s,a) - sum_a' pi(a'|s) Q(s,a').
std::vector<double> advantage_from_critic(const TwoLayerNet& q_net, const FeatureMap& fm,
                                          const std::vector<double>& pi_row, int state);

/// Projected SGD toward target(s, a0) over the tuples' (s, a0) pairs, residual
/// against the running iterate's prediction, path-averaged output.
NetFitResult regress_to_target(TwoLayerNet f_net, const FeatureMap& fm,
                               const std::vector<std::vector<double>>& target_values,
                               const std::vector<SampleTuple>& tuples, int t_upd);

struct NeuralRunResult {
    std::vector<RunMetrics> metrics;  // iterates 0..T
    EnergyPolicy final_policy;
    TwoLayerNet final_critic;
};

NeuralRunResult run_neural(const TabularMdp& mdp, const NeuralRunConfig& config);

/// Policy + critic + iteration counter, bit-exact round-trip.
void save_checkpoint(std::ostream& os, const EnergyPolicy& policy, const TwoLayerNet& critic,
                     int iter);
struct Checkpoint {
    EnergyPolicy policy;
    TwoLayerNet critic;
    int iter = 0;
};
Checkpoint load_checkpoint(std::istream& is);

}  // namespace cliphinge
