#pragma once

#include "cliphinge/hinge.hpp"

#include <map>
#include <vector>

namespace cliphinge {

struct EmdaConfig {
    double step_size = 0.1;  // eta
    int n_iters = 5;         // K
    bool record_grads = true;
};

struct EmdaGradRecord {
    int sweep = 0;
    int state = 0;
    int action = 0;
    double grad = 0.0;  // g_{s,a}^{(k)} at the iterate the sweep saw
};

struct EmdaStateResult {
    std::vector<double> target;     // strictly positive simplex row over all actions
    std::vector<double> c_coeff;    // C_t per action, 0 where advantage is 0 or absent
    std::vector<double> neg_eta_g;  // -sum_k eta g, equals c_coeff * adv
};

struct EmdaResult {
    std::map<int, EmdaStateResult> states;
    std::vector<EmdaGradRecord> grad_log;
};

/// Exponentiated-gradient policy search: per batch state, K multiplicative
/// sweeps w_s o theta / <w_s, theta> with gradients from hinge subgradients
/// at the running iterate (zero for actions absent from the batch row), and
/// the C_t accumulation C_t -= eta g / A on nonzero-advantage actions.
EmdaResult run_emda(const ClassifierSpec& spec, const BatchSample& batch,
                    const TabularPolicy& init_policy, const EmdaConfig& config);

/// Max over batch states of the per-state spread (max_a - min_a) of
/// log target(a|s) - ref(a|s) - C_t(s,a) A(s,a), where ref is log init
/// when `energy` is empty and temperature^-1 * energy otherwise. The EMDA
/// target's log-form prediction makes this 0.
double verify_target_logform(const EmdaResult& result, const TabularPolicy& init_policy,
                             const std::map<int, std::vector<double>>& adv,
                             double temperature,
                             const std::map<int, std::vector<double>>& energy);

}  // namespace cliphinge
