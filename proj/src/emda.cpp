#include "cliphinge/emda.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace cliphinge {

namespace {

// Probabilities this small would underflow to 0 under continued contraction;
// flooring keeps rows strictly positive and every classifier slope finite.
constexpr double kProbFloor = 1e-280;

double kahan_dot(const std::vector<double>& a, const std::vector<double>& b) {
    double sum = 0.0, comp = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double y = a[i] * b[i] - comp;
        double t = sum + y;
        comp = (t - sum) - y;
        sum = t;
    }
    return sum;
}

void floor_and_renormalize(std::vector<double>& row) {
    double sum = 0.0;
    for (double& v : row) {
        v = std::max(v, kProbFloor);
        sum += v;
    }
    for (double& v : row)
        v /= sum;
}

}  // namespace

EmdaResult run_emda(const ClassifierSpec& spec, const BatchSample& batch,
                    const TabularPolicy& init_policy, const EmdaConfig& config) {
    if (!(config.step_size > 0.0) || config.n_iters < 1)
        throw std::invalid_argument("run_emda: need step_size > 0 and n_iters >= 1");
    const int A = init_policy.n_actions();
    batch.validate(A);
    const double eta = config.step_size;

    EmdaResult out;
    for (const auto& row : batch.rows) {
        const std::vector<double>& init_row = init_policy.probs[row.state];
        for (const auto& it : row.actions)
            if (!(init_row[it.action] > 0.0))
                throw std::invalid_argument("run_emda: init policy not positive on batch row");

        EmdaStateResult res;
        res.target = init_row;
        res.c_coeff.assign(A, 0.0);
        res.neg_eta_g.assign(A, 0.0);

        // actions covered by this row; repeated entries must agree on the
        // advantage (their weights add)
        std::vector<double> adv_of(A, 0.0);
        std::vector<char> in_row(A, 0);
        std::vector<int> row_actions;
        for (const auto& it : row.actions)
            if (!in_row[it.action]) {
                in_row[it.action] = 1;
                adv_of[it.action] = it.advantage;
                row_actions.push_back(it.action);
            }

        std::vector<double> g(A, 0.0), w(A, 0.0);
        for (int k = 0; k < config.n_iters; ++k) {
            std::fill(g.begin(), g.end(), 0.0);
            for (const auto& it : row.actions)
                g[it.action] += subgradient(spec, it, res.target[it.action]);

            // factor out the max log-weight; the common scale cancels in the
            // normalization and keeps exp() in range for any gradient size
            double max_lw = 0.0;
            for (int a = 0; a < A; ++a)
                max_lw = std::max(max_lw, -eta * g[a]);
            for (int a = 0; a < A; ++a)
                w[a] = std::exp(-eta * g[a] - max_lw);

            double z = kahan_dot(w, res.target);
            for (int a = 0; a < A; ++a)
                res.target[a] = w[a] * res.target[a] / z;
            floor_and_renormalize(res.target);
            for (double v : res.target)
                if (!(v > 0.0))
                    throw std::logic_error("run_emda: positivity lost");

            for (int a : row_actions) {
                res.neg_eta_g[a] += -eta * g[a];
                if (adv_of[a] != 0.0)
                    res.c_coeff[a] += -eta * g[a] / adv_of[a];
                if (config.record_grads)
                    out.grad_log.push_back({k, row.state, a, g[a]});
            }
        }
        out.states.emplace(row.state, std::move(res));
    }
    return out;
}

double verify_target_logform(const EmdaResult& result, const TabularPolicy& init_policy,
                             const std::map<int, std::vector<double>>& adv,
                             double temperature,
                             const std::map<int, std::vector<double>>& energy) {
    double worst = 0.0;
    for (const auto& [state, res] : result.states) {
        const auto& adv_row = adv.at(state);
        const std::vector<double>* energy_row = nullptr;
        if (!energy.empty())
            energy_row = &energy.at(state);
        double lo = std::numeric_limits<double>::infinity();
        double hi = -lo;
        for (size_t a = 0; a < res.target.size(); ++a) {
            double ref = energy_row ? (*energy_row)[a] / temperature
                                    : std::log(init_policy.probs[state][a]);
            double dev = std::log(res.target[a]) - ref - res.c_coeff[a] * adv_row[a];
            lo = std::min(lo, dev);
            hi = std::max(hi, dev);
        }
        worst = std::max(worst, hi - lo);
    }
    return worst;
}

}  // namespace cliphinge
