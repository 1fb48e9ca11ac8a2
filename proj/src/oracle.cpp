#include "cliphinge/oracle.hpp"

#include <cmath>
#include <stdexcept>

namespace cliphinge {

OptimalSolution solve_optimal(const TabularMdp& mdp, double tol) {
    if (tol <= 0.0)
        throw std::invalid_argument("solve_optimal: tol must be positive");
    const int S = mdp.n_states, A = mdp.n_actions;
    std::vector<double> v(S, 0.0), v2(S, 0.0);
    constexpr long kMaxIters = 1000000;
    for (long it = 0; it < kMaxIters; ++it) {
        double delta = 0.0;
        for (int s = 0; s < S; ++s) {
            double best = -1e300;
            for (int a = 0; a < A; ++a) {
                double q = mdp.r(s, a);
                const double* row = mdp.transition_row(s, a);
                for (int s2 = 0; s2 < S; ++s2)
                    q += mdp.gamma * row[s2] * v[s2];
                best = std::max(best, q);
            }
            v2[s] = best;
            delta = std::max(delta, std::abs(v2[s] - v[s]));
        }
        v.swap(v2);
        if (delta <= tol)
            break;
    }

    OptimalSolution out;
    out.pi_star.probs.assign(S, std::vector<double>(A, 0.0));
    for (int s = 0; s < S; ++s) {
        int best_a = 0;
        double best_q = -1e300;
        for (int a = 0; a < A; ++a) {
            double q = mdp.r(s, a);
            const double* row = mdp.transition_row(s, a);
            for (int s2 = 0; s2 < S; ++s2)
                q += mdp.gamma * row[s2] * v[s2];
            if (q > best_q) {  // strict: lowest index wins ties
                best_q = q;
                best_a = a;
            }
        }
        out.pi_star.probs[s][best_a] = 1.0;
    }

    ValueTables vt = evaluate_policy(mdp, out.pi_star);
    out.v_star = vt.v;
    out.q_star = vt.q;
    out.nu_star = discounted_visitation(mdp, out.pi_star).nu;
    return out;
}

double optimality_gap(const TabularMdp& mdp, const TabularPolicy& policy,
                      const OptimalSolution& opt) {
    ValueTables vt = evaluate_policy(mdp, policy);
    double gap = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
        gap += opt.nu_star[s] * (opt.v_star[s] - vt.v[s]);
    return gap;
}

}  // namespace cliphinge
