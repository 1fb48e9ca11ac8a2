#include "cliphinge/verify.hpp"

#include "cliphinge/emda.hpp"
#include "cliphinge/envs.hpp"
#include "cliphinge/metrics.hpp"
#include "cliphinge/rng.hpp"
#include "cliphinge/tabular.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

namespace cliphinge {

TabularPolicy random_policy(int n_states, int n_actions, std::mt19937_64& rng) {
    std::exponential_distribution<double> expo(1.0);
    TabularPolicy pi;
    pi.probs.assign(n_states, std::vector<double>(n_actions, 0.0));
    for (auto& row : pi.probs) {
        double sum = 0.0;
        for (double& v : row) {
            v = expo(rng) + 1e-6;
            sum += v;
        }
        for (double& v : row)
            v /= sum;
    }
    return pi;
}

namespace {

struct RandomBatch {
    BatchSample batch;
    TabularPolicy old_policy;
    int n_states, n_actions;
};

// Full-row batch with exact advantages of a random policy on a random
// 4-state/3-action MDP, carrying the ratio classifier's canonical weights.
RandomBatch random_ratio_batch(std::mt19937_64& rng, std::uint64_t env_seed) {
    EnvSpec es;
    es.kind = EnvKind::random;
    es.n_states = 4;
    es.n_actions = 3;
    es.gamma = 0.9;
    es.seed = env_seed;
    TabularMdp mdp = build_env(es);
    RandomBatch rb;
    rb.n_states = mdp.n_states;
    rb.n_actions = mdp.n_actions;
    rb.old_policy = random_policy(mdp.n_states, mdp.n_actions, rng);
    ValueTables vt = evaluate_policy(mdp, rb.old_policy);
    for (int s = 0; s < mdp.n_states; ++s) {
        BatchRow row;
        row.state = s;
        for (int a = 0; a < mdp.n_actions; ++a) {
            ActionSample it;
            it.action = a;
            it.advantage = std::abs(vt.adv[s][a]) <= 1e-9 ? 0.0 : vt.adv[s][a];
            it.old_prob = rb.old_policy.probs[s][a];
            it.sample_weight = canonical_sample_weight(ClassifierKind::ratio, it.old_prob);
            row.actions.push_back(it);
        }
        rb.batch.rows.push_back(std::move(row));
    }
    return rb;
}

std::string fmt(double v) { return format_double(v); }

// Dirichlet mixed with uniform: keeps rows bounded away from the simplex
// boundary so the log/root slopes (1/theta scale) stay moderate.
TabularPolicy mixed_policy(int n_states, int n_actions, std::mt19937_64& rng) {
    TabularPolicy pi = random_policy(n_states, n_actions, rng);
    for (auto& row : pi.probs) {
        double sum = 0.0;
        for (double& v : row) {
            v = 0.8 * v + 0.2 / n_actions;
            sum += v;
        }
        for (double& v : row)
            v /= sum;
    }
    return pi;
}

// Step size in a regime where K sweeps keep every probability representable:
// the log and root classifiers scale it by the smallest row entry.
double sane_eta(ClassifierKind kind, const std::vector<double>& row, double u) {
    double eta = 0.02 + 0.28 * u;
    if (kind == ClassifierKind::log || kind == ClassifierKind::root)
        eta *= *std::min_element(row.begin(), row.end());
    return eta;
}

}  // namespace

VerifyResult verify_gradient_equivalence(std::uint64_t seed, int n_points) {
    std::mt19937_64 rng = seeded_rng(seed, "verify.gradeq");
    ClassifierSpec spec = canonical_spec(ClassifierKind::ratio, 0.3);
    double worst = 0.0;
    int checked = 0;
    while (checked < n_points) {
        RandomBatch rb = random_ratio_batch(rng, seed * 7919 + checked);
        TabularPolicy cand = random_policy(rb.n_states, rb.n_actions, rng);
        for (const auto& row : rb.batch.rows) {
            for (const auto& it : row.actions) {
                if (checked >= n_points)
                    break;
                double theta = cand.probs[row.state][it.action];
                double rho = theta / it.old_prob;
                // stay away from the hinge kink and the clip corners
                if (std::abs(rho - (1.0 + spec.epsilon)) < 1e-2 ||
                    std::abs(rho - (1.0 - spec.epsilon)) < 1e-2)
                    continue;
                double h = 1e-7;
                if (theta - h <= 0.0)
                    continue;
                auto at = [&](double th, auto&& fn) {
                    TabularPolicy p = cand;
                    p.probs[row.state][it.action] = th;
                    return fn(p);
                };
                auto clipf = [&](const TabularPolicy& p) { return clipped_surrogate(spec, rb.batch, p); };
                auto hingef = [&](const TabularPolicy& p) { return generalized_loss(spec, rb.batch, p); };
                double dclip = (at(theta + h, clipf) - at(theta - h, clipf)) / (2 * h);
                double dhinge = (at(theta + h, hingef) - at(theta - h, hingef)) / (2 * h);
                ++checked;
                double scale = std::max({std::abs(dclip), std::abs(dhinge), 1e-9});
                worst = std::max(worst, std::abs(dclip + dhinge) / scale);
            }
        }
    }
    return {"gradient-equivalence", worst <= 1e-4,
            "max relative mismatch " + fmt(worst) + " over " + std::to_string(checked) + " points"};
}

VerifyResult verify_constant_offset(std::uint64_t seed, int n_batches, int n_candidates) {
    std::mt19937_64 rng = seeded_rng(seed, "verify.offset");
    ClassifierSpec spec = canonical_spec(ClassifierKind::ratio, 0.3);
    double worst = 0.0;
    for (int b = 0; b < n_batches; ++b) {
        RandomBatch rb = random_ratio_batch(rng, seed * 104729 + b);
        double ref = 0.0;
        for (int c = 0; c < n_candidates; ++c) {
            TabularPolicy cand = random_policy(rb.n_states, rb.n_actions, rng);
            double sum = clipped_surrogate(spec, rb.batch, cand) +
                         generalized_loss(spec, rb.batch, cand);
            if (c == 0)
                ref = sum;
            else
                worst = std::max(worst, std::abs(sum - ref));
        }
    }
    return {"constant-offset", worst <= 1e-9, "max offset spread " + fmt(worst)};
}

VerifyResult verify_prop1_logform(std::uint64_t seed, int n_runs) {
    std::mt19937_64 rng = seeded_rng(seed, "verify.prop1");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const ClassifierKind kinds[4] = {ClassifierKind::ratio, ClassifierKind::subtraction,
                                     ClassifierKind::log, ClassifierKind::root};
    double worst = 0.0;
    for (int i = 0; i < n_runs; ++i) {
        int A = 2 + uniform_index(rng, 7);  // up to 8 actions
        TabularPolicy init = mixed_policy(1, A, rng);
        ClassifierSpec spec = canonical_spec(kinds[i % 4], 0.05 + 0.65 * unif(rng));
        BatchRow row;
        row.state = 0;
        std::map<int, std::vector<double>> adv;
        adv[0].assign(A, 0.0);
        for (int a = 0; a < A; ++a) {
            ActionSample it;
            it.action = a;
            it.advantage = unif(rng) < 0.2 ? 0.0 : gauss(rng);
            it.old_prob = init.probs[0][a];
            it.sample_weight = canonical_sample_weight(spec.kind, it.old_prob);
            adv[0][a] = it.advantage;
            row.actions.push_back(it);
        }
        BatchSample batch;
        batch.rows.push_back(std::move(row));
        EmdaConfig cfg;
        cfg.step_size = sane_eta(spec.kind, init.probs[0], unif(rng));
        cfg.n_iters = 1 + uniform_index(rng, 10);
        cfg.record_grads = false;
        EmdaResult res = run_emda(spec, batch, init, cfg);
        worst = std::max(worst, verify_target_logform(res, init, adv, 0.0, {}));
    }
    return {"prop1-log-form", worst <= 1e-10,
            "max log-form deviation " + fmt(worst) + " over " + std::to_string(n_runs) + " runs"};
}

VerifyResult verify_improvement(std::uint64_t seed, int n_states, int run_iters) {
    std::mt19937_64 rng = seeded_rng(seed, "verify.improve");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    const ClassifierKind kinds[4] = {ClassifierKind::ratio, ClassifierKind::subtraction,
                                     ClassifierKind::log, ClassifierKind::root};
    // direction test: sum_a target(a) adv(a) > 0 on updated rows
    double worst_dir = 1.0;
    for (int i = 0; i < n_states; ++i) {
        int A = 2 + uniform_index(rng, 7);
        TabularPolicy init = mixed_policy(1, A, rng);
        ClassifierSpec spec = canonical_spec(kinds[i % 4], 0.05 + 0.65 * unif(rng));
        BatchRow row;
        row.state = 0;
        std::vector<double> adv(A, 0.0);
        // mixed advantages summing to 0 under init, like a true advantage row
        double mean = 0.0;
        for (int a = 0; a < A; ++a) {
            adv[a] = gauss(rng);
            mean += init.probs[0][a] * adv[a];
        }
        for (int a = 0; a < A; ++a)
            adv[a] -= mean;
        for (int a = 0; a < A; ++a) {
            ActionSample it;
            it.action = a;
            it.advantage = std::abs(adv[a]) <= 1e-9 ? 0.0 : adv[a];
            it.old_prob = init.probs[0][a];
            it.sample_weight = canonical_sample_weight(spec.kind, it.old_prob);
            row.actions.push_back(it);
        }
        BatchSample batch;
        batch.rows.push_back(std::move(row));
        EmdaConfig cfg;
        cfg.step_size = sane_eta(spec.kind, init.probs[0], unif(rng));
        cfg.n_iters = 1 + uniform_index(rng, 10);
        cfg.record_grads = false;
        EmdaResult res = run_emda(spec, batch, init, cfg);
        const auto& target = res.states.at(0).target;
        double dir = 0.0;
        for (int a = 0; a < A; ++a)
            dir += target[a] * adv[a];
        worst_dir = std::min(worst_dir, dir);
    }
    // short tabular runs: no state-wise value regressions
    int violations = 0;
    for (int sd = 0; sd < 2; ++sd)
        for (BatchScheme scheme : {BatchScheme::all_pairs, BatchScheme::trajectory_sampled}) {
            EnvSpec es;
            es.kind = EnvKind::random;
            es.n_states = 5;
            es.n_actions = 3;
            es.gamma = 0.9;
            es.seed = seed + sd;
            TabularRunConfig cfg;
            cfg.classifier = canonical_spec(ClassifierKind::ratio, 0.3);
            cfg.emda.step_size = 0.1;
            cfg.emda.n_iters = 5;
            cfg.n_outer_iters = run_iters;
            cfg.batch_scheme = scheme;
            cfg.rng_seed = seed + sd;
            TabularRunResult res = run_tabular(build_env(es), cfg);
            for (const auto& m : res.metrics)
                violations += m.improvement_violations;
        }
    bool pass = worst_dir > 0.0 && violations == 0;
    return {"improvement", pass,
            "min improvement direction " + fmt(worst_dir) + ", value regressions " +
                std::to_string(violations)};
}

VerifyResult verify_ct_range(std::uint64_t seed, int n_states) {
    std::mt19937_64 rng = seeded_rng(seed, "verify.ctrange");
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    double worst_lo = 1e300, worst_hi = 0.0;
    long checked = 0;
    bool ok = true;
    for (int i = 0; i < n_states; ++i) {
        ClassifierKind kind = i % 2 ? ClassifierKind::subtraction : ClassifierKind::ratio;
        int A = 2 + uniform_index(rng, 7);
        TabularPolicy init = mixed_policy(1, A, rng);
        ClassifierSpec spec = canonical_spec(kind, 0.05 + 0.65 * unif(rng));
        BatchRow row;
        row.state = 0;
        for (int a = 0; a < A; ++a) {
            ActionSample it;
            it.action = a;
            double adv = gauss(rng);
            it.advantage = std::abs(adv) <= 1e-9 ? 0.0 : adv;
            it.old_prob = init.probs[0][a];
            it.sample_weight = canonical_sample_weight(kind, it.old_prob);
            row.actions.push_back(it);
        }
        BatchSample batch;
        batch.rows.push_back(std::move(row));
        EmdaConfig cfg;
        cfg.step_size = sane_eta(spec.kind, init.probs[0], unif(rng));
        cfg.n_iters = 1 + uniform_index(rng, 10);
        cfg.record_grads = false;
        EmdaResult res = run_emda(spec, batch, init, cfg);
        const auto& sr = res.states.at(0);
        for (const auto& it : batch.rows[0].actions) {
            if (it.advantage == 0.0)
                continue;
            double c = sr.c_coeff[it.action];
            double eta = cfg.step_size;
            double keta = cfg.n_iters * eta;
            ++checked;
            worst_lo = std::min(worst_lo, c / eta);
            worst_hi = std::max(worst_hi, c / keta);
            if (c < eta * (1.0 - 1e-9) || c > keta * (1.0 + 1e-9))
                ok = false;
        }
    }
    return {"ct-range", ok && checked > 0,
            std::to_string(checked) + " coefficients, C_t/eta min " + fmt(worst_lo) +
                ", C_t/(K eta) max " + fmt(worst_hi)};
}

VerifyResult verify_epsilon_invariance(std::uint64_t seed, int n_states) {
    std::mt19937_64 rng = seeded_rng(seed, "verify.epsinv");
    std::normal_distribution<double> gauss(0.0, 1.0);
    const ClassifierKind kinds[4] = {ClassifierKind::ratio, ClassifierKind::subtraction,
                                     ClassifierKind::log, ClassifierKind::root};
    const double eps_grid[3] = {0.1, 0.3, 0.7};
    bool ok = true;
    int active_pairs = 0;
    for (int i = 0; i < n_states && ok; ++i) {
        ClassifierKind kind = kinds[i % 4];
        int A = 2 + uniform_index(rng, 7);
        TabularPolicy init = mixed_policy(1, A, rng);
        BatchRow row;
        row.state = 0;
        for (int a = 0; a < A; ++a) {
            ActionSample it;
            it.action = a;
            double adv = gauss(rng);
            it.advantage = std::abs(adv) <= 1e-9 ? 0.0 : adv;
            it.old_prob = init.probs[0][a];
            it.sample_weight = canonical_sample_weight(kind, it.old_prob);
            row.actions.push_back(it);
        }
        BatchSample batch;
        batch.rows.push_back(row);
        EmdaConfig cfg;
        cfg.step_size = 0.1;
        cfg.n_iters = 1;  // one sweep from an identical iterate across eps
        cfg.record_grads = true;
        std::vector<std::vector<double>> factors;  // per eps, per action exp(-eta g)
        for (double eps : eps_grid) {
            ClassifierSpec spec = canonical_spec(kind, eps);
            EmdaResult res = run_emda(spec, batch, init, cfg);
            std::vector<double> f(A, 1.0);
            for (const auto& rec : res.grad_log)
                f[rec.action] = std::exp(-cfg.step_size * rec.grad);
            // active factors carry exactly eta * weight * |base slope| in the log,
            // evaluated at the shared starting iterate
            for (const auto& it : batch.rows[0].actions) {
                double fac = f[it.action];
                if (fac == 1.0)
                    continue;
                double slope_mag = 0.0;
                double theta = init.probs[0][it.action];
                switch (kind) {
                    case ClassifierKind::ratio: slope_mag = 1.0 / it.old_prob; break;
                    case ClassifierKind::subtraction: slope_mag = 1.0; break;
                    case ClassifierKind::log: slope_mag = 1.0 / theta; break;
                    case ClassifierKind::root:
                        slope_mag = 1.0 / (2.0 * std::sqrt(theta * it.old_prob));
                        break;
                }
                double expect = cfg.step_size * item_weight(spec, it) * slope_mag;
                if (std::abs(std::abs(std::log(fac)) - expect) > 1e-12 * std::max(1.0, expect))
                    ok = false;
            }
            factors.push_back(std::move(f));
        }
        for (int a = 0; a < A; ++a)
            for (size_t e1 = 0; e1 < 3; ++e1)
                for (size_t e2 = e1 + 1; e2 < 3; ++e2) {
                    bool act1 = factors[e1][a] != 1.0, act2 = factors[e2][a] != 1.0;
                    if (act1 && act2) {
                        ++active_pairs;
                        if (factors[e1][a] != factors[e2][a])  // bit-identical
                            ok = false;
                    }
                }
    }
    return {"epsilon-invariance", ok && active_pairs > 0,
            std::to_string(active_pairs) + " active factor pairs compared bit-exactly"};
}

VerifyResult verify_performance_difference(std::uint64_t seed, int n_triples) {
    std::mt19937_64 rng = seeded_rng(seed, "verify.perfdiff");
    double worst = 0.0;
    for (int i = 0; i < n_triples; ++i) {
        EnvSpec es;
        es.kind = EnvKind::random;
        es.n_states = 4 + uniform_index(rng, 3);
        es.n_actions = 2 + uniform_index(rng, 3);
        es.gamma = 0.85 + 0.1 * std::uniform_real_distribution<double>(0, 1)(rng);
        es.seed = seed * 1000003ull + i;
        TabularMdp mdp = build_env(es);
        TabularPolicy p1 = random_policy(mdp.n_states, mdp.n_actions, rng);
        TabularPolicy p2 = random_policy(mdp.n_states, mdp.n_actions, rng);
        ValueTables v1 = evaluate_policy(mdp, p1);
        ValueTables v2 = evaluate_policy(mdp, p2);
        std::vector<double> nu1 = discounted_visitation(mdp, p1).nu;
        double lhs = 0.0;
        for (int s = 0; s < mdp.n_states; ++s)
            lhs += mdp.mu[s] * (v1.v[s] - v2.v[s]);
        double rhs = 0.0;
        for (int s = 0; s < mdp.n_states; ++s)
            for (int a = 0; a < mdp.n_actions; ++a)
                rhs += nu1[s] * v2.adv[s][a] * (p1.probs[s][a] - p2.probs[s][a]);
        rhs /= 1.0 - mdp.gamma;
        worst = std::max(worst, std::abs(lhs - rhs));
    }
    return {"performance-difference", worst <= 1e-8,
            "max residual " + fmt(worst) + " over " + std::to_string(n_triples) + " triples"};
}

std::vector<VerifyResult> run_verify_suites(std::uint64_t seed) {
    return {
        verify_gradient_equivalence(seed, 200),
        verify_constant_offset(seed, 10, 100),
        verify_prop1_logform(seed, 1000),
        verify_improvement(seed, 1000, 100),
        verify_ct_range(seed, 1000),
        verify_epsilon_invariance(seed, 1000),
        verify_performance_difference(seed, 1000),
    };
}

}  // namespace cliphinge
