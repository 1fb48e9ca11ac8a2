#include "cliphinge/tabular.hpp"

#include "cliphinge/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <stdexcept>

namespace cliphinge {

namespace {
constexpr double kAdvEps = 1e-9;  // |A| at or below this counts as zero
constexpr double kProbFloor = 1e-300;
}  // namespace

void TabularRunConfig::validate() const {
    if (!(classifier.epsilon > 0.0))
        throw std::invalid_argument("TabularRunConfig: epsilon must be positive");
    if (!(emda.step_size > 0.0) || emda.n_iters < 1)
        throw std::invalid_argument("TabularRunConfig: bad EMDA config");
    if (n_outer_iters < 1)
        throw std::invalid_argument("TabularRunConfig: n_outer_iters must be >= 1");
    if (batch_scheme == BatchScheme::trajectory_sampled &&
        (trajectories_per_iter < 1 || horizon < 1))
        throw std::invalid_argument("TabularRunConfig: bad trajectory parameters");
}

BatchSample collect_batch(const TabularMdp& mdp, const TabularPolicy& policy,
                          const ValueTables& values, const TabularRunConfig& config,
                          std::mt19937_64& rng) {
    BatchSample batch;
    auto sanitized = [&](int s, int a) {
        double adv = values.adv[s][a];
        return std::abs(adv) <= kAdvEps ? 0.0 : adv;
    };
    auto make_sample = [&](int s, int a) {
        ActionSample item;
        item.action = a;
        item.advantage = sanitized(s, a);
        item.old_prob = policy.probs[s][a];
        item.sample_weight = canonical_sample_weight(config.classifier.kind, item.old_prob);
        return item;
    };

    if (config.batch_scheme == BatchScheme::all_pairs) {
        for (int s = 0; s < mdp.n_states; ++s) {
            bool any = false;
            for (int a = 0; a < mdp.n_actions; ++a)
                any = any || sanitized(s, a) != 0.0;
            if (!any)
                continue;
            BatchRow row;
            row.state = s;
            for (int a = 0; a < mdp.n_actions; ++a)
                row.actions.push_back(make_sample(s, a));
            batch.rows.push_back(std::move(row));
        }
        return batch;
    }

    // trajectory mode: roll out, then keep at most one (s,a) per state
    std::map<int, std::vector<int>> seen;  // state -> visited actions (with repeats)
    for (int traj = 0; traj < config.trajectories_per_iter; ++traj) {
        int s = sample_categorical(rng, mdp.mu);
        for (int t = 0; t < config.horizon; ++t) {
            int a = sample_categorical(rng, policy.probs[s]);
            seen[s].push_back(a);
            s = sample_categorical_n(rng, mdp.transition_row(s, a), mdp.n_states);
        }
    }
    for (const auto& [s, actions] : seen) {
        int a = actions[uniform_index(rng, static_cast<int>(actions.size()))];
        if (sanitized(s, a) == 0.0)
            continue;
        BatchRow row;
        row.state = s;
        row.actions.push_back(make_sample(s, a));
        batch.rows.push_back(std::move(row));
    }
    return batch;
}

TabularRunResult run_tabular(const TabularMdp& mdp, const TabularRunConfig& config,
                             const std::optional<TabularPolicy>& init) {
    config.validate();
    std::mt19937_64 rng = seeded_rng(config.rng_seed, "tabular.batch");
    OptimalSolution opt = solve_optimal(mdp);

    TabularRunResult out;
    TabularPolicy pi = init ? *init : TabularPolicy::uniform(mdp.n_states, mdp.n_actions);
    pi.validate();

    auto record = [&](int iter, const ValueTables& vt, int violations, double ct_min,
                      double ct_max, int batch_states, std::int64_t wall_ms) {
        RunMetrics m;
        m.iter = iter;
        m.gap = 0.0;
        for (int s = 0; s < mdp.n_states; ++s)
            m.gap += opt.nu_star[s] * (opt.v_star[s] - vt.v[s]);
        m.min_gap_so_far = out.metrics.empty() ? m.gap
                                               : std::min(out.metrics.back().min_gap_so_far, m.gap);
        double lo = vt.v[0], hi = vt.v[0], sum = 0.0;
        for (double v : vt.v) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        m.v_min = lo;
        m.v_mean = sum / mdp.n_states;
        m.v_max = hi;
        m.improvement_violations = violations;
        m.wall_ms = wall_ms;
        m.extras = {{"batch_states", static_cast<double>(batch_states)},
                    {"ct_min", ct_min},
                    {"ct_max", ct_max}};
        out.metrics.push_back(std::move(m));
    };

    ValueTables vt = evaluate_policy(mdp, pi);
    record(0, vt, 0, 0.0, 0.0, 0, 0);

    auto t0 = std::chrono::steady_clock::now();
    for (int t = 0; t < config.n_outer_iters; ++t) {
        BatchSample batch = collect_batch(mdp, pi, vt, config, rng);
        double ct_min = 0.0, ct_max = 0.0;
        if (!batch.rows.empty()) {
            EmdaResult res = run_emda(config.classifier, batch, pi, config.emda);
            bool first_ct = true;
            for (const auto& row : batch.rows) {
                const EmdaStateResult& sr = res.states.at(row.state);
                pi.probs[row.state] = sr.target;
                // keep rows strictly positive across long runs
                double sum = 0.0;
                for (double& v : pi.probs[row.state]) {
                    v = std::max(v, kProbFloor);
                    sum += v;
                }
                for (double& v : pi.probs[row.state])
                    v /= sum;
                for (const auto& it : row.actions) {
                    if (it.advantage == 0.0)
                        continue;
                    double c = sr.c_coeff[it.action];
                    ct_min = first_ct ? c : std::min(ct_min, c);
                    ct_max = first_ct ? c : std::max(ct_max, c);
                    first_ct = false;
                }
            }
        }
        ValueTables vt_next = evaluate_policy(mdp, pi);
        int violations = 0;
        for (int s = 0; s < mdp.n_states; ++s)
            if (vt_next.v[s] < vt.v[s] - 1e-10)
                ++violations;
        vt = std::move(vt_next);
        auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                      std::chrono::steady_clock::now() - t0).count();
        record(t + 1, vt, violations, ct_min, ct_max, static_cast<int>(batch.rows.size()), ms);
    }
    out.final_policy = std::move(pi);
    return out;
}

}  // namespace cliphinge
