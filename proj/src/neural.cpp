#include "cliphinge/neural.hpp"

#include "cliphinge/oracle.hpp"
#include "cliphinge/rng.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <ostream>
#include <set>
#include <stdexcept>

namespace cliphinge {

namespace {

constexpr double kAdvEps = 1e-9;
constexpr double kInvSqrt2 = 0.70710678118654752440;

// Forward pass specialized to the two-hot feature layout; summation order
// matches forward() on the embedded vector bit for bit.
double forward_sa(const TwoLayerNet& net, int n_states, int s, int a) {
    double acc = 0.0;
    for (int i = 0; i < net.width; ++i) {
        const double* r = net.row(i);
        double z = r[s] * kInvSqrt2 + r[n_states + a] * kInvSqrt2;
        if (z > 0.0)
            acc += net.signs[i] * z;
    }
    return acc / std::sqrt(static_cast<double>(net.width));
}

// One projected gradient step on the two active feature coordinates, keeping
// the squared displacement norm incrementally.
class ProjectedStepper {
public:
    explicit ProjectedStepper(TwoLayerNet& net) : net_(net) {
        normsq_ = 0.0;
        for (size_t i = 0; i < net.alpha.size(); ++i) {
            double d = net.alpha[i] - net.alpha0[i];
            normsq_ += d * d;
        }
    }

    void step(int n_states, int s, int a, double coeff) {
        const double scale = coeff * kInvSqrt2 / std::sqrt(static_cast<double>(net_.width));
        const int ja = n_states + a;
        for (int i = 0; i < net_.width; ++i) {
            double* r = net_.alpha.data() + static_cast<size_t>(i) * net_.input_dim;
            const double* r0 = net_.alpha0.data() + static_cast<size_t>(i) * net_.input_dim;
            double z = r[s] * kInvSqrt2 + r[ja] * kInvSqrt2;
            if (z <= 0.0)
                continue;
            double delta = net_.signs[i] * scale;
            double ds = r[s] - r0[s], da = r[ja] - r0[ja];
            normsq_ += 2.0 * delta * (ds + da) + 2.0 * delta * delta;
            r[s] += delta;
            r[ja] += delta;
        }
        if (++since_recompute_ >= 1024) {
            recompute();
            since_recompute_ = 0;
        }
        if (normsq_ > net_.radius * net_.radius) {
            recompute();
            if (normsq_ > net_.radius * net_.radius) {
                double f = net_.radius / std::sqrt(normsq_);
                for (size_t i = 0; i < net_.alpha.size(); ++i)
                    net_.alpha[i] = net_.alpha0[i] + (net_.alpha[i] - net_.alpha0[i]) * f;
                normsq_ = net_.radius * net_.radius;
            }
        }
    }

private:
    void recompute() {
        normsq_ = 0.0;
        for (size_t i = 0; i < net_.alpha.size(); ++i) {
            double d = net_.alpha[i] - net_.alpha0[i];
            normsq_ += d * d;
        }
    }
    TwoLayerNet& net_;
    double normsq_ = 0.0;
    int since_recompute_ = 0;
};

}  // namespace

std::vector<double> action_probs(const EnergyPolicy& policy, const FeatureMap& fm, int state) {
    const int A = fm.n_actions;
    std::vector<double> z(A);
    double zmax = -1e300;
    for (int a = 0; a < A; ++a) {
        z[a] = policy.inv_temperature == 0.0
                   ? 0.0
                   : policy.inv_temperature * forward_sa(policy.net, fm.n_states, state, a);
        zmax = std::max(zmax, z[a]);
    }
    double sum = 0.0;
    for (int a = 0; a < A; ++a) {
        z[a] = std::exp(z[a] - zmax);
        sum += z[a];
    }
    for (int a = 0; a < A; ++a)
        z[a] /= sum;
    // sharp temperatures can underflow exp to an exact zero; keep rows
    // strictly positive so probability ratios stay defined
    bool floored = false;
    for (double v : z)
        floored = floored || v < 1e-300;
    if (floored) {
        sum = 0.0;
        for (double& v : z) {
            v = std::max(v, 1e-300);
            sum += v;
        }
        for (double& v : z)
            v /= sum;
    }
    return z;
}

std::vector<std::vector<double>> policy_table(const EnergyPolicy& policy, const FeatureMap& fm) {
    std::vector<std::vector<double>> out(fm.n_states);
    for (int s = 0; s < fm.n_states; ++s)
        out[s] = action_probs(policy, fm, s);
    return out;
}

double NeuralRunConfig::effective_eta() const {
    return eta > 0.0 ? eta : std::pow(static_cast<double>(T), -alpha_exp);
}

double NeuralRunConfig::tau(int t) const {
    return std::pow(static_cast<double>(T), alpha_exp) / (static_cast<double>(K) * t);
}

void NeuralRunConfig::validate() const {
    if (T < 1)
        throw std::invalid_argument("NeuralRunConfig: T must be >= 1");
    if (alpha_exp < 0.5 || alpha_exp >= 1.0)
        throw std::invalid_argument("NeuralRunConfig: alpha_exp must lie in [1/2, 1)");
    if (K < 1 || m_f < 1 || m_q < 1 || t_upd < 1)
        throw std::invalid_argument("NeuralRunConfig: sizes must be positive");
    if (!(epsilon > 0.0) || !(r_f > 0.0) || !(r_q > 0.0))
        throw std::invalid_argument("NeuralRunConfig: epsilon and radii must be positive");
    const double uc = K * effective_eta();
    for (int t = 1; t + 1 <= T; ++t) {
        double tnext = tau(t + 1), tcur = tau(t);
        if (tnext * tnext * (uc * uc + 1.0 / (tcur * tcur)) > 1.0 + 1e-12)
            throw std::invalid_argument(
                "NeuralRunConfig: temperature schedule violates tau_{t+1}^2 (U_C^2 + tau_t^-2) <= 1");
    }
}

std::vector<SampleTuple> sample_sigma_t(const TabularMdp& mdp,
                                        const std::vector<std::vector<double>>& probs,
                                        int n, std::mt19937_64& rng) {
    if (n < 1)
        throw std::invalid_argument("sample_sigma_t: n must be >= 1");
    std::vector<SampleTuple> out;
    out.reserve(n);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    for (int i = 0; i < n; ++i) {
        SampleTuple t;
        int s = sample_categorical(rng, mdp.mu);
        int a = sample_categorical(rng, probs[s]);
        for (long guard = 0; guard < 100000000L; ++guard) {
            if (unif(rng) < 1.0 - mdp.gamma)
                break;
            s = sample_categorical_n(rng, mdp.transition_row(s, a), mdp.n_states);
            a = sample_categorical(rng, probs[s]);
        }
        t.s = s;
        t.a = a;
        t.a0 = uniform_index(rng, mdp.n_actions);
        t.s_next = sample_categorical_n(rng, mdp.transition_row(s, a), mdp.n_states);
        t.a_next = sample_categorical(rng, probs[t.s_next]);
        t.reward = mdp.r(s, a);
        out.push_back(t);
    }
    return out;
}

NetFitResult td_policy_evaluation(const TabularMdp& mdp, TwoLayerNet q_net, const FeatureMap& fm,
                                  const std::vector<SampleTuple>& tuples, int t_upd) {
    if (static_cast<int>(tuples.size()) != t_upd)
        throw std::invalid_argument("td_policy_evaluation: need exactly t_upd tuples");
    const double eta_upd = 1.0 / std::sqrt(static_cast<double>(t_upd));
    // accumulate displacements from the start so a constant path averages to
    // itself exactly
    const std::vector<double> start = q_net.alpha;
    std::vector<double> acc(q_net.alpha.size(), 0.0);
    ProjectedStepper stepper(q_net);
    double abs_err = 0.0;
    for (int t = 0; t < t_upd; ++t) {
        for (size_t i = 0; i < acc.size(); ++i)
            acc[i] += q_net.alpha[i] - start[i];
        const SampleTuple& tp = tuples[t];
        double q = forward_sa(q_net, fm.n_states, tp.s, tp.a);
        double qn = forward_sa(q_net, fm.n_states, tp.s_next, tp.a_next);
        double delta = q - tp.reward - mdp.gamma * qn;
        abs_err += std::abs(delta);
        stepper.step(fm.n_states, tp.s, tp.a, -eta_upd * delta);
    }
    for (size_t i = 0; i < acc.size(); ++i)
        q_net.alpha[i] = start[i] + acc[i] / t_upd;
    project(q_net);
    return {std::move(q_net), abs_err / t_upd};
}

std::vector<double> advantage_from_critic(const TwoLayerNet& q_net, const FeatureMap& fm,
                                          const std::vector<double>& pi_row, int state) {
    const int A = fm.n_actions;
    std::vector<double> q(A);
    double v = 0.0;
    for (int a = 0; a < A; ++a) {
        q[a] = forward_sa(q_net, fm.n_states, state, a);
        v += pi_row[a] * q[a];
    }
    for (int a = 0; a < A; ++a)
        q[a] -= v;
    return q;
}

NetFitResult regress_to_target(TwoLayerNet f_net, const FeatureMap& fm,
                               const std::vector<std::vector<double>>& target_values,
                               const std::vector<SampleTuple>& tuples, int t_upd) {
    if (static_cast<int>(tuples.size()) != t_upd)
        throw std::invalid_argument("regress_to_target: need exactly t_upd tuples");
    const double eta_upd = 1.0 / std::sqrt(static_cast<double>(t_upd));
    const std::vector<double> start = f_net.alpha;
    std::vector<double> acc(f_net.alpha.size(), 0.0);
    ProjectedStepper stepper(f_net);
    double abs_err = 0.0;
    for (int t = 0; t < t_upd; ++t) {
        for (size_t i = 0; i < acc.size(); ++i)
            acc[i] += f_net.alpha[i] - start[i];
        const SampleTuple& tp = tuples[t];
        double tgt = target_values[tp.s][tp.a0];
        if (!std::isfinite(tgt))
            throw std::invalid_argument("regress_to_target: non-finite target");
        double delta = forward_sa(f_net, fm.n_states, tp.s, tp.a0) - tgt;
        abs_err += std::abs(delta);
        stepper.step(fm.n_states, tp.s, tp.a0, -eta_upd * delta);
    }
    for (size_t i = 0; i < acc.size(); ++i)
        f_net.alpha[i] = start[i] + acc[i] / t_upd;
    project(f_net);
    return {std::move(f_net), abs_err / t_upd};
}

NeuralRunResult run_neural(const TabularMdp& mdp, const NeuralRunConfig& config) {
    config.validate();
    const int S = mdp.n_states, A = mdp.n_actions;
    FeatureMap fm{S, A};
    std::mt19937_64 rng_sample = seeded_rng(config.rng_seed, "neural.sample");
    std::mt19937_64 rng_f = seeded_rng(config.rng_seed, "neural.net.f");
    std::mt19937_64 rng_q = seeded_rng(config.rng_seed, "neural.net.q");

    NeuralRunResult out;
    EnergyPolicy policy{init_net(config.m_f, fm.dim(), config.r_f, rng_f), 0.0};
    TwoLayerNet q_net = init_net(config.m_q, fm.dim(), config.r_q, rng_q);
    OptimalSolution opt = solve_optimal(mdp);
    const double eta = config.effective_eta();
    const double talpha = std::pow(static_cast<double>(config.T), config.alpha_exp);

    EmdaConfig emda_cfg;
    emda_cfg.step_size = eta;
    emda_cfg.n_iters = config.K;
    emda_cfg.record_grads = false;
    ClassifierSpec spec = canonical_spec(config.classifier, config.epsilon);

    std::vector<double> v_prev;
    auto t0 = std::chrono::steady_clock::now();
    auto record = [&](int iter, const std::vector<std::vector<double>>& pi_table,
                      double td_resid, double sgd_resid, double ct_min, double ct_max,
                      int batch_states, bool skipped) {
        TabularPolicy tp;
        tp.probs = pi_table;
        ValueTables vt = evaluate_policy(mdp, tp);
        RunMetrics m;
        m.iter = iter;
        m.gap = 0.0;
        for (int s = 0; s < S; ++s)
            m.gap += opt.nu_star[s] * (opt.v_star[s] - vt.v[s]);
        m.min_gap_so_far = out.metrics.empty()
                               ? m.gap
                               : std::min(out.metrics.back().min_gap_so_far, m.gap);
        double lo = vt.v[0], hi = vt.v[0], sum = 0.0;
        for (double v : vt.v) {
            lo = std::min(lo, v);
            hi = std::max(hi, v);
            sum += v;
        }
        m.v_min = lo;
        m.v_mean = sum / S;
        m.v_max = hi;
        m.improvement_violations = 0;
        if (!v_prev.empty())
            for (int s = 0; s < S; ++s)
                if (vt.v[s] < v_prev[s] - 1e-10)
                    ++m.improvement_violations;
        v_prev = vt.v;
        m.wall_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                        std::chrono::steady_clock::now() - t0).count();
        m.extras = {{"batch_states", static_cast<double>(batch_states)},
                    {"ct_min", ct_min},
                    {"ct_max", ct_max},
                    {"td_resid", td_resid},
                    {"sgd_resid", sgd_resid},
                    {"skipped", skipped ? 1.0 : 0.0}};
        out.metrics.push_back(std::move(m));
    };

    for (int t = 0; t < config.T; ++t) {
        std::vector<std::vector<double>> pi_table = policy_table(policy, fm);
        const double beta_next = config.K * (t + 1) / talpha;  // 1 / tau_{t+1}
        const double beta_cur = policy.inv_temperature;        // 1 / tau_t, 0 at t = 0

        std::vector<SampleTuple> tuples = sample_sigma_t(mdp, pi_table, config.t_upd, rng_sample);
        NetFitResult td = td_policy_evaluation(mdp, q_net, fm, tuples, config.t_upd);
        q_net = std::move(td.net);

        std::vector<std::vector<double>> adv(S);
        for (int s = 0; s < S; ++s) {
            adv[s] = advantage_from_critic(q_net, fm, pi_table[s], s);
            for (double& v : adv[s])
                if (std::abs(v) <= kAdvEps)
                    v = 0.0;
        }

        std::set<int> sampled;
        for (const auto& tp : tuples)
            sampled.insert(tp.s);
        BatchSample batch;
        for (int s : sampled) {
            bool any = false;
            for (int a = 0; a < A; ++a)
                any = any || adv[s][a] != 0.0;
            if (!any)
                continue;
            BatchRow row;
            row.state = s;
            for (int a = 0; a < A; ++a) {
                ActionSample item;
                item.action = a;
                item.advantage = adv[s][a];
                item.old_prob = pi_table[s][a];
                item.sample_weight = canonical_sample_weight(config.classifier, item.old_prob);
                row.actions.push_back(item);
            }
            batch.rows.push_back(std::move(row));
        }

        if (batch.rows.empty()) {
            record(t, pi_table, td.mean_abs_error, 0.0, 0.0, 0.0, 0, true);
            continue;
        }

        TabularPolicy cur;
        cur.probs = pi_table;
        EmdaResult emda = run_emda(spec, batch, cur, emda_cfg);

        double ct_min = 0.0, ct_max = 0.0;
        bool first_ct = true;
        std::vector<std::vector<double>> target(S, std::vector<double>(A, 0.0));
        for (int s = 0; s < S; ++s)
            for (int a = 0; a < A; ++a) {
                double emda_part = 0.0;
                auto it = emda.states.find(s);
                if (it != emda.states.end()) {
                    emda_part = it->second.neg_eta_g[a];  // == C_t(s,a) A(s,a)
                    if (adv[s][a] != 0.0) {
                        double c = it->second.c_coeff[a];
                        ct_min = first_ct ? c : std::min(ct_min, c);
                        ct_max = first_ct ? c : std::max(ct_max, c);
                        first_ct = false;
                    }
                }
                double f_part = beta_cur == 0.0
                                    ? 0.0
                                    : beta_cur * forward_sa(policy.net, S, s, a);
                target[s][a] = (emda_part + f_part) / beta_next;
            }

        NetFitResult sgd = regress_to_target(policy.net, fm, target, tuples, config.t_upd);
        record(t, pi_table, td.mean_abs_error, sgd.mean_abs_error, ct_min, ct_max,
               static_cast<int>(batch.rows.size()), false);
        policy.net = std::move(sgd.net);
        policy.inv_temperature = beta_next;
    }
    record(config.T, policy_table(policy, fm), 0.0, 0.0, 0.0, 0.0, 0, false);

    out.final_policy = std::move(policy);
    out.final_critic = std::move(q_net);
    return out;
}

void save_checkpoint(std::ostream& os, const EnergyPolicy& policy, const TwoLayerNet& critic,
                     int iter) {
    os << "checkpoint 1\n" << iter << "\n";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%a", policy.inv_temperature);
    os << buf << "\n";
    save_net(os, policy.net);
    save_net(os, critic);
}

Checkpoint load_checkpoint(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "checkpoint" || version != 1)
        throw std::runtime_error("load_checkpoint: bad header");
    Checkpoint ck;
    if (!(is >> ck.iter))
        throw std::runtime_error("load_checkpoint: bad iteration");
    std::string tok;
    if (!(is >> tok))
        throw std::runtime_error("load_checkpoint: missing temperature");
    ck.policy.inv_temperature = std::strtod(tok.c_str(), nullptr);
    ck.policy.net = load_net(is);
    ck.critic = load_net(is);
    return ck;
}

}  // namespace cliphinge
