#include "cliphinge/mdp.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace cliphinge {

namespace {
constexpr double kRowSumTol = 1e-12;

void check(bool ok, const char* msg) {
    if (!ok)
        throw std::invalid_argument(msg);
}
}  // namespace

TabularMdp::TabularMdp(int states, int actions, std::vector<double> trans, std::vector<double> rew,
                       double discount, std::vector<double> initial, double reward_max)
    : n_states(states),
      n_actions(actions),
      transition(std::move(trans)),
      reward(std::move(rew)),
      gamma(discount),
      mu(std::move(initial)),
      r_max(reward_max) {
    validate();
}

void TabularMdp::validate() const {
    check(n_states >= 1 && n_actions >= 1, "TabularMdp: need at least one state and action");
    check(gamma > 0.0 && gamma < 1.0, "TabularMdp: gamma must lie in (0,1)");
    check(r_max > 0.0, "TabularMdp: r_max must be positive");
    check(transition.size() == static_cast<size_t>(n_states) * n_actions * n_states,
          "TabularMdp: transition tensor has wrong size");
    check(reward.size() == static_cast<size_t>(n_states) * n_actions,
          "TabularMdp: reward table has wrong size");
    check(mu.size() == static_cast<size_t>(n_states), "TabularMdp: mu has wrong size");
    for (int s = 0; s < n_states; ++s) {
        for (int a = 0; a < n_actions; ++a) {
            double sum = 0.0;
            for (int s2 = 0; s2 < n_states; ++s2) {
                double v = p(s, a, s2);
                check(v >= 0.0, "TabularMdp: negative transition probability");
                sum += v;
            }
            check(std::abs(sum - 1.0) <= kRowSumTol, "TabularMdp: transition row does not sum to 1");
            check(r(s, a) >= 0.0 && r(s, a) <= r_max, "TabularMdp: reward outside [0, r_max]");
        }
    }
    double musum = 0.0;
    for (double m : mu) {
        check(m >= 0.0, "TabularMdp: negative initial probability");
        musum += m;
    }
    check(std::abs(musum - 1.0) <= kRowSumTol, "TabularMdp: mu does not sum to 1");
}

TabularPolicy TabularPolicy::uniform(int n_states, int n_actions) {
    TabularPolicy pi;
    pi.probs.assign(n_states, std::vector<double>(n_actions, 1.0 / n_actions));
    return pi;
}

void TabularPolicy::validate() const {
    for (const auto& row : probs) {
        double sum = 0.0;
        for (double v : row) {
            check(v >= 0.0, "TabularPolicy: negative probability");
            sum += v;
        }
        check(std::abs(sum - 1.0) <= kRowSumTol, "TabularPolicy: row does not sum to 1");
    }
}

double TabularPolicy::min_prob() const {
    double m = 1.0;
    for (const auto& row : probs)
        for (double v : row)
            m = std::min(m, v);
    return m;
}

namespace {

void check_shapes(const TabularMdp& mdp, const TabularPolicy& pi) {
    check(pi.n_states() == mdp.n_states && pi.n_actions() == mdp.n_actions,
          "policy dimensions do not match the MDP");
}

Eigen::MatrixXd policy_transition(const TabularMdp& mdp, const TabularPolicy& pi) {
    Eigen::MatrixXd P = Eigen::MatrixXd::Zero(mdp.n_states, mdp.n_states);
    for (int s = 0; s < mdp.n_states; ++s)
        for (int a = 0; a < mdp.n_actions; ++a) {
            const double w = pi.probs[s][a];
            if (w == 0.0)
                continue;
            const double* row = mdp.transition_row(s, a);
            for (int s2 = 0; s2 < mdp.n_states; ++s2)
                P(s, s2) += w * row[s2];
        }
    return P;
}

}  // namespace

ValueTables evaluate_policy(const TabularMdp& mdp, const TabularPolicy& policy) {
    check_shapes(mdp, policy);
    const int S = mdp.n_states, A = mdp.n_actions;
    Eigen::MatrixXd Ppi = policy_transition(mdp, policy);
    Eigen::VectorXd rpi(S);
    for (int s = 0; s < S; ++s) {
        double acc = 0.0;
        for (int a = 0; a < A; ++a)
            acc += policy.probs[s][a] * mdp.r(s, a);
        rpi(s) = acc;
    }
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(S, S) - mdp.gamma * Ppi;
    Eigen::VectorXd v = M.partialPivLu().solve(rpi);

    double resid = (M * v - rpi).lpNorm<Eigen::Infinity>();
    if (resid > 1e-10)
        throw std::runtime_error("evaluate_policy: Bellman residual above 1e-10");

    ValueTables out;
    out.v.assign(v.data(), v.data() + S);
    out.q.assign(S, std::vector<double>(A, 0.0));
    out.adv.assign(S, std::vector<double>(A, 0.0));
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double q = mdp.r(s, a);
            const double* row = mdp.transition_row(s, a);
            for (int s2 = 0; s2 < S; ++s2)
                q += mdp.gamma * row[s2] * out.v[s2];
            out.q[s][a] = q;
            out.adv[s][a] = q - out.v[s];
        }
    return out;
}

VisitationDist discounted_visitation(const TabularMdp& mdp, const TabularPolicy& policy) {
    check_shapes(mdp, policy);
    const int S = mdp.n_states, A = mdp.n_actions;
    Eigen::MatrixXd Ppi = policy_transition(mdp, policy);
    Eigen::VectorXd muv(S);
    for (int s = 0; s < S; ++s)
        muv(s) = mdp.mu[s];
    Eigen::MatrixXd M = Eigen::MatrixXd::Identity(S, S) - mdp.gamma * Ppi.transpose();
    Eigen::VectorXd y = M.partialPivLu().solve(muv);
    Eigen::VectorXd nu = (1.0 - mdp.gamma) * y;
    nu /= nu.sum();

    VisitationDist out;
    out.nu.assign(nu.data(), nu.data() + S);
    out.sigma.assign(S, std::vector<double>(A, 0.0));
    out.sigma_tilde.assign(S, std::vector<double>(A, 0.0));
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            out.sigma[s][a] = out.nu[s] * policy.probs[s][a];
            out.sigma_tilde[s][a] = out.nu[s] / A;
        }
    return out;
}

double total_expected_reward(const TabularMdp& mdp, const TabularPolicy& policy,
                             const std::vector<double>& nu_star) {
    check(nu_star.size() == static_cast<size_t>(mdp.n_states),
          "total_expected_reward: nu_star has wrong size");
    ValueTables vt = evaluate_policy(mdp, policy);
    double acc = 0.0;
    for (int s = 0; s < mdp.n_states; ++s)
        acc += nu_star[s] * vt.v[s];
    return acc;
}

namespace {

void write_doubles(std::ostream& os, const std::vector<double>& vals) {
    char buf[40];
    for (size_t i = 0; i < vals.size(); ++i) {
        std::snprintf(buf, sizeof(buf), "%.17g", vals[i]);
        os << buf << (i + 1 == vals.size() ? "" : " ");
    }
    os << "\n";
}

std::vector<double> read_doubles(std::istream& is, size_t n, const char* what) {
    std::vector<double> out(n);
    for (size_t i = 0; i < n; ++i)
        if (!(is >> out[i]))
            throw std::runtime_error(std::string("load_mdp: truncated ") + what);
    return out;
}

}  // namespace

void save_mdp(std::ostream& os, const TabularMdp& mdp) {
    os << "mdp 1\n";
    os << mdp.n_states << " " << mdp.n_actions << "\n";
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", mdp.gamma);
    os << buf << " ";
    std::snprintf(buf, sizeof(buf), "%.17g", mdp.r_max);
    os << buf << "\n";
    write_doubles(os, mdp.transition);
    write_doubles(os, mdp.reward);
    write_doubles(os, mdp.mu);
}

TabularMdp load_mdp(std::istream& is) {
    std::string tag;
    int version = 0;
    if (!(is >> tag >> version) || tag != "mdp" || version != 1)
        throw std::runtime_error("load_mdp: bad header");
    int S = 0, A = 0;
    double gamma = 0.0, r_max = 0.0;
    if (!(is >> S >> A >> gamma >> r_max))
        throw std::runtime_error("load_mdp: bad sizes");
    auto trans = read_doubles(is, static_cast<size_t>(S) * A * S, "transition");
    auto rew = read_doubles(is, static_cast<size_t>(S) * A, "reward");
    auto mu = read_doubles(is, static_cast<size_t>(S), "mu");
    return TabularMdp(S, A, std::move(trans), std::move(rew), gamma, std::move(mu), r_max);
}

void save_mdp_file(const std::string& path, const TabularMdp& mdp) {
    std::ofstream os(path);
    if (!os)
        throw std::runtime_error("save_mdp: cannot open " + path);
    save_mdp(os, mdp);
}

TabularMdp load_mdp_file(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw std::runtime_error("load_mdp: cannot open " + path);
    return load_mdp(is);
}

}  // namespace cliphinge
