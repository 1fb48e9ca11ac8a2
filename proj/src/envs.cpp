#include "cliphinge/envs.hpp"

#include "cliphinge/rng.hpp"

#include <algorithm>
#include <random>
#include <stdexcept>

namespace cliphinge {

namespace {

TabularMdp build_chain(int n, double gamma) {
    if (n < 2)
        throw std::invalid_argument("build_env: chain needs at least 2 states");
    const int A = 2;  // 0 = left, 1 = right
    std::vector<double> trans(static_cast<size_t>(n) * A * n, 0.0);
    std::vector<double> rew(static_cast<size_t>(n) * A, 0.0);
    auto at = [&](int s, int a, int s2) -> double& {
        return trans[(static_cast<size_t>(s) * A + a) * n + s2];
    };
    for (int s = 0; s < n - 1; ++s) {
        at(s, 0, std::max(s - 1, 0)) = 1.0;
        at(s, 1, s + 1) = 1.0;
    }
    at(n - 1, 0, n - 1) = 1.0;  // absorbing terminal, self-loop pays 1
    at(n - 1, 1, n - 1) = 1.0;
    rew[static_cast<size_t>(n - 1) * A + 0] = 1.0;
    rew[static_cast<size_t>(n - 1) * A + 1] = 1.0;
    std::vector<double> mu(n, 0.0);
    mu[0] = 1.0;
    return TabularMdp(n, A, std::move(trans), std::move(rew), gamma, std::move(mu));
}

TabularMdp build_gridworld(int n, double gamma, double slip) {
    if (n < 2)
        throw std::invalid_argument("build_env: gridworld needs side >= 2");
    if (slip < 0.0 || slip > 1.0)
        throw std::invalid_argument("build_env: slip must lie in [0,1]");
    const int S = n * n, A = 4, goal = S - 1;
    auto step = [&](int s, int a) {
        static const int dr[4] = {-1, 1, 0, 0};
        static const int dc[4] = {0, 0, -1, 1};
        int r = s / n, c = s % n;
        r = std::clamp(r + dr[a], 0, n - 1);
        c = std::clamp(c + dc[a], 0, n - 1);
        return r * n + c;
    };
    std::vector<double> trans(static_cast<size_t>(S) * A * S, 0.0);
    std::vector<double> rew(static_cast<size_t>(S) * A, 0.0);
    auto at = [&](int s, int a, int s2) -> double& {
        return trans[(static_cast<size_t>(s) * A + a) * S + s2];
    };
    for (int s = 0; s < S; ++s) {
        if (s == goal) {
            for (int a = 0; a < A; ++a)
                at(s, a, s) = 1.0;
            continue;
        }
        for (int a = 0; a < A; ++a) {
            at(s, a, step(s, a)) += 1.0 - slip;
            for (int a2 = 0; a2 < A; ++a2)
                at(s, a, step(s, a2)) += slip / A;
            rew[static_cast<size_t>(s) * A + a] = at(s, a, goal);  // pay on entering
        }
    }
    std::vector<double> mu(S, 1.0 / (S - 1));
    mu[goal] = 0.0;
    return TabularMdp(S, A, std::move(trans), std::move(rew), gamma, std::move(mu));
}

TabularMdp build_random(int S, int A, double gamma, std::uint64_t seed) {
    if (S < 1 || A < 1)
        throw std::invalid_argument("build_env: random MDP needs positive sizes");
    std::mt19937_64 rng = seeded_rng(seed, "env.random");
    std::exponential_distribution<double> expo(1.0);
    std::uniform_real_distribution<double> unif(0.0, 1.0);
    std::vector<double> trans(static_cast<size_t>(S) * A * S, 0.0);
    std::vector<double> rew(static_cast<size_t>(S) * A, 0.0);
    for (int s = 0; s < S; ++s)
        for (int a = 0; a < A; ++a) {
            double* row = trans.data() + (static_cast<size_t>(s) * A + a) * S;
            double sum = 0.0;
            for (int s2 = 0; s2 < S; ++s2) {
                row[s2] = expo(rng);  // iid Exp(1) normalized = Dirichlet(1)
                sum += row[s2];
            }
            for (int s2 = 0; s2 < S; ++s2)
                row[s2] /= sum;
            rew[static_cast<size_t>(s) * A + a] = unif(rng);
        }
    std::vector<double> mu(S, 1.0 / S);
    return TabularMdp(S, A, std::move(trans), std::move(rew), gamma, std::move(mu));
}

}  // namespace

TabularMdp build_env(const EnvSpec& spec) {
    switch (spec.kind) {
        case EnvKind::chain: return build_chain(spec.size, spec.gamma);
        case EnvKind::gridworld: return build_gridworld(spec.size, spec.gamma, spec.slip);
        case EnvKind::random: return build_random(spec.n_states, spec.n_actions, spec.gamma, spec.seed);
    }
    throw std::logic_error("build_env: unknown kind");
}

}  // namespace cliphinge
