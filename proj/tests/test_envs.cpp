#include "cliphinge/envs.hpp"
#include "cliphinge/oracle.hpp"

#include <doctest.h>

#include <stdexcept>

#include <chrono>
#include <cmath>

using namespace cliphinge;

TEST_CASE("chain(2) matches the hand two-state fixture") {
    EnvSpec es;
    es.kind = EnvKind::chain;
    es.size = 2;
    es.gamma = 0.5;
    TabularMdp mdp = build_env(es);
    REQUIRE(mdp.n_states == 2);
    REQUIRE(mdp.n_actions == 2);
    // terminal is absorbing and pays 1 under both actions
    CHECK(mdp.p(1, 0, 1) == 1.0);
    CHECK(mdp.p(1, 1, 1) == 1.0);
    CHECK(mdp.r(1, 0) == 1.0);
    CHECK(mdp.r(1, 1) == 1.0);
    // moving right from s0 reaches the terminal with no reward
    CHECK(mdp.p(0, 1, 1) == 1.0);
    CHECK(mdp.r(0, 1) == 0.0);
    CHECK(mdp.mu[0] == 1.0);
    // hand values under the right-going policy
    TabularPolicy right;
    right.probs = {{0.0, 1.0}, {0.0, 1.0}};
    ValueTables vt = evaluate_policy(mdp, right);
    CHECK(vt.v[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(vt.v[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("random env is reproducible from its seed") {
    EnvSpec es;
    es.kind = EnvKind::random;
    es.n_states = 5;
    es.n_actions = 3;
    es.seed = 7;
    TabularMdp a = build_env(es);
    TabularMdp b = build_env(es);
    CHECK(a.transition == b.transition);
    CHECK(a.reward == b.reward);
    es.seed = 8;
    TabularMdp c = build_env(es);
    CHECK(a.transition != c.transition);
}

TEST_CASE("gridworld optimal values follow the gamma-power pattern") {
    EnvSpec es;
    es.kind = EnvKind::gridworld;
    es.size = 3;
    es.gamma = 0.9;
    es.slip = 0.0;
    TabularMdp mdp = build_env(es);
    REQUIRE(mdp.n_states == 9);
    REQUIRE(mdp.n_actions == 4);
    OptimalSolution opt = solve_optimal(mdp);
    const int goal = 8;
    CHECK(opt.v_star[goal] == doctest::Approx(0.0).epsilon(1e-10));
    for (int s = 0; s < 9; ++s) {
        if (s == goal)
            continue;
        int r = s / 3, c = s % 3;
        int dist = (2 - r) + (2 - c);
        CHECK(opt.v_star[s] == doctest::Approx(std::pow(mdp.gamma, dist - 1)).epsilon(1e-9));
    }
}

TEST_CASE("gridworld slip keeps rows stochastic") {
    EnvSpec es;
    es.kind = EnvKind::gridworld;
    es.size = 3;
    es.slip = 0.2;
    TabularMdp mdp = build_env(es);  // construction validates row sums
    CHECK(mdp.n_states == 9);
}

TEST_CASE("oracle solve stays fast at default sizes") {
    auto t0 = std::chrono::steady_clock::now();
    for (EnvKind kind : {EnvKind::chain, EnvKind::gridworld, EnvKind::random}) {
        EnvSpec es;
        es.kind = kind;
        solve_optimal(build_env(es));
    }
    auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                  std::chrono::steady_clock::now() - t0).count();
    CHECK(ms < 1000);
}

TEST_CASE("invalid sizes are rejected") {
    EnvSpec es;
    es.kind = EnvKind::chain;
    es.size = 1;
    CHECK_THROWS_AS(build_env(es), std::invalid_argument);
    es.kind = EnvKind::gridworld;
    es.size = 3;
    es.slip = 1.5;
    CHECK_THROWS_AS(build_env(es), std::invalid_argument);
}
