#include "cliphinge/envs.hpp"
#include "cliphinge/mdp.hpp"
#include "cliphinge/rng.hpp"
#include "cliphinge/verify.hpp"

#include <doctest.h>

#include <stdexcept>

#include <cmath>
#include <cstdio>
#include <sstream>

using namespace cliphinge;

namespace {

TabularMdp one_state_mdp(double reward, double gamma) {
    return TabularMdp(1, 1, {1.0}, {reward}, gamma, {1.0});
}

// s0 -> s1 under both actions with reward 0; s1 absorbing with reward 1.
TabularMdp two_state_chain(double gamma) {
    std::vector<double> trans = {
        0, 1,  // s0 a0
        0, 1,  // s0 a1
        0, 1,  // s1 a0
        0, 1,  // s1 a1
    };
    std::vector<double> rew = {0, 0, 1, 1};
    return TabularMdp(2, 2, std::move(trans), std::move(rew), gamma, {1.0, 0.0});
}

TabularMdp random_mdp(int S, int A, double gamma, std::uint64_t seed) {
    EnvSpec es;
    es.kind = EnvKind::random;
    es.n_states = S;
    es.n_actions = A;
    es.gamma = gamma;
    es.seed = seed;
    return build_env(es);
}

// test-only oracle: fixed-point iteration of the Bellman expectation operator
std::vector<double> iterate_values(const TabularMdp& mdp, const TabularPolicy& pi, int iters) {
    std::vector<double> v(mdp.n_states, 0.0), v2(mdp.n_states, 0.0);
    for (int it = 0; it < iters; ++it) {
        for (int s = 0; s < mdp.n_states; ++s) {
            double acc = 0.0;
            for (int a = 0; a < mdp.n_actions; ++a) {
                double q = mdp.r(s, a);
                const double* row = mdp.transition_row(s, a);
                for (int s2 = 0; s2 < mdp.n_states; ++s2)
                    q += mdp.gamma * row[s2] * v[s2];
                acc += pi.probs[s][a] * q;
            }
            v2[s] = acc;
        }
        v.swap(v2);
    }
    return v;
}

}  // namespace

TEST_CASE("evaluate_policy: geometric series on the one-state MDP") {
    TabularMdp mdp = one_state_mdp(1.0, 0.9);
    ValueTables vt = evaluate_policy(mdp, TabularPolicy::uniform(1, 1));
    CHECK(vt.v[0] == doctest::Approx(10.0).epsilon(1e-12));
}

TEST_CASE("evaluate_policy: hand-iterated two-state chain") {
    TabularMdp mdp = two_state_chain(0.5);
    ValueTables vt = evaluate_policy(mdp, TabularPolicy::uniform(2, 2));
    CHECK(vt.v[1] == doctest::Approx(2.0).epsilon(1e-12));
    CHECK(vt.v[0] == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("evaluate_policy: advantages are centered and values bounded") {
    std::mt19937_64 rng = seeded_rng(7, "test.mdp");
    for (int trial = 0; trial < 20; ++trial) {
        TabularMdp mdp = random_mdp(6, 3, 0.9, 100 + trial);
        TabularPolicy pi = random_policy(6, 3, rng);
        ValueTables vt = evaluate_policy(mdp, pi);
        for (int s = 0; s < 6; ++s) {
            double acc = 0.0;
            for (int a = 0; a < 3; ++a) {
                acc += pi.probs[s][a] * vt.adv[s][a];
                CHECK(vt.adv[s][a] == vt.q[s][a] - vt.v[s]);
            }
            CHECK(std::abs(acc) <= 1e-10);
            CHECK(std::abs(vt.v[s]) <= mdp.r_max / (1.0 - mdp.gamma) + 1e-9);
        }
    }
}

TEST_CASE("evaluate_policy agrees with 1e4-step fixed-point iteration") {
    std::mt19937_64 rng = seeded_rng(8, "test.mdp.fp");
    for (int trial = 0; trial < 5; ++trial) {
        TabularMdp mdp = random_mdp(6, 3, 0.9, 200 + trial);
        TabularPolicy pi = random_policy(6, 3, rng);
        ValueTables vt = evaluate_policy(mdp, pi);
        std::vector<double> ref = iterate_values(mdp, pi, 10000);
        for (int s = 0; s < 6; ++s)
            CHECK(std::abs(vt.v[s] - ref[s]) <= 1e-8);
    }
}

TEST_CASE("discounted_visitation basics") {
    SUBCASE("one state") {
        VisitationDist d = discounted_visitation(one_state_mdp(1.0, 0.9), TabularPolicy::uniform(1, 1));
        CHECK(d.nu[0] == doctest::Approx(1.0).epsilon(1e-12));
        CHECK(d.sigma_tilde[0][0] == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("symmetric two-state random walk") {
        std::vector<double> trans = {0, 1, 1, 0, 0, 1, 1, 0};  // both actions swap states
        TabularMdp mdp(2, 2, std::move(trans), {0, 0, 0, 0}, 0.9, {0.5, 0.5});
        VisitationDist d = discounted_visitation(mdp, TabularPolicy::uniform(2, 2));
        CHECK(d.nu[0] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(d.nu[1] == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("two-state chain at gamma one half") {
        VisitationDist d = discounted_visitation(two_state_chain(0.5), TabularPolicy::uniform(2, 2));
        CHECK(d.nu[0] == doctest::Approx(0.5).epsilon(1e-10));
        CHECK(d.nu[1] == doctest::Approx(0.5).epsilon(1e-10));
    }
    SUBCASE("sigma consistency on a random mdp") {
        std::mt19937_64 rng = seeded_rng(9, "test.mdp.vis");
        TabularMdp mdp = random_mdp(5, 3, 0.9, 300);
        TabularPolicy pi = random_policy(5, 3, rng);
        VisitationDist d = discounted_visitation(mdp, pi);
        double total = 0.0;
        for (int s = 0; s < 5; ++s) {
            total += d.nu[s];
            for (int a = 0; a < 3; ++a) {
                CHECK(std::abs(d.sigma[s][a] - d.nu[s] * pi.probs[s][a]) <= 1e-10);
                CHECK(std::abs(d.sigma_tilde[s][a] - d.nu[s] / 3.0) <= 1e-10);
            }
        }
        CHECK(std::abs(total - 1.0) <= 1e-10);
    }
}

TEST_CASE("total_expected_reward") {
    TabularMdp mdp = two_state_chain(0.5);
    TabularPolicy pi = TabularPolicy::uniform(2, 2);
    SUBCASE("point mass picks out one value") {
        CHECK(total_expected_reward(mdp, pi, {1.0, 0.0}) == doctest::Approx(1.0).epsilon(1e-12));
    }
    SUBCASE("hand dot product on the chain") {
        CHECK(total_expected_reward(mdp, pi, {0.5, 0.5}) == doctest::Approx(1.5).epsilon(1e-12));
    }
    SUBCASE("uniform weight of a constant value vector") {
        // absorbing everywhere with reward 1: v = 1/(1-gamma) in both states
        std::vector<double> trans = {1, 0, 1, 0, 0, 1, 0, 1};
        TabularMdp c(2, 2, std::move(trans), {1, 1, 1, 1}, 0.5, {0.5, 0.5});
        CHECK(total_expected_reward(c, pi, {0.5, 0.5}) == doctest::Approx(2.0).epsilon(1e-12));
    }
}

TEST_CASE("performance-difference identity holds at 1e-8") {
    VerifyResult r = verify_performance_difference(11, 200);
    INFO(r.detail);
    CHECK(r.pass);
}

TEST_CASE("mdp text round-trip") {
    TabularMdp mdp = random_mdp(4, 3, 0.93, 55);
    std::stringstream ss;
    save_mdp(ss, mdp);
    TabularMdp back = load_mdp(ss);
    REQUIRE(back.n_states == mdp.n_states);
    REQUIRE(back.n_actions == mdp.n_actions);
    CHECK(back.gamma == mdp.gamma);
    CHECK(back.r_max == mdp.r_max);
    for (size_t i = 0; i < mdp.transition.size(); ++i)
        CHECK(std::abs(back.transition[i] - mdp.transition[i]) <= 1e-12);
    for (size_t i = 0; i < mdp.reward.size(); ++i)
        CHECK(std::abs(back.reward[i] - mdp.reward[i]) <= 1e-12);
}

TEST_CASE("mdp file round-trip and missing-file error") {
    TabularMdp mdp = random_mdp(3, 2, 0.9, 77);
    std::string path = "test_mdp_roundtrip.mdp";
    save_mdp_file(path, mdp);
    TabularMdp back = load_mdp_file(path);
    CHECK(back.transition == mdp.transition);
    CHECK(back.reward == mdp.reward);
    std::remove(path.c_str());
    CHECK_THROWS_AS(load_mdp_file("does_not_exist.mdp"), std::runtime_error);
}

TEST_CASE("construction rejects invalid inputs") {
    CHECK_THROWS_AS(TabularMdp(1, 1, {0.5}, {0.0}, 0.9, {1.0}), std::invalid_argument);
    CHECK_THROWS_AS(TabularMdp(1, 1, {1.0}, {2.0}, 0.9, {1.0}), std::invalid_argument);  // r > r_max
    CHECK_THROWS_AS(TabularMdp(1, 1, {1.0}, {0.5}, 1.0, {1.0}), std::invalid_argument);  // gamma
    CHECK_THROWS_AS(TabularMdp(1, 1, {1.0}, {0.5}, 0.9, {0.5}), std::invalid_argument);  // mu
    CHECK_THROWS_AS(TabularMdp(2, 1, {1, 0, -0.1, 1.1}, {0, 0}, 0.9, {1, 0}), std::invalid_argument);
}
