#pragma once

#include "cliphinge/mdp.hpp"

#include <cstdint>

namespace cliphinge {

enum class EnvKind { chain, gridworld, random };

struct EnvSpec {
    EnvKind kind = EnvKind::chain;
    int size = 5;          // chain length / gridworld side
    double gamma = 0.9;
    double slip = 0.0;     // gridworld: probability of a uniformly random move
    int n_states = 5;      // random kind
    int n_actions = 3;     // random kind
    std::uint64_t seed = 0;
};

/// chain: `size` states on a line, actions left/right, absorbing right
/// terminal whose self-loop pays 1, mu concentrated on the left end.
/// gridworld: size x size cells, 4 actions, reward 1 on entering the
/// absorbing bottom-right goal, uniform mu over non-goal cells.
/// random: Dirichlet(1) transition rows, Unif[0,1] rewards, uniform mu.
TabularMdp build_env(const EnvSpec& spec);

}  // namespace cliphinge
