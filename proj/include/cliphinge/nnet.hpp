#pragma once

#include <cstdint>
#include <iosfwd>
#include <random>
#include <string>
#include <vector>

namespace cliphinge {

/// Two-layer ReLU network u(x) = (1/sqrt(m)) sum_i b_i relu(alpha_i . x) with
/// frozen output signs and trained input weights confined to the l2-ball of
/// the given radius around the initialization snapshot.
struct TwoLayerNet {
    int width = 0;      // m
    int input_dim = 0;  // d
    double radius = 10.0;
    std::vector<double> signs;   // m entries in {-1, +1}, fixed after init
    std::vector<double> alpha0;  // m*d row-major snapshot
    std::vector<double> alpha;   // m*d trained weights

    double* row(int i) { return alpha.data() + static_cast<size_t>(i) * input_dim; }
    const double* row(int i) const { return alpha.data() + static_cast<size_t>(i) * input_dim; }
    double displacement_norm() const;
};

/// b_i ~ Unif{-1,+1}, alpha0 rows ~ N(0, I_d / d), alpha = alpha0.
TwoLayerNet init_net(int width, int input_dim, double radius, std::mt19937_64& rng);

double forward(const TwoLayerNet& net, const std::vector<double>& x);

/// d u / d alpha_i = (b_i / sqrt(m)) 1{alpha_i . x > 0} x; returned row-major.
std::vector<double> grad_alpha(const TwoLayerNet& net, const std::vector<double>& x);

/// Radial projection onto {alpha : ||alpha - alpha0||_2 <= radius}. Idempotent.
void project(TwoLayerNet& net);

/// Unit-norm embedding one-hot(state) (+) one-hot(action), scaled by 1/sqrt(2).
struct FeatureMap {
    int n_states = 0;
    int n_actions = 0;
    int dim() const { return n_states + n_actions; }
    void embed(int s, int a, std::vector<double>& out) const;
    std::vector<double> embed(int s, int a) const;
};

/// Text checkpoints (hexfloat), bit-exact round-trip.
void save_net(std::ostream& os, const TwoLayerNet& net);
TwoLayerNet load_net(std::istream& is);

}  // namespace cliphinge
