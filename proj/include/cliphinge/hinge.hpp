#pragma once

#include "cliphinge/mdp.hpp"

#include <vector>

namespace cliphinge {

/// The scalar compared against the margin inside the hinge loss.
enum class ClassifierKind { ratio, subtraction, log, root };

/// How a batch item's weight is formed from its sample_weight and advantage.
enum class WeightMode { abs_advantage, unit };

struct ClassifierSpec {
    ClassifierKind kind = ClassifierKind::ratio;
    double epsilon = 0.3;  // margin / clipping range, > 0
    WeightMode weight_mode = WeightMode::abs_advantage;
};

/// One (state, action) item of a batch row. Zero advantage means the item is
/// skipped everywhere (callers threshold near-zero advantages to exactly 0).
struct ActionSample {
    int action = 0;
    double advantage = 0.0;
    double old_prob = 1.0;       // pi_t(a|s), must be > 0
    double sample_weight = 1.0;  // >= 0
};

/// A batch groups items by state; states are distinct across rows and a row
/// may cover any subset of the actions. An action repeated within a row is
/// allowed (the weights add, de-duplication is the caller's policy) but the
/// repeats must agree on the advantage.
struct BatchRow {
    int state = 0;
    std::vector<ActionSample> actions;
};

struct BatchSample {
    std::vector<BatchRow> rows;
    void validate(int n_actions) const;  // distinct states, old_prob > 0
};

inline double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

/// max{0, margin - label * classifier_value}; label in {-1, +1}.
double hinge_loss(int label, double classifier_value, double margin);

/// ratio: new/old - 1; subtraction: new - old; log: ln(new) - ln(old);
/// root: sqrt(new/old) - 1. Domain error at new_prob = 0 for ratio/log/root.
double classifier_value(const ClassifierSpec& spec, double new_prob, double old_prob);

/// Item weight under the spec's weight mode.
double item_weight(const ClassifierSpec& spec, const ActionSample& item);

/// Weighted sum over batch items of weight * hinge(sgn(adv), classifier, eps).
double generalized_loss(const ClassifierSpec& spec, const BatchSample& batch,
                        const TabularPolicy& candidate);

/// Classic clipped surrogate (ratio kind only):
/// weighted sum of min{rho*adv, clip(rho, 1-eps, 1+eps)*adv}.
double clipped_surrogate(const ClassifierSpec& spec, const BatchSample& batch,
                         const TabularPolicy& candidate);

/// Per-item partial derivative of the weighted hinge term w.r.t. the candidate
/// probability theta_tilde. Zero when the advantage is zero or the indicator
/// 1{classifier * sgn(adv) < eps} is inactive (the exact kink counts as
/// clipped). Base slopes: ratio sgn/old, subtraction sgn, log sgn/theta,
/// root sgn/(2 sqrt(theta*old)).
double subgradient(const ClassifierSpec& spec, const ActionSample& item, double theta_tilde);

/// Per-classifier batch weighting that makes the gradients take their
/// simplest form: ratio uses weight |A|*pi_t(a|s) (g = -A * indicator),
/// subtraction |A| (g = -A * indicator), log and root unit weights. Under
/// it the accumulated C_t lands in [eta, K eta] for ratio and subtraction.
ClassifierSpec canonical_spec(ClassifierKind kind, double epsilon);
double canonical_sample_weight(ClassifierKind kind, double old_prob);

}  // namespace cliphinge
