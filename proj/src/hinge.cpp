#include "cliphinge/hinge.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>

namespace cliphinge {

void BatchSample::validate(int n_actions) const {
    std::set<int> states;
    for (const auto& row : rows) {
        if (!states.insert(row.state).second)
            throw std::invalid_argument("BatchSample: two rows share a state");
        // repeated actions are allowed; their contributions sum
        for (const auto& it : row.actions) {
            if (it.action < 0 || it.action >= n_actions)
                throw std::invalid_argument("BatchSample: action out of range");
            if (!(it.old_prob > 0.0))
                throw std::invalid_argument("BatchSample: old_prob must be positive");
            if (it.sample_weight < 0.0)
                throw std::invalid_argument("BatchSample: negative sample weight");
        }
    }
}

double hinge_loss(int label, double value, double margin) {
    if (label != 1 && label != -1)
        throw std::invalid_argument("hinge_loss: label must be +1 or -1");
    if (!(margin > 0.0))
        throw std::invalid_argument("hinge_loss: margin must be positive");
    return std::max(0.0, margin - label * value);
}

double classifier_value(const ClassifierSpec& spec, double new_prob, double old_prob) {
    if (!(old_prob > 0.0))
        throw std::domain_error("classifier_value: old_prob must be positive");
    switch (spec.kind) {
        case ClassifierKind::ratio:
            if (new_prob <= 0.0)
                throw std::domain_error("classifier_value: ratio needs new_prob > 0");
            return new_prob / old_prob - 1.0;
        case ClassifierKind::subtraction:
            return new_prob - old_prob;
        case ClassifierKind::log:
            if (new_prob <= 0.0)
                throw std::domain_error("classifier_value: log needs new_prob > 0");
            return std::log(new_prob) - std::log(old_prob);
        case ClassifierKind::root:
            if (new_prob <= 0.0)
                throw std::domain_error("classifier_value: root needs new_prob > 0");
            return std::sqrt(new_prob / old_prob) - 1.0;
    }
    throw std::logic_error("classifier_value: unknown kind");
}

double item_weight(const ClassifierSpec& spec, const ActionSample& item) {
    return spec.weight_mode == WeightMode::abs_advantage
               ? item.sample_weight * std::abs(item.advantage)
               : item.sample_weight;
}

double generalized_loss(const ClassifierSpec& spec, const BatchSample& batch,
                        const TabularPolicy& candidate) {
    double acc = 0.0;
    for (const auto& row : batch.rows)
        for (const auto& it : row.actions) {
            if (it.advantage == 0.0)
                continue;
            int label = it.advantage > 0.0 ? 1 : -1;
            double f = classifier_value(spec, candidate.probs[row.state][it.action], it.old_prob);
            acc += item_weight(spec, it) * hinge_loss(label, f, spec.epsilon);
        }
    return acc;
}

double clipped_surrogate(const ClassifierSpec& spec, const BatchSample& batch,
                         const TabularPolicy& candidate) {
    if (spec.kind != ClassifierKind::ratio)
        throw std::invalid_argument("clipped_surrogate: defined for the ratio classifier");
    double acc = 0.0;
    for (const auto& row : batch.rows)
        for (const auto& it : row.actions) {
            double rho = candidate.probs[row.state][it.action] / it.old_prob;
            double clipped = std::clamp(rho, 1.0 - spec.epsilon, 1.0 + spec.epsilon);
            acc += it.sample_weight * std::min(rho * it.advantage, clipped * it.advantage);
        }
    return acc;
}

double subgradient(const ClassifierSpec& spec, const ActionSample& item, double theta_tilde) {
    if (!(theta_tilde > 0.0))
        throw std::domain_error("subgradient: theta_tilde must be positive");
    if (item.advantage == 0.0)
        return 0.0;
    double s = sgn(item.advantage);
    if (classifier_value(spec, theta_tilde, item.old_prob) * s >= spec.epsilon)
        return 0.0;  // clipped branch, including the exact kink
    double slope = 0.0;
    switch (spec.kind) {
        case ClassifierKind::ratio: slope = s / item.old_prob; break;
        case ClassifierKind::subtraction: slope = s; break;
        case ClassifierKind::log: slope = s / theta_tilde; break;
        case ClassifierKind::root: slope = s / (2.0 * std::sqrt(theta_tilde * item.old_prob)); break;
    }
    return -item_weight(spec, item) * slope;
}

ClassifierSpec canonical_spec(ClassifierKind kind, double epsilon) {
    ClassifierSpec spec;
    spec.kind = kind;
    spec.epsilon = epsilon;
    spec.weight_mode = (kind == ClassifierKind::ratio || kind == ClassifierKind::subtraction)
                           ? WeightMode::abs_advantage
                           : WeightMode::unit;
    return spec;
}

double canonical_sample_weight(ClassifierKind kind, double old_prob) {
    return kind == ClassifierKind::ratio ? old_prob : 1.0;
}

}  // namespace cliphinge
