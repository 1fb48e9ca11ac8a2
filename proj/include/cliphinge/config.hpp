#pragma once

#include "cliphinge/envs.hpp"
#include "cliphinge/metrics.hpp"
#include "cliphinge/neural.hpp"
#include "cliphinge/tabular.hpp"

#include <stdexcept>
#include <string>
#include <vector>

namespace cliphinge {

/// Raised on malformed or inconsistent configuration; the CLI maps it to exit 2.
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct ExperimentConfig {
    std::string mode = "tabular";  // tabular | neural | verify
    EnvSpec env;
    TabularRunConfig tabular;
    NeuralRunConfig neural;
    std::string out = "metrics.csv";
    MetricsFormat format = MetricsFormat::csv;
    std::uint64_t seed = 0;
    std::string sweep_param;            // "T" or "epsilon"; empty when unused
    std::vector<double> sweep_values;

    void validate() const;  // throws ConfigError
    /// Fully resolved "key = value" lines, echoed into every output header.
    std::vector<std::string> header_lines() const;
};

/// Key/value sections: [experiment], [env], [tabular], [neural], [sweep].
/// '#' starts a comment. Unknown keys are errors.
ExperimentConfig parse_config_text(const std::string& text);
ExperimentConfig parse_config_file(const std::string& path);

ClassifierKind parse_classifier(const std::string& name);
const char* classifier_name(ClassifierKind kind);

}  // namespace cliphinge
