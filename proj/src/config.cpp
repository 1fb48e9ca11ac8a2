#include "cliphinge/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace cliphinge {

namespace {

std::string trim(const std::string& s) {
    size_t b = s.find_first_not_of(" \t\r");
    if (b == std::string::npos)
        return "";
    size_t e = s.find_last_not_of(" \t\r");
    return s.substr(b, e - b + 1);
}

long to_int(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        long out = std::stol(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument("");
        return out;
    } catch (...) {
        throw ConfigError("config: expected integer for '" + key + "', got '" + v + "'");
    }
}

double to_double(const std::string& key, const std::string& v) {
    try {
        size_t pos = 0;
        double out = std::stod(v, &pos);
        if (pos != v.size())
            throw std::invalid_argument("");
        return out;
    } catch (...) {
        throw ConfigError("config: expected number for '" + key + "', got '" + v + "'");
    }
}

}  // namespace

ClassifierKind parse_classifier(const std::string& name) {
    if (name == "ratio") return ClassifierKind::ratio;
    if (name == "subtraction" || name == "sub") return ClassifierKind::subtraction;
    if (name == "log") return ClassifierKind::log;
    if (name == "root") return ClassifierKind::root;
    throw ConfigError("config: unknown classifier '" + name + "'");
}

const char* classifier_name(ClassifierKind kind) {
    switch (kind) {
        case ClassifierKind::ratio: return "ratio";
        case ClassifierKind::subtraction: return "subtraction";
        case ClassifierKind::log: return "log";
        case ClassifierKind::root: return "root";
    }
    return "?";
}

ExperimentConfig parse_config_text(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line, section;
    int lineno = 0;
    while (std::getline(is, line)) {
        ++lineno;
        size_t hash = line.find('#');
        if (hash != std::string::npos)
            line = line.substr(0, hash);
        line = trim(line);
        if (line.empty())
            continue;
        if (line.front() == '[') {
            if (line.back() != ']')
                throw ConfigError("config: malformed section at line " + std::to_string(lineno));
            section = trim(line.substr(1, line.size() - 2));
            continue;
        }
        size_t eq = line.find('=');
        if (eq == std::string::npos)
            throw ConfigError("config: expected 'key = value' at line " + std::to_string(lineno));
        std::string key = trim(line.substr(0, eq));
        std::string val = trim(line.substr(eq + 1));
        std::string qual = section.empty() ? key : section + "." + key;

        if (qual == "experiment.mode") cfg.mode = val;
        else if (qual == "experiment.seed") cfg.seed = static_cast<std::uint64_t>(to_int(qual, val));
        else if (qual == "experiment.out") cfg.out = val;
        else if (qual == "experiment.format") {
            if (val == "csv") cfg.format = MetricsFormat::csv;
            else if (val == "jsonl") cfg.format = MetricsFormat::jsonl;
            else throw ConfigError("config: format must be csv or jsonl");
        }
        else if (qual == "env.kind") {
            if (val == "chain") cfg.env.kind = EnvKind::chain;
            else if (val == "gridworld") cfg.env.kind = EnvKind::gridworld;
            else if (val == "random") cfg.env.kind = EnvKind::random;
            else throw ConfigError("config: unknown env kind '" + val + "'");
        }
        else if (qual == "env.size") cfg.env.size = static_cast<int>(to_int(qual, val));
        else if (qual == "env.gamma") cfg.env.gamma = to_double(qual, val);
        else if (qual == "env.slip") cfg.env.slip = to_double(qual, val);
        else if (qual == "env.n_states") cfg.env.n_states = static_cast<int>(to_int(qual, val));
        else if (qual == "env.n_actions") cfg.env.n_actions = static_cast<int>(to_int(qual, val));
        else if (qual == "env.seed") cfg.env.seed = static_cast<std::uint64_t>(to_int(qual, val));
        else if (qual == "tabular.classifier") cfg.tabular.classifier.kind = parse_classifier(val);
        else if (qual == "tabular.epsilon") cfg.tabular.classifier.epsilon = to_double(qual, val);
        else if (qual == "tabular.eta") cfg.tabular.emda.step_size = to_double(qual, val);
        else if (qual == "tabular.emda_iters") cfg.tabular.emda.n_iters = static_cast<int>(to_int(qual, val));
        else if (qual == "tabular.outer_iters") cfg.tabular.n_outer_iters = static_cast<int>(to_int(qual, val));
        else if (qual == "tabular.batch_scheme") {
            if (val == "all_pairs") cfg.tabular.batch_scheme = BatchScheme::all_pairs;
            else if (val == "trajectory") cfg.tabular.batch_scheme = BatchScheme::trajectory_sampled;
            else throw ConfigError("config: batch_scheme must be all_pairs or trajectory");
        }
        else if (qual == "tabular.trajectories_per_iter")
            cfg.tabular.trajectories_per_iter = static_cast<int>(to_int(qual, val));
        else if (qual == "tabular.horizon") cfg.tabular.horizon = static_cast<int>(to_int(qual, val));
        else if (qual == "neural.T") cfg.neural.T = static_cast<int>(to_int(qual, val));
        else if (qual == "neural.alpha_exp") cfg.neural.alpha_exp = to_double(qual, val);
        else if (qual == "neural.K") cfg.neural.K = static_cast<int>(to_int(qual, val));
        else if (qual == "neural.eta") cfg.neural.eta = to_double(qual, val);
        else if (qual == "neural.m_f") cfg.neural.m_f = static_cast<int>(to_int(qual, val));
        else if (qual == "neural.m_q") cfg.neural.m_q = static_cast<int>(to_int(qual, val));
        else if (qual == "neural.t_upd") cfg.neural.t_upd = static_cast<int>(to_int(qual, val));
        else if (qual == "neural.classifier") cfg.neural.classifier = parse_classifier(val);
        else if (qual == "neural.epsilon") cfg.neural.epsilon = to_double(qual, val);
        else if (qual == "neural.r_f") cfg.neural.r_f = to_double(qual, val);
        else if (qual == "neural.r_q") cfg.neural.r_q = to_double(qual, val);
        else if (qual == "sweep.param") cfg.sweep_param = val;
        else if (qual == "sweep.values") {
            std::stringstream ss(val);
            std::string cell;
            while (std::getline(ss, cell, ','))
                cfg.sweep_values.push_back(to_double("sweep.values", trim(cell)));
        }
        else throw ConfigError("config: unknown key '" + qual + "'");
    }
    return cfg;
}

ExperimentConfig parse_config_file(const std::string& path) {
    std::ifstream is(path);
    if (!is)
        throw ConfigError("config: cannot open " + path);
    std::stringstream ss;
    ss << is.rdbuf();
    return parse_config_text(ss.str());
}

void ExperimentConfig::validate() const {
    if (mode != "tabular" && mode != "neural" && mode != "verify")
        throw ConfigError("config: mode must be tabular, neural or verify");
    try {
        build_env(env);  // size/slip validation
        if (mode == "tabular")
            tabular.validate();
        if (mode == "neural")
            neural.validate();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    if (!sweep_param.empty()) {
        if (sweep_param != "T" && sweep_param != "epsilon")
            throw ConfigError("config: sweep.param must be T or epsilon");
        if (sweep_values.empty())
            throw ConfigError("config: sweep.values must be nonempty");
        if (sweep_param == "T" && mode != "neural")
            throw ConfigError("config: sweep over T requires neural mode");
    }
}

std::vector<std::string> ExperimentConfig::header_lines() const {
    std::vector<std::string> h;
    auto add = [&](const std::string& k, const std::string& v) { h.push_back(k + " = " + v); };
    add("mode", mode);
    add("seed", std::to_string(seed));
    switch (env.kind) {
        case EnvKind::chain: add("env.kind", "chain"); break;
        case EnvKind::gridworld: add("env.kind", "gridworld"); break;
        case EnvKind::random: add("env.kind", "random"); break;
    }
    add("env.size", std::to_string(env.size));
    add("env.gamma", format_double(env.gamma));
    add("env.slip", format_double(env.slip));
    add("env.n_states", std::to_string(env.n_states));
    add("env.n_actions", std::to_string(env.n_actions));
    add("env.seed", std::to_string(env.seed));
    if (mode == "tabular") {
        add("tabular.classifier", classifier_name(tabular.classifier.kind));
        add("tabular.epsilon", format_double(tabular.classifier.epsilon));
        add("tabular.eta", format_double(tabular.emda.step_size));
        add("tabular.emda_iters", std::to_string(tabular.emda.n_iters));
        add("tabular.outer_iters", std::to_string(tabular.n_outer_iters));
        add("tabular.batch_scheme",
            tabular.batch_scheme == BatchScheme::all_pairs ? "all_pairs" : "trajectory");
        add("tabular.trajectories_per_iter", std::to_string(tabular.trajectories_per_iter));
        add("tabular.horizon", std::to_string(tabular.horizon));
    }
    if (mode == "neural") {
        add("neural.T", std::to_string(neural.T));
        add("neural.alpha_exp", format_double(neural.alpha_exp));
        add("neural.K", std::to_string(neural.K));
        add("neural.eta", format_double(neural.effective_eta()));
        add("neural.m_f", std::to_string(neural.m_f));
        add("neural.m_q", std::to_string(neural.m_q));
        add("neural.t_upd", std::to_string(neural.t_upd));
        add("neural.classifier", classifier_name(neural.classifier));
        add("neural.epsilon", format_double(neural.epsilon));
        add("neural.r_f", format_double(neural.r_f));
        add("neural.r_q", format_double(neural.r_q));
    }
    return h;
}

}  // namespace cliphinge
