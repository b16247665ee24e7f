#pragma once

// Experiment configuration: a strict JSON schema (unknown keys rejected)
// resolved into the library's native structs. Scalar parameters of the
// population DGP can vary by region and cohort through small "field"
// expressions: base value, per-region effects, cohort trends, and seeded
// noise.

#include <json.hpp>

#include <cmath>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edumob/coresidence.hpp"
#include "edumob/model.hpp"
#include "edumob/panel.hpp"
#include "edumob/population.hpp"
#include "edumob/regions.hpp"
#include "edumob/rng.hpp"

namespace edumob {

using json = nlohmann::ordered_json;

// Configuration/usage problems exit with code 1; runtime/data problems with 2.
struct ValidationError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace cfg_detail {

inline void require_keys(const json& obj, const std::set<std::string>& allowed,
                         const std::string& context) {
    if (!obj.is_object()) {
        throw ValidationError(context + ": expected an object");
    }
    for (const auto& [key, _] : obj.items()) {
        if (!allowed.count(key)) {
            throw ValidationError(context + ": unknown key \"" + key + "\"");
        }
    }
}

inline double get_number(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key) || !obj[key].is_number()) {
        throw ValidationError(context + ": missing or non-numeric \"" + key + "\"");
    }
    return obj[key].get<double>();
}

inline double get_number_or(const json& obj, const std::string& key, double fallback) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_number()) {
        throw ValidationError("\"" + key + "\" must be a number");
    }
    return obj[key].get<double>();
}

inline int get_int(const json& obj, const std::string& key, const std::string& context) {
    if (!obj.contains(key) || !obj[key].is_number_integer()) {
        throw ValidationError(context + ": missing or non-integer \"" + key + "\"");
    }
    return obj[key].get<int>();
}

inline bool get_bool_or(const json& obj, const std::string& key, bool fallback,
                        const std::string& context) {
    if (!obj.contains(key)) return fallback;
    if (!obj[key].is_boolean()) {
        throw ValidationError(context + ": \"" + key + "\" must be a boolean");
    }
    return obj[key].get<bool>();
}

inline std::string get_string(const json& obj, const std::string& key,
                              const std::string& context) {
    if (!obj.contains(key) || !obj[key].is_string()) {
        throw ValidationError(context + ": missing or non-string \"" + key + "\"");
    }
    return obj[key].get<std::string>();
}

}  // namespace cfg_detail

// Scalar DGP parameter that may vary by region and cohort.
struct ParamField {
    double base = 0.0;
    double by_region_sd = 0.0;                  // seeded normal region effect
    std::map<std::string, double> by_region;    // explicit additive offsets
    double cohort_slope = 0.0;
    int cohort_ref = 0;
    double noise_sd = 0.0;                      // seeded per-(region, cohort) noise
    std::string field_name;                     // stream separation between fields

    static ParamField parse(const json& j, const std::string& name, const std::string& context) {
        ParamField f;
        f.field_name = name;
        if (j.is_number()) {
            f.base = j.get<double>();
            return f;
        }
        cfg_detail::require_keys(
            j, {"base", "by_region_sd", "by_region", "cohort_slope", "cohort_ref", "noise_sd"},
            context);
        f.base = cfg_detail::get_number(j, "base", context);
        f.by_region_sd = cfg_detail::get_number_or(j, "by_region_sd", 0.0);
        f.cohort_slope = cfg_detail::get_number_or(j, "cohort_slope", 0.0);
        f.cohort_ref = static_cast<int>(cfg_detail::get_number_or(j, "cohort_ref", 0.0));
        f.noise_sd = cfg_detail::get_number_or(j, "noise_sd", 0.0);
        if (j.contains("by_region")) {
            for (const auto& [region, v] : j["by_region"].items()) {
                if (!v.is_number()) {
                    throw ValidationError(context + ".by_region: offsets must be numbers");
                }
                f.by_region[region] = v.get<double>();
            }
        }
        return f;
    }

    double resolve(std::string_view region, int cohort, std::uint64_t seed) const {
        double v = base;
        if (by_region_sd != 0.0) {
            auto rng = derive_engine(seed, "field_region", field_name, region);
            std::normal_distribution<double> n(0.0, by_region_sd);
            v += n(rng);
        }
        auto it = by_region.find(std::string(region));
        if (it != by_region.end()) v += it->second;
        v += cohort_slope * static_cast<double>(cohort - cohort_ref);
        if (noise_sd != 0.0) {
            auto rng = derive_engine(seed, "field_noise", field_name, region, cohort);
            std::normal_distribution<double> n(0.0, noise_sd);
            v += n(rng);
        }
        return v;
    }
};

struct ModelSection {
    ModelParams params{0.6, 0.5, 1.0, 10.0};
    FeedbackSpec feedback = FeedbackSpec::constant(0.5);
    int generations = 1;
    DynamicsOptions dynamics;
    std::optional<std::vector<double>> lambda_path;
};

struct PopulationSection {
    int n_per_region_cohort = 0;
    std::vector<std::string> regions;
    int cohort_from = 0, cohort_to = 0;
    ParamField lambda, rho, sigma_eps2, parent_mean, parent_var;
    std::optional<ParamField> child_rho;
    bool rho_from_feedback = false;
    bool from_dynamics = false;
    int couples_pool_factor = 1;
    LeaveHomeModel leave_home = LeaveHomeModel::spanish_like();
    CompletionProfile completion;
};

struct EstimateSection {
    std::vector<std::string> rules;  // empty = all observation rules
    bool by_sex = false;
    int spousal_age = 35;
    bool max_parent = false;  // use the better-educated parent instead of the father
};

struct PanelSection {
    PeriodScheme scheme;
    PanelRules rules;
    std::string observation;  // name of the observation rule framing the panel
};

struct BiasLabSection {
    std::vector<int> ages;
    int benchmark_age = 30;
    std::vector<BiasLabWindow> windows;
    std::vector<int> hilger_ages;
    int hilger_proxy_age = 16;
    int hilger_year_from = 0, hilger_year_to = -1;
};

struct TargetCheck {
    std::string name;
    std::string file;
    std::map<std::string, std::string> where;  // column -> required cell text
    std::string column;
    double min = 0.0, max = 0.0;
};

struct ExperimentConfig {
    std::uint64_t seed = 0;
    std::string output_dir = "out";
    std::optional<ModelSection> model;
    std::optional<PopulationSection> population;
    std::vector<ObservationRule> observation;
    EstimateSection estimate;
    std::optional<PanelSection> panel;
    std::vector<RegressionSpec> regressions;
    bool gatsby_summary_enabled = false;
    std::optional<BiasLabSection> bias_lab;
    std::vector<TargetCheck> targets;
    std::string raw_text;  // exact config bytes, digested for provenance

    const ObservationRule& rule_by_name(std::string_view name) const {
        for (const auto& r : observation) {
            if (r.name == name) return r;
        }
        throw ValidationError("observation rule \"" + std::string(name) + "\" is not defined");
    }

    // Runs the dynamics the population section follows: one generation per
    // cohort plus one more for the children's own sorting.
    std::vector<GenerationMoments> dynamics_for_population() const {
        if (!model || !population) {
            throw ValidationError("from_dynamics requires both model and population sections");
        }
        const int n_cohorts = population->cohort_to - population->cohort_from + 1;
        const std::size_t need = static_cast<std::size_t>(n_cohorts) + 1;
        std::vector<double> lambdas;
        if (model->lambda_path) {
            lambdas = *model->lambda_path;
        }
        while (lambdas.size() < need) {
            lambdas.push_back(lambdas.empty() ? model->params.lambda : lambdas.back());
        }
        return simulate_dynamics_path(lambdas, model->params, model->feedback, model->dynamics);
    }

    PopulationConfig population_config(int threads) const {
        if (!population) {
            throw ValidationError("config has no population section");
        }
        const PopulationSection& p = *population;
        PopulationConfig out;
        out.n_per_region_cohort = p.n_per_region_cohort;
        out.regions = p.regions;
        out.cohort_from = p.cohort_from;
        out.cohort_to = p.cohort_to;
        out.leave_home = p.leave_home;
        out.completion = p.completion;
        out.seed = seed;
        out.threads = threads;
        out.couples_pool_factor = p.couples_pool_factor;

        const std::uint64_t s = seed;
        if (p.from_dynamics) {
            auto moments = dynamics_for_population();
            const int c0 = p.cohort_from;
            const double sigma_eps2 = p.sigma_eps2.base;
            out.block_spec = [moments, c0, sigma_eps2](std::string_view, int cohort) {
                const std::size_t i = static_cast<std::size_t>(cohort - c0);
                BlockSpec b;
                b.model.lambda = 2.0 * moments[i].slope_to_child / (1.0 + moments[i].rho_used);
                b.model.rho = moments[i].rho_used;
                b.model.sigma_eps2 = sigma_eps2;
                b.model.mu = moments[i].mean;
                b.parent_var = moments[i].variance;
                b.child_rho = moments[i + 1].rho_used;
                return b;
            };
            return out;
        }

        FeedbackSpec feedback =
            model ? model->feedback : FeedbackSpec::constant(p.rho.base);
        const PopulationSection psec = p;
        const bool tie_rho = p.rho_from_feedback;
        out.block_spec = [psec, s, feedback, tie_rho](std::string_view region, int cohort) {
            BlockSpec b;
            b.parent_var = std::max(psec.parent_var.resolve(region, cohort, s), 1e-6);
            b.model.lambda =
                std::clamp(psec.lambda.resolve(region, cohort, s), 1e-3, 1.0 - 1e-3);
            double rho;
            if (tie_rho) {
                rho = feedback.rho_at(b.parent_var) + psec.rho.resolve(region, cohort, s) -
                      psec.rho.base;
            } else {
                rho = psec.rho.resolve(region, cohort, s);
            }
            b.model.rho = std::clamp(rho, 0.0, 1.0);
            b.model.sigma_eps2 = std::max(psec.sigma_eps2.resolve(region, cohort, s), 0.0);
            b.model.mu = psec.parent_mean.resolve(region, cohort, s);
            if (psec.child_rho) {
                b.child_rho = std::clamp(psec.child_rho->resolve(region, cohort, s), 0.0, 1.0);
            }
            return b;
        };
        return out;
    }
};

namespace cfg_detail {

inline FeedbackSpec parse_feedback(const json& j, const std::string& context) {
    require_keys(j, {"kind", "level", "intercept", "slope", "max_rho", "steepness", "midpoint"},
                 context);
    const std::string kind = get_string(j, "kind", context);
    FeedbackSpec f;
    if (kind == "constant") {
        f = FeedbackSpec::constant(get_number(j, "level", context));
    } else if (kind == "linear_clipped") {
        f = FeedbackSpec::linear(get_number(j, "intercept", context),
                                 get_number(j, "slope", context));
    } else if (kind == "logistic") {
        f = FeedbackSpec::logistic(get_number(j, "max_rho", context),
                                   get_number(j, "steepness", context),
                                   get_number(j, "midpoint", context));
    } else {
        throw ValidationError(context + ": unknown feedback kind \"" + kind + "\"");
    }
    f.validate();
    return f;
}

inline ModelSection parse_model(const json& j) {
    require_keys(j,
                 {"lambda", "rho", "sigma_eps2", "mu", "generations", "sigma0_2", "mean_drift",
                  "lambda_path", "feedback"},
                 "model");
    ModelSection m;
    m.params.lambda = get_number(j, "lambda", "model");
    m.params.rho = get_number(j, "rho", "model");
    m.params.sigma_eps2 = get_number(j, "sigma_eps2", "model");
    m.params.mu = get_number(j, "mu", "model");
    try {
        m.params.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("model: ") + e.what());
    }
    m.generations = static_cast<int>(get_number_or(j, "generations", 1.0));
    if (m.generations < 1) {
        throw ValidationError("model: generations must be >= 1");
    }
    m.dynamics.sigma0_2 = get_number_or(j, "sigma0_2", 1.0);
    if (j.contains("mean_drift")) {
        m.dynamics.hold_mean_fixed = false;
        m.dynamics.mean_drift = j["mean_drift"].get<double>();
    }
    if (j.contains("lambda_path")) {
        if (!j["lambda_path"].is_array() || j["lambda_path"].empty()) {
            throw ValidationError("model: lambda_path must be a non-empty array");
        }
        std::vector<double> path;
        for (const auto& v : j["lambda_path"]) {
            if (!v.is_number()) throw ValidationError("model: lambda_path entries must be numbers");
            path.push_back(v.get<double>());
        }
        m.lambda_path = std::move(path);
    }
    if (j.contains("feedback")) {
        try {
            m.feedback = parse_feedback(j["feedback"], "model.feedback");
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("model.feedback: ") + e.what());
        }
    } else {
        m.feedback = FeedbackSpec::constant(m.params.rho);
    }
    return m;
}

inline PopulationSection parse_population(const json& j) {
    require_keys(j,
                 {"n_per_region_cohort", "regions", "cohorts", "lambda", "rho", "sigma_eps2",
                  "parent_mean", "parent_var", "child_rho", "rho_from_feedback", "from_dynamics",
                  "couples_pool_factor", "leave_home", "completion_ages"},
                 "population");
    PopulationSection p;
    p.n_per_region_cohort = get_int(j, "n_per_region_cohort", "population");
    p.couples_pool_factor = static_cast<int>(get_number_or(j, "couples_pool_factor", 1.0));
    if (p.couples_pool_factor < 1) {
        throw ValidationError("population: couples_pool_factor must be >= 1");
    }
    if (!j.contains("regions")) {
        throw ValidationError("population: missing \"regions\"");
    }
    if (j["regions"].is_array()) {
        for (const auto& r : j["regions"]) {
            if (!r.is_string()) throw ValidationError("population.regions: expected strings");
            p.regions.push_back(r.get<std::string>());
        }
    } else if (j["regions"].is_object()) {
        require_keys(j["regions"], {"registry_count"}, "population.regions");
        const int count = get_int(j["regions"], "registry_count", "population.regions");
        const auto& reg = RegionRegistry::bundled();
        if (count < 1 || static_cast<std::size_t>(count) > reg.size()) {
            throw ValidationError("population.regions: registry_count must lie in [1,107]");
        }
        for (int i = 0; i < count; ++i) {
            p.regions.push_back(reg.entries()[static_cast<std::size_t>(i)].id);
        }
    } else {
        throw ValidationError("population.regions: expected an array or {registry_count}");
    }
    if (!j.contains("cohorts")) {
        throw ValidationError("population: missing \"cohorts\"");
    }
    require_keys(j["cohorts"], {"from", "to"}, "population.cohorts");
    p.cohort_from = get_int(j["cohorts"], "from", "population.cohorts");
    p.cohort_to = get_int(j["cohorts"], "to", "population.cohorts");

    p.from_dynamics = get_bool_or(j, "from_dynamics", false, "population");
    p.rho_from_feedback = get_bool_or(j, "rho_from_feedback", false, "population");

    auto field = [&](const char* name, double fallback) {
        return j.contains(name) ? ParamField::parse(j[name], name, std::string("population.") + name)
                                : [&] {
                                      ParamField f;
                                      f.base = fallback;
                                      f.field_name = name;
                                      return f;
                                  }();
    };
    p.lambda = field("lambda", 0.6);
    p.rho = field("rho", 0.5);
    p.sigma_eps2 = field("sigma_eps2", 1.0);
    p.parent_mean = field("parent_mean", 10.0);
    p.parent_var = field("parent_var", 9.0);
    if (j.contains("child_rho")) {
        p.child_rho = ParamField::parse(j["child_rho"], "child_rho", "population.child_rho");
    }

    if (j.contains("leave_home")) {
        const auto& lh = j["leave_home"];
        require_keys(lh, {"hazard", "edu_gradient", "edu_ref"}, "population.leave_home");
        if (lh.contains("hazard")) {
            if (lh["hazard"].is_string()) {
                if (lh["hazard"].get<std::string>() != "spanish_like") {
                    throw ValidationError(
                        "population.leave_home.hazard: unknown named profile");
                }
                p.leave_home = LeaveHomeModel::spanish_like();
            } else {
                p.leave_home.hazard.clear();
                for (const auto& [age, h] : lh["hazard"].items()) {
                    p.leave_home.hazard[std::stoi(age)] = h.get<double>();
                }
            }
        }
        p.leave_home.edu_gradient =
            get_number_or(lh, "edu_gradient", p.leave_home.edu_gradient);
        p.leave_home.edu_ref = get_number_or(lh, "edu_ref", p.leave_home.edu_ref);
        try {
            p.leave_home.validate();
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("population.leave_home: ") + e.what());
        }
    }
    if (j.contains("completion_ages")) {
        p.completion.age_by_level.clear();
        for (const auto& [level, age] : j["completion_ages"].items()) {
            p.completion.age_by_level[std::stod(level)] = age.get<int>();
        }
        try {
            p.completion.validate();
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("population.completion_ages: ") + e.what());
        }
    }
    return p;
}

inline std::vector<ObservationRule> parse_observation(const json& j) {
    if (!j.is_array() || j.empty()) {
        throw ValidationError("observation: expected a non-empty array of rules");
    }
    std::vector<ObservationRule> rules;
    std::set<std::string> names;
    for (const auto& r : j) {
        require_keys(r, {"name", "measure_age", "coresident_only", "survey_year"}, "observation");
        ObservationRule rule;
        rule.name = get_string(r, "name", "observation");
        rule.measure_age = get_int(r, "measure_age", "observation");
        rule.coresident_only = get_bool_or(r, "coresident_only", false, "observation");
        if (r.contains("survey_year")) {
            rule.survey_year = r["survey_year"].get<int>();
        }
        try {
            rule.validate();
        } catch (const std::invalid_argument& e) {
            throw ValidationError(std::string("observation: ") + e.what());
        }
        if (!names.insert(rule.name).second) {
            throw ValidationError("observation: duplicate rule name \"" + rule.name + "\"");
        }
        rules.push_back(std::move(rule));
    }
    return rules;
}

inline PanelSection parse_panel(const json& j) {
    require_keys(j, {"periods", "stats", "min_cell_n", "min_half_n", "observation"}, "panel");
    PanelSection p;
    if (!j.contains("periods") || !j["periods"].is_array() || j["periods"].empty()) {
        throw ValidationError("panel: missing or empty \"periods\"");
    }
    for (const auto& pr : j["periods"]) {
        require_keys(pr, {"label", "from", "to"}, "panel.periods");
        p.scheme.periods.push_back({get_string(pr, "label", "panel.periods"),
                                    get_int(pr, "from", "panel.periods"),
                                    get_int(pr, "to", "panel.periods")});
    }
    try {
        p.scheme.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(std::string("panel.periods: ") + e.what());
    }
    if (j.contains("stats")) {
        p.rules.stats.clear();
        for (const auto& s : j["stats"]) {
            try {
                p.rules.stats.push_back(parse_stat_kind(s.get<std::string>()));
            } catch (const std::runtime_error& e) {
                throw ValidationError(std::string("panel.stats: ") + e.what());
            }
        }
    }
    p.rules.min_cell_n = static_cast<std::size_t>(get_number_or(j, "min_cell_n", 50.0));
    p.rules.min_half_n = static_cast<std::size_t>(get_number_or(j, "min_half_n", 25.0));
    p.observation = get_string(j, "observation", "panel");
    return p;
}

inline RegressionSpec parse_regression(const json& j) {
    require_keys(j,
                 {"name", "dependent", "regressors", "design", "estimator", "instrumented",
                  "time_fixed_effects"},
                 "regressions");
    RegressionSpec spec;
    spec.name = get_string(j, "name", "regressions");
    const std::string context = "regressions." + spec.name;
    try {
        spec.dependent = parse_stat_kind(get_string(j, "dependent", context));
        if (!j.contains("regressors") || !j["regressors"].is_array()) {
            throw ValidationError(context + ": missing \"regressors\" array");
        }
        for (const auto& r : j["regressors"]) {
            require_keys(r, {"stat", "lag"}, context + ".regressors");
            RegressorSpec rs;
            rs.stat = parse_stat_kind(get_string(r, "stat", context));
            rs.lagged = get_bool_or(r, "lag", false, context);
            spec.regressors.push_back(rs);
        }
        if (j.contains("design")) {
            const std::string d = get_string(j, "design", context);
            if (d == "levels") {
                spec.design = Design::levels;
            } else if (d == "first_difference") {
                spec.design = Design::first_difference;
            } else {
                throw ValidationError(context + ": unknown design \"" + d + "\"");
            }
        }
        if (j.contains("estimator")) {
            const std::string e = get_string(j, "estimator", context);
            if (e == "ols") {
                spec.estimator = EstimatorKind::ols;
            } else if (e == "split_iv") {
                spec.estimator = EstimatorKind::split_iv;
            } else {
                throw ValidationError(context + ": unknown estimator \"" + e + "\"");
            }
        }
        if (j.contains("instrumented")) {
            for (const auto& s : j["instrumented"]) {
                spec.instrumented.push_back(parse_stat_kind(s.get<std::string>()));
            }
        } else if (spec.estimator == EstimatorKind::split_iv) {
            for (const auto& r : spec.regressors) spec.instrumented.push_back(r.stat);
        }
        spec.time_fixed_effects = get_bool_or(j, "time_fixed_effects", true, context);
        spec.validate();
    } catch (const std::invalid_argument& e) {
        throw ValidationError(context + ": " + e.what());
    } catch (const std::runtime_error& e) {
        throw ValidationError(context + ": " + e.what());
    }
    return spec;
}

inline BiasLabSection parse_bias_lab(const json& j) {
    require_keys(j, {"ages", "benchmark_age", "windows", "hilger"}, "bias_lab");
    BiasLabSection b;
    if (!j.contains("ages") || !j["ages"].is_array() || j["ages"].empty()) {
        throw ValidationError("bias_lab: missing or empty \"ages\"");
    }
    for (const auto& a : j["ages"]) b.ages.push_back(a.get<int>());
    b.benchmark_age = get_int(j, "benchmark_age", "bias_lab");
    if (!j.contains("windows") || !j["windows"].is_array() || j["windows"].empty()) {
        throw ValidationError("bias_lab: missing or empty \"windows\"");
    }
    for (const auto& w : j["windows"]) {
        require_keys(w, {"label", "from", "to"}, "bias_lab.windows");
        b.windows.push_back({get_string(w, "label", "bias_lab.windows"),
                             get_int(w, "from", "bias_lab.windows"),
                             get_int(w, "to", "bias_lab.windows")});
    }
    if (j.contains("hilger")) {
        const auto& h = j["hilger"];
        require_keys(h, {"ages", "proxy_age", "from", "to"}, "bias_lab.hilger");
        for (const auto& a : h["ages"]) b.hilger_ages.push_back(a.get<int>());
        b.hilger_proxy_age = static_cast<int>(get_number_or(h, "proxy_age", 16.0));
        b.hilger_year_from = get_int(h, "from", "bias_lab.hilger");
        b.hilger_year_to = get_int(h, "to", "bias_lab.hilger");
    }
    return b;
}

inline TargetCheck parse_target(const json& j) {
    require_keys(j, {"name", "file", "where", "column", "min", "max"}, "targets");
    TargetCheck t;
    t.name = get_string(j, "name", "targets");
    t.file = get_string(j, "file", "targets");
    t.column = get_string(j, "column", "targets");
    t.min = get_number(j, "min", "targets." + t.name);
    t.max = get_number(j, "max", "targets." + t.name);
    if (j.contains("where")) {
        for (const auto& [col, v] : j["where"].items()) {
            t.where[col] = v.is_string() ? v.get<std::string>() : v.dump();
        }
    }
    return t;
}

}  // namespace cfg_detail

inline ExperimentConfig parse_config_text(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ValidationError(std::string("config: invalid JSON: ") + e.what());
    }
    cfg_detail::require_keys(j,
                             {"seed", "output_dir", "model", "population", "observation",
                              "estimate", "panel", "regressions", "gatsby_summary", "bias_lab",
                              "targets"},
                             "config");
    ExperimentConfig cfg;
    cfg.raw_text = text;
    if (!j.contains("seed") || !j["seed"].is_number_unsigned()) {
        throw ValidationError("config: missing unsigned \"seed\"");
    }
    cfg.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("output_dir")) {
        cfg.output_dir = cfg_detail::get_string(j, "output_dir", "config");
    }
    if (j.contains("model")) cfg.model = cfg_detail::parse_model(j["model"]);
    if (j.contains("population")) cfg.population = cfg_detail::parse_population(j["population"]);
    if (j.contains("observation")) cfg.observation = cfg_detail::parse_observation(j["observation"]);
    if (j.contains("estimate")) {
        cfg_detail::require_keys(j["estimate"], {"rules", "by_sex", "spousal_age", "max_parent"},
                                 "estimate");
        if (j["estimate"].contains("rules")) {
            for (const auto& r : j["estimate"]["rules"]) {
                cfg.estimate.rules.push_back(r.get<std::string>());
            }
        }
        cfg.estimate.by_sex = cfg_detail::get_bool_or(j["estimate"], "by_sex", false, "estimate");
        cfg.estimate.spousal_age =
            static_cast<int>(cfg_detail::get_number_or(j["estimate"], "spousal_age", 35.0));
        cfg.estimate.max_parent =
            cfg_detail::get_bool_or(j["estimate"], "max_parent", false, "estimate");
    }
    if (j.contains("panel")) cfg.panel = cfg_detail::parse_panel(j["panel"]);
    if (j.contains("regressions")) {
        if (!j["regressions"].is_array()) {
            throw ValidationError("regressions: expected an array");
        }
        std::set<std::string> names;
        for (const auto& r : j["regressions"]) {
            auto spec = cfg_detail::parse_regression(r);
            if (!names.insert(spec.name).second) {
                throw ValidationError("regressions: duplicate name \"" + spec.name + "\"");
            }
            cfg.regressions.push_back(std::move(spec));
        }
    }
    cfg.gatsby_summary_enabled = cfg_detail::get_bool_or(j, "gatsby_summary", false, "config");
    if (j.contains("bias_lab")) cfg.bias_lab = cfg_detail::parse_bias_lab(j["bias_lab"]);
    if (j.contains("targets")) {
        if (!j["targets"].is_array()) {
            throw ValidationError("targets: expected an array");
        }
        for (const auto& t : j["targets"]) cfg.targets.push_back(cfg_detail::parse_target(t));
    }

    // Cross-section references.
    if (cfg.panel) {
        cfg.rule_by_name(cfg.panel->observation);
    }
    for (const auto& name : cfg.estimate.rules) {
        cfg.rule_by_name(name);
    }
    return cfg;
}

inline ExperimentConfig load_config(const std::filesystem::path& path) {
    std::string text;
    try {
        text = read_text_file(path);
    } catch (const std::runtime_error& e) {
        throw ValidationError(e.what());
    }
    return parse_config_text(text);
}

}  // namespace edumob
