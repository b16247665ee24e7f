#pragma once

// Batch commands tying the modules into reproducible experiments. Every
// command writes its outputs plus a manifest entry (content digests, headline
// numbers) so `report` can audit a directory without re-running anything.
// Outputs carry no timestamps; a rerun with the same config and seed is
// byte-identical.

#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "edumob/config.hpp"
#include "edumob/coresidence.hpp"
#include "edumob/experiments.hpp"
#include "edumob/mathutil.hpp"
#include "edumob/panel.hpp"
#include "edumob/population.hpp"

namespace edumob {

namespace fs = std::filesystem;

inline std::string file_digest(const fs::path& path) {
    return to_hex(fnv1a64(read_text_file(path)));
}

inline std::string text_digest(std::string_view text) { return to_hex(fnv1a64(text)); }

struct Manifest {
    json data = json::object();

    static Manifest load_or_empty(const fs::path& dir) {
        Manifest m;
        const fs::path p = dir / "manifest.json";
        if (fs::exists(p)) {
            m.data = json::parse(read_text_file(p));
        }
        return m;
    }

    void record_file(const fs::path& dir, const std::string& name) {
        data["files"][name] = file_digest(dir / name);
    }

    void save(const fs::path& dir) const {
        write_text_file(dir / "manifest.json", data.dump(2) + "\n");
    }
};

namespace pipe_detail {

inline void stamp(Manifest& m, const ExperimentConfig& cfg) {
    m.data["config_digest"] = text_digest(cfg.raw_text);
    m.data["seed"] = cfg.seed;
    json targets = json::array();
    for (const auto& t : cfg.targets) {
        json jt;
        jt["name"] = t.name;
        jt["file"] = t.file;
        jt["column"] = t.column;
        jt["min"] = t.min;
        jt["max"] = t.max;
        json where = json::object();
        for (const auto& [k, v] : t.where) where[k] = v;
        jt["where"] = where;
        targets.push_back(jt);
    }
    m.data["targets"] = targets;
}

inline std::optional<double> column_stat(const Microdata& md,
                                         const std::vector<std::size_t>& rows, StatKind kind) {
    auto v = panel_detail::stat_on(md, rows, kind);
    return v ? std::optional<double>(v->value) : std::nullopt;
}

}  // namespace pipe_detail

struct CommandResult {
    std::vector<std::string> outputs;
    json headline;
};

// simulate: per-generation moments of the dynamics (when a model section is
// present) and the synthetic microdata (when a population section is
// present).
inline CommandResult cmd_simulate(const ExperimentConfig& cfg, const fs::path& out_dir,
                                  int threads) {
    fs::create_directories(out_dir);
    Manifest manifest = Manifest::load_or_empty(out_dir);
    pipe_detail::stamp(manifest, cfg);
    CommandResult result;

    if (cfg.model) {
        std::vector<GenerationMoments> moments;
        if (cfg.population && cfg.population->from_dynamics) {
            moments = cfg.dynamics_for_population();
        } else if (cfg.model->lambda_path) {
            moments = simulate_dynamics_path(*cfg.model->lambda_path, cfg.model->params,
                                             cfg.model->feedback, cfg.model->dynamics);
        } else {
            moments = simulate_dynamics(cfg.model->params, cfg.model->feedback,
                                        cfg.model->generations, cfg.model->dynamics);
        }
        CsvTable t;
        t.header = {"t", "mean", "variance", "rho_used", "slope_to_child"};
        for (const auto& m : moments) {
            t.rows.push_back({format_int(m.t), format_double(m.mean), format_double(m.variance),
                              format_double(m.rho_used), format_double(m.slope_to_child)});
        }
        write_csv(out_dir / "moments.csv", t);
        manifest.record_file(out_dir, "moments.csv");
        result.outputs.push_back("moments.csv");
        manifest.data["headlines"]["simulate"]["generations"] = moments.size();
        manifest.data["headlines"]["simulate"]["slope_first"] = moments.front().slope_to_child;
        manifest.data["headlines"]["simulate"]["slope_last"] = moments.back().slope_to_child;
        manifest.data["headlines"]["simulate"]["rho_first"] = moments.front().rho_used;
        manifest.data["headlines"]["simulate"]["rho_last"] = moments.back().rho_used;
    }

    if (cfg.population) {
        PopulationConfig pc = cfg.population_config(threads);
        Microdata md = generate_population(pc);
        write_microdata(md, out_dir / "microdata.csv");
        manifest.record_file(out_dir, "microdata.csv");
        result.outputs.push_back("microdata.csv");
        manifest.data["headlines"]["simulate"]["rows"] = md.size();
    }

    manifest.save(out_dir);
    result.headline = manifest.data["headlines"].contains("simulate")
                          ? manifest.data["headlines"]["simulate"]
                          : json::object();
    std::cout << "simulate: seed=" << cfg.seed << " config_digest=" << text_digest(cfg.raw_text)
              << "\n";
    for (const auto& f : result.outputs) {
        std::cout << "  " << f << " digest=" << file_digest(out_dir / f) << "\n";
    }
    return result;
}

namespace pipe_detail {

struct TrendRow {
    std::size_t n = 0;
    std::optional<double> mean, sd, cv, igc_v, igc_se, igr_v, igr_se, rank_v, am_v, am_se;
};

inline CsvTable trends_table(const std::map<int, TrendRow>& rows, bool include_am) {
    std::vector<std::string> stat_cols = {"mean", "sd", "cv", "igc", "igr", "rank"};
    if (include_am) stat_cols.push_back("am");

    CsvTable t;
    t.header = {"cohort", "n"};
    for (const auto& c : stat_cols) {
        t.header.push_back(c);
        if (c == "igc" || c == "igr" || c == "am") t.header.push_back(c + "_se");
    }
    for (const auto& c : stat_cols) t.header.push_back(c + "_ma3");

    auto series_of = [&](const std::string& name) {
        std::map<int, double> s;
        for (const auto& [cohort, r] : rows) {
            std::optional<double> v;
            if (name == "mean") v = r.mean;
            else if (name == "sd") v = r.sd;
            else if (name == "cv") v = r.cv;
            else if (name == "igc") v = r.igc_v;
            else if (name == "igr") v = r.igr_v;
            else if (name == "rank") v = r.rank_v;
            else if (name == "am") v = r.am_v;
            if (v) s[cohort] = *v;
        }
        return s;
    };
    std::map<std::string, std::map<int, double>> smoothed;
    for (const auto& c : stat_cols) smoothed[c] = moving_average_3yr(series_of(c));

    auto fmt = [](const std::optional<double>& v) {
        return v ? format_double(*v) : std::string();
    };
    for (const auto& [cohort, r] : rows) {
        std::vector<std::string> row = {format_int(cohort), format_uint(r.n)};
        for (const auto& c : stat_cols) {
            if (c == "mean") row.push_back(fmt(r.mean));
            else if (c == "sd") row.push_back(fmt(r.sd));
            else if (c == "cv") row.push_back(fmt(r.cv));
            else if (c == "igc") { row.push_back(fmt(r.igc_v)); row.push_back(fmt(r.igc_se)); }
            else if (c == "igr") { row.push_back(fmt(r.igr_v)); row.push_back(fmt(r.igr_se)); }
            else if (c == "rank") row.push_back(fmt(r.rank_v));
            else if (c == "am") { row.push_back(fmt(r.am_v)); row.push_back(fmt(r.am_se)); }
        }
        for (const auto& c : stat_cols) {
            auto it = smoothed[c].find(cohort);
            row.push_back(it != smoothed[c].end() ? format_double(it->second) : std::string());
        }
        t.rows.push_back(std::move(row));
    }
    return t;
}

// Parent variable: the father's schooling by default, optionally the
// better-educated of the two recorded parents.
inline std::optional<double> parent_years(const Individual& r, bool max_parent) {
    if (!max_parent) return r.father_edu;
    if (r.father_edu && r.mother_edu) return std::max(*r.father_edu, *r.mother_edu);
    if (r.father_edu) return r.father_edu;
    return r.mother_edu;
}

inline std::map<int, TrendRow> trend_rows(const Microdata& observed, const Microdata& raw,
                                          std::optional<Sex> sex_filter, int spousal_age,
                                          bool max_parent = false) {
    std::map<int, std::vector<std::size_t>> by_cohort;
    for (std::size_t i = 0; i < observed.rows.size(); ++i) {
        if (sex_filter && observed.rows[i].sex != *sex_filter) continue;
        by_cohort[observed.rows[i].cohort].push_back(i);
    }
    std::map<int, std::vector<std::size_t>> raw_by_cohort;
    if (!sex_filter) {
        for (std::size_t i = 0; i < raw.rows.size(); ++i) {
            raw_by_cohort[raw.rows[i].cohort].push_back(i);
        }
    }

    std::map<int, TrendRow> out;
    for (const auto& [cohort, idx] : by_cohort) {
        TrendRow r;
        r.n = idx.size();
        std::vector<double> own, child, parent;
        for (std::size_t i : idx) {
            own.push_back(observed.rows[i].edu_years);
            if (auto p = parent_years(observed.rows[i], max_parent)) {
                child.push_back(observed.rows[i].edu_years);
                parent.push_back(*p);
            }
        }
        if (own.size() >= 2) {
            try {
                auto m = mean_sd_cv(own);
                r.mean = m.mean;
                r.sd = m.sd;
                r.cv = m.cv;
            } catch (const std::invalid_argument&) {
                auto m = mean_sd(own);
                r.mean = m.mean;
                r.sd = m.sd;
            }
        }
        if (child.size() >= 3) {
            try {
                auto v = igc(child, parent);
                r.igc_v = v.value;
                r.igc_se = v.se;
                auto s = igr(child, parent);
                r.igr_v = s.value;
                r.igr_se = s.se;
                r.rank_v = rank_correlation(child, parent).value;
            } catch (const std::invalid_argument&) {
            }
        }
        if (!sex_filter && raw_by_cohort.count(cohort)) {
            Microdata sub;
            for (std::size_t i : raw_by_cohort.at(cohort)) sub.rows.push_back(raw.rows[i]);
            try {
                auto v = spousal_correlation(
                    sub, SpousalAgeRule{spousal_age, cohort + spousal_age});
                r.am_v = v.value;
                r.am_se = v.se;
            } catch (const std::invalid_argument&) {
            }
        }
        out[cohort] = r;
    }
    return out;
}

}  // namespace pipe_detail

// estimate: national-trend tables per observation rule, with 3-year moving
// averages; optional by-sex splits. The spousal correlation is computed on
// completed schooling with the at-least-one-partner-aged rule.
inline CommandResult cmd_estimate(const ExperimentConfig& cfg, const fs::path& out_dir,
                                  int /*threads*/) {
    Manifest manifest = Manifest::load_or_empty(out_dir);
    pipe_detail::stamp(manifest, cfg);
    Microdata md = read_microdata(out_dir / "microdata.csv");

    std::vector<std::string> rule_names = cfg.estimate.rules;
    if (rule_names.empty()) {
        for (const auto& r : cfg.observation) rule_names.push_back(r.name);
    }
    CommandResult result;
    const CompletionProfile& profile =
        cfg.population ? cfg.population->completion : CompletionProfile{};
    for (const auto& name : rule_names) {
        const ObservationRule& rule = cfg.rule_by_name(name);
        Microdata obs = observe(md, rule, profile);
        auto rows = pipe_detail::trend_rows(obs, md, std::nullopt, cfg.estimate.spousal_age,
                                            cfg.estimate.max_parent);
        const std::string fname = "trends_" + name + ".csv";
        write_csv(out_dir / fname, pipe_detail::trends_table(rows, true));
        manifest.record_file(out_dir, fname);
        result.outputs.push_back(fname);
        if (cfg.estimate.by_sex) {
            for (Sex s : {Sex::male, Sex::female}) {
                auto srows = pipe_detail::trend_rows(obs, md, s, cfg.estimate.spousal_age,
                                                     cfg.estimate.max_parent);
                const std::string sname =
                    "trends_" + name + "_" + std::string(sex_label(s)) + ".csv";
                write_csv(out_dir / sname, pipe_detail::trends_table(srows, false));
                manifest.record_file(out_dir, sname);
                result.outputs.push_back(sname);
            }
        }
    }
    manifest.data["headlines"]["estimate"]["tables"] = result.outputs;
    manifest.save(out_dir);
    result.headline = manifest.data["headlines"]["estimate"];
    for (const auto& f : result.outputs) {
        std::cout << "estimate: " << f << " digest=" << file_digest(out_dir / f) << "\n";
    }
    return result;
}

// bias-lab: Diff/AbsDiff tables by age of measurement plus the three-series
// comparison of dependent-only, corrected, and benchmark slopes.
inline CommandResult cmd_bias_lab(const ExperimentConfig& cfg, const fs::path& out_dir,
                                  int threads) {
    if (!cfg.bias_lab) {
        throw ValidationError("config has no bias_lab section");
    }
    Manifest manifest = Manifest::load_or_empty(out_dir);
    pipe_detail::stamp(manifest, cfg);
    Microdata md = read_microdata(out_dir / "microdata.csv");
    const BiasLabSection& b = *cfg.bias_lab;
    const CompletionProfile& profile =
        cfg.population ? cfg.population->completion : CompletionProfile{};

    auto reports = bias_by_age(md, b.ages, b.benchmark_age, b.windows, profile, threads);
    write_csv(out_dir / "bias_by_age.csv", bias_reports_to_csv(reports));

    CommandResult result;
    result.outputs.push_back("bias_by_age.csv");
    manifest.record_file(out_dir, "bias_by_age.csv");

    json head;
    for (const auto& w : b.windows) {
        double best = std::numeric_limits<double>::infinity();
        int best_age = -1;
        for (const auto& r : reports) {
            if (r.period != w.label) continue;
            if (r.abs_diff_igc < best) {
                best = r.abs_diff_igc;
                best_age = r.age;
            }
        }
        head["min_absdiff_age"][w.label] = best_age;
        head["min_absdiff"][w.label] = best;
    }

    if (!b.hilger_ages.empty() && b.hilger_year_to >= b.hilger_year_from) {
        auto rows = hilger_comparison(md, b.hilger_ages, b.benchmark_age, b.hilger_year_from,
                                      b.hilger_year_to, b.hilger_proxy_age, profile);
        write_csv(out_dir / "hilger_comparison.csv", hilger_comparison_to_csv(rows));
        result.outputs.push_back("hilger_comparison.csv");
        manifest.record_file(out_dir, "hilger_comparison.csv");
        head["hilger_rows"] = rows.size();
    }
    manifest.data["headlines"]["bias_lab"] = head;
    manifest.save(out_dir);
    result.headline = head;
    for (const auto& f : result.outputs) {
        std::cout << "bias-lab: " << f << " digest=" << file_digest(out_dir / f) << "\n";
    }
    return result;
}

// panel: per-(region, period) statistics with split-half replicates, plus
// first-stage reliability diagnostics per statistic.
inline CommandResult cmd_panel(const ExperimentConfig& cfg, const fs::path& out_dir,
                               int /*threads*/) {
    if (!cfg.panel) {
        throw ValidationError("config has no panel section");
    }
    Manifest manifest = Manifest::load_or_empty(out_dir);
    pipe_detail::stamp(manifest, cfg);
    Microdata md = read_microdata(out_dir / "microdata.csv");
    const CompletionProfile& profile =
        cfg.population ? cfg.population->completion : CompletionProfile{};
    Microdata frame = observe(md, cfg.rule_by_name(cfg.panel->observation), profile);
    Panel panel = compute_panel(frame, RegionRegistry::bundled(), cfg.panel->scheme,
                                cfg.panel->rules, cfg.seed);
    write_panel(panel, out_dir / "panel.csv");

    CsvTable fs_table;
    fs_table.header = {"stat_kind", "slope", "se", "n_cells", "low_power"};
    json head;
    head["cells"] = panel.cells.size();
    head["skipped"] = panel.skipped.size();
    for (StatKind k : cfg.panel->rules.stats) {
        try {
            FirstStageResult fs = first_stage(k, panel);
            fs_table.rows.push_back({std::string(stat_kind_label(k)), format_double(fs.slope),
                                     format_double(fs.se), format_uint(fs.n_cells),
                                     fs.low_power ? "1" : "0"});
            head["first_stage"][std::string(stat_kind_label(k))] = fs.slope;
        } catch (const std::invalid_argument&) {
            continue;
        }
    }
    write_csv(out_dir / "first_stage.csv", fs_table);

    CommandResult result;
    result.outputs = {"panel.csv", "first_stage.csv"};
    manifest.record_file(out_dir, "panel.csv");
    manifest.record_file(out_dir, "first_stage.csv");
    manifest.data["headlines"]["panel"] = head;
    manifest.save(out_dir);
    result.headline = head;
    for (const auto& f : result.outputs) {
        std::cout << "panel: " << f << " digest=" << file_digest(out_dir / f) << "\n";
    }
    return result;
}

inline json regression_result_to_json(const RegressionResult& r) {
    json j;
    j["name"] = r.name;
    j["n"] = r.n;
    if (!std::isnan(r.r2)) j["r2"] = r.r2;
    json coefs = json::array();
    for (const auto& c : r.coefficients) {
        json jc;
        jc["name"] = c.name;
        jc["estimate"] = c.estimate;
        jc["se"] = c.se;
        jc["std_beta"] = c.std_beta;
        coefs.push_back(jc);
    }
    j["coefficients"] = coefs;
    if (!r.first_stages.empty()) {
        json fs = json::array();
        for (const auto& f : r.first_stages) {
            json jf;
            jf["regressor"] = f.regressor;
            jf["slope"] = f.slope;
            jf["se"] = f.se;
            jf["f_stat"] = f.f_stat;
            fs.push_back(jf);
        }
        j["first_stages"] = fs;
        j["weak_instrument_warning"] = r.weak_instrument_warning;
    }
    return j;
}

inline std::string regression_result_to_text(const RegressionResult& r) {
    std::ostringstream os;
    os << r.name << " (n=" << r.n;
    if (!std::isnan(r.r2)) os << ", R2=" << format_double(r.r2);
    os << ")\n";
    for (const auto& c : r.coefficients) {
        os << "  " << c.name << " = " << format_double(c.estimate) << " (se "
           << format_double(c.se) << ") [beta " << format_double(c.std_beta) << "]\n";
    }
    for (const auto& f : r.first_stages) {
        os << "  first stage " << f.regressor << ": slope " << format_double(f.slope) << " (se "
           << format_double(f.se) << "), F=" << format_double(f.f_stat) << "\n";
    }
    if (r.weak_instrument_warning) {
        os << "  warning: weak first stage (F < 4)\n";
    }
    return os.str();
}

// regress: runs every configured regression on the panel file; optionally the
// inequality/sorting/mobility summary battery with its mediation share.
inline CommandResult cmd_regress(const ExperimentConfig& cfg, const fs::path& out_dir,
                                 int /*threads*/) {
    Manifest manifest = Manifest::load_or_empty(out_dir);
    pipe_detail::stamp(manifest, cfg);
    Panel panel = read_panel(out_dir / "panel.csv");

    json results = json::array();
    std::string text;
    json head;
    for (const auto& spec : cfg.regressions) {
        RegressionResult r = regress(spec, panel);
        results.push_back(regression_result_to_json(r));
        text += regression_result_to_text(r);
        for (const auto& c : r.coefficients) {
            head[spec.name][c.name] = c.estimate;
        }
    }
    write_text_file(out_dir / "regressions.json", results.dump(2) + "\n");
    write_text_file(out_dir / "regressions.txt", text);

    CommandResult result;
    result.outputs = {"regressions.json", "regressions.txt"};
    manifest.record_file(out_dir, "regressions.json");
    manifest.record_file(out_dir, "regressions.txt");

    if (cfg.gatsby_summary_enabled) {
        GatsbyReport g = gatsby_summary(panel);
        json jg;
        json regs = json::array();
        for (const auto& r : g.regressions) regs.push_back(regression_result_to_json(r));
        jg["regressions"] = regs;
        jg["mediation_total"] = g.mediation_total;
        jg["mediation_direct"] = g.mediation_direct;
        jg["mediation_share"] = g.mediation_share;
        jg["mediation_weak_instrument"] = g.mediation_weak_instrument;
        write_text_file(out_dir / "gatsby.json", jg.dump(2) + "\n");
        manifest.record_file(out_dir, "gatsby.json");
        result.outputs.push_back("gatsby.json");
        head["mediation_share"] = g.mediation_share;
    }
    manifest.data["headlines"]["regress"] = head;
    manifest.save(out_dir);
    result.headline = head;
    for (const auto& f : result.outputs) {
        std::cout << "regress: " << f << " digest=" << file_digest(out_dir / f) << "\n";
    }
    return result;
}

struct TargetOutcome {
    std::string name;
    bool pass = false;
    std::string detail;
};

inline std::vector<TargetOutcome> evaluate_targets(const json& targets, const fs::path& out_dir) {
    std::vector<TargetOutcome> outcomes;
    for (const auto& t : targets) {
        TargetOutcome o;
        o.name = t["name"].get<std::string>();
        const fs::path file = out_dir / t["file"].get<std::string>();
        if (!fs::exists(file)) {
            o.detail = "missing file " + t["file"].get<std::string>();
            outcomes.push_back(o);
            continue;
        }
        try {
            CsvTable table = read_csv(file);
            const std::size_t col = table.column_index(t["column"].get<std::string>());
            std::vector<std::pair<std::size_t, std::string>> where;
            for (const auto& [k, v] : t["where"].items()) {
                where.emplace_back(table.column_index(k), v.get<std::string>());
            }
            std::optional<double> value;
            for (const auto& row : table.rows) {
                bool match = true;
                for (const auto& [ci, expected] : where) {
                    if (row[ci] != expected) {
                        match = false;
                        break;
                    }
                }
                if (match && !row[col].empty()) {
                    value = parse_double(row[col], o.name);
                    break;
                }
            }
            if (!value) {
                o.detail = "no matching row";
            } else {
                const double lo = t["min"].get<double>(), hi = t["max"].get<double>();
                o.pass = *value >= lo && *value <= hi;
                o.detail = format_double(*value) + " in [" + format_double(lo) + ", " +
                           format_double(hi) + "]";
            }
        } catch (const std::exception& e) {
            o.detail = e.what();
        }
        outcomes.push_back(o);
    }
    return outcomes;
}

// report: consolidated summary of a results directory. Verifies content
// digests, reprints headline numbers, and evaluates the declared calibration
// targets. Returns false only on a hard error; missing/stale entries are
// reported in the summary itself.
inline int cmd_report(const fs::path& out_dir) {
    const fs::path manifest_path = out_dir / "manifest.json";
    if (!fs::exists(manifest_path)) {
        std::cout << "nothing to report: no manifest in " << out_dir.string() << "\n";
        return 0;
    }
    Manifest manifest = Manifest::load_or_empty(out_dir);

    std::ostringstream os;
    json jr;
    os << "report for " << out_dir.string() << "\n";
    os << "config_digest: " << manifest.data.value("config_digest", std::string("?")) << "\n";
    os << "seed: " << (manifest.data.contains("seed") ? manifest.data["seed"].dump() : "?")
       << "\n";
    jr["config_digest"] = manifest.data.value("config_digest", std::string("?"));
    if (manifest.data.contains("seed")) jr["seed"] = manifest.data["seed"];

    bool all_fresh = true;
    json files = json::object();
    std::vector<std::string> missing;
    if (manifest.data.contains("files")) {
        for (const auto& [name, digest] : manifest.data["files"].items()) {
            std::string status;
            if (!fs::exists(out_dir / name)) {
                status = "missing";
                missing.push_back(name);
                all_fresh = false;
            } else if (file_digest(out_dir / name) != digest.get<std::string>()) {
                status = "stale (digest mismatch)";
                all_fresh = false;
            } else {
                status = "ok";
            }
            os << "file " << name << ": " << status << "\n";
            files[name] = status;
        }
    }
    jr["files"] = files;
    if (!missing.empty()) {
        os << "missing inputs:";
        for (const auto& m : missing) os << " " << m;
        os << "\n";
    }

    if (manifest.data.contains("headlines")) {
        os << "headlines: " << manifest.data["headlines"].dump() << "\n";
        jr["headlines"] = manifest.data["headlines"];
    }

    std::size_t n_pass = 0, n_total = 0;
    if (manifest.data.contains("targets") && !manifest.data["targets"].empty()) {
        auto outcomes = evaluate_targets(manifest.data["targets"], out_dir);
        json jt = json::array();
        for (const auto& o : outcomes) {
            ++n_total;
            if (o.pass) ++n_pass;
            os << (o.pass ? "[PASS] " : "[FAIL] ") << o.name << ": " << o.detail << "\n";
            json one;
            one["name"] = o.name;
            one["pass"] = o.pass;
            one["detail"] = o.detail;
            jt.push_back(one);
        }
        jr["targets"] = jt;
        os << "targets: " << n_pass << "/" << n_total << " passed\n";
    }
    jr["all_files_fresh"] = all_fresh;

    write_text_file(out_dir / "report.txt", os.str());
    write_text_file(out_dir / "report.json", jr.dump(2) + "\n");
    std::cout << os.str();
    return 0;
}

}  // namespace edumob
