#pragma once

// Regional panel machinery: per-(region, period) statistics with stratified
// split-half replicates, first-stage reliability diagnostics, OLS and
// split-sample-IV regressions (levels and first differences, time fixed
// effects), and the contamination / mediation experiment batteries.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "edumob/estimators.hpp"
#include "edumob/microdata.hpp"
#include "edumob/regions.hpp"
#include "edumob/regression.hpp"
#include "edumob/rng.hpp"

namespace edumob {

enum class StatKind { mean, sd, cv, igc, igr, am, rank, mean_father, sd_father };

inline constexpr std::array<StatKind, 9> kAllStatKinds = {
    StatKind::mean, StatKind::sd,   StatKind::cv,          StatKind::igc,      StatKind::igr,
    StatKind::am,   StatKind::rank, StatKind::mean_father, StatKind::sd_father};

inline std::string_view stat_kind_label(StatKind k) {
    switch (k) {
        case StatKind::mean: return "mean";
        case StatKind::sd: return "sd";
        case StatKind::cv: return "cv";
        case StatKind::igc: return "igc";
        case StatKind::igr: return "igr";
        case StatKind::am: return "am";
        case StatKind::rank: return "rank";
        case StatKind::mean_father: return "mean_father";
        case StatKind::sd_father: return "sd_father";
    }
    throw std::logic_error("stat_kind_label: bad kind");
}

inline StatKind parse_stat_kind(std::string_view s) {
    for (StatKind k : kAllStatKinds) {
        if (stat_kind_label(k) == s) return k;
    }
    throw std::runtime_error("unknown stat_kind \"" + std::string(s) + "\"");
}

struct PeriodDef {
    std::string label;
    int cohort_from = 0;
    int cohort_to = 0;  // inclusive
};

struct PeriodScheme {
    std::vector<PeriodDef> periods;  // ordinal order; first differences pair adjacent entries

    void validate() const {
        if (periods.empty()) {
            throw std::invalid_argument("PeriodScheme: no periods");
        }
        std::set<std::string> labels;
        for (const auto& p : periods) {
            if (p.cohort_to < p.cohort_from) {
                throw std::invalid_argument("PeriodScheme: empty cohort range in period " +
                                            p.label);
            }
            if (!labels.insert(p.label).second) {
                throw std::invalid_argument("PeriodScheme: duplicate period label " + p.label);
            }
        }
    }

    std::optional<std::size_t> period_index(int cohort) const {
        for (std::size_t i = 0; i < periods.size(); ++i) {
            if (cohort >= periods[i].cohort_from && cohort <= periods[i].cohort_to) return i;
        }
        return std::nullopt;
    }
};

struct RegionalStat {
    std::string region_id;
    std::string period;
    StatKind stat = StatKind::mean;
    double value = 0.0;
    std::size_t n = 0;
    double half_a = std::numeric_limits<double>::quiet_NaN();
    double half_b = std::numeric_limits<double>::quiet_NaN();

    bool has_halves() const { return !std::isnan(half_a) && !std::isnan(half_b); }
};

class Panel {
  public:
    std::vector<RegionalStat> cells;
    std::vector<std::string> period_order;
    std::vector<std::string> skipped;  // log of cells omitted by thresholds

    void rebuild_index() {
        index_.clear();
        for (std::size_t i = 0; i < cells.size(); ++i) {
            index_[key(cells[i].region_id, cells[i].period, cells[i].stat)] = i;
        }
    }

    const RegionalStat* find(std::string_view region, std::string_view period,
                             StatKind stat) const {
        auto it = index_.find(key(region, period, stat));
        return it == index_.end() ? nullptr : &cells[it->second];
    }

    std::optional<std::size_t> period_position(std::string_view label) const {
        for (std::size_t i = 0; i < period_order.size(); ++i) {
            if (period_order[i] == label) return i;
        }
        return std::nullopt;
    }

    std::vector<std::string> regions() const {
        std::set<std::string> s;
        for (const auto& c : cells) s.insert(c.region_id);
        return {s.begin(), s.end()};
    }

  private:
    static std::string key(std::string_view region, std::string_view period, StatKind stat) {
        std::string k(region);
        k.push_back('\x1f');
        k.append(period);
        k.push_back('\x1f');
        k.append(stat_kind_label(stat));
        return k;
    }
    std::map<std::string, std::size_t> index_;
};

struct PanelRules {
    std::vector<StatKind> stats = {StatKind::mean, StatKind::sd, StatKind::cv, StatKind::igc,
                                   StatKind::igr,  StatKind::am, StatKind::mean_father,
                                   StatKind::sd_father};
    std::size_t min_cell_n = 50;
    std::size_t min_half_n = 25;
};

// Stratified half-sample split. Singles stratify by (region, cohort, sex);
// couples stay intact and stratify by (region, first partner's cohort). Rows
// are balanced within stratum up to the couple-atomicity constraint.
inline std::vector<std::uint8_t> split_halves(const Microdata& md, std::uint64_t seed) {
    const std::size_t n = md.rows.size();
    std::vector<std::uint8_t> side(n, 0);
    std::unordered_map<std::uint64_t, std::size_t> row_of;
    row_of.reserve(n);
    for (std::size_t i = 0; i < n; ++i) row_of.emplace(md.rows[i].id, i);

    struct Unit {
        std::uint64_t sort_id;
        std::vector<std::size_t> rows;
    };
    std::map<std::string, std::vector<Unit>> strata;
    std::vector<bool> used(n, false);
    for (std::size_t i = 0; i < n; ++i) {
        if (used[i]) continue;
        const auto& r = md.rows[i];
        Unit u;
        u.sort_id = r.id;
        u.rows.push_back(i);
        used[i] = true;
        std::string key = r.region_id + '\x1f' + std::to_string(r.cohort);
        if (r.spouse_id) {
            auto it = row_of.find(*r.spouse_id);
            if (it != row_of.end() && !used[it->second]) {
                u.rows.push_back(it->second);
                used[it->second] = true;
                key += "\x1f""couple";
            } else {
                key += '\x1f';
                key += sex_label(r.sex);
            }
        } else {
            key += '\x1f';
            key += sex_label(r.sex);
        }
        strata[key].push_back(std::move(u));
    }

    for (auto& [key, units] : strata) {
        std::sort(units.begin(), units.end(),
                  [](const Unit& a, const Unit& b) { return a.sort_id < b.sort_id; });
        auto rng = derive_engine(seed, "split", key);
        std::shuffle(units.begin(), units.end(), rng);
        std::uniform_int_distribution<int> coin(0, 1);
        std::size_t count_a = 0, count_b = 0;
        for (const auto& u : units) {
            int pick;
            if (count_a < count_b) {
                pick = 0;
            } else if (count_b < count_a) {
                pick = 1;
            } else {
                pick = coin(rng);
            }
            for (std::size_t row : u.rows) side[row] = static_cast<std::uint8_t>(pick);
            (pick == 0 ? count_a : count_b) += u.rows.size();
        }
    }
    return side;
}

namespace panel_detail {

struct StatValue {
    double value;
    std::size_t n;
};

inline std::optional<StatValue> stat_on(const Microdata& md,
                                        const std::vector<std::size_t>& rows, StatKind kind) {
    auto own = [&](std::vector<double>& v) {
        v.reserve(rows.size());
        for (std::size_t i : rows) v.push_back(md.rows[i].edu_years);
    };
    try {
        switch (kind) {
            case StatKind::mean:
            case StatKind::sd:
            case StatKind::cv: {
                std::vector<double> v;
                own(v);
                if (v.size() < 2) return std::nullopt;
                if (kind == StatKind::cv) {
                    auto m = mean_sd_cv(v);
                    return StatValue{m.cv, v.size()};
                }
                auto m = mean_sd(v);
                return StatValue{kind == StatKind::mean ? m.mean : m.sd, v.size()};
            }
            case StatKind::mean_father:
            case StatKind::sd_father: {
                std::vector<double> v;
                for (std::size_t i : rows) {
                    if (md.rows[i].father_edu) v.push_back(*md.rows[i].father_edu);
                }
                if (v.size() < 2) return std::nullopt;
                auto m = mean_sd(v);
                return StatValue{kind == StatKind::mean_father ? m.mean : m.sd, v.size()};
            }
            case StatKind::igc:
            case StatKind::igr:
            case StatKind::rank: {
                std::vector<double> child, parent;
                for (std::size_t i : rows) {
                    if (md.rows[i].father_edu) {
                        child.push_back(md.rows[i].edu_years);
                        parent.push_back(*md.rows[i].father_edu);
                    }
                }
                if (child.size() < 3) return std::nullopt;
                StatResult r = kind == StatKind::igc   ? igc(child, parent)
                               : kind == StatKind::igr ? igr(child, parent)
                                                       : rank_correlation(child, parent);
                return StatValue{r.value, r.n};
            }
            case StatKind::am: {
                std::vector<std::pair<double, double>> pairs;
                for (std::size_t i : rows) {
                    const auto& r = md.rows[i];
                    if (r.father_edu && r.mother_edu) {
                        pairs.emplace_back(*r.father_edu, *r.mother_edu);
                    }
                }
                if (pairs.size() < 3) return std::nullopt;
                StatResult r = spousal_correlation_pairs(pairs);
                return StatValue{r.value, r.n};
            }
        }
    } catch (const std::invalid_argument&) {
        return std::nullopt;  // degenerate cell
    }
    return std::nullopt;
}

}  // namespace panel_detail

// One RegionalStat per (region, period, stat kind) with n above the cell
// threshold; half replicates are attached when both halves clear their own
// minimum. Unknown region ids abort with the full offender list.
inline Panel compute_panel(const Microdata& md, const RegionRegistry& registry,
                           const PeriodScheme& scheme, const PanelRules& rules,
                           std::uint64_t seed) {
    scheme.validate();
    std::set<std::string> unknown;
    for (const auto& r : md.rows) {
        if (!registry.contains(r.region_id)) unknown.insert(r.region_id);
    }
    if (!unknown.empty()) {
        std::string msg = "compute_panel: unknown region ids:";
        for (const auto& id : unknown) msg += " " + id;
        throw std::runtime_error(msg);
    }

    const auto side = split_halves(md, seed);

    std::map<std::pair<std::string, std::size_t>, std::vector<std::size_t>> cells;
    for (std::size_t i = 0; i < md.rows.size(); ++i) {
        auto p = scheme.period_index(md.rows[i].cohort);
        if (!p) continue;
        cells[{md.rows[i].region_id, *p}].push_back(i);
    }

    Panel panel;
    for (const auto& p : scheme.periods) panel.period_order.push_back(p.label);

    for (const auto& [key, rows] : cells) {
        const auto& [region, period_idx] = key;
        const std::string& period = scheme.periods[period_idx].label;
        std::vector<std::size_t> rows_a, rows_b;
        for (std::size_t i : rows) {
            (side[i] == 0 ? rows_a : rows_b).push_back(i);
        }
        for (StatKind kind : rules.stats) {
            auto full = panel_detail::stat_on(md, rows, kind);
            if (!full || full->n < rules.min_cell_n) {
                panel.skipped.push_back(region + "/" + period + "/" +
                                        std::string(stat_kind_label(kind)) + ": n=" +
                                        std::to_string(full ? full->n : 0) + " < " +
                                        std::to_string(rules.min_cell_n));
                continue;
            }
            RegionalStat cell;
            cell.region_id = region;
            cell.period = period;
            cell.stat = kind;
            cell.value = full->value;
            cell.n = full->n;
            auto a = panel_detail::stat_on(md, rows_a, kind);
            auto b = panel_detail::stat_on(md, rows_b, kind);
            if (a && b && a->n >= rules.min_half_n && b->n >= rules.min_half_n) {
                cell.half_a = a->value;
                cell.half_b = b->value;
            }
            panel.cells.push_back(std::move(cell));
        }
    }
    panel.rebuild_index();
    return panel;
}

inline CsvTable panel_to_csv(const Panel& panel) {
    CsvTable t;
    t.header = {"region_id", "period", "stat_kind", "value", "n", "half_a", "half_b"};
    for (const auto& c : panel.cells) {
        t.rows.push_back({c.region_id, c.period, std::string(stat_kind_label(c.stat)),
                          format_double(c.value), format_uint(c.n),
                          c.has_halves() ? format_double(c.half_a) : std::string(),
                          c.has_halves() ? format_double(c.half_b) : std::string()});
    }
    return t;
}

inline void write_panel(const Panel& panel, const std::filesystem::path& path) {
    write_csv(path, panel_to_csv(panel));
}

// Period order is reconstructed from first appearance, which matches the
// scheme order for canonically written files.
inline Panel panel_from_csv(const CsvTable& t, std::string_view origin = "panel") {
    Panel panel;
    const std::size_t cr = t.column_index("region_id");
    const std::size_t cp = t.column_index("period");
    const std::size_t ck = t.column_index("stat_kind");
    const std::size_t cv = t.column_index("value");
    const std::size_t cn = t.column_index("n");
    const std::size_t ca = t.column_index("half_a");
    const std::size_t cb = t.column_index("half_b");
    std::set<std::string> seen_periods;
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::string ctx = std::string(origin) + ":" + std::to_string(i + 2);
        RegionalStat c;
        c.region_id = row[cr];
        c.period = row[cp];
        c.stat = parse_stat_kind(row[ck]);
        c.value = parse_double(row[cv], ctx);
        c.n = parse_uint(row[cn], ctx);
        if (row[ca].empty() != row[cb].empty()) {
            throw std::runtime_error(ctx + ": half_a/half_b must be both present or both empty");
        }
        if (!row[ca].empty()) {
            c.half_a = parse_double(row[ca], ctx);
            c.half_b = parse_double(row[cb], ctx);
        }
        if (seen_periods.insert(c.period).second) {
            panel.period_order.push_back(c.period);
        }
        panel.cells.push_back(std::move(c));
    }
    panel.rebuild_index();
    return panel;
}

inline Panel read_panel(const std::filesystem::path& path) {
    return panel_from_csv(read_csv(path), path.string());
}

struct FirstStageResult {
    double slope = 0.0;
    double se = 0.0;
    std::size_t n_cells = 0;
    bool low_power = false;  // fewer than 10 cells
};

// Reliability diagnostic: regression of the half-A replicate on the half-B
// replicate across cells, with time fixed effects.
inline FirstStageResult first_stage(StatKind stat, const Panel& panel) {
    std::vector<double> ya, xb;
    std::vector<std::string> period_of;
    for (const auto& c : panel.cells) {
        if (c.stat != stat || !c.has_halves()) continue;
        ya.push_back(c.half_a);
        xb.push_back(c.half_b);
        period_of.push_back(c.period);
    }
    const std::size_t n = ya.size();
    std::vector<std::string> periods;
    for (const auto& p : period_of) {
        if (std::find(periods.begin(), periods.end(), p) == periods.end()) periods.push_back(p);
    }
    const std::size_t k = 1 + periods.size();
    if (n <= k) {
        throw std::invalid_argument("first_stage: not enough cells with half replicates");
    }
    Eigen::MatrixXd X = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                              static_cast<Eigen::Index>(k));
    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        X(static_cast<Eigen::Index>(i), 0) = xb[i];
        const auto p = std::find(periods.begin(), periods.end(), period_of[i]) - periods.begin();
        X(static_cast<Eigen::Index>(i), 1 + p) = 1.0;
        y(static_cast<Eigen::Index>(i)) = ya[i];
    }
    std::vector<std::string> names = {"half_b"};
    for (const auto& p : periods) names.push_back("period:" + p);
    LinearFit fit = fit_ols(X, y, names);
    FirstStageResult out;
    out.slope = fit.beta[0];
    out.se = fit.se[0];
    out.n_cells = n;
    out.low_power = n < 10;
    return out;
}

enum class Design { levels, first_difference };
enum class EstimatorKind { ols, split_iv };

struct RegressorSpec {
    StatKind stat = StatKind::mean;
    bool lagged = false;

    std::string name() const {
        std::string s(stat_kind_label(stat));
        if (lagged) s += ".lag";
        return s;
    }
};

struct RegressionSpec {
    std::string name;
    StatKind dependent = StatKind::igc;
    std::vector<RegressorSpec> regressors;
    Design design = Design::levels;
    bool time_fixed_effects = true;
    EstimatorKind estimator = EstimatorKind::ols;
    std::vector<StatKind> instrumented;  // subset of regressor stats (split_iv only)

    void validate() const {
        if (regressors.empty()) {
            throw std::invalid_argument("RegressionSpec: no regressors");
        }
        for (StatKind inst : instrumented) {
            bool found = false;
            for (const auto& r : regressors) {
                if (r.stat == inst) found = true;
            }
            if (!found) {
                throw std::invalid_argument(
                    "RegressionSpec: instrumented stat " +
                    std::string(stat_kind_label(inst)) + " is not among the regressors");
            }
        }
        if (estimator == EstimatorKind::split_iv && instrumented.empty()) {
            throw std::invalid_argument(
                "RegressionSpec: split_iv requires at least one instrumented regressor");
        }
    }
};

struct CoefficientReport {
    std::string name;
    double estimate = 0.0;
    double se = 0.0;
    double std_beta = 0.0;
};

struct FirstStageReport {
    std::string regressor;
    double slope = 0.0;
    double se = 0.0;
    double f_stat = 0.0;
};

struct RegressionResult {
    std::string name;
    std::vector<CoefficientReport> coefficients;  // substantive regressors only
    std::size_t n = 0;
    double r2 = std::numeric_limits<double>::quiet_NaN();  // OLS only
    std::vector<FirstStageReport> first_stages;
    bool weak_instrument_warning = false;
};

namespace panel_detail {

struct DesignRow {
    double y;
    std::vector<double> x;        // observed regressors (half A under split_iv)
    std::vector<double> z;        // instruments for instrumented regressors
    std::string period;           // fixed-effect level
};

// Cell readers keep the full-sample value for OLS columns and the half
// replicates for instrumented columns.
inline bool read_cell(const Panel& panel, const std::string& region,
                      const std::string& period, StatKind stat, bool need_halves,
                      double& value, double& half_a, double& half_b) {
    const RegionalStat* c = panel.find(region, period, stat);
    if (!c) return false;
    if (need_halves && !c->has_halves()) return false;
    value = c->value;
    half_a = c->half_a;
    half_b = c->half_b;
    return true;
}

}  // namespace panel_detail

// Panel regression. Levels: y_rt on x_rt (optionally one-period lags) with
// time fixed effects. First differences: adjacent-period changes with
// period effects for each difference. Split-IV: each instrumented regressor
// enters as its half-A replicate instrumented by the half-B replicate.
inline RegressionResult regress(const RegressionSpec& spec, const Panel& panel) {
    spec.validate();
    const auto& order = panel.period_order;
    if (order.size() < 2 && spec.design == Design::first_difference) {
        throw std::invalid_argument("regress: first differences need at least two periods");
    }

    std::vector<bool> instrumented_flag;
    for (const auto& r : spec.regressors) {
        bool inst = spec.estimator == EstimatorKind::split_iv &&
                    std::find(spec.instrumented.begin(), spec.instrumented.end(), r.stat) !=
                        spec.instrumented.end();
        instrumented_flag.push_back(inst);
    }

    std::vector<panel_detail::DesignRow> rows;
    for (const auto& region : panel.regions()) {
        for (std::size_t t = 0; t < order.size(); ++t) {
            panel_detail::DesignRow row;
            double v, ha, hb;

            auto value_at = [&](StatKind stat, std::size_t when, bool halves, double& out_v,
                                double& out_a, double& out_b) {
                return panel_detail::read_cell(panel, region, order[when], stat, halves, out_v,
                                               out_a, out_b);
            };

            bool ok = true;
            if (spec.design == Design::levels) {
                if (!value_at(spec.dependent, t, false, v, ha, hb)) continue;
                row.y = v;
                for (std::size_t j = 0; j < spec.regressors.size(); ++j) {
                    const auto& r = spec.regressors[j];
                    if (r.lagged && t == 0) {
                        ok = false;
                        break;
                    }
                    const std::size_t when = r.lagged ? t - 1 : t;
                    if (!value_at(r.stat, when, instrumented_flag[j], v, ha, hb)) {
                        ok = false;
                        break;
                    }
                    row.x.push_back(instrumented_flag[j] ? ha : v);
                    if (instrumented_flag[j]) row.z.push_back(hb);
                }
            } else {
                if (t == 0) continue;
                double v0, ha0, hb0;
                if (!value_at(spec.dependent, t, false, v, ha, hb) ||
                    !value_at(spec.dependent, t - 1, false, v0, ha0, hb0)) {
                    continue;
                }
                row.y = v - v0;
                for (std::size_t j = 0; j < spec.regressors.size(); ++j) {
                    const auto& r = spec.regressors[j];
                    const std::size_t when = r.lagged ? t - 1 : t;
                    if (when == 0) {
                        ok = false;
                        break;
                    }
                    if (!value_at(r.stat, when, instrumented_flag[j], v, ha, hb) ||
                        !value_at(r.stat, when - 1, instrumented_flag[j], v0, ha0, hb0)) {
                        ok = false;
                        break;
                    }
                    row.x.push_back(instrumented_flag[j] ? ha - ha0 : v - v0);
                    if (instrumented_flag[j]) row.z.push_back(hb - hb0);
                }
            }
            if (!ok || row.x.size() != spec.regressors.size()) continue;
            row.period = order[t];
            rows.push_back(std::move(row));
        }
    }

    const std::size_t n = rows.size();
    const std::size_t k_reg = spec.regressors.size();
    std::vector<std::string> fe_levels;
    if (spec.time_fixed_effects) {
        for (const auto& row : rows) {
            if (std::find(fe_levels.begin(), fe_levels.end(), row.period) == fe_levels.end()) {
                fe_levels.push_back(row.period);
            }
        }
    }
    const std::size_t k_fe = spec.time_fixed_effects ? fe_levels.size() : 1;
    if (n <= k_reg + k_fe) {
        throw std::invalid_argument("regress(" + spec.name +
                                    "): not enough usable panel cells (" + std::to_string(n) +
                                    ")");
    }

    Eigen::VectorXd y(static_cast<Eigen::Index>(n));
    Eigen::MatrixXd X_reg(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(k_reg));
    Eigen::MatrixXd FE = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n),
                                               static_cast<Eigen::Index>(k_fe));
    for (std::size_t i = 0; i < n; ++i) {
        y(static_cast<Eigen::Index>(i)) = rows[i].y;
        for (std::size_t j = 0; j < k_reg; ++j) {
            X_reg(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = rows[i].x[j];
        }
        if (spec.time_fixed_effects) {
            const auto p =
                std::find(fe_levels.begin(), fe_levels.end(), rows[i].period) - fe_levels.begin();
            FE(static_cast<Eigen::Index>(i), p) = 1.0;
        } else {
            FE(static_cast<Eigen::Index>(i), 0) = 1.0;
        }
    }

    std::vector<std::string> reg_names;
    for (const auto& r : spec.regressors) reg_names.push_back(r.name());
    std::vector<std::string> fe_names;
    if (spec.time_fixed_effects) {
        for (const auto& p : fe_levels) fe_names.push_back("period:" + p);
    } else {
        fe_names.push_back("intercept");
    }

    // Sample standard deviations for standardized betas.
    const double sd_y = std::sqrt((y.array() - y.mean()).square().sum() /
                                  static_cast<double>(n - 1));
    std::vector<double> sd_x(k_reg);
    for (std::size_t j = 0; j < k_reg; ++j) {
        const auto col = X_reg.col(static_cast<Eigen::Index>(j));
        sd_x[j] = std::sqrt((col.array() - col.mean()).square().sum() /
                            static_cast<double>(n - 1));
    }

    RegressionResult out;
    out.name = spec.name;
    out.n = n;

    if (spec.estimator == EstimatorKind::ols) {
        Eigen::MatrixXd X(static_cast<Eigen::Index>(n),
                          static_cast<Eigen::Index>(k_reg + k_fe));
        X.leftCols(static_cast<Eigen::Index>(k_reg)) = X_reg;
        X.rightCols(static_cast<Eigen::Index>(k_fe)) = FE;
        std::vector<std::string> names = reg_names;
        names.insert(names.end(), fe_names.begin(), fe_names.end());
        LinearFit fit = fit_ols(X, y, names);
        out.r2 = fit.r2;
        for (std::size_t j = 0; j < k_reg; ++j) {
            CoefficientReport c;
            c.name = reg_names[j];
            c.estimate = fit.beta[static_cast<Eigen::Index>(j)];
            c.se = fit.se[static_cast<Eigen::Index>(j)];
            c.std_beta = sd_y > 0.0 ? c.estimate * sd_x[j] / sd_y : 0.0;
            out.coefficients.push_back(c);
        }
        return out;
    }

    // Split-IV: assemble endogenous columns (with instruments) and exogenous
    // regressors, exogenous block also carries the fixed effects.
    std::vector<std::size_t> endog_idx, exog_idx;
    for (std::size_t j = 0; j < k_reg; ++j) {
        (instrumented_flag[j] ? endog_idx : exog_idx).push_back(j);
    }
    Eigen::MatrixXd X_endog(static_cast<Eigen::Index>(n),
                            static_cast<Eigen::Index>(endog_idx.size()));
    Eigen::MatrixXd Z(static_cast<Eigen::Index>(n),
                      static_cast<Eigen::Index>(endog_idx.size()));
    for (std::size_t jj = 0; jj < endog_idx.size(); ++jj) {
        std::size_t z_pos = 0;
        for (std::size_t q = 0; q < endog_idx[jj]; ++q) {
            if (instrumented_flag[q]) ++z_pos;
        }
        for (std::size_t i = 0; i < n; ++i) {
            X_endog(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) =
                rows[i].x[endog_idx[jj]];
            Z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) = rows[i].z[z_pos];
        }
    }
    Eigen::MatrixXd X_exog(static_cast<Eigen::Index>(n),
                           static_cast<Eigen::Index>(exog_idx.size() + k_fe));
    for (std::size_t jj = 0; jj < exog_idx.size(); ++jj) {
        for (std::size_t i = 0; i < n; ++i) {
            X_exog(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(jj)) =
                rows[i].x[exog_idx[jj]];
        }
    }
    X_exog.rightCols(static_cast<Eigen::Index>(k_fe)) = FE;

    std::vector<std::string> endog_names, exog_names;
    for (std::size_t j : endog_idx) endog_names.push_back(reg_names[j]);
    for (std::size_t j : exog_idx) exog_names.push_back(reg_names[j]);
    exog_names.insert(exog_names.end(), fe_names.begin(), fe_names.end());

    TwoSlsFit fit = fit_2sls(X_endog, Z, X_exog, y, endog_names, exog_names);
    out.weak_instrument_warning = fit.weak_instrument;
    for (const auto& fs : fit.first_stages) {
        out.first_stages.push_back({fs.regressor, fs.slope, fs.se, fs.f_stat});
    }
    // Re-order coefficients back to the requested regressor order.
    for (std::size_t j = 0; j < k_reg; ++j) {
        std::size_t pos;
        if (instrumented_flag[j]) {
            pos = static_cast<std::size_t>(
                std::find(endog_idx.begin(), endog_idx.end(), j) - endog_idx.begin());
        } else {
            pos = endog_idx.size() +
                  static_cast<std::size_t>(
                      std::find(exog_idx.begin(), exog_idx.end(), j) - exog_idx.begin());
        }
        CoefficientReport c;
        c.name = reg_names[j];
        c.estimate = fit.beta[static_cast<Eigen::Index>(pos)];
        c.se = fit.se[static_cast<Eigen::Index>(pos)];
        c.std_beta = sd_y > 0.0 ? c.estimate * sd_x[j] / sd_y : 0.0;
        out.coefficients.push_back(c);
    }
    return out;
}

}  // namespace edumob
