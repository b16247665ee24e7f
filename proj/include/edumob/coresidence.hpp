#pragma once

// Coresidence-bias laboratory: censoring-vs-selection decompositions by age
// of measurement, the dependency-rate mean decomposition, the Hilger
// shift-correction for the conditional expectation function, and the
// parallel-trends diagnostic regression.

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "edumob/estimators.hpp"
#include "edumob/population.hpp"
#include "edumob/regression.hpp"

namespace edumob {

// Signed and absolute gaps between the dependent-only mobility statistic at a
// measurement age and the everyone-included benchmark, averaged over
// fictitious survey years (survey year = cohort + age).
struct BiasReport {
    int age = 0;
    std::string period;
    double diff_igc = 0.0;
    double abs_diff_igc = 0.0;
    double diff_mean = 0.0;
    double abs_diff_mean = 0.0;
    double coresidence_share = 0.0;
    std::size_t n_dep = 0;
    std::size_t n_all = 0;
    std::size_t n_years = 0;
};

// Weighted mean of the dependent and independent group means.
inline double decompose_group_mean(double d, double y_dep, double y_indep) {
    if (!(d >= 0.0 && d <= 1.0)) {
        throw std::invalid_argument("decompose_group_mean: dependency rate outside [0,1]");
    }
    return d * y_dep + (1.0 - d) * y_indep;
}

struct HilgerGroup {
    double group_edu = 0.0;         // parental education level defining the group
    double y_dep = 0.0;             // mean schooling of dependent children in the group
    std::size_t n_dep = 0;
    double est_share_indep = 0.0;   // estimated share of independents in this group
};

struct HilgerInputs {
    std::vector<HilgerGroup> groups;
    double y_indep = 0.0;   // overall mean schooling of independent children
    std::size_t n_indep = 0;

    void validate() const {
        if (groups.empty()) {
            throw std::invalid_argument("HilgerInputs: no parental groups");
        }
        double share_sum = 0.0;
        for (const auto& g : groups) {
            share_sum += g.est_share_indep;
            if (g.est_share_indep < -1e-12) {
                throw std::invalid_argument("HilgerInputs: negative group share");
            }
        }
        if (std::abs(share_sum - 1.0) > 1e-9) {
            throw std::invalid_argument("HilgerInputs: group shares sum to " +
                                        format_double(share_sum) + ", expected 1");
        }
    }
};

// Level shift of the independents' CEF: overall independent mean minus the
// share-weighted dependent group means.
inline double estimate_rho_hat(const HilgerInputs& in) {
    in.validate();
    if (in.n_indep == 0) {
        throw std::invalid_argument("estimate_rho_hat: empty independent sample");
    }
    double weighted = 0.0;
    for (const auto& g : in.groups) {
        weighted += g.est_share_indep * g.y_dep;
    }
    return in.y_indep - weighted;
}

struct HilgerCorrected {
    std::vector<std::pair<double, double>> group_means;  // (group education, corrected mean)
    double corrected_igr = 0.0;
    bool dropped_groups = false;
    std::vector<double> dropped;  // group education levels without dependents
};

// Rebuilds each parental group's mean as d*y_dep + (1-d)*(y_dep + rho_hat),
// with the dependency rate implied by the estimated independent counts, then
// fits the group-count-weighted slope of corrected means on group education.
inline HilgerCorrected hilger_corrected_cef(const HilgerInputs& in, double rho_hat) {
    in.validate();
    if (!std::isfinite(rho_hat)) {
        throw std::invalid_argument("hilger_corrected_cef: rho_hat must be finite");
    }
    HilgerCorrected out;
    double sw = 0.0, swx = 0.0, swy = 0.0;
    std::vector<std::pair<double, double>> pts;  // (x, y) with weights below
    std::vector<double> weights;
    for (const auto& g : in.groups) {
        const double n_indep_g = g.est_share_indep * static_cast<double>(in.n_indep);
        if (g.n_dep == 0) {
            if (n_indep_g > 0.0) {
                out.dropped_groups = true;
                out.dropped.push_back(g.group_edu);
            }
            continue;
        }
        const double n_total = static_cast<double>(g.n_dep) + n_indep_g;
        const double d = static_cast<double>(g.n_dep) / n_total;
        const double corrected = decompose_group_mean(d, g.y_dep, g.y_dep + rho_hat);
        out.group_means.emplace_back(g.group_edu, corrected);
        pts.emplace_back(g.group_edu, corrected);
        weights.push_back(n_total);
        sw += n_total;
        swx += n_total * g.group_edu;
        swy += n_total * corrected;
    }
    if (pts.size() < 2) {
        throw std::invalid_argument("hilger_corrected_cef: fewer than two usable groups");
    }
    const double mx = swx / sw, my = swy / sw;
    double sxx = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < pts.size(); ++i) {
        const double dx = pts[i].first - mx;
        sxx += weights[i] * dx * dx;
        sxy += weights[i] * dx * (pts[i].second - my);
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("hilger_corrected_cef: degenerate group education values");
    }
    out.corrected_igr = sxy / sxx;
    return out;
}

// Assembles the correction inputs from an observed frame: dependent group
// means at the target age plus group shares proxied from the younger cohort
// of the same survey year (smooth-cohorts assumption).
inline std::optional<HilgerInputs> build_hilger_inputs(const Microdata& population,
                                                       int survey_year, int age, int proxy_age,
                                                       const CompletionProfile& profile = {}) {
    ObservationRule target_rule{"hilger_target", age, false, survey_year};
    Microdata target = observe(population, target_rule, profile);
    if (target.empty()) return std::nullopt;

    ObservationRule proxy_rule{"hilger_proxy", proxy_age, false, survey_year};
    Microdata proxy = observe(population, proxy_rule, profile);
    if (proxy.empty()) return std::nullopt;

    // Group shares among all children of the proxy cohort.
    std::map<double, double> proxy_share;
    std::size_t proxy_n = 0;
    for (const auto& r : proxy.rows) {
        if (!r.father_edu) continue;
        proxy_share[*r.father_edu] += 1.0;
        ++proxy_n;
    }
    if (proxy_n == 0) return std::nullopt;
    for (auto& [g, v] : proxy_share) v /= static_cast<double>(proxy_n);

    std::map<double, std::pair<double, std::size_t>> dep_sum;  // group -> (sum, n)
    double indep_sum = 0.0;
    std::size_t n_dep_total = 0, n_indep = 0;
    for (const auto& r : target.rows) {
        const bool dependent = r.leave_home_age > age;
        if (dependent) {
            if (!r.father_edu) continue;
            auto& acc = dep_sum[*r.father_edu];
            acc.first += r.edu_years;
            acc.second += 1;
            ++n_dep_total;
        } else {
            // Independents contribute only their own schooling; their parental
            // group is treated as unobserved.
            indep_sum += r.edu_years;
            ++n_indep;
        }
    }
    if (n_indep == 0 || n_dep_total == 0) return std::nullopt;

    // Estimated independents per group: proxy share of the full target cohort
    // minus the observed dependents, floored at zero.
    const double n_total = static_cast<double>(n_dep_total + n_indep);
    std::map<double, double> n_indep_g;
    double indep_total_est = 0.0;
    std::set<double> group_levels;
    for (const auto& [g, s] : proxy_share) group_levels.insert(g);
    for (const auto& [g, acc] : dep_sum) group_levels.insert(g);
    for (double g : group_levels) {
        const double share = proxy_share.count(g) ? proxy_share.at(g) : 0.0;
        const double est_all = share * n_total;
        const double dep_n =
            dep_sum.count(g) ? static_cast<double>(dep_sum.at(g).second) : 0.0;
        const double est = std::max(est_all - dep_n, 0.0);
        n_indep_g[g] = est;
        indep_total_est += est;
    }
    if (indep_total_est <= 0.0) return std::nullopt;

    HilgerInputs in;
    in.y_indep = indep_sum / static_cast<double>(n_indep);
    in.n_indep = n_indep;
    for (double g : group_levels) {
        HilgerGroup grp;
        grp.group_edu = g;
        if (dep_sum.count(g)) {
            grp.y_dep = dep_sum.at(g).first / static_cast<double>(dep_sum.at(g).second);
            grp.n_dep = dep_sum.at(g).second;
        }
        grp.est_share_indep = n_indep_g.at(g) / indep_total_est;
        in.groups.push_back(grp);
    }
    return in;
}

struct ParallelTrendsFit {
    double alpha = 0.0, beta = 0.0, rho = 0.0, gamma = 0.0;
    double se_alpha = 0.0, se_beta = 0.0, se_rho = 0.0, se_gamma = 0.0;
    std::size_t n = 0;
};

// Regression of child schooling on parental schooling, an independence
// indicator, and their interaction; gamma measures the slope difference that
// the parallel-trends assumption requires to vanish.
inline ParallelTrendsFit parallel_trends_test(const Microdata& observed, int age) {
    std::vector<double> y, x;
    std::vector<int> indep;
    for (const auto& r : observed.rows) {
        if (!r.father_edu) continue;
        y.push_back(r.edu_years);
        x.push_back(*r.father_edu);
        indep.push_back(r.leave_home_age <= age ? 1 : 0);
    }
    const std::size_t n = y.size();
    if (n < 5) {
        throw std::invalid_argument("parallel_trends_test: not enough rows with parental data");
    }
    Eigen::MatrixXd X(static_cast<Eigen::Index>(n), 4);
    Eigen::VectorXd Y(static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        X(static_cast<Eigen::Index>(i), 0) = 1.0;
        X(static_cast<Eigen::Index>(i), 1) = x[i];
        X(static_cast<Eigen::Index>(i), 2) = indep[i];
        X(static_cast<Eigen::Index>(i), 3) = x[i] * indep[i];
        Y(static_cast<Eigen::Index>(i)) = y[i];
    }
    LinearFit fit = fit_ols(X, Y, {"intercept", "parent_edu", "independent",
                                   "parent_edu*independent"});
    ParallelTrendsFit out;
    out.alpha = fit.beta[0];
    out.beta = fit.beta[1];
    out.rho = fit.beta[2];
    out.gamma = fit.beta[3];
    out.se_alpha = fit.se[0];
    out.se_beta = fit.se[1];
    out.se_rho = fit.se[2];
    out.se_gamma = fit.se[3];
    out.n = fit.n;
    return out;
}

struct BiasLabWindow {
    std::string label;
    int year_from = 0;
    int year_to = 0;  // inclusive, fictitious survey years
};

// Diff / AbsDiff curves by age of measurement: for each fictitious survey
// year, the dependent-only statistic at the given age is compared with the
// everyone-included benchmark at the benchmark age. By default the benchmark
// shares the survey year (so it describes an earlier cohort, as in household
// surveys); benchmark_same_cohort instead follows the age-a cohort to the
// benchmark age, which makes the no-censoring no-selection case exactly zero.
inline std::vector<BiasReport> bias_by_age(const Microdata& population,
                                           const std::vector<int>& ages, int benchmark_age,
                                           const std::vector<BiasLabWindow>& windows,
                                           const CompletionProfile& profile = {},
                                           int threads = 1,
                                           bool benchmark_same_cohort = false) {
    struct Cell {
        bool ok = false;
        double diff_igc = 0.0, diff_mean = 0.0, share = 0.0;
        std::size_t n_dep = 0, n_all = 0;
    };

    // Benchmark survey years needed, shared across ages; compute once.
    std::map<int, std::pair<double, double>> benchmark;  // year -> (igc, mean)
    std::map<int, std::size_t> benchmark_n;
    int year_lo = windows.front().year_from, year_hi = windows.front().year_to;
    for (const auto& w : windows) {
        year_lo = std::min(year_lo, w.year_from);
        year_hi = std::max(year_hi, w.year_to);
    }
    int bench_lo = year_lo, bench_hi = year_hi;
    if (benchmark_same_cohort) {
        for (int age : ages) {
            bench_lo = std::min(bench_lo, year_lo - age + benchmark_age);
            bench_hi = std::max(bench_hi, year_hi - age + benchmark_age);
        }
    }
    for (int y = bench_lo; y <= bench_hi; ++y) {
        ObservationRule rule{"benchmark", benchmark_age, false, y};
        Microdata bench = observe(population, rule, profile);
        std::vector<double> child, parent;
        for (const auto& r : bench.rows) {
            if (!r.father_edu) continue;
            child.push_back(r.edu_years);
            parent.push_back(*r.father_edu);
        }
        if (child.size() < 3) continue;
        try {
            StatResult r = igc(child, parent);
            double mean = 0.0;
            for (double v : child) mean += v;
            mean /= static_cast<double>(child.size());
            benchmark[y] = {r.value, mean};
            benchmark_n[y] = child.size();
        } catch (const std::invalid_argument&) {
            continue;
        }
    }

    std::vector<std::pair<int, int>> tasks;  // (age, year)
    for (int age : ages) {
        for (int y = year_lo; y <= year_hi; ++y) tasks.emplace_back(age, y);
    }
    std::vector<Cell> cells(tasks.size());
    pop_detail::parallel_for(tasks.size(), threads, [&](std::size_t i) {
        const auto [age, y] = tasks[i];
        const int bench_year = benchmark_same_cohort ? y - age + benchmark_age : y;
        auto bench_it = benchmark.find(bench_year);
        if (bench_it == benchmark.end()) return;
        ObservationRule dep_rule{"dep", age, true, y};
        Microdata dep = observe(population, dep_rule, profile);
        ObservationRule all_rule{"all", age, false, y};
        Microdata all = observe(population, all_rule, profile);
        if (all.empty()) return;
        std::vector<double> child, parent;
        for (const auto& r : dep.rows) {
            if (!r.father_edu) continue;
            child.push_back(r.edu_years);
            parent.push_back(*r.father_edu);
        }
        if (child.size() < 3) return;
        try {
            StatResult r = igc(child, parent);
            double mean = 0.0;
            for (double v : child) mean += v;
            mean /= static_cast<double>(child.size());
            Cell& c = cells[i];
            c.ok = true;
            c.diff_igc = r.value - bench_it->second.first;
            c.diff_mean = mean - bench_it->second.second;
            c.share = static_cast<double>(dep.size()) / static_cast<double>(all.size());
            c.n_dep = child.size();
            c.n_all = benchmark_n.at(bench_year);
        } catch (const std::invalid_argument&) {
        }
    });

    std::vector<BiasReport> out;
    for (const auto& w : windows) {
        for (int age : ages) {
            BiasReport rep;
            rep.age = age;
            rep.period = w.label;
            for (std::size_t i = 0; i < tasks.size(); ++i) {
                const auto [a, y] = tasks[i];
                if (a != age || y < w.year_from || y > w.year_to || !cells[i].ok) continue;
                rep.diff_igc += cells[i].diff_igc;
                rep.abs_diff_igc += std::abs(cells[i].diff_igc);
                rep.diff_mean += cells[i].diff_mean;
                rep.abs_diff_mean += std::abs(cells[i].diff_mean);
                rep.coresidence_share += cells[i].share;
                rep.n_dep += cells[i].n_dep;
                rep.n_all += cells[i].n_all;
                ++rep.n_years;
            }
            if (rep.n_years == 0) continue;
            const double t = static_cast<double>(rep.n_years);
            rep.diff_igc /= t;
            rep.abs_diff_igc /= t;
            rep.diff_mean /= t;
            rep.abs_diff_mean /= t;
            rep.coresidence_share /= t;
            out.push_back(rep);
        }
    }
    return out;
}

inline CsvTable bias_reports_to_csv(const std::vector<BiasReport>& reports) {
    CsvTable t;
    t.header = {"age",    "period", "diff_igc", "abs_diff_igc", "coresidence_share",
                "n_dep",  "n_all"};
    for (const auto& r : reports) {
        t.rows.push_back({format_int(r.age), r.period, format_double(r.diff_igc),
                          format_double(r.abs_diff_igc), format_double(r.coresidence_share),
                          format_uint(r.n_dep), format_uint(r.n_all)});
    }
    return t;
}

struct HilgerComparisonRow {
    int age = 0;
    int survey_year = 0;
    double igr_dependent = 0.0;
    double igr_corrected = 0.0;
    double igr_benchmark = 0.0;  // everyone included, at the benchmark age
    double rho_hat = 0.0;
};

// Three-series comparison per (age, survey year): raw dependent-only IGR,
// Hilger-corrected IGR, and the everyone-included benchmark.
inline std::vector<HilgerComparisonRow> hilger_comparison(
    const Microdata& population, const std::vector<int>& ages, int benchmark_age, int year_from,
    int year_to, int proxy_age = 16, const CompletionProfile& profile = {}) {
    std::vector<HilgerComparisonRow> out;
    for (int age : ages) {
        for (int y = year_from; y <= year_to; ++y) {
            ObservationRule dep_rule{"dep", age, true, y};
            Microdata dep = observe(population, dep_rule, profile);
            std::vector<double> child, parent;
            for (const auto& r : dep.rows) {
                if (!r.father_edu) continue;
                child.push_back(r.edu_years);
                parent.push_back(*r.father_edu);
            }
            ObservationRule bench_rule{"bench", benchmark_age, false, y};
            Microdata bench = observe(population, bench_rule, profile);
            std::vector<double> bchild, bparent;
            for (const auto& r : bench.rows) {
                if (!r.father_edu) continue;
                bchild.push_back(r.edu_years);
                bparent.push_back(*r.father_edu);
            }
            auto inputs = build_hilger_inputs(population, y, age, proxy_age, profile);
            if (child.size() < 3 || bchild.size() < 3 || !inputs) continue;
            try {
                HilgerComparisonRow row;
                row.age = age;
                row.survey_year = y;
                row.igr_dependent = igr(child, parent).value;
                row.igr_benchmark = igr(bchild, bparent).value;
                row.rho_hat = estimate_rho_hat(*inputs);
                row.igr_corrected = hilger_corrected_cef(*inputs, row.rho_hat).corrected_igr;
                out.push_back(row);
            } catch (const std::invalid_argument&) {
                continue;
            }
        }
    }
    return out;
}

inline CsvTable hilger_comparison_to_csv(const std::vector<HilgerComparisonRow>& rows) {
    CsvTable t;
    t.header = {"age", "survey_year", "igr_dependent", "igr_corrected", "igr_benchmark",
                "rho_hat"};
    for (const auto& r : rows) {
        t.rows.push_back({format_int(r.age), format_int(r.survey_year),
                          format_double(r.igr_dependent), format_double(r.igr_corrected),
                          format_double(r.igr_benchmark), format_double(r.rho_hat)});
    }
    return t;
}

}  // namespace edumob
