#pragma once

// Controlled Monte Carlo experiments on the panel machinery: the
// two-regressor contamination design and the inequality/sorting/mobility
// summary battery with its mediation decomposition.

#include <cmath>
#include <random>
#include <string>
#include <vector>

#include "edumob/panel.hpp"
#include "edumob/rng.hpp"

namespace edumob {

struct ContaminationControls {
    std::size_t n_regions = 107;
    std::size_t n_periods = 6;
    std::size_t replications = 200;
    double coef_precise = 1.0;       // truth on the precisely measured regressor
    double coef_noisy = 0.5;         // truth on the noisily measured regressor
    double truth_corr = 0.6;         // correlation of the true regressors
    double sd_true = 1.0;            // dispersion of the true regressors
    double noise_sd_precise = 0.1;   // half-replicate noise SDs
    double noise_sd_noisy = 1.0;
    double resid_sd = 0.5;
    std::uint64_t seed = 1;
};

struct ContaminationReport {
    double truth_precise = 0.0, truth_noisy = 0.0;
    double ols_precise = 0.0, ols_noisy = 0.0;          // mean over replications
    double ssiv_precise = 0.0, ssiv_noisy = 0.0;        // mean over replications
    double se_ols_precise = 0.0, se_ols_noisy = 0.0;    // MC SEs of the means
    double se_ssiv_precise = 0.0, se_ssiv_noisy = 0.0;
    double oracle_ols_precise = 0.0, oracle_ols_noisy = 0.0;  // textbook plim
    std::size_t replications = 0;
};

namespace exp_detail {

// Builds one synthetic panel realization: true regressors per cell, noisy
// half replicates, and an outcome generated from the true values. Regressor
// cell values are set to the half-A replicate so that plain OLS faces exactly
// the half-level measurement noise measured by the first stage.
inline Panel contamination_panel(const ContaminationControls& c, std::uint64_t rep_seed) {
    auto rng = derive_engine(rep_seed, "contamination");
    std::normal_distribution<double> std_normal(0.0, 1.0);

    Panel panel;
    for (std::size_t t = 0; t < c.n_periods; ++t) {
        panel.period_order.push_back("p" + std::to_string(t));
    }
    const double cross = c.truth_corr;
    for (std::size_t r = 0; r < c.n_regions; ++r) {
        const std::string region = "r" + std::to_string(r);
        for (std::size_t t = 0; t < c.n_periods; ++t) {
            const double u = std_normal(rng);
            const double w = std_normal(rng);
            const double x1 = c.sd_true * u;
            const double x2 = c.sd_true * (cross * u + std::sqrt(1.0 - cross * cross) * w);
            const double alpha_t = 0.1 * static_cast<double>(t);
            const double y = alpha_t + c.coef_precise * x1 + c.coef_noisy * x2 +
                             c.resid_sd * std_normal(rng);

            auto push = [&](StatKind kind, double value, double ha, double hb) {
                RegionalStat cell;
                cell.region_id = region;
                cell.period = panel.period_order[t];
                cell.stat = kind;
                cell.value = value;
                cell.n = 1000;
                cell.half_a = ha;
                cell.half_b = hb;
                panel.cells.push_back(cell);
            };
            const double x1a = x1 + c.noise_sd_precise * std_normal(rng);
            const double x1b = x1 + c.noise_sd_precise * std_normal(rng);
            const double x2a = x2 + c.noise_sd_noisy * std_normal(rng);
            const double x2b = x2 + c.noise_sd_noisy * std_normal(rng);
            push(StatKind::igc, y, y, y);
            push(StatKind::sd_father, x1a, x1a, x1b);
            push(StatKind::am, x2a, x2a, x2b);
        }
    }
    panel.rebuild_index();
    return panel;
}

}  // namespace exp_detail

// Two-regressor error-in-variables experiment: one precise (SD-like), one
// noisy (AM-like) regressor with correlated truths. Reports mean OLS and
// split-IV coefficients over replications next to the textbook OLS limit
//   plim b_OLS = (Sigma_true + Sigma_noise)^-1 Sigma_true beta.
inline ContaminationReport contamination_experiment(const ContaminationControls& c) {
    ContaminationReport rep;
    rep.truth_precise = c.coef_precise;
    rep.truth_noisy = c.coef_noisy;
    rep.replications = c.replications;

    std::vector<double> ols1, ols2, ssiv1, ssiv2;
    for (std::size_t k = 0; k < c.replications; ++k) {
        const std::uint64_t rep_seed = StreamKey(c.seed).mix("rep").mix(k).value();
        Panel panel = exp_detail::contamination_panel(c, rep_seed);

        RegressionSpec ols;
        ols.name = "contamination_ols";
        ols.dependent = StatKind::igc;
        ols.regressors = {{StatKind::sd_father, false}, {StatKind::am, false}};
        RegressionResult r_ols = regress(ols, panel);

        RegressionSpec iv = ols;
        iv.name = "contamination_ssiv";
        iv.estimator = EstimatorKind::split_iv;
        iv.instrumented = {StatKind::sd_father, StatKind::am};
        RegressionResult r_iv = regress(iv, panel);

        ols1.push_back(r_ols.coefficients[0].estimate);
        ols2.push_back(r_ols.coefficients[1].estimate);
        ssiv1.push_back(r_iv.coefficients[0].estimate);
        ssiv2.push_back(r_iv.coefficients[1].estimate);
    }

    auto mean_se = [](const std::vector<double>& v, double& mean, double& se) {
        mean = 0.0;
        for (double x : v) mean += x;
        mean /= static_cast<double>(v.size());
        double ss = 0.0;
        for (double x : v) ss += (x - mean) * (x - mean);
        se = std::sqrt(ss / static_cast<double>(v.size() - 1) /
                       static_cast<double>(v.size()));
    };
    mean_se(ols1, rep.ols_precise, rep.se_ols_precise);
    mean_se(ols2, rep.ols_noisy, rep.se_ols_noisy);
    mean_se(ssiv1, rep.ssiv_precise, rep.se_ssiv_precise);
    mean_se(ssiv2, rep.ssiv_noisy, rep.se_ssiv_noisy);

    // Textbook limit for OLS with independent measurement error.
    const double v = c.sd_true * c.sd_true;
    const double cov = c.truth_corr * v;
    const double n1 = c.noise_sd_precise * c.noise_sd_precise;
    const double n2 = c.noise_sd_noisy * c.noise_sd_noisy;
    const double a = v + n1, b = cov, d = v + n2;
    const double det = a * d - b * b;
    const double g1 = c.coef_precise * v + c.coef_noisy * cov;
    const double g2 = c.coef_precise * cov + c.coef_noisy * v;
    rep.oracle_ols_precise = (d * g1 - b * g2) / det;
    rep.oracle_ols_noisy = (-b * g1 + a * g2) / det;
    return rep;
}

struct GatsbyReport {
    std::vector<RegressionResult> regressions;
    double mediation_total = std::numeric_limits<double>::quiet_NaN();
    double mediation_direct = std::numeric_limits<double>::quiet_NaN();
    double mediation_share = std::numeric_limits<double>::quiet_NaN();
    // Set when the spousal-correlation instrument is too weak (first-stage
    // F < 4) to identify the conditional coefficient; the share is then
    // reported as zero, since conditioning on an unidentified regressor
    // cannot absorb any of the association.
    bool mediation_weak_instrument = false;
};

// Inequality/mobility battery: mobility on the father-generation mean and
// dispersion in levels and in first differences, OLS and split-IV, plus the
// share of the dispersion-mobility association that conditioning on the
// spousal correlation absorbs under split-IV.
inline GatsbyReport gatsby_summary(const Panel& panel) {
    GatsbyReport out;

    auto run = [&](const std::string& name, std::vector<RegressorSpec> regs, Design design,
                   EstimatorKind est) {
        RegressionSpec spec;
        spec.name = name;
        spec.dependent = StatKind::igc;
        spec.regressors = std::move(regs);
        spec.design = design;
        spec.estimator = est;
        if (est == EstimatorKind::split_iv) {
            for (const auto& r : spec.regressors) spec.instrumented.push_back(r.stat);
        }
        out.regressions.push_back(regress(spec, panel));
        return &out.regressions.back();
    };

    run("gg_levels_mean", {{StatKind::mean_father, false}}, Design::levels,
        EstimatorKind::ols);
    run("gg_levels_mean_sd", {{StatKind::mean_father, false}, {StatKind::sd_father, false}},
        Design::levels, EstimatorKind::ols);
    run("gg_levels_mean_sd_ssiv",
        {{StatKind::mean_father, false}, {StatKind::sd_father, false}}, Design::levels,
        EstimatorKind::split_iv);
    run("gg_changes_mean", {{StatKind::mean_father, false}}, Design::first_difference,
        EstimatorKind::ols);
    run("gg_changes_mean_sd", {{StatKind::mean_father, false}, {StatKind::sd_father, false}},
        Design::first_difference, EstimatorKind::ols);
    run("gg_changes_mean_sd_ssiv",
        {{StatKind::mean_father, false}, {StatKind::sd_father, false}},
        Design::first_difference, EstimatorKind::split_iv);

    const RegressionResult* total = run("gg_sd_total_ssiv", {{StatKind::sd_father, false}},
                                        Design::levels, EstimatorKind::split_iv);
    out.mediation_total = total->coefficients[0].estimate;
    const RegressionResult* direct =
        run("gg_sd_am_ssiv", {{StatKind::sd_father, false}, {StatKind::am, false}},
            Design::levels, EstimatorKind::split_iv);
    double am_f = 0.0;
    for (const auto& fs : direct->first_stages) {
        if (fs.regressor == std::string(stat_kind_label(StatKind::am))) am_f = fs.f_stat;
    }
    if (am_f < 4.0) {
        out.mediation_weak_instrument = true;
        out.mediation_direct = out.mediation_total;
        out.mediation_share = 0.0;
    } else {
        out.mediation_direct = direct->coefficients[0].estimate;
        if (out.mediation_total != 0.0) {
            out.mediation_share = 1.0 - out.mediation_direct / out.mediation_total;
        }
    }
    return out;
}

}  // namespace edumob
