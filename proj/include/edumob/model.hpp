#pragma once

// Overlapping-generations model of assortative mating, inequality, and
// educational transmission. Closed forms for the one-generation maps plus a
// deterministic dynamics iterator with an inequality -> sorting feedback.

#include <cmath>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace edumob {

struct ModelParams {
    double lambda;      // transmission strength, in (0,1)
    double rho;         // assortative-mating parameter, in [0,1]
    double sigma_eps2;  // idiosyncratic shock variance (years^2)
    double mu;          // mean education (years)

    void validate() const {
        if (!std::isfinite(lambda) || !std::isfinite(rho) || !std::isfinite(sigma_eps2) ||
            !std::isfinite(mu)) {
            throw std::invalid_argument("ModelParams: parameters must be finite");
        }
        if (!(lambda > 0.0 && lambda < 1.0)) {
            throw std::invalid_argument("ModelParams: lambda must lie in (0,1), got " +
                                        std::to_string(lambda));
        }
        if (!(rho >= 0.0 && rho <= 1.0)) {
            throw std::invalid_argument("ModelParams: rho must lie in [0,1], got " +
                                        std::to_string(rho));
        }
        if (!(sigma_eps2 >= 0.0)) {
            throw std::invalid_argument("ModelParams: sigma_eps2 must be >= 0");
        }
    }
};

enum class FeedbackKind { constant, linear_clipped, logistic };

// Maps current education variance to the sorting parameter used when the
// generation forms couples. All variants clip to [0,1] and are monotone
// non-decreasing in the variance.
struct FeedbackSpec {
    FeedbackKind kind = FeedbackKind::constant;
    double level = 0.0;      // constant
    double intercept = 0.0;  // linear_clipped: intercept + slope * sigma2
    double slope = 0.0;
    double max_rho = 1.0;  // logistic: max_rho / (1 + exp(-steepness*(sigma2 - midpoint)))
    double steepness = 0.0;
    double midpoint = 0.0;

    static FeedbackSpec constant(double rho) {
        FeedbackSpec f;
        f.kind = FeedbackKind::constant;
        f.level = rho;
        return f;
    }
    static FeedbackSpec linear(double intercept, double slope) {
        FeedbackSpec f;
        f.kind = FeedbackKind::linear_clipped;
        f.intercept = intercept;
        f.slope = slope;
        return f;
    }
    static FeedbackSpec logistic(double max_rho, double steepness, double midpoint) {
        FeedbackSpec f;
        f.kind = FeedbackKind::logistic;
        f.max_rho = max_rho;
        f.steepness = steepness;
        f.midpoint = midpoint;
        return f;
    }

    void validate() const {
        switch (kind) {
            case FeedbackKind::constant:
                if (!(level >= 0.0 && level <= 1.0)) {
                    throw std::invalid_argument("FeedbackSpec: constant level must lie in [0,1]");
                }
                break;
            case FeedbackKind::linear_clipped:
                if (!std::isfinite(intercept) || !std::isfinite(slope) || slope < 0.0) {
                    throw std::invalid_argument(
                        "FeedbackSpec: linear feedback needs finite intercept and slope >= 0");
                }
                break;
            case FeedbackKind::logistic:
                if (!(max_rho >= 0.0 && max_rho <= 1.0) || !(steepness >= 0.0) ||
                    !std::isfinite(midpoint)) {
                    throw std::invalid_argument(
                        "FeedbackSpec: logistic feedback needs max_rho in [0,1], steepness >= 0");
                }
                break;
        }
    }

    double rho_at(double sigma2) const {
        double r = 0.0;
        switch (kind) {
            case FeedbackKind::constant:
                r = level;
                break;
            case FeedbackKind::linear_clipped:
                r = intercept + slope * sigma2;
                break;
            case FeedbackKind::logistic:
                r = max_rho / (1.0 + std::exp(-steepness * (sigma2 - midpoint)));
                break;
        }
        if (r < 0.0) r = 0.0;
        if (r > 1.0) r = 1.0;
        return r;
    }
};

struct GenerationMoments {
    int t = 0;
    double mean = 0.0;            // years
    double variance = 0.0;        // years^2
    double rho_used = 0.0;        // sorting applied when this generation formed couples
    double slope_to_child = 0.0;  // parent-child regression slope produced by this generation
};

// Expected spouse education given own education.
inline double spouse_conditional_mean(double e_i, const ModelParams& p) {
    p.validate();
    return p.mu + p.rho * (e_i - p.mu);
}

// One-generation variance map: lambda^2 (1+rho)/2 sigma_t^2 + sigma_eps^2.
inline double variance_recursion(double sigma_t2, const ModelParams& p) {
    p.validate();
    if (!(sigma_t2 >= 0.0)) {
        throw std::invalid_argument("variance_recursion: sigma_t2 must be >= 0");
    }
    return p.lambda * p.lambda * (1.0 + p.rho) / 2.0 * sigma_t2 + p.sigma_eps2;
}

// Regression slope of child education on one parent's education.
inline double theoretical_parent_child_slope(const ModelParams& p) {
    p.validate();
    return p.lambda * (1.0 + p.rho) / 2.0;
}

// Match utility: sum of the partners' education plus the match-specific draw.
inline double match_utility(double e_i, double e_j, double ell) { return e_i + e_j + ell; }

// Fixed point of the variance map; requires the contraction condition.
inline double steady_state_variance(const ModelParams& p) {
    p.validate();
    const double a = p.lambda * p.lambda * (1.0 + p.rho) / 2.0;
    if (!(a < 1.0)) {
        throw std::invalid_argument("steady_state_variance: lambda^2 (1+rho)/2 must be < 1");
    }
    return p.sigma_eps2 / (1.0 - a);
}

struct DynamicsOptions {
    double sigma0_2 = 1.0;       // initial education variance
    bool hold_mean_fixed = true; // if false, mu' = lambda * mu + mean_drift
    double mean_drift = 0.0;
};

// Iterates rho_t = g(sigma_t^2) followed by the variance recursion, recording
// one moments row per generation. The transmission strength may vary by
// generation through lambda_path; entry t applies to generation t.
inline std::vector<GenerationMoments> simulate_dynamics_path(std::span<const double> lambda_path,
                                                             const ModelParams& base,
                                                             const FeedbackSpec& feedback,
                                                             const DynamicsOptions& opt = {}) {
    base.validate();
    feedback.validate();
    if (lambda_path.empty()) {
        throw std::invalid_argument("simulate_dynamics: need at least one generation");
    }
    if (!std::isfinite(opt.sigma0_2) || opt.sigma0_2 < 0.0 || !std::isfinite(opt.mean_drift)) {
        throw std::invalid_argument("simulate_dynamics: non-finite or negative initial state");
    }

    std::vector<GenerationMoments> out;
    out.reserve(lambda_path.size());
    double sigma2 = opt.sigma0_2;
    double mu = base.mu;
    for (std::size_t t = 0; t < lambda_path.size(); ++t) {
        ModelParams p = base;
        p.lambda = lambda_path[t];
        p.rho = feedback.rho_at(sigma2);
        p.mu = mu;
        p.validate();

        GenerationMoments m;
        m.t = static_cast<int>(t);
        m.mean = mu;
        m.variance = sigma2;
        m.rho_used = p.rho;
        m.slope_to_child = theoretical_parent_child_slope(p);
        out.push_back(m);

        sigma2 = variance_recursion(sigma2, p);
        if (!opt.hold_mean_fixed) {
            mu = p.lambda * mu + opt.mean_drift;
        }
    }
    return out;
}

inline std::vector<GenerationMoments> simulate_dynamics(const ModelParams& params0,
                                                        const FeedbackSpec& feedback, int T,
                                                        const DynamicsOptions& opt = {}) {
    if (T < 1) {
        throw std::invalid_argument("simulate_dynamics: T must be >= 1");
    }
    std::vector<double> lambdas(static_cast<std::size_t>(T), params0.lambda);
    return simulate_dynamics_path(lambdas, params0, feedback, opt);
}

}  // namespace edumob
