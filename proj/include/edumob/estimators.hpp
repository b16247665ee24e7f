#pragma once

// Distributional statistics: mean/SD/CV, intergenerational correlation (IGC)
// and regression coefficient (IGR), Spearman rank correlation, spousal
// correlation under an age rule, and 3-year moving averages.
//
// Standard errors: analytic for means and slopes, delete-one jackknife for
// correlations.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <numeric>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "edumob/microdata.hpp"

namespace edumob {

struct StatResult {
    double value = 0.0;
    std::size_t n = 0;
    double se = 0.0;
};

struct MeanSd {
    double mean = 0.0;
    double sd = 0.0;
};

struct MeanSdCv {
    double mean = 0.0;
    double sd = 0.0;
    double cv = 0.0;
};

inline MeanSd mean_sd(std::span<const double> x) {
    if (x.size() < 2) {
        throw std::invalid_argument("mean_sd: need at least 2 observations");
    }
    double sum = 0.0;
    for (double v : x) sum += v;
    const double mean = sum / static_cast<double>(x.size());
    double ss = 0.0;
    for (double v : x) {
        const double d = v - mean;
        ss += d * d;
    }
    return {mean, std::sqrt(ss / static_cast<double>(x.size() - 1))};
}

inline MeanSdCv mean_sd_cv(std::span<const double> x) {
    MeanSd ms = mean_sd(x);
    if (ms.mean == 0.0) {
        throw std::invalid_argument("mean_sd_cv: CV undefined, mean is zero");
    }
    return {ms.mean, ms.sd, ms.sd / ms.mean};
}

namespace detail {

// Centered sums shared by the correlation and slope estimators. Centering
// once keeps the leave-one-out updates numerically stable.
struct PairSums {
    std::vector<double> a;  // x - mean(x)
    std::vector<double> b;  // y - mean(y)
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    double sa = 0.0, sb = 0.0;  // residual sums of the centered values (~0)
};

inline PairSums centered_sums(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();
    PairSums s;
    s.a.resize(n);
    s.b.resize(n);
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) mx += x[i];
    for (std::size_t i = 0; i < n; ++i) my += y[i];
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.a[i] = x[i] - mx;
        s.b[i] = y[i] - my;
        s.sa += s.a[i];
        s.sb += s.b[i];
        s.sxx += s.a[i] * s.a[i];
        s.syy += s.b[i] * s.b[i];
        s.sxy += s.a[i] * s.b[i];
    }
    return s;
}

inline void require_pair(std::span<const double> x, std::span<const double> y,
                         std::string_view op) {
    if (x.size() != y.size()) {
        throw std::invalid_argument(std::string(op) + ": vectors must have equal length");
    }
    if (x.size() < 3) {
        throw std::invalid_argument(std::string(op) + ": need at least 3 observations");
    }
}

// Jackknife SE of the correlation from leave-one-out replicates computed via
// sum updates; O(n).
inline double correlation_jackknife_se(const PairSums& s) {
    const std::size_t n = s.a.size();
    const double dn1 = static_cast<double>(n - 1);
    std::vector<double> reps(n);
    for (std::size_t i = 0; i < n; ++i) {
        const double ai = s.a[i], bi = s.b[i];
        const double sa = s.sa - ai, sb = s.sb - bi;
        const double sxx = s.sxx - ai * ai - sa * sa / dn1;
        const double syy = s.syy - bi * bi - sb * sb / dn1;
        const double sxy = s.sxy - ai * bi - sa * sb / dn1;
        const double denom = std::sqrt(sxx * syy);
        reps[i] = denom > 0.0 ? sxy / denom : 0.0;
    }
    double rbar = 0.0;
    for (double r : reps) rbar += r;
    rbar /= static_cast<double>(n);
    double ss = 0.0;
    for (double r : reps) {
        const double d = r - rbar;
        ss += d * d;
    }
    return std::sqrt(dn1 / static_cast<double>(n) * ss);
}

}  // namespace detail

// Pearson correlation between child and parent schooling, jackknife SE.
inline StatResult igc(std::span<const double> child, std::span<const double> parent) {
    detail::require_pair(child, parent, "igc");
    auto s = detail::centered_sums(parent, child);
    if (!(s.sxx > 0.0) || !(s.syy > 0.0)) {
        throw std::invalid_argument("igc: degenerate variance in child or parent vector");
    }
    StatResult out;
    out.n = child.size();
    out.value = s.sxy / std::sqrt(s.sxx * s.syy);
    out.se = detail::correlation_jackknife_se(s);
    return out;
}

// OLS slope of child schooling on parent schooling, analytic SE. Satisfies
// igr == igc * sd(child)/sd(parent) up to rounding.
inline StatResult igr(std::span<const double> child, std::span<const double> parent) {
    detail::require_pair(child, parent, "igr");
    auto s = detail::centered_sums(parent, child);
    if (!(s.sxx > 0.0)) {
        throw std::invalid_argument("igr: degenerate variance in parent vector");
    }
    StatResult out;
    out.n = child.size();
    out.value = s.sxy / s.sxx;
    const double rss = s.syy - s.sxy * s.sxy / s.sxx;
    const double dof = static_cast<double>(child.size() - 2);
    out.se = dof > 0.0 ? std::sqrt(std::max(rss, 0.0) / dof / s.sxx) : 0.0;
    return out;
}

// Average ranks (midranks), 1-based; ties share the mean of their positions.
inline std::vector<double> midranks(std::span<const double> x) {
    const std::size_t n = x.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return x[i] < x[j]; });
    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j + 1 < n && x[order[j + 1]] == x[order[i]]) ++j;
        const double r = (static_cast<double>(i) + static_cast<double>(j)) / 2.0 + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = r;
        i = j + 1;
    }
    return ranks;
}

namespace detail {

inline double pearson_value(std::span<const double> x, std::span<const double> y) {
    auto s = centered_sums(x, y);
    if (!(s.sxx > 0.0) || !(s.syy > 0.0)) {
        throw std::invalid_argument("correlation: degenerate variance");
    }
    return s.sxy / std::sqrt(s.sxx * s.syy);
}

// Leave-one-out Spearman replicates. With few distinct values (grid data)
// replicates only depend on which cell the deleted observation occupies, so
// the contingency table gives all of them cheaply; otherwise fall back to
// direct recomputation.
inline double spearman_jackknife_se(std::span<const double> x, std::span<const double> y) {
    const std::size_t n = x.size();

    std::vector<double> ux(x.begin(), x.end()), uy(y.begin(), y.end());
    std::sort(ux.begin(), ux.end());
    ux.erase(std::unique(ux.begin(), ux.end()), ux.end());
    std::sort(uy.begin(), uy.end());
    uy.erase(std::unique(uy.begin(), uy.end()), uy.end());

    const bool few_distinct = ux.size() <= 64 && uy.size() <= 64;
    if (!few_distinct) {
        std::vector<double> xs, ys, reps;
        xs.reserve(n - 1);
        ys.reserve(n - 1);
        reps.reserve(n);
        for (std::size_t drop = 0; drop < n; ++drop) {
            xs.clear();
            ys.clear();
            for (std::size_t i = 0; i < n; ++i) {
                if (i == drop) continue;
                xs.push_back(x[i]);
                ys.push_back(y[i]);
            }
            auto rx = midranks(xs);
            auto ry = midranks(ys);
            reps.push_back(pearson_value(rx, ry));
        }
        double rbar = 0.0;
        for (double r : reps) rbar += r;
        rbar /= static_cast<double>(n);
        double ss = 0.0;
        for (double r : reps) ss += (r - rbar) * (r - rbar);
        return std::sqrt(static_cast<double>(n - 1) / static_cast<double>(n) * ss);
    }

    const std::size_t dx = ux.size(), dy = uy.size();
    std::vector<std::size_t> counts(dx * dy, 0);
    auto xi_of = [&](double v) {
        return static_cast<std::size_t>(std::lower_bound(ux.begin(), ux.end(), v) - ux.begin());
    };
    auto yi_of = [&](double v) {
        return static_cast<std::size_t>(std::lower_bound(uy.begin(), uy.end(), v) - uy.begin());
    };
    for (std::size_t i = 0; i < n; ++i) {
        counts[xi_of(x[i]) * dy + yi_of(y[i])] += 1;
    }

    auto spearman_of_counts = [&](const std::vector<std::size_t>& c) {
        std::vector<double> cx(dx, 0.0), cy(dy, 0.0);
        double total = 0.0;
        for (std::size_t a = 0; a < dx; ++a) {
            for (std::size_t b = 0; b < dy; ++b) {
                const double v = static_cast<double>(c[a * dy + b]);
                cx[a] += v;
                cy[b] += v;
                total += v;
            }
        }
        std::vector<double> rx(dx), ry(dy);
        double cum = 0.0;
        for (std::size_t a = 0; a < dx; ++a) {
            rx[a] = cum + (cx[a] + 1.0) / 2.0;
            cum += cx[a];
        }
        cum = 0.0;
        for (std::size_t b = 0; b < dy; ++b) {
            ry[b] = cum + (cy[b] + 1.0) / 2.0;
            cum += cy[b];
        }
        double mx = 0.0, my = 0.0;
        for (std::size_t a = 0; a < dx; ++a) mx += cx[a] * rx[a];
        for (std::size_t b = 0; b < dy; ++b) my += cy[b] * ry[b];
        mx /= total;
        my /= total;
        double sxx = 0.0, syy = 0.0, sxy = 0.0;
        for (std::size_t a = 0; a < dx; ++a) sxx += cx[a] * (rx[a] - mx) * (rx[a] - mx);
        for (std::size_t b = 0; b < dy; ++b) syy += cy[b] * (ry[b] - my) * (ry[b] - my);
        for (std::size_t a = 0; a < dx; ++a) {
            for (std::size_t b = 0; b < dy; ++b) {
                sxy += static_cast<double>(c[a * dy + b]) * (rx[a] - mx) * (ry[b] - my);
            }
        }
        const double denom = std::sqrt(sxx * syy);
        return denom > 0.0 ? sxy / denom : 0.0;
    };

    double rep_sum = 0.0, rep_sq = 0.0;
    std::vector<std::size_t> work = counts;
    for (std::size_t a = 0; a < dx; ++a) {
        for (std::size_t b = 0; b < dy; ++b) {
            const std::size_t cnt = counts[a * dy + b];
            if (cnt == 0) continue;
            work[a * dy + b] -= 1;
            const double rep = spearman_of_counts(work);
            work[a * dy + b] += 1;
            rep_sum += static_cast<double>(cnt) * rep;
            rep_sq += static_cast<double>(cnt) * rep * rep;
        }
    }
    const double dn = static_cast<double>(n);
    const double rbar = rep_sum / dn;
    const double ss = rep_sq - dn * rbar * rbar;
    return std::sqrt((dn - 1.0) / dn * std::max(ss, 0.0));
}

}  // namespace detail

// Spearman rank correlation with midrank tie handling, jackknife SE.
inline StatResult rank_correlation(std::span<const double> child,
                                   std::span<const double> parent) {
    detail::require_pair(child, parent, "rank_correlation");
    auto rc = midranks(child);
    auto rp = midranks(parent);
    auto s = detail::centered_sums(rp, rc);
    if (!(s.sxx > 0.0) || !(s.syy > 0.0)) {
        throw std::invalid_argument("rank_correlation: degenerate variance");
    }
    StatResult out;
    out.n = child.size();
    out.value = s.sxy / std::sqrt(s.sxx * s.syy);
    out.se = detail::spearman_jackknife_se(child, parent);
    return out;
}

// Symmetrized (intraclass-form) Pearson correlation over couples. Each couple
// contributes both orderings through per-couple symmetric accumulators, so the
// result is bit-identical under partner swaps.
inline StatResult spousal_correlation_pairs(std::span<const std::pair<double, double>> couples) {
    const std::size_t k = couples.size();
    if (k < 3) {
        throw std::invalid_argument("spousal_correlation: need at least 3 couples");
    }
    double sum = 0.0;
    for (const auto& [a, b] : couples) sum += a + b;
    const double m = sum / (2.0 * static_cast<double>(k));

    std::vector<double> cross(k), spread(k);
    double sxy = 0.0, sxx = 0.0, centered_total = 0.0;
    for (std::size_t i = 0; i < k; ++i) {
        const double da = couples[i].first - m;
        const double db = couples[i].second - m;
        cross[i] = 2.0 * da * db;
        spread[i] = da * da + db * db;
        sxy += cross[i];
        sxx += spread[i];
        centered_total += da + db;
    }
    if (!(sxx > 0.0)) {
        throw std::invalid_argument("spousal_correlation: degenerate variance");
    }
    StatResult out;
    out.n = k;
    out.value = sxy / sxx;

    // Delete-one-couple jackknife. The shared mean shifts when a couple is
    // removed; recompute the symmetric sums with the shifted mean in O(1).
    if (k >= 4) {
        std::vector<double> reps(k);
        for (std::size_t i = 0; i < k; ++i) {
            const double k1 = static_cast<double>(k - 1);
            const double m1 = (sum - couples[i].first - couples[i].second) / (2.0 * k1);
            const double shift = m - m1;
            // sum over j != i of 2(a_j - m1)(b_j - m1)
            //   = sxy - cross_i + 2*shift*(sa_-i + sb_-i) + ... expand around m:
            // (a - m1) = (a - m) + shift
            const double drop_da = couples[i].first - m;
            const double drop_db = couples[i].second - m;
            const double lin = centered_total - (drop_da + drop_db);
            const double sxy1 = (sxy - cross[i]) + 2.0 * shift * lin + 2.0 * k1 * shift * shift;
            const double sxx1 = (sxx - spread[i]) + 2.0 * shift * lin + 2.0 * k1 * shift * shift;
            reps[i] = sxx1 > 0.0 ? sxy1 / sxx1 : 0.0;
        }
        double rbar = 0.0;
        for (double r : reps) rbar += r;
        rbar /= static_cast<double>(k);
        double ss = 0.0;
        for (double r : reps) ss += (r - rbar) * (r - rbar);
        out.se = std::sqrt(static_cast<double>(k - 1) / static_cast<double>(k) * ss);
    }
    return out;
}

struct SpousalAgeRule {
    int at_least_one_aged = 35;
    int survey_year = 0;
};

// Extracts each couple once (via symmetric spouse links) and applies the age
// rule: the couple qualifies when at least one partner has reached the given
// age in the survey year.
inline std::vector<std::pair<double, double>> qualifying_couples(
    const Microdata& md, const std::optional<SpousalAgeRule>& rule) {
    std::vector<std::pair<double, double>> couples;
    for (const auto& r : md.rows) {
        if (!r.spouse_id || *r.spouse_id <= r.id) continue;
        const Individual* partner = md.find(*r.spouse_id);
        if (!partner) continue;
        if (rule) {
            const int age_a = rule->survey_year - r.cohort;
            const int age_b = rule->survey_year - partner->cohort;
            if (std::max(age_a, age_b) < rule->at_least_one_aged) continue;
        }
        couples.emplace_back(r.edu_years, partner->edu_years);
    }
    return couples;
}

inline StatResult spousal_correlation(const Microdata& md,
                                      const std::optional<SpousalAgeRule>& rule = std::nullopt) {
    auto couples = qualifying_couples(md, rule);
    if (couples.empty()) {
        throw std::invalid_argument("spousal_correlation: no qualifying couples");
    }
    return spousal_correlation_pairs(couples);
}

// Centered 3-entry moving average over an integer-keyed series; at the
// boundaries (or around gaps) only the available entries are averaged.
inline std::map<int, double> moving_average_3yr(const std::map<int, double>& series) {
    std::map<int, double> out;
    for (const auto& [c, v] : series) {
        double sum = 0.0;
        int count = 0;
        for (int d = -1; d <= 1; ++d) {
            auto it = series.find(c + d);
            if (it != series.end()) {
                sum += it->second;
                ++count;
            }
        }
        out[c] = sum / static_cast<double>(count);
    }
    return out;
}

}  // namespace edumob
