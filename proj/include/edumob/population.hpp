#pragma once

// Synthetic microdata generator: couples formed by Gaussian-copula matching
// at a target spousal correlation, children produced by the transmission
// equation, plus leave-home and schooling-completion processes that create
// controllable selection and censoring.

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <numeric>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

#include "edumob/education.hpp"
#include "edumob/mathutil.hpp"
#include "edumob/microdata.hpp"
#include "edumob/model.hpp"
#include "edumob/rng.hpp"

namespace edumob {

struct ObservationRule {
    std::string name;
    int measure_age = 27;
    bool coresident_only = false;
    std::optional<int> survey_year;  // restricts to the cohort survey_year - measure_age

    void validate() const {
        if (measure_age < 16 || measure_age > 45) {
            throw std::invalid_argument("ObservationRule: measure_age must lie in [16,45]");
        }
    }
};

// Standard completion age per grid level. A person who will finish at level L
// has, at age a, attained the highest level at or below L whose completion
// age is <= a.
struct CompletionProfile {
    std::map<double, int> age_by_level = {{1, 7}, {3, 9}, {5, 12}, {8, 15},
                                          {11, 18}, {15, 22}, {18, 24}};

    void validate() const {
        for (double g : kEducationYears) {
            if (!age_by_level.count(g)) {
                throw std::invalid_argument("CompletionProfile: missing grid level " +
                                            format_double(g));
            }
        }
        int prev = -1;
        for (const auto& [level, age] : age_by_level) {
            if (age < prev) {
                throw std::invalid_argument(
                    "CompletionProfile: completion ages must be non-decreasing in level");
            }
            prev = age;
        }
    }

    // Recorded completion age; floored at 14, below which no observation rule
    // can look anyway.
    int completion_age(double edu_final) const {
        auto it = age_by_level.find(edu_final);
        if (it == age_by_level.end()) {
            throw std::invalid_argument("CompletionProfile: level " + format_double(edu_final) +
                                        " not on the grid");
        }
        return std::max(14, it->second);
    }

    double attained_at(double edu_final, int age) const {
        double best = kEducationYears.front();
        for (const auto& [level, completes_at] : age_by_level) {
            if (level > edu_final) break;
            if (completes_at <= age) best = level;
        }
        return best;
    }
};

// Discrete per-age leave-home hazards, optionally tilted by education to
// manufacture selection bias (gradient < 0 keeps the better educated at home
// longer). Ages without an entry carry zero hazard.
struct LeaveHomeModel {
    std::map<int, double> hazard;
    double edu_gradient = 0.0;
    double edu_ref = 10.0;
    static constexpr int kNeverLeaves = 99;
    static constexpr int kMaxAge = 60;

    void validate() const {
        for (const auto& [age, h] : hazard) {
            if (age < 15) {
                throw std::invalid_argument("LeaveHomeModel: hazards start at age 15");
            }
            if (!(h >= 0.0 && h <= 1.0)) {
                throw std::invalid_argument("LeaveHomeModel: hazard at age " +
                                            std::to_string(age) + " outside [0,1]");
            }
        }
    }

    double effective_hazard(int age, double edu_final) const {
        auto it = hazard.find(age);
        if (it == hazard.end()) return 0.0;
        double h = it->second * std::exp(edu_gradient * (edu_final - edu_ref));
        return std::clamp(h, 0.0, 1.0);
    }

    int sample_leave_age(double edu_final, std::mt19937_64& rng) const {
        std::uniform_real_distribution<double> unif(0.0, 1.0);
        for (int age = 15; age <= kMaxAge; ++age) {
            const double h = effective_hazard(age, edu_final);
            const double u = unif(rng);
            if (u < h) return age;
        }
        return kNeverLeaves;
    }

    // P(leave age > age) for a given education level.
    double coresident_share_at(int age, double edu_final) const {
        double s = 1.0;
        for (int a = 15; a <= age; ++a) {
            s *= 1.0 - effective_hazard(a, edu_final);
        }
        return s;
    }

    // Hazard profile calibrated so that roughly 55% of a cohort is still
    // coresident at age 27 when the education gradient is off.
    static LeaveHomeModel spanish_like() {
        LeaveHomeModel m;
        for (int a = 15; a <= 17; ++a) m.hazard[a] = 0.005;
        for (int a = 18; a <= 19; ++a) m.hazard[a] = 0.02;
        for (int a = 20; a <= 22; ++a) m.hazard[a] = 0.04;
        for (int a = 23; a <= 25; ++a) m.hazard[a] = 0.06;
        for (int a = 26; a <= 28; ++a) m.hazard[a] = 0.095;
        for (int a = 29; a <= 31; ++a) m.hazard[a] = 0.11;
        for (int a = 32; a <= 35; ++a) m.hazard[a] = 0.13;
        for (int a = 36; a <= 45; ++a) m.hazard[a] = 0.16;
        return m;
    }
};

struct MatchOutcome {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (male index, female index)
    double realized_correlation = 0.0;
    double mix_weight = 0.0;  // solved copula weight on the education rank
};

namespace pop_detail {

inline std::vector<double> normal_scores(std::span<const double> values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(),
                     [&](std::size_t i, std::size_t j) { return values[i] < values[j]; });
    std::vector<double> z(n);
    for (std::size_t r = 0; r < n; ++r) {
        z[order[r]] =
            inv_std_normal_cdf((static_cast<double>(r) + 0.5) / static_cast<double>(n));
    }
    return z;
}

inline double pair_correlation(std::span<const double> male_edu,
                               std::span<const double> female_edu,
                               const std::vector<std::size_t>& male_order,
                               const std::vector<std::size_t>& female_order) {
    const std::size_t n = male_order.size();
    double mx = 0.0, my = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += male_edu[male_order[i]];
        my += female_edu[female_order[i]];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0.0, syy = 0.0, sxy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double a = male_edu[male_order[i]] - mx;
        const double b = female_edu[female_order[i]] - my;
        sxx += a * a;
        syy += b * b;
        sxy += a * b;
    }
    const double denom = std::sqrt(sxx * syy);
    return denom > 0.0 ? sxy / denom : 0.0;
}

}  // namespace pop_detail

// Pairs every male with a female such that the sample correlation of the
// spouses' education converges on rho_target. Matching permutes people; it
// never edits education values. The female ranking is a convex mix of her
// education's normal score and seeded Gaussian noise. The mix weight is
// solved by bisection against the correlation realized under solver noise
// draws that are separate from (and, for small pools, averaged over many
// more replicates than) the final pairing draw. Solving and pairing on the
// same draw would pin the sample correlation exactly at the target; a
// single solver draw would leave a pool-level calibration error shared by
// any split of the couples. Either way the half-sample machinery downstream
// would lose its independent-noise property.
inline MatchOutcome match_couples(std::span<const double> male_edu,
                                  std::span<const double> female_edu, double rho_target,
                                  std::uint64_t seed) {
    if (male_edu.size() != female_edu.size()) {
        const auto nm = male_edu.size(), nf = female_edu.size();
        throw std::invalid_argument(
            "match_couples: unbalanced pools, " + std::to_string(nm) + " males vs " +
            std::to_string(nf) + " females (" +
            std::to_string(nm > nf ? nm - nf : nf - nm) + " missing from the " +
            (nm > nf ? "female" : "male") + " side)");
    }
    if (!(rho_target >= 0.0 && rho_target <= 1.0)) {
        throw std::invalid_argument("match_couples: rho_target must lie in [0,1]");
    }
    const std::size_t n = male_edu.size();
    if (n == 0) {
        throw std::invalid_argument("match_couples: empty pools");
    }

    std::vector<std::size_t> male_order(n);
    std::iota(male_order.begin(), male_order.end(), std::size_t{0});
    std::stable_sort(male_order.begin(), male_order.end(), [&](std::size_t i, std::size_t j) {
        return male_edu[i] < male_edu[j];
    });

    auto z = pop_detail::normal_scores(female_edu);
    auto solve_rng = derive_engine(seed, "match", "solve");
    auto pair_rng = derive_engine(seed, "match", "pair");
    std::normal_distribution<double> normal(0.0, 1.0);
    std::vector<double> pair_noise(n);
    for (auto& v : pair_noise) v = normal(pair_rng);

    std::vector<double> score(n);
    std::vector<std::size_t> female_order(n);
    auto order_for = [&](double w, const std::vector<double>& noise) {
        const double wn = std::sqrt(std::max(0.0, 1.0 - w * w));
        for (std::size_t i = 0; i < n; ++i) score[i] = w * z[i] + wn * noise[i];
        std::iota(female_order.begin(), female_order.end(), std::size_t{0});
        std::stable_sort(female_order.begin(), female_order.end(),
                         [&](std::size_t i, std::size_t j) { return score[i] < score[j]; });
    };

    double w = rho_target;
    if (rho_target > 0.0 && rho_target < 1.0) {
        // Solver replicates: enough that the calibration error is small
        // relative to the pool's own sampling noise.
        const std::size_t replicates =
            std::clamp<std::size_t>((32768 + n - 1) / n, 1, 64);
        std::vector<std::vector<double>> solve_noise(replicates, std::vector<double>(n));
        for (auto& rep : solve_noise) {
            for (auto& v : rep) v = normal(solve_rng);
        }
        auto mean_realized = [&](double w_try) {
            double acc = 0.0;
            for (const auto& rep : solve_noise) {
                order_for(w_try, rep);
                acc += pop_detail::pair_correlation(male_edu, female_edu, male_order,
                                                    female_order);
            }
            return acc / static_cast<double>(replicates);
        };
        double lo = 0.0, hi = 1.0;
        constexpr int kMaxIter = 40;
        constexpr double kTol = 2.5e-4;
        for (int it = 0; it < kMaxIter; ++it) {
            w = 0.5 * (lo + hi);
            const double r = mean_realized(w);
            if (std::abs(r - rho_target) <= kTol || hi - lo < 1e-12) break;
            if (r < rho_target) {
                lo = w;
            } else {
                hi = w;
            }
        }
    } else {
        w = rho_target <= 0.0 ? 0.0 : 1.0;
    }
    order_for(w, pair_noise);

    MatchOutcome out;
    out.mix_weight = w;
    out.realized_correlation =
        pop_detail::pair_correlation(male_edu, female_edu, male_order, female_order);
    out.pairs.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        out.pairs[i] = {male_order[i], female_order[i]};
    }
    // Canonical couple order: by the male partner's index.
    std::sort(out.pairs.begin(), out.pairs.end());
    return out;
}

// Child latent education: lambda * midparent + Normal(0, sigma_eps2) shock.
inline std::vector<double> produce_children_latents(
    std::span<const double> father_edu, std::span<const double> mother_edu,
    std::span<const std::pair<std::size_t, std::size_t>> couples, const ModelParams& params,
    std::uint64_t seed) {
    params.validate();
    auto rng = derive_engine(seed, "children");
    std::normal_distribution<double> shock(0.0, std::sqrt(params.sigma_eps2));
    std::vector<double> child(couples.size());
    for (std::size_t i = 0; i < couples.size(); ++i) {
        const double mid =
            (father_edu[couples[i].first] + mother_edu[couples[i].second]) / 2.0;
        child[i] = params.lambda * mid + shock(rng);
    }
    return child;
}

// Parameters of one (region, cohort) generation step: the parents'
// distribution and sorting, the transmission parameters, and the sorting used
// when the children themselves form couples.
struct BlockSpec {
    ModelParams model;        // mu is the parent-generation mean
    double parent_var = 1.0;  // variance of parent latents
    double child_rho = -1.0;  // sorting for the child generation; <0 means model.rho

    double child_sorting() const { return child_rho < 0.0 ? model.rho : child_rho; }
    void validate() const {
        model.validate();
        if (!(parent_var >= 0.0) || !std::isfinite(parent_var)) {
            throw std::invalid_argument("BlockSpec: parent_var must be >= 0");
        }
        if (child_rho >= 0.0 && child_rho > 1.0) {
            throw std::invalid_argument("BlockSpec: child_rho must lie in [0,1]");
        }
    }
};

struct PopulationConfig {
    int n_per_region_cohort = 0;  // children emitted per block; must be even
    std::vector<std::string> regions;
    int cohort_from = 0;
    int cohort_to = 0;  // inclusive
    std::function<BlockSpec(std::string_view, int)> block_spec;
    LeaveHomeModel leave_home;
    CompletionProfile completion;
    std::uint64_t seed = 0;
    int threads = 1;
    // Couples are formed on a pool this many times larger than the emitted
    // block, which is then a couple-level subsample. Matching permutes a
    // finite pool, so without oversampling the couple values of a block
    // partition its own marginals and complementary split halves become
    // anti-correlated; sampling couples from a larger pool restores the
    // cluster-sampling behavior the split-half machinery assumes. Factor 1
    // keeps the block as the entire matched pool.
    int couples_pool_factor = 1;

    void validate() const {
        if (n_per_region_cohort < 2 || n_per_region_cohort % 2 != 0) {
            throw std::invalid_argument(
                "PopulationConfig: n_per_region_cohort must be even and >= 2");
        }
        if (regions.empty()) {
            throw std::invalid_argument("PopulationConfig: no regions");
        }
        if (cohort_to < cohort_from) {
            throw std::invalid_argument("PopulationConfig: empty cohort range");
        }
        if (!block_spec) {
            throw std::invalid_argument("PopulationConfig: block_spec is required");
        }
        if (couples_pool_factor < 1) {
            throw std::invalid_argument("PopulationConfig: couples_pool_factor must be >= 1");
        }
        leave_home.validate();
        completion.validate();
    }
};

namespace pop_detail {

inline std::vector<Individual> generate_block(const PopulationConfig& cfg,
                                              const std::string& region, int cohort,
                                              std::uint64_t block_index) {
    const BlockSpec spec = cfg.block_spec(region, cohort);
    spec.validate();
    const std::size_t n = static_cast<std::size_t>(cfg.n_per_region_cohort);
    const std::size_t pool =
        n * static_cast<std::size_t>(cfg.couples_pool_factor);

    // Parent generation over the full pool.
    auto parent_rng = derive_engine(cfg.seed, "parents", region, cohort);
    std::normal_distribution<double> parent_draw(spec.model.mu, std::sqrt(spec.parent_var));
    std::vector<double> fathers(pool), mothers(pool);
    for (auto& v : fathers) v = parent_draw(parent_rng);
    for (auto& v : mothers) v = parent_draw(parent_rng);

    const std::uint64_t match_seed = StreamKey(cfg.seed).mix("pmatch").mix(region).mix(cohort).value();
    auto parents = match_couples(fathers, mothers, spec.model.rho, match_seed);

    const std::uint64_t child_seed = StreamKey(cfg.seed).mix("birth").mix(region).mix(cohort).value();
    auto child_latents =
        produce_children_latents(fathers, mothers, parents.pairs, spec.model, child_seed);

    // Balanced sex assignment, independent of education.
    std::vector<std::size_t> shuffled(pool);
    std::iota(shuffled.begin(), shuffled.end(), std::size_t{0});
    auto sex_rng = derive_engine(cfg.seed, "sex", region, cohort);
    std::shuffle(shuffled.begin(), shuffled.end(), sex_rng);
    std::vector<Sex> sex(pool);
    for (std::size_t i = 0; i < pool; ++i) {
        sex[shuffled[i]] = i < pool / 2 ? Sex::male : Sex::female;
    }

    // Children marry within the pool at the block's child sorting.
    std::vector<std::size_t> male_idx, female_idx;
    male_idx.reserve(pool / 2);
    female_idx.reserve(pool / 2);
    for (std::size_t i = 0; i < pool; ++i) {
        (sex[i] == Sex::male ? male_idx : female_idx).push_back(i);
    }
    std::vector<double> male_lat(male_idx.size()), female_lat(female_idx.size());
    for (std::size_t i = 0; i < male_idx.size(); ++i) male_lat[i] = child_latents[male_idx[i]];
    for (std::size_t i = 0; i < female_idx.size(); ++i)
        female_lat[i] = child_latents[female_idx[i]];

    const std::uint64_t cmatch_seed = StreamKey(cfg.seed).mix("cmatch").mix(region).mix(cohort).value();
    auto unions = match_couples(male_lat, female_lat, spec.child_sorting(), cmatch_seed);

    // Emit a couple-level subsample of the pool.
    const std::size_t n_couples = n / 2;
    std::vector<std::size_t> couple_ids(unions.pairs.size());
    std::iota(couple_ids.begin(), couple_ids.end(), std::size_t{0});
    if (couple_ids.size() > n_couples) {
        auto sub_rng = derive_engine(cfg.seed, "subsample", region, cohort);
        std::shuffle(couple_ids.begin(), couple_ids.end(), sub_rng);
        couple_ids.resize(n_couples);
        std::sort(couple_ids.begin(), couple_ids.end());
    }

    std::vector<Individual> rows;
    rows.reserve(n);
    auto leave_rng = derive_engine(cfg.seed, "leave", region, cohort);
    std::uint64_t next_id = block_index << 32;
    auto emit = [&](std::size_t pool_idx, Sex s) {
        Individual r;
        r.id = next_id++;
        r.region_id = region;
        r.cohort = cohort;
        r.sex = s;
        r.edu_latent = child_latents[pool_idx];
        r.edu_years = discretize_education(child_latents[pool_idx]);
        r.father_edu = discretize_education(fathers[parents.pairs[pool_idx].first]);
        r.mother_edu = discretize_education(mothers[parents.pairs[pool_idx].second]);
        r.edu_completion_age = cfg.completion.completion_age(r.edu_years);
        rows.push_back(std::move(r));
        return rows.size() - 1;
    };
    for (std::size_t cid : couple_ids) {
        const auto [mi, fi] = unions.pairs[cid];
        const std::size_t a = emit(male_idx[mi], Sex::male);
        const std::size_t b = emit(female_idx[fi], Sex::female);
        rows[a].spouse_id = rows[b].id;
        rows[b].spouse_id = rows[a].id;
    }
    for (auto& r : rows) {
        r.leave_home_age = cfg.leave_home.sample_leave_age(r.edu_years, leave_rng);
    }
    return rows;
}

template <typename Fn>
inline void parallel_for(std::size_t count, int threads, Fn&& fn) {
    const int workers = std::max(1, threads);
    if (workers == 1 || count <= 1) {
        for (std::size_t i = 0; i < count; ++i) fn(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    std::exception_ptr error;
    std::mutex error_mutex;
    for (int t = 0; t < workers; ++t) {
        pool.emplace_back([&]() {
            for (;;) {
                const std::size_t i = next.fetch_add(1);
                if (i >= count) return;
                try {
                    fn(i);
                } catch (...) {
                    std::lock_guard<std::mutex> lock(error_mutex);
                    if (!error) error = std::current_exception();
                    return;
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    if (error) std::rethrow_exception(error);
}

}  // namespace pop_detail

// Generates the full population, one block per (region, cohort). Blocks use
// independent streams derived from (seed, region, cohort) and are assembled
// in canonical order, so output is identical for any thread count.
inline Microdata generate_population(const PopulationConfig& cfg) {
    cfg.validate();
    struct BlockKey {
        std::string region;
        int cohort;
    };
    std::vector<BlockKey> blocks;
    for (const auto& region : cfg.regions) {
        for (int cohort = cfg.cohort_from; cohort <= cfg.cohort_to; ++cohort) {
            blocks.push_back({region, cohort});
        }
    }
    std::vector<std::vector<Individual>> results(blocks.size());
    pop_detail::parallel_for(blocks.size(), cfg.threads, [&](std::size_t i) {
        results[i] = pop_detail::generate_block(cfg, blocks[i].region, blocks[i].cohort,
                                                static_cast<std::uint64_t>(i));
    });
    Microdata md;
    md.rows.reserve(blocks.size() * static_cast<std::size_t>(cfg.n_per_region_cohort));
    for (auto& block : results) {
        md.rows.insert(md.rows.end(), std::make_move_iterator(block.begin()),
                       std::make_move_iterator(block.end()));
    }
    return md;
}

// Applies an observation rule: restricts to the rule's survey frame, drops
// non-coresidents if requested, and censors education to the level attained
// by the measurement age. The input's edu_years is treated as the final
// attainment. Spouse links pointing outside the observed table are cleared.
inline Microdata observe(const Microdata& population, const ObservationRule& rule,
                         const CompletionProfile& profile = {}) {
    rule.validate();
    profile.validate();
    Microdata out;
    for (const auto& r : population.rows) {
        if (rule.survey_year && r.cohort != *rule.survey_year - rule.measure_age) continue;
        if (rule.coresident_only && r.leave_home_age <= rule.measure_age) continue;
        Individual obs = r;
        if (rule.measure_age < r.edu_completion_age) {
            obs.edu_years = std::min(profile.attained_at(r.edu_years, rule.measure_age),
                                     r.edu_years);
        }
        out.rows.push_back(std::move(obs));
    }
    std::unordered_set<std::uint64_t> ids;
    ids.reserve(out.rows.size());
    for (const auto& r : out.rows) ids.insert(r.id);
    for (auto& r : out.rows) {
        if (r.spouse_id && !ids.count(*r.spouse_id)) r.spouse_id.reset();
    }
    return out;
}

}  // namespace edumob
