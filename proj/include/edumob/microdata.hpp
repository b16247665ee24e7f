#pragma once

// Individual-level survey-style table: the universal row format produced by
// the generator and consumed by every estimator.
//
// CSV schema (UTF-8, comma separated, empty field = missing):
//   id,region_id,cohort,sex,edu_years,father_edu_years,mother_edu_years,
//   spouse_id,leave_home_age,edu_completion_age

#include <cstdint>
#include <filesystem>
#include <optional>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "edumob/csv.hpp"
#include "edumob/education.hpp"

namespace edumob {

enum class Sex : std::uint8_t { male, female };

inline std::string_view sex_label(Sex s) { return s == Sex::male ? "male" : "female"; }

inline Sex parse_sex(std::string_view s, std::string_view context) {
    if (s == "male") return Sex::male;
    if (s == "female") return Sex::female;
    throw std::runtime_error(std::string(context) + ": invalid sex \"" + std::string(s) + "\"");
}

// leave_home_age uses 99 as the "never leaves within the observation window"
// sentinel. edu_latent is generator-internal and not serialized.
struct Individual {
    std::uint64_t id = 0;
    std::string region_id;
    int cohort = 0;
    Sex sex = Sex::male;
    double edu_latent = 0.0;
    double edu_years = 0.0;  // on the seven-category grid
    std::optional<double> father_edu;
    std::optional<double> mother_edu;
    std::optional<std::uint64_t> spouse_id;
    int leave_home_age = 99;
    int edu_completion_age = 14;
};

inline constexpr std::string_view kMicrodataHeader[] = {
    "id",        "region_id",       "cohort",          "sex",       "edu_years",
    "father_edu_years", "mother_edu_years", "spouse_id", "leave_home_age",
    "edu_completion_age"};

class Microdata {
  public:
    std::vector<Individual> rows;

    std::size_t size() const { return rows.size(); }
    bool empty() const { return rows.empty(); }

    const Individual* find(std::uint64_t id) const {
        ensure_index();
        auto it = index_.find(id);
        return it == index_.end() ? nullptr : &rows[it->second];
    }

    void invalidate_index() { index_.clear(); }

    // Enforces the row invariants: grid education values, age floors,
    // unique ids, and symmetric spouse links.
    void validate() const {
        ensure_index();
        std::unordered_set<std::uint64_t> seen;
        seen.reserve(rows.size());
        for (const auto& r : rows) {
            if (!seen.insert(r.id).second) {
                throw std::runtime_error("microdata: duplicate id " + std::to_string(r.id));
            }
            if (!is_grid_years(r.edu_years)) {
                throw std::runtime_error("microdata: id " + std::to_string(r.id) +
                                         " has off-grid edu_years " +
                                         format_double(r.edu_years));
            }
            if (r.father_edu && !is_grid_years(*r.father_edu)) {
                throw std::runtime_error("microdata: id " + std::to_string(r.id) +
                                         " has off-grid father_edu_years");
            }
            if (r.mother_edu && !is_grid_years(*r.mother_edu)) {
                throw std::runtime_error("microdata: id " + std::to_string(r.id) +
                                         " has off-grid mother_edu_years");
            }
            if (r.leave_home_age < 15) {
                throw std::runtime_error("microdata: id " + std::to_string(r.id) +
                                         " has leave_home_age < 15");
            }
            if (r.edu_completion_age < 14) {
                throw std::runtime_error("microdata: id " + std::to_string(r.id) +
                                         " has edu_completion_age < 14");
            }
        }
        for (const auto& r : rows) {
            if (!r.spouse_id) continue;
            const Individual* partner = find(*r.spouse_id);
            if (!partner || !partner->spouse_id || *partner->spouse_id != r.id) {
                throw std::runtime_error("microdata: asymmetric spouse link on id " +
                                         std::to_string(r.id));
            }
        }
    }

  private:
    void ensure_index() const {
        if (index_.size() == rows.size() && !rows.empty()) return;
        index_.clear();
        index_.reserve(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            index_.emplace(rows[i].id, i);
        }
    }

    mutable std::unordered_map<std::uint64_t, std::size_t> index_;
};

inline CsvTable microdata_to_csv(const Microdata& md) {
    CsvTable t;
    for (auto col : kMicrodataHeader) t.header.emplace_back(col);
    t.rows.reserve(md.rows.size());
    for (const auto& r : md.rows) {
        std::vector<std::string> row;
        row.reserve(10);
        row.push_back(format_uint(r.id));
        row.push_back(r.region_id);
        row.push_back(format_int(r.cohort));
        row.emplace_back(sex_label(r.sex));
        row.push_back(format_double(r.edu_years));
        row.push_back(r.father_edu ? format_double(*r.father_edu) : std::string());
        row.push_back(r.mother_edu ? format_double(*r.mother_edu) : std::string());
        row.push_back(r.spouse_id ? format_uint(*r.spouse_id) : std::string());
        row.push_back(format_int(r.leave_home_age));
        row.push_back(format_int(r.edu_completion_age));
        t.rows.push_back(std::move(row));
    }
    return t;
}

inline void write_microdata(const Microdata& md, const std::filesystem::path& path) {
    write_csv(path, microdata_to_csv(md));
}

inline Microdata microdata_from_csv(const CsvTable& t, std::string_view origin = "microdata") {
    const std::size_t expected_cols = std::size(kMicrodataHeader);
    if (t.header.size() != expected_cols) {
        throw std::runtime_error(std::string(origin) + ": header does not match schema");
    }
    for (std::size_t i = 0; i < expected_cols; ++i) {
        if (t.header[i] != kMicrodataHeader[i]) {
            throw std::runtime_error(std::string(origin) + ": header column " +
                                     std::to_string(i + 1) + " is \"" + t.header[i] +
                                     "\", expected \"" + std::string(kMicrodataHeader[i]) + "\"");
        }
    }
    Microdata md;
    md.rows.reserve(t.rows.size());
    for (std::size_t i = 0; i < t.rows.size(); ++i) {
        const auto& row = t.rows[i];
        const std::string ctx = std::string(origin) + ":" + std::to_string(i + 2);
        Individual r;
        r.id = parse_uint(row[0], ctx);
        r.region_id = row[1];
        r.cohort = static_cast<int>(parse_int(row[2], ctx));
        r.sex = parse_sex(row[3], ctx);
        r.edu_years = parse_double(row[4], ctx);
        r.edu_latent = r.edu_years;
        if (!row[5].empty()) r.father_edu = parse_double(row[5], ctx);
        if (!row[6].empty()) r.mother_edu = parse_double(row[6], ctx);
        if (!row[7].empty()) r.spouse_id = parse_uint(row[7], ctx);
        r.leave_home_age = static_cast<int>(parse_int(row[8], ctx));
        r.edu_completion_age = static_cast<int>(parse_int(row[9], ctx));
        if (!is_grid_years(r.edu_years)) {
            throw std::runtime_error(ctx + ": edu_years " + row[4] +
                                     " is not on the education grid");
        }
        if (r.father_edu && !is_grid_years(*r.father_edu)) {
            throw std::runtime_error(ctx + ": father_edu_years " + row[5] +
                                     " is not on the education grid");
        }
        if (r.mother_edu && !is_grid_years(*r.mother_edu)) {
            throw std::runtime_error(ctx + ": mother_edu_years " + row[6] +
                                     " is not on the education grid");
        }
        md.rows.push_back(std::move(r));
    }
    md.validate();
    return md;
}

inline Microdata read_microdata(const std::filesystem::path& path) {
    return microdata_from_csv(read_csv(path), path.string());
}

}  // namespace edumob
