#pragma once

// Seven-category education scheme and the years-of-schooling grid it maps to.

#include <array>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace edumob {

inline constexpr std::array<double, 7> kEducationYears = {1, 3, 5, 8, 11, 15, 18};

enum class EducationCategory {
    illiterate,
    literate,
    primary,
    secondary,
    academic_or_professional,
    short_college,
    long_college,
};

inline constexpr std::array<EducationCategory, 7> kEducationCategories = {
    EducationCategory::illiterate,      EducationCategory::literate,
    EducationCategory::primary,         EducationCategory::secondary,
    EducationCategory::academic_or_professional,
    EducationCategory::short_college,   EducationCategory::long_college,
};

inline std::string_view label_for(EducationCategory c) {
    switch (c) {
        case EducationCategory::illiterate: return "Illiterate";
        case EducationCategory::literate: return "Literate";
        case EducationCategory::primary: return "Primary Schooling";
        case EducationCategory::secondary: return "Secondary School";
        case EducationCategory::academic_or_professional:
            return "Academic high school and professional studies";
        case EducationCategory::short_college: return "Short college degree";
        case EducationCategory::long_college: return "Long college degree";
    }
    throw std::logic_error("label_for: bad category");
}

inline double years_for(EducationCategory c) {
    return kEducationYears[static_cast<std::size_t>(c)];
}

inline bool is_grid_years(double y) {
    for (double g : kEducationYears) {
        if (y == g) return true;
    }
    return false;
}

inline EducationCategory category_for_years(double y) {
    for (std::size_t i = 0; i < kEducationYears.size(); ++i) {
        if (kEducationYears[i] == y) return kEducationCategories[i];
    }
    throw std::invalid_argument("category_for_years: " + std::to_string(y) +
                                " is not on the education grid");
}

// Nearest grid value; exact midpoints resolve to the lower category.
inline double discretize_education(double latent) {
    if (!std::isfinite(latent)) {
        throw std::invalid_argument("discretize_education: input must be finite");
    }
    double best = kEducationYears[0];
    double best_dist = std::abs(latent - best);
    for (std::size_t i = 1; i < kEducationYears.size(); ++i) {
        double d = std::abs(latent - kEducationYears[i]);
        if (d < best_dist) {
            best = kEducationYears[i];
            best_dist = d;
        }
    }
    return best;
}

using HarmonizationScheme = std::map<std::string, double, std::less<>>;

inline HarmonizationScheme default_harmonization_scheme() {
    HarmonizationScheme s;
    for (auto c : kEducationCategories) {
        s.emplace(std::string(label_for(c)), years_for(c));
    }
    return s;
}

struct UnknownEducationLabel : std::runtime_error {
    explicit UnknownEducationLabel(std::string_view label, long row = -1)
        : std::runtime_error(row >= 0 ? "unknown education label \"" + std::string(label) +
                                            "\" at row " + std::to_string(row)
                                      : "unknown education label \"" + std::string(label) + "\""),
          label(label),
          row(row) {}
    std::string label;
    long row;
};

inline double harmonize(std::string_view label, const HarmonizationScheme& scheme, long row = -1) {
    auto it = scheme.find(label);
    if (it == scheme.end()) {
        throw UnknownEducationLabel(label, row);
    }
    return it->second;
}

}  // namespace edumob
