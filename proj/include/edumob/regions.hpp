#pragma once

// Subprovincial region scheme: large municipalities, rest-of-province
// aggregates, and the two autonomous cities. Ids are kind-prefixed ASCII
// slugs of the names (several names appear both as a municipality and as a
// province aggregate).

#include <algorithm>
#include <array>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "edumob/csv.hpp"

namespace edumob {

enum class RegionKind { municipality, rest_of_province, autonomous_city };

inline std::string_view region_kind_label(RegionKind k) {
    switch (k) {
        case RegionKind::municipality: return "municipality";
        case RegionKind::rest_of_province: return "rest_of_province";
        case RegionKind::autonomous_city: return "autonomous_city";
    }
    throw std::logic_error("region_kind_label: bad kind");
}

inline RegionKind parse_region_kind(std::string_view s) {
    if (s == "municipality") return RegionKind::municipality;
    if (s == "rest_of_province") return RegionKind::rest_of_province;
    if (s == "autonomous_city") return RegionKind::autonomous_city;
    throw std::runtime_error("unknown region kind \"" + std::string(s) + "\"");
}

struct RegionEntry {
    std::string id;
    std::string name;
    RegionKind kind;
};

inline std::string slugify(std::string_view name) {
    // Fold the accented characters appearing in the bundled names to ASCII.
    static const std::vector<std::pair<std::string_view, char>> folds = {
        {"á", 'a'}, {"é", 'e'}, {"í", 'i'}, {"ó", 'o'}, {"ú", 'u'},
        {"à", 'a'}, {"è", 'e'}, {"ì", 'i'}, {"ò", 'o'}, {"ù", 'u'},
        {"ñ", 'n'}, {"ü", 'u'}, {"ç", 'c'}, {"Á", 'a'}, {"É", 'e'},
        {"Í", 'i'}, {"Ó", 'o'}, {"Ú", 'u'}, {"Ñ", 'n'},
    };
    std::string folded;
    folded.reserve(name.size());
    for (std::size_t i = 0; i < name.size();) {
        bool matched = false;
        for (const auto& [seq, repl] : folds) {
            if (name.substr(i, seq.size()) == seq) {
                folded.push_back(repl);
                i += seq.size();
                matched = true;
                break;
            }
        }
        if (!matched) {
            folded.push_back(name[i]);
            ++i;
        }
    }
    std::string slug;
    bool pending_dash = false;
    for (char c : folded) {
        if ((c >= 'a' && c <= 'z') || (c >= '0' && c <= '9')) {
            if (pending_dash && !slug.empty()) slug.push_back('-');
            pending_dash = false;
            slug.push_back(c);
        } else if (c >= 'A' && c <= 'Z') {
            if (pending_dash && !slug.empty()) slug.push_back('-');
            pending_dash = false;
            slug.push_back(static_cast<char>(c - 'A' + 'a'));
        } else {
            pending_dash = true;
        }
    }
    return slug;
}

class RegionRegistry {
  public:
    RegionRegistry() = default;
    explicit RegionRegistry(std::vector<RegionEntry> entries) : entries_(std::move(entries)) {
        validate();
        rebuild_index();
    }

    const std::vector<RegionEntry>& entries() const { return entries_; }
    std::size_t size() const { return entries_.size(); }

    bool contains(std::string_view id) const { return index_.count(std::string(id)) > 0; }

    const RegionEntry& at(std::string_view id) const {
        auto it = index_.find(std::string(id));
        if (it == index_.end()) {
            throw std::runtime_error("unknown region id \"" + std::string(id) + "\"");
        }
        return entries_[it->second];
    }

    void validate() const {
        std::size_t n_mun = 0, n_prov = 0, n_city = 0;
        std::unordered_map<std::string, int> ids;
        for (const auto& e : entries_) {
            switch (e.kind) {
                case RegionKind::municipality: ++n_mun; break;
                case RegionKind::rest_of_province: ++n_prov; break;
                case RegionKind::autonomous_city: ++n_city; break;
            }
            if (++ids[e.id] > 1) {
                throw std::runtime_error("region registry: duplicate id \"" + e.id + "\"");
            }
        }
        if (n_mun != 55 || n_prov != 50 || n_city != 2) {
            throw std::runtime_error(
                "region registry: expected 55 municipalities + 50 provinces + 2 autonomous "
                "cities, found " +
                std::to_string(n_mun) + "/" + std::to_string(n_prov) + "/" +
                std::to_string(n_city));
        }
    }

    static const RegionRegistry& bundled();

    static RegionRegistry load(const std::filesystem::path& path) {
        CsvTable t = read_csv(path);
        const std::size_t ci = t.column_index("region_id");
        const std::size_t cn = t.column_index("name");
        const std::size_t ck = t.column_index("kind");
        std::vector<RegionEntry> entries;
        entries.reserve(t.rows.size());
        for (const auto& row : t.rows) {
            entries.push_back({row[ci], row[cn], parse_region_kind(row[ck])});
        }
        return RegionRegistry(std::move(entries));
    }

    void save(const std::filesystem::path& path) const {
        CsvTable t;
        t.header = {"region_id", "name", "kind"};
        for (const auto& e : entries_) {
            t.rows.push_back({e.id, e.name, std::string(region_kind_label(e.kind))});
        }
        write_csv(path, t);
    }

  private:
    void rebuild_index() {
        index_.clear();
        for (std::size_t i = 0; i < entries_.size(); ++i) {
            index_.emplace(entries_[i].id, i);
        }
    }

    std::vector<RegionEntry> entries_;
    std::unordered_map<std::string, std::size_t> index_;
};

namespace region_detail {

inline const std::array<std::string_view, 55>& municipality_names() {
    static const std::array<std::string_view, 55> names = {
        "Alacant",
        "Alcalá de Henares",
        "Albacete",
        "Alcorcón",
        "Algeciras",
        "Almería",
        "Badalona",
        "Badajoz",
        "Barakaldo",
        "Barcelona",
        "Bilbao",
        "Burgos",
        "Cádiz",
        "Cartagena",
        "Castelló de la Plana",
        "Córdoba",
        "Coruña (A)",
        "Donostia - San Sebastián",
        "Elx",
        "Fuenlabrada",
        "Getafe",
        "Gijón",
        "Granada",
        "Hospitalet de Llobregat (L')",
        "Huelva",
        "Jaén",
        "Jerez de la Frontera",
        "León",
        "Leganés",
        "Lleida",
        "Logroño",
        "Madrid",
        "Málaga",
        "Mataró",
        "Móstoles",
        "Murcia",
        "Ourense",
        "Oviedo",
        "Palma",
        "Palmas de Gran Canaria (Las)",
        "Pamplona - Iruña",
        "Sabadell",
        "Salamanca",
        "San Cristóbal de La Laguna",
        "Santa Coloma de Gramenet",
        "Santa Cruz de Tenerife",
        "Santander",
        "Sevilla",
        "Tarragona",
        "Terrassa",
        "Valencia",
        "Valladolid",
        "Vigo",
        "Vitoria-Gasteiz",
        "Zaragoza",
    };
    return names;
}

inline const std::array<std::string_view, 50>& province_names() {
    static const std::array<std::string_view, 50> names = {
        "Albacete",
        "Alacant",
        "Almería",
        "Araba - Álava",
        "Asturias",
        "Ávila",
        "Badajoz",
        "Balears (Illes)",
        "Barcelona",
        "Bizkaia",
        "Burgos",
        "Cáceres",
        "Cádiz",
        "Cantabria",
        "Castelló",
        "Ciudad Real",
        "Córdoba",
        "Coruña (A)",
        "Cuenca",
        "Girona",
        "Gipuzkoa",
        "Granada",
        "Guadalajara",
        "Huelva",
        "Huesca",
        "Jaén",
        "León",
        "Lleida",
        "Lugo",
        "Madrid",
        "Málaga",
        "Murcia",
        "Navarra",
        "Ourense",
        "Palencia",
        "Palmas (Las)",
        "Pontevedra",
        "Rioja (La)",
        "Salamanca",
        "Santa Cruz de Tenerife",
        "Segovia",
        "Sevilla",
        "Soria",
        "Tarragona",
        "Teruel",
        "Toledo",
        "València",
        "Valladolid",
        "Zamora",
        "Zaragoza",
    };
    return names;
}

inline const std::array<std::string_view, 2>& autonomous_city_names() {
    static const std::array<std::string_view, 2> names = {"Ceuta", "Melilla"};
    return names;
}

}  // namespace region_detail

inline const RegionRegistry& RegionRegistry::bundled() {
    static const RegionRegistry registry = [] {
        std::vector<RegionEntry> entries;
        entries.reserve(107);
        for (auto name : region_detail::municipality_names()) {
            entries.push_back(
                {"mun-" + slugify(name), std::string(name), RegionKind::municipality});
        }
        for (auto name : region_detail::province_names()) {
            entries.push_back(
                {"prov-" + slugify(name), std::string(name), RegionKind::rest_of_province});
        }
        for (auto name : region_detail::autonomous_city_names()) {
            entries.push_back(
                {"city-" + slugify(name), std::string(name), RegionKind::autonomous_city});
        }
        return RegionRegistry(std::move(entries));
    }();
    return registry;
}

}  // namespace edumob
