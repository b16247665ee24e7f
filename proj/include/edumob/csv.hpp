#pragma once

// Minimal RFC-4180 CSV reader/writer plus a keyed inner join. All files are
// UTF-8; numbers are formatted with shortest round-trip representations so
// write(read(f)) is byte-identical on canonical files.

#include <charconv>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace edumob {

struct CsvTable {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;

    std::size_t column_index(std::string_view name) const {
        for (std::size_t i = 0; i < header.size(); ++i) {
            if (header[i] == name) return i;
        }
        throw std::runtime_error("csv: missing column \"" + std::string(name) + "\"");
    }
};

namespace csv_detail {

inline bool needs_quoting(std::string_view field) {
    if (field.empty()) return false;
    if (field.front() == ' ' || field.back() == ' ') return true;
    return field.find_first_of(",\"\n\r") != std::string_view::npos;
}

inline void append_field(std::string& out, std::string_view field) {
    if (!needs_quoting(field)) {
        out.append(field);
        return;
    }
    out.push_back('"');
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
}

}  // namespace csv_detail

inline std::string format_csv_line(const std::vector<std::string>& fields) {
    std::string line;
    for (std::size_t i = 0; i < fields.size(); ++i) {
        if (i) line.push_back(',');
        csv_detail::append_field(line, fields[i]);
    }
    line.push_back('\n');
    return line;
}

inline std::string render_csv(const CsvTable& table) {
    std::string out = format_csv_line(table.header);
    for (const auto& row : table.rows) {
        out += format_csv_line(row);
    }
    return out;
}

// Writers go through a temporary file and rename, so readers never observe a
// partially written table.
inline void write_text_file(const std::filesystem::path& path, std::string_view content) {
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) {
            throw std::runtime_error("cannot open " + tmp.string() + " for writing");
        }
        out.write(content.data(), static_cast<std::streamsize>(content.size()));
        if (!out) {
            throw std::runtime_error("failed writing " + tmp.string());
        }
    }
    std::filesystem::rename(tmp, path);
}

inline void write_csv(const std::filesystem::path& path, const CsvTable& table) {
    write_text_file(path, render_csv(table));
}

inline std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw std::runtime_error("cannot open " + path.string());
    }
    std::string content((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return content;
}

inline CsvTable parse_csv(std::string_view text, const std::filesystem::path& origin = {}) {
    CsvTable table;
    std::vector<std::string> row;
    std::string field;
    bool in_quotes = false;
    bool row_has_data = false;
    std::size_t line_no = 1;
    auto origin_tag = [&]() {
        return origin.empty() ? std::string("csv") : origin.string();
    };

    auto end_field = [&]() {
        row.push_back(std::move(field));
        field.clear();
    };
    auto end_row = [&]() {
        end_field();
        if (table.header.empty()) {
            table.header = std::move(row);
        } else {
            if (row.size() != table.header.size()) {
                throw std::runtime_error(origin_tag() + ":" + std::to_string(line_no) +
                                         ": expected " + std::to_string(table.header.size()) +
                                         " fields, found " + std::to_string(row.size()));
            }
            table.rows.push_back(std::move(row));
        }
        row.clear();
        row_has_data = false;
    };

    for (std::size_t i = 0; i < text.size(); ++i) {
        char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field.push_back('"');
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                if (c == '\n') ++line_no;
                field.push_back(c);
            }
            continue;
        }
        switch (c) {
            case '"':
                in_quotes = true;
                row_has_data = true;
                break;
            case ',':
                end_field();
                row_has_data = true;
                break;
            case '\r':
                break;
            case '\n':
                if (row_has_data || !field.empty() || !row.empty()) {
                    end_row();
                }
                ++line_no;
                break;
            default:
                field.push_back(c);
                row_has_data = true;
                break;
        }
    }
    if (in_quotes) {
        throw std::runtime_error(origin_tag() + ": unterminated quoted field");
    }
    if (row_has_data || !field.empty() || !row.empty()) {
        end_row();
    }
    return table;
}

inline CsvTable read_csv(const std::filesystem::path& path) {
    return parse_csv(read_text_file(path), path);
}

inline std::string format_double(double v) {
    char buf[40];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_int(std::int64_t v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline std::string format_uint(std::uint64_t v) {
    char buf[24];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

inline double parse_double(std::string_view s, std::string_view context) {
    double v = 0.0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error(std::string(context) + ": cannot parse \"" + std::string(s) +
                                 "\" as a number");
    }
    return v;
}

inline std::int64_t parse_int(std::string_view s, std::string_view context) {
    std::int64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error(std::string(context) + ": cannot parse \"" + std::string(s) +
                                 "\" as an integer");
    }
    return v;
}

inline std::uint64_t parse_uint(std::string_view s, std::string_view context) {
    std::uint64_t v = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), v);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw std::runtime_error(std::string(context) + ": cannot parse \"" + std::string(s) +
                                 "\" as an unsigned integer");
    }
    return v;
}

struct JoinReport {
    CsvTable joined;
    std::vector<std::string> unmatched_left;   // left keys with no right-hand match
    std::vector<std::string> unmatched_right;  // right keys never used
};

// Inner join of `left` with `external` on `key`, preserving left row order.
// The external table must be uniquely keyed.
inline JoinReport join_external(const CsvTable& left, const CsvTable& external,
                                std::string_view key = "region_id") {
    const std::size_t lk = left.column_index(key);
    const std::size_t rk = external.column_index(key);

    std::unordered_map<std::string, std::size_t> right_by_key;
    right_by_key.reserve(external.rows.size());
    for (std::size_t i = 0; i < external.rows.size(); ++i) {
        auto [it, inserted] = right_by_key.emplace(external.rows[i][rk], i);
        if (!inserted) {
            throw std::runtime_error("join_external: duplicate key \"" + external.rows[i][rk] +
                                     "\" in external table");
        }
    }

    JoinReport report;
    report.joined.header = left.header;
    for (std::size_t j = 0; j < external.header.size(); ++j) {
        if (j == rk) continue;
        report.joined.header.push_back(external.header[j]);
    }

    std::unordered_set<std::string> seen_left_miss;
    std::unordered_set<std::size_t> used_right;
    for (const auto& row : left.rows) {
        auto it = right_by_key.find(row[lk]);
        if (it == right_by_key.end()) {
            if (seen_left_miss.insert(row[lk]).second) {
                report.unmatched_left.push_back(row[lk]);
            }
            continue;
        }
        used_right.insert(it->second);
        std::vector<std::string> joined = row;
        const auto& rrow = external.rows[it->second];
        for (std::size_t j = 0; j < rrow.size(); ++j) {
            if (j == rk) continue;
            joined.push_back(rrow[j]);
        }
        report.joined.rows.push_back(std::move(joined));
    }
    for (std::size_t i = 0; i < external.rows.size(); ++i) {
        if (!used_right.count(i)) {
            report.unmatched_right.push_back(external.rows[i][rk]);
        }
    }
    return report;
}

}  // namespace edumob
