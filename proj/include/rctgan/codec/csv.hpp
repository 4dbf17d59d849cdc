#pragma once
// CSV ingestion (generic and Backblaze SMART layouts) and emission.

#include <charconv>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rctgan/codec/table.hpp"
#include "rctgan/errors.hpp"

namespace rctgan {

enum class CsvLayout { generic, backblaze };

struct CsvOptions {
    std::string target;                      // class column (required for generic)
    std::string model_filter = "ST4000DM000";  // backblaze: keep only this model
    // generic: optional explicit kinds; columns not listed are inferred
    std::vector<std::pair<std::string, ColKind>> kinds;
};

struct CsvResult {
    Table table;
    int skipped_rows = 0;  // rows dropped because a numeric cell failed to parse
};

namespace csv_detail {

inline std::vector<std::string> split_line(const std::string& line) {
    std::vector<std::string> out;
    std::string cur;
    bool quoted = false;
    for (size_t i = 0; i < line.size(); ++i) {
        const char ch = line[i];
        if (quoted) {
            if (ch == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += ch;
            }
        } else if (ch == '"') {
            quoted = true;
        } else if (ch == ',') {
            out.push_back(cur);
            cur.clear();
        } else if (ch != '\r') {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

inline std::optional<double> parse_num(const std::string& s) {
    if (s.empty()) return std::nullopt;
    const char* b = s.data();
    const char* e = b + s.size();
    double v = 0.0;
    auto [p, ec] = std::from_chars(b, e, v);
    if (ec != std::errc() || p != e) return std::nullopt;
    return v;
}

inline bool starts_with(const std::string& s, const char* pfx) {
    return s.rfind(pfx, 0) == 0;
}

}  // namespace csv_detail

// Generic layout: header names become columns; a column is continuous when
// every non-empty cell parses as a number, unless it is the target column or
// an explicit kind says otherwise. Backblaze layout: rows filtered by model,
// target = failure flag, smart_*_raw/normalized kept as continuous, columns
// with no values at all dropped.
inline CsvResult load_csv(const std::string& path, CsvLayout layout, CsvOptions opt = {}) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open '" + path + "'");
    std::string line;
    if (!std::getline(in, line)) throw DataError("csv '" + path + "': missing header");
    std::vector<std::string> header = csv_detail::split_line(line);
    if (header.empty() || (header.size() == 1 && header[0].empty()))
        throw DataError("csv '" + path + "': empty header");

    std::vector<std::vector<std::string>> raw;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto cells = csv_detail::split_line(line);
        cells.resize(header.size());
        raw.push_back(std::move(cells));
    }

    const int ncols = static_cast<int>(header.size());
    std::string target = opt.target;

    std::vector<bool> keep(ncols, true);
    if (layout == CsvLayout::backblaze) {
        target = "failure";
        int model_col = -1, failure_col = -1;
        for (int c = 0; c < ncols; ++c) {
            if (header[c] == "model") model_col = c;
            if (header[c] == "failure") failure_col = c;
        }
        if (failure_col < 0) throw DataError("backblaze csv: no 'failure' column");
        if (model_col >= 0 && !opt.model_filter.empty()) {
            std::vector<std::vector<std::string>> filtered;
            for (auto& r : raw)
                if (r[model_col] == opt.model_filter) filtered.push_back(std::move(r));
            raw = std::move(filtered);
        }
        for (int c = 0; c < ncols; ++c) {
            const bool smart = csv_detail::starts_with(header[c], "smart_");
            keep[c] = c == failure_col || smart;
            if (smart) {  // drop empty-SMART columns
                bool any = false;
                for (const auto& r : raw)
                    if (!r[c].empty()) {
                        any = true;
                        break;
                    }
                if (!any) keep[c] = false;
            }
        }
    }

    if (target.empty()) throw DataError("csv: no target column specified");
    int target_col = -1;
    for (int c = 0; c < ncols; ++c)
        if (header[c] == target) target_col = c;
    if (target_col < 0 || !keep[target_col])
        throw DataError("csv '" + path + "': target column '" + target + "' not found");

    // decide kinds
    std::vector<ColKind> kinds(ncols, ColKind::continuous);
    for (int c = 0; c < ncols; ++c) {
        if (!keep[c]) continue;
        if (c == target_col) {
            kinds[c] = ColKind::discrete;
            continue;
        }
        if (layout == CsvLayout::backblaze) {
            kinds[c] = ColKind::continuous;  // smart_* columns
            continue;
        }
        bool forced = false;
        for (const auto& [name, kind] : opt.kinds)
            if (name == header[c]) {
                kinds[c] = kind;
                forced = true;
            }
        if (forced) continue;
        bool numeric = true;
        bool any = false;
        for (const auto& r : raw) {
            if (r[c].empty()) continue;
            any = true;
            if (!csv_detail::parse_num(r[c])) {
                numeric = false;
                break;
            }
        }
        kinds[c] = numeric && any ? ColKind::continuous : ColKind::discrete;
    }

    CsvResult res;
    for (int c = 0; c < ncols; ++c) {
        if (!keep[c]) continue;
        res.table.names.push_back(header[c]);
        res.table.kinds.push_back(kinds[c]);
    }
    for (const auto& r : raw) {
        std::vector<Cell> row;
        row.reserve(res.table.n_cols());
        bool bad = false;
        for (int c = 0; c < ncols && !bad; ++c) {
            if (!keep[c]) continue;
            if (kinds[c] == ColKind::discrete) {
                row.emplace_back(r[c]);
            } else if (r[c].empty()) {
                row.emplace_back(std::nan(""));  // missing, imputed at fit time
            } else if (auto v = csv_detail::parse_num(r[c])) {
                row.emplace_back(*v);
            } else {
                bad = true;
            }
        }
        if (bad) {
            ++res.skipped_rows;
            continue;
        }
        res.table.rows.push_back(std::move(row));
    }
    return res;
}

inline void write_csv(std::ostream& os, const Table& table) {
    auto escape = [](const std::string& s) {
        if (s.find_first_of(",\"\n") == std::string::npos) return s;
        std::string out = "\"";
        for (char ch : s) {
            if (ch == '"') out += "\"\"";
            else out += ch;
        }
        out += '"';
        return out;
    };
    for (size_t c = 0; c < table.n_cols(); ++c)
        os << (c ? "," : "") << escape(table.names[c]);
    os << "\n";
    char buf[40];
    for (const auto& row : table.rows) {
        for (size_t c = 0; c < table.n_cols(); ++c) {
            if (c) os << ",";
            if (table.kinds[c] == ColKind::continuous) {
                std::snprintf(buf, sizeof buf, "%.12g", num(row[c]));
                os << buf;
            } else {
                os << escape(str(row[c]));
            }
        }
        os << "\n";
    }
}

}  // namespace rctgan
