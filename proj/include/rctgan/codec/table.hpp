#pragma once
// In-memory table of mixed continuous/discrete columns. Continuous cells are
// doubles (NaN = missing), discrete cells are strings.

#include <cmath>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "rctgan/errors.hpp"

namespace rctgan {

enum class ColKind : uint8_t { continuous, discrete };

using Cell = std::variant<double, std::string>;

inline double num(const Cell& c) { return std::get<double>(c); }
inline const std::string& str(const Cell& c) { return std::get<std::string>(c); }

struct Table {
    std::vector<std::string> names;
    std::vector<ColKind> kinds;
    std::vector<std::vector<Cell>> rows;

    size_t n_rows() const { return rows.size(); }
    size_t n_cols() const { return names.size(); }

    int col_index(const std::string& name) const {
        for (size_t i = 0; i < names.size(); ++i)
            if (names[i] == name) return static_cast<int>(i);
        return -1;
    }

    int require_col(const std::string& name) const {
        const int idx = col_index(name);
        if (idx < 0) throw DataError("table has no column '" + name + "'");
        return idx;
    }

    void add_column(std::string name, ColKind kind) {
        names.push_back(std::move(name));
        kinds.push_back(kind);
        for (auto& r : rows) r.emplace_back(kind == ColKind::continuous ? Cell(0.0) : Cell(std::string()));
    }

    Table subset(const std::vector<int>& row_ids) const {
        Table out;
        out.names = names;
        out.kinds = kinds;
        out.rows.reserve(row_ids.size());
        for (int id : row_ids) out.rows.push_back(rows.at(id));
        return out;
    }
};

}  // namespace rctgan
