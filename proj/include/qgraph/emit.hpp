#pragma once

#include <cstdio>
#include <string>
#include <vector>

#include <json.hpp>

namespace qgraph::emit {

/// All numeric output is printed with 12 significant digits so repeated runs
/// are byte-identical and golden files stay stable.
inline std::string number(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.12g", x);
    return buf;
}

inline std::string csv_row(const std::vector<std::string>& cells) {
    std::string row;
    for (std::size_t i = 0; i < cells.size(); ++i) {
        if (i) row += ',';
        row += cells[i];
    }
    row += '\n';
    return row;
}

/// Serializes a JSON document with %.12g numbers (nlohmann's own dump prints
/// shortest round-trip forms, which is not the output contract here).
inline std::string dump_json(const nlohmann::ordered_json& j, int indent = 0, int depth = 0) {
    const std::string pad(static_cast<std::size_t>(indent) * depth, ' ');
    const std::string pad_in(static_cast<std::size_t>(indent) * (depth + 1), ' ');
    const std::string nl = indent > 0 ? "\n" : "";
    const std::string sep = indent > 0 ? ": " : ":";

    switch (j.type()) {
        case nlohmann::json::value_t::object: {
            if (j.empty()) return "{}";
            std::string out = "{" + nl;
            bool first = true;
            for (const auto& [key, value] : j.items()) {
                if (!first) out += "," + nl;
                first = false;
                out += pad_in + nlohmann::ordered_json(key).dump() + sep +
                       dump_json(value, indent, depth + 1);
            }
            return out + nl + pad + "}";
        }
        case nlohmann::json::value_t::array: {
            if (j.empty()) return "[]";
            std::string out = "[" + nl;
            bool first = true;
            for (const auto& value : j) {
                if (!first) out += "," + nl;
                first = false;
                out += pad_in + dump_json(value, indent, depth + 1);
            }
            return out + nl + pad + "]";
        }
        case nlohmann::json::value_t::number_float:
            return number(j.get<double>());
        default:
            return j.dump();
    }
}

} // namespace qgraph::emit
