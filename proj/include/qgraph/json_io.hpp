#pragma once

#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <json.hpp>

#include "qgraph/ends.hpp"
#include "qgraph/graph.hpp"

namespace qgraph {

struct ParseError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace detail {

inline double positive_finite(const nlohmann::json& j, const std::string& field) {
    if (!j.is_number()) throw ParseError("field '" + field + "' must be a number");
    const double x = j.get<double>();
    if (!std::isfinite(x) || !(x > 0.0))
        throw ParseError("field '" + field + "' must be positive and finite, got " +
                         j.dump());
    return x;
}

inline SequenceLaw parse_law(const nlohmann::json& j, const std::string& where) {
    if (!j.is_object() || !j.contains("kind"))
        throw ParseError("field '" + where + "' must be an object with a 'kind'");
    const std::string kind = j.at("kind").get<std::string>();
    if (kind == "constant") {
        return SequenceLaw::constant(positive_finite(j.at("a"), where + ".a"));
    }
    if (kind == "geometric") {
        return SequenceLaw::geometric(positive_finite(j.at("a"), where + ".a"),
                                      positive_finite(j.at("q"), where + ".q"));
    }
    if (kind == "power") {
        return SequenceLaw::power(positive_finite(j.at("a"), where + ".a"),
                                  positive_finite(j.at("s"), where + ".s"));
    }
    if (kind == "prefix") {
        std::vector<double> prefix;
        for (std::size_t i = 0; i < j.at("prefix").size(); ++i)
            prefix.push_back(positive_finite(j.at("prefix").at(i),
                                             where + ".prefix[" + std::to_string(i) + "]"));
        return SequenceLaw::prefix_then(std::move(prefix),
                                        parse_law(j.at("tail"), where + ".tail"));
    }
    throw ParseError("field '" + where + ".kind' must be one of constant, geometric, power, "
                     "prefix; got '" + kind + "'");
}

} // namespace detail

/// Parses the metric-graph JSON format:
///   {"vertices": ["a", ...],
///    "edges": [{"id": "e1", "ends": ["a", "b"], "length": 1.0}, ...]}
/// Nonpositive and non-finite lengths are rejected here; structural
/// invariants (simplicity, connectedness) are the job of validate().
inline MetricGraph parse_metric_graph(const nlohmann::json& j) {
    if (!j.is_object()) throw ParseError("graph document must be a JSON object");
    if (!j.contains("vertices")) throw ParseError("missing field 'vertices'");
    if (!j.contains("edges")) throw ParseError("missing field 'edges'");

    std::vector<std::string> vertices;
    for (const auto& v : j.at("vertices")) {
        if (!v.is_string()) throw ParseError("field 'vertices' must hold strings");
        vertices.push_back(v.get<std::string>());
    }
    std::vector<Edge> edges;
    for (std::size_t i = 0; i < j.at("edges").size(); ++i) {
        const auto& je = j.at("edges").at(i);
        const std::string where = "edges[" + std::to_string(i) + "]";
        if (!je.is_object()) throw ParseError("field '" + where + "' must be an object");
        for (const char* key : {"id", "ends", "length"})
            if (!je.contains(key))
                throw ParseError("field '" + where + "' is missing '" + key + "'");
        if (!je.at("ends").is_array() || je.at("ends").size() != 2)
            throw ParseError("field '" + where + ".ends' must be a pair of vertex ids");
        Edge e;
        e.id = je.at("id").get<std::string>();
        e.tail = je.at("ends").at(0).get<std::string>();
        e.head = je.at("ends").at(1).get<std::string>();
        e.length = detail::positive_finite(je.at("length"), where + ".length");
        edges.push_back(std::move(e));
    }
    try {
        return MetricGraph(std::move(vertices), std::move(edges));
    } catch (const std::invalid_argument& ex) {
        throw ParseError(ex.what());
    }
}

/// Parses the ended-graph extension: the metric-graph format plus
///   "gadgets": [{"type": "ray", "attach": "a", "law": {...}},
///               {"type": "tree", "attach": "b", "branching": 3, "law": {...}}]
inline EndedGraphDescription parse_ended_graph(const nlohmann::json& j) {
    EndedGraphDescription d;
    d.core = parse_metric_graph(j);
    if (!j.contains("gadgets")) return d;
    for (std::size_t i = 0; i < j.at("gadgets").size(); ++i) {
        const auto& jg = j.at("gadgets").at(i);
        const std::string where = "gadgets[" + std::to_string(i) + "]";
        EndGadget g;
        const std::string type = jg.at("type").get<std::string>();
        if (type == "ray") {
            g.kind = EndGadget::Kind::Ray;
        } else if (type == "tree") {
            g.kind = EndGadget::Kind::RegularTree;
            if (!jg.contains("branching"))
                throw ParseError("field '" + where + "' is missing 'branching'");
            g.branching = jg.at("branching").get<int>();
            if (g.branching < 2)
                throw ParseError("field '" + where + ".branching' must be at least 2");
        } else {
            throw ParseError("field '" + where + ".type' must be 'ray' or 'tree'");
        }
        if (!jg.contains("attach"))
            throw ParseError("field '" + where + "' is missing 'attach'");
        g.attach = jg.at("attach").get<std::string>();
        g.law = detail::parse_law(jg.at("law"), where + ".law");
        d.gadgets.push_back(std::move(g));
    }
    return d;
}

inline nlohmann::ordered_json metric_graph_to_json(const MetricGraph& g) {
    nlohmann::ordered_json j;
    j["vertices"] = g.vertices();
    j["edges"] = nlohmann::ordered_json::array();
    for (const Edge& e : g.edges()) {
        nlohmann::ordered_json je;
        je["id"] = e.id;
        je["ends"] = {e.tail, e.head};
        je["length"] = e.length;
        j["edges"].push_back(std::move(je));
    }
    return j;
}

inline nlohmann::json load_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open file: " + path);
    nlohmann::json j;
    try {
        in >> j;
    } catch (const nlohmann::json::exception& ex) {
        throw ParseError("malformed JSON in " + path + ": " + ex.what());
    }
    return j;
}

inline MetricGraph load_metric_graph(const std::string& path) {
    return parse_metric_graph(load_json_file(path));
}

inline EndedGraphDescription load_ended_graph(const std::string& path) {
    return parse_ended_graph(load_json_file(path));
}

} // namespace qgraph
