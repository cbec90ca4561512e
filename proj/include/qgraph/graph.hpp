#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <queue>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

namespace qgraph {

/// One edge of a metric graph. The (tail, head) pair fixes the coordinate
/// orientation: points on the edge are parametrized by x in [0, length] with
/// x = 0 at the tail. Spectral quantities must never depend on this choice.
struct Edge {
    std::string id;
    std::string tail;
    std::string head;
    double length = 0.0;
};

/// Finite combinatorial graph with positive edge lengths.
///
/// Construction is permissive: loops, parallel edges, nonpositive lengths and
/// disconnected graphs are all representable, and validate() reports them.
/// Operations other than validate() assume a valid graph.
///
/// Vertex and edge ids are opaque strings; internally everything is indexed
/// by position in the id-sorted order, so iteration and output are
/// reproducible.
class MetricGraph {
public:
    MetricGraph() = default;

    MetricGraph(std::vector<std::string> vertices, std::vector<Edge> edges) {
        std::sort(vertices.begin(), vertices.end());
        vertices.erase(std::unique(vertices.begin(), vertices.end()), vertices.end());
        std::sort(edges.begin(), edges.end(),
                  [](const Edge& a, const Edge& b) { return a.id < b.id; });
        vertices_ = std::move(vertices);
        edges_ = std::move(edges);

        for (std::size_t i = 0; i < vertices_.size(); ++i)
            vertex_index_[vertices_[i]] = static_cast<int>(i);
        for (std::size_t i = 0; i + 1 < edges_.size(); ++i)
            if (edges_[i].id == edges_[i + 1].id)
                throw std::invalid_argument("duplicate edge id: " + edges_[i].id);
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            const Edge& e = edges_[i];
            if (!vertex_index_.count(e.tail))
                throw std::invalid_argument("edge " + e.id + " references unknown vertex: " + e.tail);
            if (!vertex_index_.count(e.head))
                throw std::invalid_argument("edge " + e.id + " references unknown vertex: " + e.head);
            edge_index_[e.id] = static_cast<int>(i);
        }

        incidence_.assign(vertices_.size(), {});
        for (std::size_t i = 0; i < edges_.size(); ++i) {
            incidence_[vertex_index_.at(edges_[i].tail)].push_back(static_cast<int>(i));
            if (edges_[i].head != edges_[i].tail)
                incidence_[vertex_index_.at(edges_[i].head)].push_back(static_cast<int>(i));
        }
    }

    [[nodiscard]] int vertex_count() const { return static_cast<int>(vertices_.size()); }
    [[nodiscard]] int edge_count() const { return static_cast<int>(edges_.size()); }

    [[nodiscard]] const std::string& vertex_id(int v) const { return vertices_.at(v); }
    [[nodiscard]] const Edge& edge(int e) const { return edges_.at(e); }
    [[nodiscard]] const std::vector<Edge>& edges() const { return edges_; }
    [[nodiscard]] const std::vector<std::string>& vertices() const { return vertices_; }

    [[nodiscard]] int vertex_index(const std::string& id) const {
        auto it = vertex_index_.find(id);
        if (it == vertex_index_.end())
            throw std::invalid_argument("unknown vertex id: " + id);
        return it->second;
    }
    [[nodiscard]] int edge_index(const std::string& id) const {
        auto it = edge_index_.find(id);
        if (it == edge_index_.end())
            throw std::invalid_argument("unknown edge id: " + id);
        return it->second;
    }

    [[nodiscard]] int tail_index(int e) const { return vertex_index_.at(edges_.at(e).tail); }
    [[nodiscard]] int head_index(int e) const { return vertex_index_.at(edges_.at(e).head); }

    /// Edge indices incident to vertex v, in id-sorted order.
    [[nodiscard]] const std::vector<int>& incident_edges(int v) const { return incidence_.at(v); }
    [[nodiscard]] int degree(int v) const { return static_cast<int>(incidence_.at(v).size()); }

    [[nodiscard]] double volume() const {
        double s = 0.0;
        for (const Edge& e : edges_) s += e.length;
        return s;
    }

    /// First Betti number #E - #V + 1 (meaningful for connected graphs).
    [[nodiscard]] int betti() const { return edge_count() - vertex_count() + 1; }

    [[nodiscard]] double max_edge_length() const {
        double m = 0.0;
        for (const Edge& e : edges_) m = std::max(m, e.length);
        return m;
    }
    [[nodiscard]] double min_edge_length() const {
        double m = std::numeric_limits<double>::infinity();
        for (const Edge& e : edges_) m = std::min(m, e.length);
        return m;
    }

    [[nodiscard]] bool is_connected() const {
        if (vertices_.empty()) return true;
        std::vector<char> seen(vertices_.size(), 0);
        std::queue<int> q;
        q.push(0);
        seen[0] = 1;
        int n = 1;
        while (!q.empty()) {
            int v = q.front();
            q.pop();
            for (int e : incidence_[v]) {
                for (int w : {tail_index(e), head_index(e)}) {
                    if (!seen[w]) {
                        seen[w] = 1;
                        ++n;
                        q.push(w);
                    }
                }
            }
        }
        return n == vertex_count();
    }

    /// Returns a copy with every length multiplied by c > 0.
    [[nodiscard]] MetricGraph scaled(double c) const {
        if (!(c > 0.0)) throw std::invalid_argument("scale factor must be positive");
        std::vector<Edge> es = edges_;
        for (Edge& e : es) e.length *= c;
        return MetricGraph(vertices_, std::move(es));
    }

    /// Returns a copy with the orientation of edge e flipped.
    [[nodiscard]] MetricGraph with_flipped_edge(int e) const {
        std::vector<Edge> es = edges_;
        std::swap(es.at(e).tail, es.at(e).head);
        return MetricGraph(vertices_, std::move(es));
    }

private:
    std::vector<std::string> vertices_;
    std::vector<Edge> edges_;
    std::vector<std::vector<int>> incidence_;
    std::unordered_map<std::string, int> vertex_index_;
    std::unordered_map<std::string, int> edge_index_;
};

/// Directed traversal of an edge: forward runs tail -> head.
struct DirectedBond {
    int edge = -1;
    bool reversed = false;

    [[nodiscard]] DirectedBond reversal() const { return {edge, !reversed}; }
    [[nodiscard]] int code() const { return 2 * edge + (reversed ? 1 : 0); }

    friend bool operator==(const DirectedBond& a, const DirectedBond& b) {
        return a.edge == b.edge && a.reversed == b.reversed;
    }
    friend bool operator<(const DirectedBond& a, const DirectedBond& b) {
        return a.code() < b.code();
    }
};

[[nodiscard]] inline int bond_tail(const MetricGraph& g, const DirectedBond& b) {
    return b.reversed ? g.head_index(b.edge) : g.tail_index(b.edge);
}
[[nodiscard]] inline int bond_head(const MetricGraph& g, const DirectedBond& b) {
    return b.reversed ? g.tail_index(b.edge) : g.head_index(b.edge);
}

/// Point on a metric graph: edge plus offset from the edge tail.
struct GraphPoint {
    int edge = 0;
    double offset = 0.0;
};

struct ValidationReport {
    bool valid = true;
    std::vector<std::string> violations;
    double volume = 0.0;
    int betti = 0;

    void fail(std::string what) {
        valid = false;
        violations.push_back(std::move(what));
    }
};

/// Checks the metric-graph invariants: simplicity (no loops or parallel
/// edges), connectedness, strictly positive finite lengths. A graph used as
/// the finite core of an infinite description may be edgeless, which
/// standalone metric graphs may not; `allow_edgeless` switches that rule.
inline ValidationReport validate(const MetricGraph& g, bool allow_edgeless = false) {
    ValidationReport r;
    if (g.vertex_count() == 0) {
        r.fail("graph has no vertices");
        return r;
    }
    std::set<std::pair<int, int>> seen_pairs;
    for (int e = 0; e < g.edge_count(); ++e) {
        const Edge& ed = g.edge(e);
        if (!(ed.length > 0.0) || !std::isfinite(ed.length))
            r.fail("edge " + ed.id + ": nonpositive or non-finite length");
        int a = g.tail_index(e), b = g.head_index(e);
        if (a == b) {
            r.fail("edge " + ed.id + ": loop");
            continue;
        }
        auto key = std::minmax(a, b);
        if (!seen_pairs.insert(key).second)
            r.fail("edge " + ed.id + ": parallel edge between " + g.vertex_id(key.first) +
                   " and " + g.vertex_id(key.second));
    }
    if (!g.is_connected()) r.fail("graph is not connected");
    if (g.edge_count() == 0 && !allow_edgeless) r.fail("graph has no edges (volume 0)");

    // deg(v) = #E_v and sum of degrees = 2 #E hold by construction for
    // loop-free graphs; recheck as a guard.
    long degsum = 0;
    for (int v = 0; v < g.vertex_count(); ++v) degsum += g.degree(v);
    if (r.valid && degsum != 2L * g.edge_count())
        r.fail("degree sum does not equal twice the edge count");

    r.volume = g.volume();
    r.betti = g.betti();
    return r;
}

/// Splits edge e at interior position t into two edges meeting at a fresh
/// degree-2 vertex. The metric space is unchanged: volume, Betti number and
/// path distances between pre-existing points are preserved.
inline MetricGraph subdivide(const MetricGraph& g, int e, double t) {
    const Edge& ed = g.edge(e);
    if (!(t > 0.0) || !(t < ed.length))
        throw std::invalid_argument("subdivision point must lie strictly inside (0, length)");

    auto fresh = [](const std::vector<std::string>& taken, const std::string& base) {
        std::string name = base;
        int n = 0;
        while (std::find(taken.begin(), taken.end(), name) != taken.end())
            name = base + std::to_string(n++);
        return name;
    };

    std::vector<std::string> vertices = g.vertices();
    std::string mid = fresh(vertices, ed.id + ".mid");
    vertices.push_back(mid);

    std::vector<std::string> edge_ids;
    for (const Edge& x : g.edges()) edge_ids.push_back(x.id);
    std::string id_a = fresh(edge_ids, ed.id + ".a");
    edge_ids.push_back(id_a);
    std::string id_b = fresh(edge_ids, ed.id + ".b");

    std::vector<Edge> edges;
    for (int i = 0; i < g.edge_count(); ++i) {
        if (i == e) continue;
        edges.push_back(g.edge(i));
    }
    edges.push_back(Edge{id_a, ed.tail, mid, t});
    edges.push_back(Edge{id_b, mid, ed.head, ed.length - t});
    return MetricGraph(std::move(vertices), std::move(edges));
}

/// Natural path metric: arc length of the shortest continuous path.
/// Exact shortest path over the vertex skeleton plus the boundary offsets of
/// the two points; the same-edge direct arc is compared as well.
inline double path_metric(const MetricGraph& g, const GraphPoint& x, const GraphPoint& y) {
    const Edge& ex = g.edge(x.edge);
    const Edge& ey = g.edge(y.edge);
    if (x.offset < -1e-12 || x.offset > ex.length + 1e-12 || y.offset < -1e-12 ||
        y.offset > ey.length + 1e-12)
        throw std::invalid_argument("point offset outside its edge");

    // Dijkstra seeded with the distances from x to the two endpoints of its edge.
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> dist(g.vertex_count(), inf);
    using Item = std::pair<double, int>;
    std::priority_queue<Item, std::vector<Item>, std::greater<>> pq;
    auto push = [&](int v, double d) {
        if (d < dist[v]) {
            dist[v] = d;
            pq.push({d, v});
        }
    };
    push(g.tail_index(x.edge), x.offset);
    push(g.head_index(x.edge), ex.length - x.offset);
    while (!pq.empty()) {
        auto [d, v] = pq.top();
        pq.pop();
        if (d > dist[v]) continue;
        for (int e : g.incident_edges(v)) {
            double nd = d + g.edge(e).length;
            push(g.tail_index(e), nd);
            push(g.head_index(e), nd);
        }
    }

    double best = dist[g.tail_index(y.edge)] + y.offset;
    best = std::min(best, dist[g.head_index(y.edge)] + (ey.length - y.offset));
    if (x.edge == y.edge) best = std::min(best, std::abs(x.offset - y.offset));
    return best;
}

/// Incident-length sum m(v): the Lebesgue mass of the star around v.
inline std::vector<double> vertex_star_masses(const MetricGraph& g) {
    std::vector<double> m(g.vertex_count(), 0.0);
    for (int v = 0; v < g.vertex_count(); ++v)
        for (int e : g.incident_edges(v)) m[v] += g.edge(e).length;
    return m;
}

/// Edge lengths of the star metric: an edge between u and v gets length
/// m(u) + m(v), the incident-length sums of both endpoints.
inline std::map<std::string, double> star_lengths(const MetricGraph& g) {
    std::vector<double> m = vertex_star_masses(g);
    std::map<std::string, double> out;
    for (int e = 0; e < g.edge_count(); ++e)
        out[g.edge(e).id] = m[g.tail_index(e)] + m[g.head_index(e)];
    return out;
}

} // namespace qgraph
