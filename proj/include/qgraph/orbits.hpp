#pragma once

#include <algorithm>
#include <cstdint>
#include <functional>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/graph.hpp"

namespace qgraph {

/// Vertex scattering coefficients S_v(e, e') = 2/deg(v) - delta_{e,e'}.
/// Each S_v, read as a deg(v) x deg(v) matrix over the incident edges, is
/// symmetric, orthogonal and involutive.
class ScatteringTable {
public:
    explicit ScatteringTable(const MetricGraph& g) : degrees_(g.vertex_count()) {
        for (int v = 0; v < g.vertex_count(); ++v) degrees_[v] = g.degree(v);
    }

    [[nodiscard]] double coefficient(int vertex, int edge_in, int edge_out) const {
        const double d = static_cast<double>(degrees_.at(vertex));
        return 2.0 / d - (edge_in == edge_out ? 1.0 : 0.0);
    }

private:
    std::vector<int> degrees_;
};

/// Periodic orbit: closed walk of directed bonds up to cyclic rotation,
/// stored as the lexicographically minimal rotation of bond codes.
/// Backtracking is allowed. Reversed orbits are distinct (the equivalence is
/// cyclic permutation only, so the triangle carries two oriented 3-cycles).
struct PeriodicOrbit {
    std::vector<DirectedBond> bonds;
    double length = 0.0;
    int repetition = 1;
    double primitive_length = 0.0;
    double scattering = 1.0;

    [[nodiscard]] std::string canonical_id(const MetricGraph& g) const {
        std::string s;
        for (const DirectedBond& b : bonds) {
            if (!s.empty()) s += '|';
            s += g.edge(b.edge).id;
            s += b.reversed ? '-' : '+';
        }
        return s;
    }
};

struct OrbitOptions {
    /// Hard cap on enumeration work (DFS steps and stored orbits). Exceeding
    /// it signals that lmax is too large for the graph.
    std::uint64_t budget = 10'000'000;
    /// Skip walks whose scattering product is exactly zero, i.e. walks that
    /// backtrack at a degree-2 vertex. Such orbits contribute nothing to the
    /// trace-formula sum, and dropping them keeps circle-like graphs
    /// tractable at large lmax.
    bool prune_zero_scattering = false;
};

struct OrbitBudgetExceeded : std::runtime_error {
    explicit OrbitBudgetExceeded(std::uint64_t budget)
        : std::runtime_error("orbit enumeration exceeded its budget of " +
                             std::to_string(budget) + "; lmax is too large for this graph") {}
};

namespace detail {

/// Lexicographically minimal rotation of the bond-code sequence, O(N^2).
inline std::vector<DirectedBond> minimal_rotation(const std::vector<DirectedBond>& w) {
    const std::size_t n = w.size();
    std::size_t best = 0;
    for (std::size_t cand = 1; cand < n; ++cand) {
        for (std::size_t i = 0; i < n; ++i) {
            const int a = w[(cand + i) % n].code();
            const int b = w[(best + i) % n].code();
            if (a != b) {
                if (a < b) best = cand;
                break;
            }
        }
    }
    std::vector<DirectedBond> out(n);
    for (std::size_t i = 0; i < n; ++i) out[i] = w[(best + i) % n];
    return out;
}

/// Smallest period p dividing N such that the sequence is p-periodic.
inline std::size_t smallest_period(const std::vector<DirectedBond>& w) {
    const std::size_t n = w.size();
    for (std::size_t p = 1; p <= n; ++p) {
        if (n % p != 0) continue;
        bool ok = true;
        for (std::size_t i = p; i < n && ok; ++i) ok = (w[i] == w[i - p]);
        if (ok) return p;
    }
    return n;
}

} // namespace detail

/// Scattering coefficient s(p): product of S_v(e_in, e_out) over the
/// vertices visited, with the cyclic closing factor included. Invariant
/// under rotation of the representative.
inline double scattering_coefficient(const MetricGraph& g, const std::vector<DirectedBond>& bonds,
                                     const ScatteringTable& table) {
    double s = 1.0;
    const std::size_t n = bonds.size();
    for (std::size_t i = 0; i < n; ++i) {
        const DirectedBond& in = bonds[i];
        const DirectedBond& out = bonds[(i + 1) % n];
        s *= table.coefficient(bond_head(g, in), in.edge, out.edge);
    }
    return s;
}

/// Builds the canonical orbit record for a closed bond walk.
inline PeriodicOrbit make_orbit(const MetricGraph& g, std::vector<DirectedBond> walk,
                                const ScatteringTable& table) {
    PeriodicOrbit p;
    p.bonds = detail::minimal_rotation(walk);
    for (const DirectedBond& b : p.bonds) p.length += g.edge(b.edge).length;
    const std::size_t period = detail::smallest_period(p.bonds);
    p.repetition = static_cast<int>(p.bonds.size() / period);
    p.primitive_length = p.length / p.repetition;
    p.scattering = scattering_coefficient(g, p.bonds, table);
    return p;
}

/// The primitive part prim(p): the orbit whose repetition reproduces p.
inline PeriodicOrbit primitive_part(const MetricGraph& g, const PeriodicOrbit& p) {
    const ScatteringTable table(g);
    const std::size_t period = p.bonds.size() / static_cast<std::size_t>(p.repetition);
    std::vector<DirectedBond> prefix(p.bonds.begin(), p.bonds.begin() + period);
    return make_orbit(g, std::move(prefix), table);
}

/// Enumerates every periodic orbit of length at most lmax, each exactly once
/// in canonical form, sorted by (length, canonical id).
///
/// The search runs over the 2E directed bonds: from each start bond a DFS
/// extends walks by head-to-tail adjacency, pruning once the accumulated
/// length exceeds lmax. Restricting extensions to bond codes >= the start
/// bond's code loses nothing (every orbit is reached from its minimal bond)
/// and the canonical-form set removes the remaining duplicates.
inline std::vector<PeriodicOrbit> enumerate_orbits(const MetricGraph& g, double lmax,
                                                   const OrbitOptions& opts = {}) {
    if (!(lmax > 0.0)) throw std::invalid_argument("lmax must be positive");
    const ScatteringTable table(g);
    const int nbonds = 2 * g.edge_count();
    const double slack = lmax * (1.0 + 1e-12) + 1e-12;

    // Outgoing bonds per vertex, ascending bond code.
    std::vector<std::vector<DirectedBond>> outgoing(g.vertex_count());
    for (int e = 0; e < g.edge_count(); ++e) {
        outgoing[g.tail_index(e)].push_back({e, false});
        outgoing[g.head_index(e)].push_back({e, true});
    }
    for (auto& v : outgoing) std::sort(v.begin(), v.end());

    std::set<std::vector<int>> seen;
    std::vector<PeriodicOrbit> orbits;
    std::uint64_t work = 0;

    std::vector<DirectedBond> walk;
    std::function<void(double)> dfs = [&](double len) {
        if (++work > opts.budget) throw OrbitBudgetExceeded(opts.budget);
        // By value: push_back below may reallocate the walk.
        const DirectedBond last = walk.back();
        const DirectedBond start = walk.front();

        if (bond_head(g, last) == bond_tail(g, start)) {
            const bool closing_zero = opts.prune_zero_scattering &&
                                      g.degree(bond_head(g, last)) == 2 &&
                                      last.edge == start.edge;
            if (!closing_zero) {
                PeriodicOrbit p = make_orbit(g, walk, table);
                std::vector<int> key;
                key.reserve(p.bonds.size());
                for (const DirectedBond& b : p.bonds) key.push_back(b.code());
                if (seen.insert(std::move(key)).second) {
                    if (orbits.size() >= opts.budget) throw OrbitBudgetExceeded(opts.budget);
                    orbits.push_back(std::move(p));
                }
            }
        }
        for (const DirectedBond& next : outgoing[bond_head(g, last)]) {
            if (next.code() < start.code()) continue;
            if (opts.prune_zero_scattering && g.degree(bond_head(g, last)) == 2 &&
                next.edge == last.edge)
                continue;
            const double nlen = len + g.edge(next.edge).length;
            if (nlen > slack) continue;
            walk.push_back(next);
            dfs(nlen);
            walk.pop_back();
        }
    };

    for (int code = 0; code < nbonds; ++code) {
        const DirectedBond b{code / 2, code % 2 == 1};
        const double l = g.edge(b.edge).length;
        if (l > slack) continue;
        walk.assign(1, b);
        dfs(l);
    }

    std::sort(orbits.begin(), orbits.end(), [&](const PeriodicOrbit& a, const PeriodicOrbit& b) {
        if (a.length != b.length) return a.length < b.length;
        return a.canonical_id(g) < b.canonical_id(g);
    });
    return orbits;
}

} // namespace qgraph
