#pragma once

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <cmath>
#include <stdexcept>

#include "qgraph/graph.hpp"

namespace qgraph {

/// Assembles the real secular matrix M(k) of a finite metric graph at
/// wavenumber k > 0.
///
/// Column unknowns are the per-edge coefficients (a_e, b_e) of the edgewise
/// solution f_e(x) = a_e cos(kx) + b_e sin(kx), x measured from the edge
/// tail. Edge e occupies columns (2e, 2e+1).
///
/// Row blocks:
///  - continuity: for every vertex, deg(v)-1 rows equating the endpoint value
///    of each incident edge to the value of the first incident edge;
///  - Kirchhoff: one row per vertex summing the inward derivatives over E_v,
///    pre-divided by k so entries stay bounded in k.
///
/// Endpoint data for an edge of length l:
///   value at tail            a_e
///   value at head            a_e cos(kl) + b_e sin(kl)
///   inward derivative / k    at tail:  b_e
///                            at head:  a_e sin(kl) - b_e cos(kl)
///
/// Null vectors of M(k) are in bijection with Kirchhoff eigenfunctions at
/// lambda = k^2, so the nullity equals the eigenvalue multiplicity.
inline Eigen::MatrixXd build_secular_matrix(const MetricGraph& g, double k) {
    if (!(k > 0.0)) throw std::invalid_argument("wavenumber k must be positive");

    const int E = g.edge_count();
    const int V = g.vertex_count();
    const int n = 2 * E;
    Eigen::MatrixXd M = Eigen::MatrixXd::Zero(n, n);

    // Coefficients of the endpoint value of edge e at vertex v on (a_e, b_e).
    auto value_coeffs = [&](int e, int v) {
        const Edge& ed = g.edge(e);
        if (v == g.tail_index(e)) return std::pair<double, double>{1.0, 0.0};
        const double kl = k * ed.length;
        return std::pair<double, double>{std::cos(kl), std::sin(kl)};
    };
    // Coefficients of the inward derivative (divided by k) of edge e at v.
    auto derivative_coeffs = [&](int e, int v) {
        const Edge& ed = g.edge(e);
        if (v == g.tail_index(e)) return std::pair<double, double>{0.0, 1.0};
        const double kl = k * ed.length;
        return std::pair<double, double>{std::sin(kl), -std::cos(kl)};
    };

    int row = 0;
    for (int v = 0; v < V; ++v) {
        const auto& inc = g.incident_edges(v);
        if (inc.empty()) continue;
        const int ref = inc.front();
        auto [ra, rb] = value_coeffs(ref, v);
        for (std::size_t j = 1; j < inc.size(); ++j) {
            const int e = inc[j];
            auto [ca, cb] = value_coeffs(e, v);
            M(row, 2 * ref) += ra;
            M(row, 2 * ref + 1) += rb;
            M(row, 2 * e) -= ca;
            M(row, 2 * e + 1) -= cb;
            ++row;
        }
    }
    for (int v = 0; v < V; ++v) {
        for (int e : g.incident_edges(v)) {
            auto [ca, cb] = derivative_coeffs(e, v);
            M(row, 2 * e) += ca;
            M(row, 2 * e + 1) += cb;
        }
        ++row;
    }
    if (row != n) throw std::logic_error("secular row count mismatch; graph not validated?");
    return M;
}

/// All singular values of M(k), descending.
inline Eigen::VectorXd secular_singular_values(const MetricGraph& g, double k) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(build_secular_matrix(g, k));
    return svd.singularValues();
}

/// Smallest singular value of M(k); the root detector scans this quantity.
inline double secular_sigma_min(const MetricGraph& g, double k) {
    const Eigen::VectorXd s = secular_singular_values(g, k);
    return s(s.size() - 1);
}

/// Orthonormal basis of the numerical null space of M(k): right singular
/// vectors whose singular value is below rel_tol times the largest one.
/// Test-only evaluation hook; the solver itself needs just the nullity.
inline Eigen::MatrixXd secular_null_basis(const MetricGraph& g, double k,
                                          double rel_tol = 1e-8) {
    Eigen::JacobiSVD<Eigen::MatrixXd> svd(build_secular_matrix(g, k), Eigen::ComputeFullV);
    const Eigen::VectorXd s = svd.singularValues();
    const double cut = rel_tol * s(0);
    int nullity = 0;
    for (int i = 0; i < s.size(); ++i)
        if (s(i) < cut) ++nullity;
    return svd.matrixV().rightCols(nullity);
}

} // namespace qgraph
