#pragma once

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/graph.hpp"
#include "qgraph/spectrum.hpp"

namespace qgraph {

enum class DiscreteWeighting {
    Normalized,    // m = deg, b = 1: spectrum in [0, 2]
    MetricWeights, // m(v) = sum of incident lengths, b(e) = 1/l(e)
};

/// Weighted discrete Laplacian (Delta f)(v) = 1/m(v) sum_u b(e_uv)(f(v)-f(u)).
/// Self-adjoint in l2(V; m); the symmetrized matrix M^{1/2} Delta M^{-1/2}
/// is symmetric positive semidefinite with a one-dimensional kernel of
/// constants on a connected graph.
class DiscreteLaplacian {
public:
    DiscreteLaplacian(const MetricGraph& g, DiscreteWeighting mode) : graph_(g), mode_(mode) {
        const int V = g.vertex_count();
        m_.resize(V);
        b_.resize(g.edge_count());
        if (mode == DiscreteWeighting::Normalized) {
            for (int v = 0; v < V; ++v) m_[v] = static_cast<double>(g.degree(v));
            std::fill(b_.begin(), b_.end(), 1.0);
        } else {
            std::vector<double> star = vertex_star_masses(g);
            for (int v = 0; v < V; ++v) m_[v] = star[v];
            for (int e = 0; e < g.edge_count(); ++e) b_[e] = 1.0 / g.edge(e).length;
        }
        for (double w : m_)
            if (!(w > 0.0)) throw std::invalid_argument("vertex weight must be positive");
    }

    [[nodiscard]] const MetricGraph& graph() const { return graph_; }
    [[nodiscard]] DiscreteWeighting mode() const { return mode_; }
    [[nodiscard]] double vertex_weight(int v) const { return m_.at(v); }
    [[nodiscard]] double edge_weight(int e) const { return b_.at(e); }

    /// Pointwise action on a vertex function.
    [[nodiscard]] std::vector<double> apply(const std::vector<double>& f) const {
        const int V = graph_.vertex_count();
        if (static_cast<int>(f.size()) != V)
            throw std::invalid_argument("vertex function has wrong size");
        std::vector<double> out(V, 0.0);
        for (int v = 0; v < V; ++v) {
            double acc = 0.0;
            for (int e : graph_.incident_edges(v)) {
                const int u = graph_.tail_index(e) == v ? graph_.head_index(e)
                                                        : graph_.tail_index(e);
                acc += b_[e] * (f[v] - f[u]);
            }
            out[v] = acc / m_[v];
        }
        return out;
    }

    /// Symmetrized matrix D = M^{1/2} Delta M^{-1/2} = M^{-1/2} L_b M^{-1/2}.
    [[nodiscard]] Eigen::MatrixXd symmetrized_matrix() const {
        const int V = graph_.vertex_count();
        Eigen::MatrixXd L = Eigen::MatrixXd::Zero(V, V);
        for (int e = 0; e < graph_.edge_count(); ++e) {
            const int a = graph_.tail_index(e), b = graph_.head_index(e);
            L(a, a) += b_[e];
            L(b, b) += b_[e];
            L(a, b) -= b_[e];
            L(b, a) -= b_[e];
        }
        Eigen::VectorXd inv_sqrt_m(V);
        for (int v = 0; v < V; ++v) inv_sqrt_m(v) = 1.0 / std::sqrt(m_[v]);
        return inv_sqrt_m.asDiagonal() * L * inv_sqrt_m.asDiagonal();
    }

private:
    MetricGraph graph_;
    DiscreteWeighting mode_;
    std::vector<double> m_;
    std::vector<double> b_;
};

struct DiscreteEigenvalue {
    double mu = 0.0;
    int multiplicity = 1;
};

/// Eigenvalues of the symmetrized Laplacian matrix, ascending, clustered into
/// multiplicities within 1e-10 (1 + |mu|) — the backward-error scale of a
/// dense symmetric solve at desk size.
inline std::vector<DiscreteEigenvalue> discrete_spectrum(const DiscreteLaplacian& L) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(L.symmetrized_matrix());
    if (solver.info() != Eigen::Success) throw std::runtime_error("dense eigensolve failed");
    const Eigen::VectorXd ev = solver.eigenvalues();

    std::vector<DiscreteEigenvalue> out;
    for (int i = 0; i < ev.size(); ++i) {
        const double mu = ev(i);
        if (!out.empty() && std::abs(mu - out.back().mu) <= 1e-10 * (1.0 + std::abs(mu)))
            ++out.back().multiplicity;
        else
            out.push_back({mu, 1});
    }
    return out;
}

struct EquilateralImage {
    std::vector<double> lambdas;          // preimages with 1 - cos(sqrt l) = mu
    std::vector<double> excluded_lambdas; // preimages landing in {(pi n)^2}
};

namespace detail {

inline bool near_pi_multiple(double k, double tol = 1e-9) {
    const double n = std::round(k / std::numbers::pi);
    return n >= 1.0 && std::abs(k - n * std::numbers::pi) < tol;
}

} // namespace detail

/// All lambda in [0, lambda_max] with 1 - cos(sqrt(lambda)) = mu.
/// sqrt(lambda) runs over {x0 + 2 pi n} and {-x0 + 2 pi n} for
/// x0 = arccos(1 - mu). Values in the excluded set {(pi n)^2, n >= 1} are
/// returned separately: there the correspondence breaks down (eigenfunctions
/// may vanish on every vertex) and nothing can be concluded either way.
inline EquilateralImage equilateral_map(double mu, double lambda_max) {
    if (mu < -1e-12 || mu > 2.0 + 1e-12)
        throw std::invalid_argument("discrete eigenvalue must lie in [0, 2]");
    const double x0 = std::acos(std::clamp(1.0 - mu, -1.0, 1.0));
    const double kmax = std::sqrt(std::max(0.0, lambda_max));

    std::vector<double> ks;
    for (int n = 0;; ++n) {
        const double k = x0 + 2.0 * std::numbers::pi * n;
        if (k > kmax) break;
        ks.push_back(k);
    }
    for (int n = 1;; ++n) {
        const double k = 2.0 * std::numbers::pi * n - x0;
        if (k > kmax) break;
        if (k >= 0.0) ks.push_back(k);
    }
    std::sort(ks.begin(), ks.end());
    ks.erase(std::unique(ks.begin(), ks.end(),
                         [](double a, double b) { return std::abs(a - b) < 1e-12; }),
             ks.end());

    EquilateralImage img;
    for (double k : ks) {
        if (detail::near_pi_multiple(k))
            img.excluded_lambdas.push_back(k * k);
        else
            img.lambdas.push_back(k * k);
    }
    return img;
}

struct EquilateralComparison {
    double common_length = 1.0;
    std::vector<DiscreteEigenvalue> discrete;    // normalized Laplacian spectrum
    std::vector<Eigenvalue> solver;              // metric spectrum, original scale
    std::vector<double> excluded_hits;           // solver sqrt(lambda), unit scale, at pi n
    std::vector<std::string> mismatches;
    bool pass = false;
};

/// Bidirectional check of the equilateral correspondence
/// lambda in sigma(H)  <=>  1 - cos(sqrt lambda) in sigma(Delta_norm),
/// away from the excluded set {(pi n)^2}. A graph with common edge length
/// a != 1 is rescaled to unit length first and the eigenvalues are rescaled
/// back by 1/a^2 (scaling covariance).
///
/// Mismatches collect: solver eigenvalues whose image misses the discrete
/// spectrum, discrete preimages missing from the solver output, and
/// multiplicity disagreements. Excluded-set hits are reported, not failed.
inline EquilateralComparison equilateral_compare(const MetricGraph& g, double kmax,
                                                 double tol = 1e-8) {
    EquilateralComparison rep;
    const double a = g.edge(0).length;
    for (const Edge& e : g.edges())
        if (std::abs(e.length - a) > 1e-12 * a)
            throw std::invalid_argument("equilateral_compare requires equal edge lengths");
    rep.common_length = a;

    const MetricGraph unit = std::abs(a - 1.0) < 1e-15 ? g : g.scaled(1.0 / a);
    const double kmax_unit = kmax * a;

    const DiscreteLaplacian L(unit, DiscreteWeighting::Normalized);
    rep.discrete = discrete_spectrum(L);

    const Spectrum sp = eigenvalues(unit, kmax_unit);
    for (const auto& ev : sp.eigenvalues)
        rep.solver.push_back({ev.lambda / (a * a), ev.multiplicity});

    auto fmt = [](double x) { return std::to_string(x); };

    // Direction A: every solver eigenvalue away from the excluded set must
    // map onto a discrete eigenvalue, with matching multiplicity.
    for (const auto& ev : sp.eigenvalues) {
        const double k = std::sqrt(ev.lambda);
        if (detail::near_pi_multiple(k, 1e-6)) {
            rep.excluded_hits.push_back(k);
            continue;
        }
        const double mu = 1.0 - std::cos(k);
        bool found = false;
        for (const auto& d : rep.discrete) {
            if (std::abs(d.mu - mu) <= tol) {
                found = true;
                if (d.multiplicity != ev.multiplicity)
                    rep.mismatches.push_back("multiplicity mismatch at unit k = " + fmt(k) +
                                             ": solver " + std::to_string(ev.multiplicity) +
                                             ", discrete " + std::to_string(d.multiplicity));
                break;
            }
        }
        if (!found)
            rep.mismatches.push_back("solver eigenvalue at unit k = " + fmt(k) +
                                     " maps to mu = " + fmt(mu) + " not in discrete spectrum");
    }

    // Direction B: every non-excluded preimage of a discrete eigenvalue must
    // appear in the solver output. Preimages within one grid step of the
    // window end are skipped to avoid boundary effects.
    const double edge_margin = 1e-6;
    for (const auto& d : rep.discrete) {
        const EquilateralImage img = equilateral_map(std::clamp(d.mu, 0.0, 2.0),
                                                     kmax_unit * kmax_unit);
        for (double lam : img.lambdas) {
            const double k = std::sqrt(lam);
            if (k > kmax_unit - edge_margin) continue;
            bool found = false;
            for (const auto& ev : sp.eigenvalues)
                if (std::abs(std::sqrt(ev.lambda) - k) <= tol * (1.0 + k)) {
                    found = true;
                    break;
                }
            if (!found)
                rep.mismatches.push_back("discrete mu = " + fmt(d.mu) +
                                         " predicts unit k = " + fmt(k) +
                                         " missing from solver output");
        }
    }

    rep.pass = rep.mismatches.empty();
    return rep;
}

/// Piecewise-affine interpolant of a vertex function: on each edge the affine
/// function matching the endpoint values. Continuous on the metric graph.
class AffineInterpolant {
public:
    AffineInterpolant(const MetricGraph& g, std::vector<double> vertex_values)
        : graph_(&g), values_(std::move(vertex_values)) {
        if (static_cast<int>(values_.size()) != g.vertex_count())
            throw std::invalid_argument("vertex function has wrong size");
    }

    [[nodiscard]] double operator()(const GraphPoint& p) const {
        const Edge& e = graph_->edge(p.edge);
        const double fa = values_[graph_->tail_index(p.edge)];
        const double fb = values_[graph_->head_index(p.edge)];
        return fa + (fb - fa) * (p.offset / e.length);
    }

    [[nodiscard]] const std::vector<double>& vertex_values() const { return values_; }

private:
    const MetricGraph* graph_;
    std::vector<double> values_;
};

inline AffineInterpolant interpolate_affine(const MetricGraph& g, std::vector<double> f) {
    return AffineInterpolant(g, std::move(f));
}

/// Sum of outgoing derivatives of the affine interpolant at vertex v:
///   sum_{u ~ v} (f(u) - f(v)) / l(e_uv).
/// For every vertex function this equals -m(v) (Delta f)(v) with the metric
/// weights, so it vanishes exactly at vertices where f is discretely
/// harmonic.
inline double kirchhoff_defect(const MetricGraph& g, const std::vector<double>& f, int v) {
    if (static_cast<int>(f.size()) != g.vertex_count())
        throw std::invalid_argument("vertex function has wrong size");
    double acc = 0.0;
    for (int e : g.incident_edges(v)) {
        const int u = g.tail_index(e) == v ? g.head_index(e) : g.tail_index(e);
        acc += (f[u] - f[v]) / g.edge(e).length;
    }
    return acc;
}

} // namespace qgraph
