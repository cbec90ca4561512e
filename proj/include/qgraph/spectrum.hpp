#pragma once

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>
#include <vector>

#include "qgraph/secular.hpp"

namespace qgraph {

struct Eigenvalue {
    double lambda = 0.0;
    int multiplicity = 1;
};

struct WeylConsistencyReport {
    bool flagged = false;
    bool insufficient_data = false;
    double bound = 0.0;
    double max_deviation = 0.0;
    double at_k = 0.0;
    std::vector<std::string> notes;
};

/// Kirchhoff spectrum computed up to sqrt(lambda) <= kmax.
/// Entries are strictly increasing in lambda; lambda = 0 is always present
/// with multiplicity one (connected graph, constant eigenfunctions).
/// `consistency` is the grid-resolution failure channel: it flags windows
/// where the counting function strays too far from the Weyl slope.
struct Spectrum {
    std::vector<Eigenvalue> eigenvalues;
    double kmax = 0.0;
    double grid_step = 0.0;
    WeylConsistencyReport consistency;

    [[nodiscard]] int total_multiplicity() const {
        int n = 0;
        for (const auto& ev : eigenvalues) n += ev.multiplicity;
        return n;
    }
};

struct SolverOptions {
    /// Root acceptance: refined sigma_min must fall below accept_tol * sigma_max.
    double accept_tol = 1e-6;
    /// Multiplicity: singular values below mult_tol * sigma_max count as zero.
    double mult_tol = 1e-8;
    /// Golden-section refinement stops at this bracket width.
    double refine_width = 1e-11;
};

namespace detail {

/// Golden-section minimization of f over [a, b]; returns the argmin.
template <typename F>
double golden_section_min(F&& f, double a, double b, double width) {
    constexpr double inv_phi = 0.6180339887498949;
    double x1 = b - inv_phi * (b - a);
    double x2 = a + inv_phi * (b - a);
    double f1 = f(x1), f2 = f(x2);
    while (b - a > width) {
        if (f1 < f2) {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - inv_phi * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + inv_phi * (b - a);
            f2 = f(x2);
        }
    }
    return 0.5 * (a + b);
}

} // namespace detail

/// Grid step of the sigma_min scan. Secular entries oscillate at frequency
/// at most max_e l(e); the extra 2E factor guards clusters of nearby roots.
inline double secular_grid_step(const MetricGraph& g) {
    return std::numbers::pi / (8.0 * g.max_edge_length() * std::max(1, 2 * g.edge_count()));
}

inline WeylConsistencyReport weyl_consistency_check(const Spectrum& sp, const MetricGraph& g,
                                                    double bound = -1.0);

/// Computes all eigenvalues lambda = k^2 with k in (0, kmax], each with its
/// multiplicity (nullity of M(k)), plus lambda = 0 with multiplicity one.
///
/// Detection: sigma_min(M(k)) is sampled on a uniform grid; every interior
/// local minimum is refined by golden-section search and accepted as a root
/// when the refined sigma_min drops below tol * sigma_max. sigma_min is used
/// instead of det M(k) because determinant sign changes miss roots of even
/// multiplicity (the circle's double eigenvalues).
///
/// M(k) tends to a singular matrix as k -> 0+ (the k = 0 root), so the first
/// grid point is excluded from minimum detection; lambda = 0 is inserted
/// analytically.
inline Spectrum eigenvalues(const MetricGraph& g, double kmax, double tol = 1e-6,
                            const SolverOptions& base_opts = {}) {
    if (!(kmax > 0.0)) throw std::invalid_argument("kmax must be positive");
    if (!(tol > 0.0) || tol > 1e-4) throw std::invalid_argument("tol must lie in (0, 1e-4]");

    SolverOptions opts = base_opts;
    opts.accept_tol = tol;

    const double dk = secular_grid_step(g);
    const int n = static_cast<int>(std::ceil(kmax / dk));
    std::vector<double> ks(n), sig(n);
    for (int i = 0; i < n; ++i) {
        ks[i] = std::min((i + 1) * dk, kmax);
        sig[i] = secular_sigma_min(g, ks[i]);
    }

    struct Root {
        double k;
        double sigma;
        int multiplicity;
    };
    std::vector<Root> roots;

    auto refine_cell = [&](double lo, double hi) {
        const double k_star = detail::golden_section_min(
            [&](double k) { return secular_sigma_min(g, k); }, lo, hi, opts.refine_width);
        if (k_star > kmax || k_star < 0.5 * dk) return;
        const Eigen::VectorXd s = secular_singular_values(g, k_star);
        const double smax = s(0);
        const double smin = s(s.size() - 1);
        if (!(smin < opts.accept_tol * smax)) return;
        int mult = 0;
        for (int j = 0; j < s.size(); ++j)
            if (s(j) < opts.mult_tol * smax) ++mult;
        mult = std::max(mult, 1);

        // Adjacent cells can refine to the same root; keep the sharper hit.
        if (!roots.empty() && std::abs(roots.back().k - k_star) < 1e-7) {
            if (smin < roots.back().sigma) roots.back() = {k_star, smin, mult};
            return;
        }
        roots.push_back({k_star, smin, mult});
    };

    for (int i = 1; i + 1 < n; ++i)
        if (sig[i] <= sig[i - 1] && sig[i] <= sig[i + 1]) refine_cell(ks[i - 1], ks[i + 1]);
    // A root can hide in the last cell without forming an interior minimum.
    if (n >= 2 && sig[n - 1] < sig[n - 2]) refine_cell(ks[n - 2], ks[n - 1]);

    Spectrum out;
    out.kmax = kmax;
    out.grid_step = dk;
    out.eigenvalues.push_back({0.0, 1});
    for (const Root& r : roots) out.eigenvalues.push_back({r.k * r.k, r.multiplicity});
    std::sort(out.eigenvalues.begin(), out.eigenvalues.end(),
              [](const Eigenvalue& a, const Eigenvalue& b) { return a.lambda < b.lambda; });
    for (std::size_t i = 1; i < out.eigenvalues.size(); ++i)
        if (!(out.eigenvalues[i - 1].lambda < out.eigenvalues[i].lambda))
            throw std::logic_error("eigenvalue list must be strictly increasing");
    out.consistency = weyl_consistency_check(out, g);
    return out;
}

/// N(x) = number of eigenvalues, counted with multiplicity, whose square
/// root is at most x. N(0) = 1 because of the zero eigenvalue.
inline int counting_function(const Spectrum& sp, double x) {
    if (x > sp.kmax)
        throw std::out_of_range("counting function queried beyond the computed kmax");
    int n = 0;
    for (const auto& ev : sp.eigenvalues)
        if (std::sqrt(ev.lambda) <= x) n += ev.multiplicity;
    return n;
}

struct WeylFit {
    double slope = 0.0;
    double rel_error = 0.0;
};

/// Least-squares slope of N(x) against x over the computed window, compared
/// with the Weyl slope vol/pi. Requires at least 50 eigenvalues.
inline WeylFit weyl_fit(const Spectrum& sp, double volume) {
    if (sp.total_multiplicity() < 50)
        throw std::invalid_argument("weyl_fit needs at least 50 eigenvalues");

    // Sample the counting function at its jump points (cumulated counts).
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    double count = 0;
    long n = 0;
    for (const auto& ev : sp.eigenvalues) {
        count += ev.multiplicity;
        const double x = std::sqrt(ev.lambda);
        sx += x;
        sy += count;
        sxx += x * x;
        sxy += x * count;
        ++n;
    }
    const double denom = n * sxx - sx * sx;
    if (denom == 0.0) throw std::invalid_argument("degenerate abscissae in weyl_fit");
    WeylFit fit;
    fit.slope = (n * sxy - sx * sy) / denom;
    const double expected = volume / std::numbers::pi;
    fit.rel_error = std::abs(fit.slope - expected) / expected;
    return fit;
}

/// Missed-root detector: Weyl's law says N(x) = vol/pi x + O(1), so a
/// deviation far beyond O(1) signals missed or spurious roots. The default
/// bound 2 + 2 #V is generous for desk-scale graphs.
inline WeylConsistencyReport weyl_consistency_check(const Spectrum& sp, const MetricGraph& g,
                                                    double bound) {
    WeylConsistencyReport rep;
    rep.bound = bound > 0 ? bound : 2.0 + 2.0 * g.vertex_count();
    if (sp.eigenvalues.size() < 2) {
        rep.insufficient_data = true;
        rep.notes.push_back("fewer than two eigenvalues computed");
        return rep;
    }
    const double slope = g.volume() / std::numbers::pi;
    double count = 0;
    for (const auto& ev : sp.eigenvalues) {
        const double x = std::sqrt(ev.lambda);
        // Deviation just before and just after the jump at x.
        for (double c : {count, count + ev.multiplicity}) {
            const double dev = std::abs(c - slope * x);
            if (dev > rep.max_deviation) {
                rep.max_deviation = dev;
                rep.at_k = x;
            }
        }
        count += ev.multiplicity;
    }
    // Also check the window end, where a missing root shows up last.
    {
        const double dev = std::abs(count - slope * sp.kmax);
        if (dev > rep.max_deviation) {
            rep.max_deviation = dev;
            rep.at_k = sp.kmax;
        }
    }
    if (rep.max_deviation > rep.bound) {
        rep.flagged = true;
        rep.notes.push_back("counting function deviates by " + std::to_string(rep.max_deviation) +
                            " near k = " + std::to_string(rep.at_k));
    }
    return rep;
}

} // namespace qgraph
