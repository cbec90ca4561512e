#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>
#include <random>

#include "qgraph/discrete.hpp"
#include "qgraph/trace.hpp"
#include "test_graphs.hpp"

using namespace qgraph;
using Catch::Approx;
using std::numbers::pi;

namespace {

MetricGraph random_lengths(const MetricGraph& g, unsigned seed) {
    std::mt19937 rng(seed);
    std::uniform_real_distribution<double> len(0.1, 10.0);
    std::vector<Edge> es = g.edges();
    for (Edge& e : es) e.length = len(rng);
    return MetricGraph(g.vertices(), es);
}

// Random connected simple graph: a random spanning tree plus extra edges,
// lengths uniform in [0.1, 10].
MetricGraph random_graph(int vertices, int extra_edges, std::mt19937& rng) {
    std::uniform_real_distribution<double> len(0.1, 10.0);
    std::vector<std::string> vs;
    for (int i = 0; i < vertices; ++i) vs.push_back("v" + std::to_string(i));

    std::set<std::pair<int, int>> used;
    std::vector<Edge> es;
    int id = 0;
    auto add = [&](int a, int b) {
        if (a == b) return false;
        auto key = std::minmax(a, b);
        if (!used.insert(key).second) return false;
        es.push_back({"e" + std::to_string(id++), vs[a], vs[b], len(rng)});
        return true;
    };
    for (int i = 1; i < vertices; ++i)
        add(i, std::uniform_int_distribution<int>(0, i - 1)(rng));
    std::uniform_int_distribution<int> any(0, vertices - 1);
    for (int tries = 0; extra_edges > 0 && tries < 200; ++tries)
        if (add(any(rng), any(rng))) --extra_edges;
    return MetricGraph(vs, es);
}

} // namespace

TEST_CASE("normalized spectra of small graphs", "[discrete]") {
    SECTION("K4: {0, 4/3, 4/3, 4/3}") {
        const auto spec =
            discrete_spectrum(DiscreteLaplacian(testgraphs::k4(), DiscreteWeighting::Normalized));
        REQUIRE(spec.size() == 2);
        CHECK(spec[0].mu == Approx(0.0).margin(1e-12));
        CHECK(spec[0].multiplicity == 1);
        CHECK(spec[1].mu == Approx(4.0 / 3.0));
        CHECK(spec[1].multiplicity == 3);
    }
    SECTION("single edge: {0, 2}") {
        const auto spec = discrete_spectrum(
            DiscreteLaplacian(testgraphs::interval(), DiscreteWeighting::Normalized));
        REQUIRE(spec.size() == 2);
        CHECK(spec[0].mu == Approx(0.0).margin(1e-12));
        CHECK(spec[1].mu == Approx(2.0));
    }
    SECTION("3-cycle: {0, 3/2 x2}") {
        const auto spec = discrete_spectrum(
            DiscreteLaplacian(testgraphs::triangle(), DiscreteWeighting::Normalized));
        REQUIRE(spec.size() == 2);
        CHECK(spec[1].mu == Approx(1.5));
        CHECK(spec[1].multiplicity == 2);
    }
}

TEST_CASE("discrete Laplacian structure on random graphs", "[discrete][property]") {
    std::mt19937 rng(20240813);
    std::uniform_int_distribution<int> nv(3, 9);
    std::uniform_int_distribution<int> nx(0, 6);
    for (int trial = 0; trial < 25; ++trial) {
        const MetricGraph g = random_graph(nv(rng), nx(rng), rng);
        REQUIRE(validate(g).valid);
        for (DiscreteWeighting mode :
             {DiscreteWeighting::Normalized, DiscreteWeighting::MetricWeights}) {
            const DiscreteLaplacian L(g, mode);
            const Eigen::MatrixXd D = L.symmetrized_matrix();
            CHECK((D - D.transpose()).norm() < 1e-12);

            const auto spec = discrete_spectrum(L);
            CHECK(spec.front().mu == Approx(0.0).margin(1e-10));
            CHECK(spec.front().multiplicity == 1); // connected: constants only
            for (const auto& d : spec) {
                CHECK(d.mu > -1e-10);
                if (mode == DiscreteWeighting::Normalized) CHECK(d.mu < 2.0 + 1e-10);
            }

            // Constants lie in the kernel of the action.
            const std::vector<double> ones(g.vertex_count(), 1.0);
            for (double x : L.apply(ones)) CHECK(std::abs(x) < 1e-13);
        }
    }
}

TEST_CASE("metric vertex weights sum to twice the volume", "[discrete]") {
    const MetricGraph g = random_lengths(testgraphs::k4(), 99);
    const DiscreteLaplacian L(g, DiscreteWeighting::MetricWeights);
    double total = 0.0;
    for (int v = 0; v < g.vertex_count(); ++v) total += L.vertex_weight(v);
    CHECK(total == Approx(2.0 * g.volume()));
    for (int e = 0; e < g.edge_count(); ++e)
        CHECK(L.edge_weight(e) == Approx(1.0 / g.edge(e).length));
}

TEST_CASE("equilateral map", "[discrete]") {
    SECTION("mu = 0 gives the even multiples of pi") {
        const EquilateralImage img = equilateral_map(0.0, 180.0);
        REQUIRE(img.lambdas.size() == 1); // just lambda = 0
        CHECK(img.lambdas[0] == Approx(0.0).margin(1e-12));
        REQUIRE(img.excluded_lambdas.size() == 2); // (2 pi)^2, (4 pi)^2 land on pi multiples
        CHECK(img.excluded_lambdas[0] == Approx(4 * pi * pi));
        CHECK(img.excluded_lambdas[1] == Approx(16 * pi * pi));
    }
    SECTION("mu = 1 gives (pi/2 + pi n)^2") {
        const EquilateralImage img = equilateral_map(1.0, 60.0);
        REQUIRE(img.excluded_lambdas.empty());
        REQUIRE(img.lambdas.size() >= 2);
        CHECK(img.lambdas[0] == Approx(pi * pi / 4));
        CHECK(img.lambdas[1] == Approx(9 * pi * pi / 4));
    }
    SECTION("mu = 2 lands entirely in the excluded set") {
        const EquilateralImage img = equilateral_map(2.0, 200.0);
        CHECK(img.lambdas.empty());
        CHECK_FALSE(img.excluded_lambdas.empty());
        for (double l : img.excluded_lambdas) {
            const double n = std::sqrt(l) / pi;
            CHECK(n == Approx(std::round(n)).margin(1e-9));
        }
    }
    SECTION("mu outside [0, 2] is rejected") {
        CHECK_THROWS_AS(equilateral_map(-0.5, 10.0), std::invalid_argument);
        CHECK_THROWS_AS(equilateral_map(2.5, 10.0), std::invalid_argument);
    }
}

TEST_CASE("equilateral correspondence on the test graphs", "[discrete][slow]") {
    SECTION("unit 3-cycle") {
        const EquilateralComparison rep = equilateral_compare(testgraphs::triangle(), 12.0);
        CHECK(rep.pass);
        REQUIRE(rep.discrete.size() == 2);
        CHECK(rep.discrete[1].mu == Approx(1.5));
        // mu = 3/2 -> sqrt(lambda) = arccos(-1/2) = 2 pi / 3.
        bool found = false;
        for (const auto& ev : rep.solver)
            if (std::abs(std::sqrt(ev.lambda) - 2 * pi / 3) < 1e-8) found = true;
        CHECK(found);
    }
    SECTION("unit 3-star reports Dirichlet hits but passes") {
        const EquilateralComparison rep = equilateral_compare(testgraphs::star3(), 12.0);
        CHECK(rep.pass);
        CHECK_FALSE(rep.excluded_hits.empty()); // k = n pi eigenvalues
    }
    SECTION("K4 matches mu = 4/3 with multiplicity 3") {
        const EquilateralComparison rep = equilateral_compare(testgraphs::k4(), 12.0);
        CHECK(rep.pass);
        const double k_expected = std::acos(-1.0 / 3.0);
        bool found = false;
        for (const auto& ev : rep.solver) {
            if (std::abs(std::sqrt(ev.lambda) - k_expected) < 1e-8) {
                CHECK(ev.multiplicity == 3);
                found = true;
            }
        }
        CHECK(found);
        CHECK(k_expected * k_expected == Approx(3.6502).margin(1e-3));
    }
    SECTION("circle3 with lengths 1/3 is rescaled internally") {
        const EquilateralComparison rep = equilateral_compare(make_circle_graph(3), 12.0);
        CHECK(rep.pass);
        CHECK(rep.common_length == Approx(1.0 / 3.0));
    }
    SECTION("non-equilateral input is rejected") {
        CHECK_THROWS_AS(equilateral_compare(testgraphs::star3(1.0, 2.0, 1.0), 10.0),
                        std::invalid_argument);
    }
}

TEST_CASE("solver eigenvalues round-trip through the correspondence", "[discrete][property]") {
    const MetricGraph g = testgraphs::k4();
    const Spectrum sp = eigenvalues(g, 12.0);
    for (const auto& ev : sp.eigenvalues) {
        const double k = std::sqrt(ev.lambda);
        const double n = std::round(k / pi);
        if (n >= 1.0 && std::abs(k - n * pi) < 1e-6) continue; // excluded set
        const double mu = 1.0 - std::cos(k);
        const EquilateralImage img = equilateral_map(std::clamp(mu, 0.0, 2.0), sp.kmax * sp.kmax);
        bool found = false;
        for (double lam : img.lambdas)
            if (std::abs(std::sqrt(lam) - k) < 1e-8) found = true;
        INFO("k = " << k);
        CHECK(found);
    }
}

TEST_CASE("affine interpolation", "[discrete]") {
    const MetricGraph g = testgraphs::interval(2.0);
    SECTION("constant functions interpolate to constants") {
        const AffineInterpolant F = interpolate_affine(g, {3.5, 3.5});
        CHECK(F({0, 0.0}) == Approx(3.5));
        CHECK(F({0, 1.3}) == Approx(3.5));
    }
    SECTION("slope matches the endpoint gap over the length") {
        // Vertices sort as a, b; edge runs a -> b with length 2.
        const AffineInterpolant F = interpolate_affine(g, {0.0, 1.0});
        CHECK(std::abs(F({0, 1.0}) - 0.5) < 1e-15);  // midpoint averages
        CHECK(std::abs((F({0, 1.5}) - F({0, 0.5})) / 1.0 - 0.5) < 1e-15); // slope 1/2
    }
    SECTION("midpoint value averages the endpoints on any edge") {
        const MetricGraph tri = testgraphs::triangle();
        const std::vector<double> f = {0.25, 1.5, -2.0};
        const AffineInterpolant F = interpolate_affine(tri, f);
        for (int e = 0; e < tri.edge_count(); ++e) {
            const double mid = F({e, tri.edge(e).length / 2});
            CHECK(mid == Approx(0.5 * (f[tri.tail_index(e)] + f[tri.head_index(e)])));
        }
    }
}

TEST_CASE("Kirchhoff defect equals -m (Delta f) pointwise", "[discrete][property]") {
    std::mt19937 rng(20240812);
    std::uniform_real_distribution<double> val(-1.0, 1.0);
    for (const MetricGraph& base : {testgraphs::triangle(), testgraphs::k4()}) {
        const MetricGraph g = random_lengths(base, 31u);
        const DiscreteLaplacian L(g, DiscreteWeighting::MetricWeights);
        for (int trial = 0; trial < 100; ++trial) {
            std::vector<double> f(g.vertex_count());
            for (double& x : f) x = val(rng);
            const std::vector<double> Lf = L.apply(f);
            for (int v = 0; v < g.vertex_count(); ++v) {
                const double defect = kirchhoff_defect(g, f, v);
                CHECK(std::abs(defect + L.vertex_weight(v) * Lf[v]) < 1e-12);
            }
        }
    }
}

TEST_CASE("constant functions have zero defect", "[discrete]") {
    const MetricGraph g = testgraphs::k4();
    const std::vector<double> f(g.vertex_count(), 2.25);
    for (int v = 0; v < g.vertex_count(); ++v) CHECK(kirchhoff_defect(g, f, v) == 0.0);
}

TEST_CASE("discretely harmonic functions have zero defect everywhere", "[discrete]") {
    // Solve the Dirichlet problem on the pendant graph: fix two vertex values
    // and make the rest harmonic, then check the interpolant's defect.
    const MetricGraph g = testgraphs::triangle_pendant();
    const DiscreteLaplacian L(g, DiscreteWeighting::MetricWeights);
    const int va = g.vertex_index("b"), vb = g.vertex_index("d");

    // One step of exact solve: harmonicity at the two free vertices gives a
    // 2x2 linear system assembled from the weights.
    std::vector<double> f(g.vertex_count(), 0.0);
    f[va] = 1.0;
    f[vb] = -1.0;
    Eigen::Matrix2d A = Eigen::Matrix2d::Zero();
    Eigen::Vector2d rhs = Eigen::Vector2d::Zero();
    const std::vector<int> free_vs = {g.vertex_index("a"), g.vertex_index("c")};
    for (int i = 0; i < 2; ++i) {
        const int v = free_vs[i];
        for (int e : g.incident_edges(v)) {
            const int u = g.tail_index(e) == v ? g.head_index(e) : g.tail_index(e);
            const double w = 1.0 / g.edge(e).length;
            A(i, i) += w;
            if (u == free_vs[0]) A(i, 0) -= w;
            else if (u == free_vs[1]) A(i, 1) -= w;
            else rhs(i) += w * f[u];
        }
    }
    const Eigen::Vector2d sol = A.fullPivLu().solve(rhs);
    f[free_vs[0]] = sol(0);
    f[free_vs[1]] = sol(1);

    for (int v : free_vs) CHECK(std::abs(kirchhoff_defect(g, f, v)) < 1e-12);
}
