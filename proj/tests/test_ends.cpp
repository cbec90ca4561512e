#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <numbers>

#include "qgraph/ends.hpp"
#include "test_graphs.hpp"

using namespace qgraph;
using Catch::Approx;

namespace {

MetricGraph point_core() { return MetricGraph({"o"}, {}); }

EndedGraphDescription make_z() {
    EndedGraphDescription d;
    d.core = point_core();
    d.gadgets.push_back({EndGadget::Kind::Ray, "o", 0, SequenceLaw::constant(1.0)});
    d.gadgets.push_back({EndGadget::Kind::Ray, "o", 0, SequenceLaw::constant(1.0)});
    return d;
}

EndedGraphDescription single_ray(SequenceLaw law) {
    EndedGraphDescription d;
    d.core = point_core();
    d.gadgets.push_back({EndGadget::Kind::Ray, "o", 0, std::move(law)});
    return d;
}

EndedGraphDescription single_tree(int branching, SequenceLaw law) {
    EndedGraphDescription d;
    d.core = point_core();
    d.gadgets.push_back({EndGadget::Kind::RegularTree, "o", branching, std::move(law)});
    return d;
}

} // namespace

TEST_CASE("sequence law values and infima", "[ends]") {
    const SequenceLaw c = SequenceLaw::constant(2.0);
    CHECK(c.length(0) == 2.0);
    CHECK(c.length(7) == 2.0);
    CHECK(c.infimum() == 2.0);

    const SequenceLaw g = SequenceLaw::geometric(1.0, 0.5);
    CHECK(g.length(0) == 1.0);
    CHECK(g.length(3) == Approx(0.125));
    CHECK(g.infimum() == 0.0);

    const SequenceLaw p = SequenceLaw::power(1.0, 1.0);
    CHECK(p.length(0) == 1.0); // first edge has length a
    CHECK(p.length(1) == Approx(0.5));
    CHECK(p.infimum() == 0.0);

    const SequenceLaw pre = SequenceLaw::prefix_then({5.0, 4.0}, SequenceLaw::constant(1.0));
    CHECK(pre.length(0) == 5.0);
    CHECK(pre.length(1) == 4.0);
    CHECK(pre.length(2) == 1.0);
    CHECK(pre.infimum() == 1.0);
}

TEST_CASE("series classification is exact", "[ends]") {
    CHECK(SequenceLaw::constant(1.0).sum_diverges());
    CHECK(SequenceLaw::geometric(1.0, 1.0).sum_diverges());
    CHECK_FALSE(SequenceLaw::geometric(1.0, 0.5).sum_diverges());
    CHECK(SequenceLaw::power(1.0, 1.0).sum_diverges());  // harmonic
    CHECK(SequenceLaw::power(1.0, 0.5).sum_diverges());
    CHECK_FALSE(SequenceLaw::power(1.0, 2.0).sum_diverges());

    CHECK(SequenceLaw::geometric(1.0, 0.5).finite_sum() == Approx(2.0));
    // zeta(2) = pi^2 / 6 pins the power-law summation.
    CHECK(SequenceLaw::power(1.0, 2.0).finite_sum() ==
          Approx(std::numbers::pi * std::numbers::pi / 6.0).epsilon(1e-12));
    CHECK(SequenceLaw::prefix_then({5.0}, SequenceLaw::geometric(1.0, 0.5)).finite_sum() ==
          Approx(7.0));

    // Weighted sums for trees.
    CHECK(SequenceLaw::constant(1.0).weighted_sum_diverges(3));
    CHECK(SequenceLaw::power(1.0, 5.0).weighted_sum_diverges(2));
    CHECK(SequenceLaw::geometric(1.0, 0.5).weighted_sum_diverges(3)); // ratio 3/2
    CHECK_FALSE(SequenceLaw::geometric(1.0, 1.0 / 3.0).weighted_sum_diverges(2));
    CHECK(SequenceLaw::geometric(1.0, 1.0 / 3.0).finite_weighted_sum(2) == Approx(3.0));
}

TEST_CASE("partial sums probe the classification", "[ends][property]") {
    // Finite verdicts: the tail increments become negligible.
    const SequenceLaw geo = SequenceLaw::geometric(1.0, 0.5);
    CHECK(geo.partial_sum(100) == Approx(geo.finite_sum()).margin(1e-12));
    CHECK(std::abs(geo.partial_sum(100) - geo.partial_sum(99)) < 1e-12);

    // Divergent verdicts for constant and harmonic laws: the partial sums
    // exceed any fixed bound within a computable horizon.
    CHECK(SequenceLaw::constant(1.0).partial_sum(101) > 100.0);
    CHECK(SequenceLaw::power(1.0, 1.0).partial_sum(1u << 20) > 14.0);
    CHECK(SequenceLaw::constant(1.0).partial_weighted_sum(8, 3) > 1000.0);
}

TEST_CASE("tree level bookkeeping: b^n edges at level n", "[ends]") {
    // branching 3, constant lengths: levels carry 1, 3, 9 edges.
    CHECK(SequenceLaw::constant(1.0).partial_weighted_sum(3, 3) == Approx(13.0));
}

TEST_CASE("end counting", "[ends]") {
    CHECK(count_ends(make_z()).count == 2);
    CHECK_FALSE(count_ends(make_z()).infinite);

    const EndCount tree = count_ends(single_tree(3, SequenceLaw::constant(1.0)));
    CHECK(tree.infinite);

    EndedGraphDescription finite;
    finite.core = testgraphs::triangle();
    CHECK(count_ends(finite).count == 0);
}

TEST_CASE("end volumes", "[ends]") {
    const EndVolume ray_geo = end_volume({EndGadget::Kind::Ray, "o", 0,
                                          SequenceLaw::geometric(1.0, 0.5)});
    CHECK_FALSE(ray_geo.infinite);
    CHECK(ray_geo.value == Approx(2.0));

    const EndVolume ray_harm = end_volume({EndGadget::Kind::Ray, "o", 0,
                                           SequenceLaw::power(1.0, 1.0)});
    CHECK(ray_harm.infinite);

    const EndVolume tree_geo = end_volume({EndGadget::Kind::RegularTree, "o", 3,
                                           SequenceLaw::geometric(1.0, 0.5)});
    CHECK(tree_geo.infinite); // sum 3^n 2^-n diverges
}

TEST_CASE("total volume", "[ends]") {
    EndedGraphDescription d;
    d.core = testgraphs::triangle();
    CHECK_FALSE(total_volume(d).infinite);
    CHECK(total_volume(d).value == Approx(3.0));

    d.gadgets.push_back({EndGadget::Kind::Ray, "a", 0, SequenceLaw::geometric(1.0, 0.5)});
    CHECK(total_volume(d).value == Approx(5.0));

    d.gadgets.push_back({EndGadget::Kind::Ray, "b", 0, SequenceLaw::constant(1.0)});
    CHECK(total_volume(d).infinite);
}

TEST_CASE("Markovian uniqueness examples", "[ends]") {
    CHECK(markovian_uniqueness(make_z()).unique);
    CHECK_FALSE(markovian_uniqueness(single_ray(SequenceLaw::geometric(1.0, 0.5))).unique);
    CHECK(markovian_uniqueness(single_ray(SequenceLaw::power(1.0, 1.0))).unique);
    CHECK(markovian_uniqueness(single_tree(3, SequenceLaw::constant(1.0))).unique);
}

TEST_CASE("one-end graphs: Markovian uniqueness iff infinite total volume", "[ends][property]") {
    const std::vector<SequenceLaw> laws = {
        SequenceLaw::constant(1.0),          SequenceLaw::geometric(1.0, 0.5),
        SequenceLaw::geometric(1.0, 2.0),    SequenceLaw::power(1.0, 1.0),
        SequenceLaw::power(1.0, 3.0),
        SequenceLaw::prefix_then({2.0}, SequenceLaw::power(1.0, 0.5)),
    };
    for (const SequenceLaw& law : laws) {
        const EndedGraphDescription d = single_ray(law);
        REQUIRE(count_ends(d).count == 1);
        CHECK(markovian_uniqueness(d).unique == total_volume(d).infinite);
    }
}

TEST_CASE("self-adjointness criteria", "[ends]") {
    SECTION("finite graph: yes by (i)") {
        EndedGraphDescription d;
        d.core = testgraphs::triangle();
        const SelfAdjointness r = self_adjointness(d);
        CHECK(r.verdict == SelfAdjointVerdict::Yes);
        CHECK(r.criterion == "i");
    }
    SECTION("Z with unit lengths: yes by (ii)") {
        const SelfAdjointness r = self_adjointness(make_z());
        CHECK(r.verdict == SelfAdjointVerdict::Yes);
        CHECK(r.criterion == "ii");
    }
    SECTION("harmonic ray: infimum zero but complete, yes by (iii)") {
        const SelfAdjointness r = self_adjointness(single_ray(SequenceLaw::power(1.0, 1.0)));
        CHECK(r.verdict == SelfAdjointVerdict::Yes);
        CHECK(r.criterion == "iii");
    }
    SECTION("finite-volume ray: no, via failed Markovian uniqueness") {
        const SelfAdjointness r = self_adjointness(single_ray(SequenceLaw::geometric(1.0, 0.5)));
        CHECK(r.verdict == SelfAdjointVerdict::No);
    }
    SECTION("finite ray volume with infinite tree end volume stays inconclusive") {
        // sum l_n = 2 converges, so no completeness criterion fires; the end
        // volume sum 3^n 2^-n still diverges, so uniqueness holds and the
        // "no" branch cannot fire either.
        const SelfAdjointness r =
            self_adjointness(single_tree(3, SequenceLaw::geometric(1.0, 0.5)));
        CHECK(r.verdict == SelfAdjointVerdict::Inconclusive);
    }
}

TEST_CASE("criterion ordering: (ii) forces (iii)", "[ends][property]") {
    const std::vector<SequenceLaw> laws = {
        SequenceLaw::constant(0.3),       SequenceLaw::geometric(2.0, 1.5),
        SequenceLaw::geometric(1.0, 1.0), SequenceLaw::power(1.0, 0.7),
        SequenceLaw::geometric(1.0, 0.25),
        SequenceLaw::prefix_then({1.0, 2.0}, SequenceLaw::constant(0.5)),
    };
    for (const SequenceLaw& law : laws)
        if (law.infimum() > 0.0) CHECK(law.sum_diverges());
}

TEST_CASE("classification reports", "[ends]") {
    SECTION("Z") {
        const ClassificationReport rep = classify(make_z());
        CHECK(rep.ends.count == 2);
        CHECK(rep.markovian.unique);
        CHECK(rep.self_adjoint.verdict == SelfAdjointVerdict::Yes);
        CHECK(rep.self_adjoint.criterion == "ii");
        CHECK(rep.volume.infinite);
        REQUIRE(rep.markovian.evidence.size() == 2);
    }
    SECTION("geometric ray") {
        const ClassificationReport rep = classify(single_ray(SequenceLaw::geometric(1.0, 0.5)));
        CHECK(rep.ends.count == 1);
        REQUIRE(rep.gadgets.size() == 1);
        CHECK_FALSE(rep.gadgets[0].volume.infinite);
        CHECK(rep.gadgets[0].volume.value == Approx(2.0));
        CHECK_FALSE(rep.markovian.unique);
        CHECK(rep.self_adjoint.verdict == SelfAdjointVerdict::No);
    }
    SECTION("self-adjoint implies Markovian-unique across a law family") {
        const std::vector<SequenceLaw> laws = {
            SequenceLaw::constant(1.0),       SequenceLaw::geometric(1.0, 0.5),
            SequenceLaw::geometric(1.0, 3.0), SequenceLaw::power(1.0, 1.0),
            SequenceLaw::power(1.0, 2.0),
        };
        for (const SequenceLaw& law : laws) {
            for (const EndedGraphDescription& d :
                 {single_ray(law), single_tree(2, law), single_tree(3, law)}) {
                const ClassificationReport rep = classify(d);
                if (rep.self_adjoint.verdict == SelfAdjointVerdict::Yes)
                    CHECK(rep.markovian.unique);
            }
        }
    }
}

TEST_CASE("description validation", "[ends]") {
    SECTION("unknown attach vertex") {
        EndedGraphDescription d;
        d.core = point_core();
        d.gadgets.push_back({EndGadget::Kind::Ray, "missing", 0, SequenceLaw::constant(1.0)});
        CHECK_THROWS_AS(validate_description(d), std::invalid_argument);
    }
    SECTION("branching below 2") {
        EndedGraphDescription d;
        d.core = point_core();
        d.gadgets.push_back({EndGadget::Kind::RegularTree, "o", 1, SequenceLaw::constant(1.0)});
        CHECK_THROWS_AS(validate_description(d), std::invalid_argument);
    }
    SECTION("an edgeless core without gadgets is not a metric graph") {
        EndedGraphDescription d;
        d.core = point_core();
        CHECK_THROWS_AS(validate_description(d), std::invalid_argument);
    }
}
