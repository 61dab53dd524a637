#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dtm/matching.hpp"
#include "dtm/rng.hpp"
#include "support/synthetic.hpp"

using namespace dtm;

namespace {

// Independent exhaustive oracle for one direction of the deformable score:
// all 9^4 anchor tuples, filtered by the ordering rule, spelled out directly
// from the four-clause definition.
double oracle_direction(const SiftDescriptor& src, const SiftDescriptor& dst) {
    const auto cell = [](const SiftDescriptor& d, int row, int col, int bin) {
        return d.values[(row * 4 + col) * 8 + bin];
    };
    const auto window = [&](int i, int j, int x, int y) {
        double s = 0;
        for (int b = 0; b < 8; ++b)
            for (int r = 0; r < 2; ++r)
                for (int c = 0; c < 2; ++c)
                    s += cell(src, 2 * i + r, 2 * j + c, b) * cell(dst, y + r, x + c, b);
        return s;
    };
    struct A {
        int x, y;
    };
    const auto ok = [](A a, A b, int ai, int aj, int bi, int bj) {
        if (ai > bi && a.y <= b.y)
            return false;
        if (ai < bi && a.y >= b.y)
            return false;
        if (aj > bj && a.x <= b.x)
            return false;
        if (aj < bj && a.x >= b.x)
            return false;
        return true;
    };
    double best = -1e300;
    for (int i00 = 0; i00 < 9; ++i00)
        for (int i01 = 0; i01 < 9; ++i01)
            for (int i10 = 0; i10 < 9; ++i10)
                for (int i11 = 0; i11 < 9; ++i11) {
                    const A a00{i00 % 3, i00 / 3}, a01{i01 % 3, i01 / 3};
                    const A a10{i10 % 3, i10 / 3}, a11{i11 % 3, i11 / 3};
                    if (!ok(a00, a01, 0, 0, 0, 1) || !ok(a00, a10, 0, 0, 1, 0) ||
                        !ok(a00, a11, 0, 0, 1, 1) || !ok(a01, a10, 0, 1, 1, 0) ||
                        !ok(a01, a11, 0, 1, 1, 1) || !ok(a10, a11, 1, 0, 1, 1))
                        continue;
                    const double total = window(0, 0, a00.x, a00.y) + window(0, 1, a01.x, a01.y) +
                                         window(1, 0, a10.x, a10.y) + window(1, 1, a11.x, a11.y);
                    best = std::max(best, total);
                }
    return best;
}

SiftDescriptor basis_descriptor(int index) {
    SiftDescriptor d;
    d.values[index] = 1.0;
    return d;
}

}  // namespace

TEST_SUITE("matching") {

TEST_CASE("conventional similarity basics") {
    Rng rng(1);
    const SiftDescriptor d = testsupport::random_descriptor(rng);
    CHECK(conventional_sift_similarity(d, d) == doctest::Approx(1.0).epsilon(1e-9));
    CHECK(conventional_sift_similarity(basis_descriptor(0), basis_descriptor(5)) == 0.0);
    SiftDescriptor zero;
    zero.degenerate = true;
    CHECK(conventional_sift_similarity(zero, d) == 0.0);
}

TEST_CASE("deformable similarity dominates the rigid score exactly") {
    Rng rng(2);
    for (int trial = 0; trial < 300; ++trial) {
        const SiftDescriptor a = testsupport::random_descriptor(rng);
        const SiftDescriptor b = testsupport::random_descriptor(rng);
        REQUIRE(deformable_sift_similarity(a, b) >= 2.0 * conventional_sift_similarity(a, b));
    }
}

TEST_CASE("deformable self-similarity dominates twice the self dot product") {
    Rng rng(3);
    const SiftDescriptor d = testsupport::random_descriptor(rng);
    CHECK(deformable_sift_similarity(d, d) >= 2.0 * conventional_sift_similarity(d, d));
}

TEST_CASE("zero descriptors score zero under the deformable rule") {
    SiftDescriptor zero;
    Rng rng(4);
    CHECK(deformable_sift_similarity(zero, testsupport::random_descriptor(rng)) == 0.0);
}

TEST_CASE("deformable similarity equals the exhaustive oracle") {
    Rng rng(5);
    for (int trial = 0; trial < 40; ++trial) {
        const SiftDescriptor a = testsupport::random_descriptor(rng);
        const SiftDescriptor b = testsupport::random_descriptor(rng);
        const double expected = oracle_direction(a, b) + oracle_direction(b, a);
        CHECK(deformable_sift_similarity(a, b) == doctest::Approx(expected).epsilon(1e-12));
    }
}

TEST_CASE("deformable similarity is symmetric") {
    Rng rng(6);
    for (int trial = 0; trial < 20; ++trial) {
        const SiftDescriptor a = testsupport::random_descriptor(rng);
        const SiftDescriptor b = testsupport::random_descriptor(rng);
        CHECK(deformable_sift_similarity(a, b) == deformable_sift_similarity(b, a));
    }
}

TEST_CASE("match_descriptors pairs a list with itself identically") {
    Rng rng(7);
    std::vector<SiftDescriptor> list;
    for (int i = 0; i < 12; ++i)
        list.push_back(testsupport::random_descriptor(rng));
    const auto matches = match_descriptors(list, list, MatchMode::conventional);
    REQUIRE(matches.size() == list.size());
    for (const Correspondence& c : matches)
        CHECK(c.index_a == c.index_b);
}

TEST_CASE("match_descriptors with an empty side is empty") {
    Rng rng(8);
    std::vector<SiftDescriptor> list{testsupport::random_descriptor(rng)};
    CHECK(match_descriptors(list, {}, MatchMode::conventional).empty());
    CHECK(match_descriptors({}, list, MatchMode::deformable).empty());
}

TEST_CASE("identical competitors resolve to the lowest index") {
    Rng rng(9);
    const SiftDescriptor d = testsupport::random_descriptor(rng);
    const std::vector<SiftDescriptor> a{d, d};
    const std::vector<SiftDescriptor> b{d};
    const auto matches = match_descriptors(a, b, MatchMode::conventional);
    REQUIRE(matches.size() == 1);
    CHECK(matches[0].index_a == 0);
    CHECK(matches[0].index_b == 0);
}

TEST_CASE("degenerate descriptors never match") {
    Rng rng(10);
    SiftDescriptor zero;
    zero.degenerate = true;
    const std::vector<SiftDescriptor> a{zero, testsupport::random_descriptor(rng)};
    const std::vector<SiftDescriptor> b{zero, testsupport::random_descriptor(rng)};
    const auto matches = match_descriptors(a, b, MatchMode::deformable);
    for (const Correspondence& c : matches) {
        CHECK(c.index_a != 0);
        CHECK(c.index_b != 0);
    }
}

TEST_CASE("dlt recovers the identity from fixed points") {
    const std::vector<PointPair> pairs{
        {0, 0, 0, 0}, {10, 0, 10, 0}, {0, 10, 0, 10}, {7, 13, 7, 13}};
    const Homography h = estimate_homography_dlt(pairs);
    for (int i = 0; i < 9; ++i)
        CHECK(h.m[i] == doctest::Approx(i % 4 == 0 ? 1.0 : 0.0).epsilon(1e-9));
}

TEST_CASE("dlt rejects collinear source points") {
    const std::vector<PointPair> pairs{
        {0, 0, 1, 2}, {1, 1, 3, 4}, {2, 2, 5, 6}, {3, 3, 7, 8}};
    CHECK_THROWS_AS(estimate_homography_dlt(pairs), std::runtime_error);
}

TEST_CASE("dlt needs four pairs") {
    const std::vector<PointPair> pairs{{0, 0, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}};
    CHECK_THROWS_AS(estimate_homography_dlt(pairs), std::invalid_argument);
}

TEST_CASE("dlt recovers the quarter-rotation half-x-scale generator") {
    // Forward transform of a 512-wide image: (x, y) -> (y/2, 511 - x).
    Homography gen;
    gen.m = {0, 0.5, 0, -1, 0, 511, 0, 0, 1};

    std::vector<PointPair> pairs;
    Rng rng(11);
    for (int i = 0; i < 8; ++i) {
        const double x = rng.uniform(0, 511);
        const double y = rng.uniform(0, 511);
        double tx, ty;
        gen.apply(x, y, tx, ty);
        pairs.push_back({x, y, tx, ty});
    }
    const Homography h = estimate_homography_dlt(pairs);
    for (int i = 0; i < 9; ++i)
        CHECK(h.m[i] == doctest::Approx(gen.m[i]).epsilon(1e-6));
}

TEST_CASE("ransac on exact correspondences keeps every pair") {
    Homography gen;
    gen.m = {0.8, -0.1, 30, 0.2, 1.1, -12, 1e-4, -5e-5, 1};
    Rng rng(12);
    std::vector<PointPair> pairs;
    for (int i = 0; i < 40; ++i) {
        const double x = rng.uniform(0, 200);
        const double y = rng.uniform(0, 200);
        double tx, ty;
        gen.apply(x, y, tx, ty);
        pairs.push_back({x, y, tx, ty});
    }
    const RansacResult r = ransac_homography(pairs, {500, 3.0}, 99);
    CHECK(r.inliers.size() == pairs.size());
    const Homography inv = r.homography.inverse();
    for (const PointPair& p : pairs)
        CHECK(symmetric_transfer_error(r.homography, inv, p) < 1e-6);
}

TEST_CASE("ransac separates planted outliers from planted inliers") {
    Homography gen;
    gen.m = {1.05, 0.08, -20, -0.04, 0.95, 14, 0, 0, 1};
    Rng rng(13);
    std::vector<PointPair> pairs;
    std::vector<bool> planted_inlier;
    for (int i = 0; i < 60; ++i) {
        const double x = rng.uniform(0, 300);
        const double y = rng.uniform(0, 300);
        if (i % 2 == 0) {
            double tx, ty;
            gen.apply(x, y, tx, ty);
            pairs.push_back({x, y, tx, ty});
            planted_inlier.push_back(true);
        } else {
            pairs.push_back({x, y, rng.uniform(0, 300), rng.uniform(0, 300)});
            planted_inlier.push_back(false);
        }
    }
    const RansacResult r = ransac_homography(pairs, {2000, 3.0}, 7);
    int recovered = 0;
    for (int idx : r.inliers) {
        CHECK(planted_inlier[idx]);
        if (planted_inlier[idx])
            ++recovered;
    }
    CHECK(recovered >= 27);  // >= 90% of the 30 planted inliers
}

TEST_CASE("ransac is deterministic for a fixed seed") {
    Rng rng(14);
    Homography gen;
    gen.m = {1, 0.05, 3, -0.02, 1, -4, 0, 0, 1};
    std::vector<PointPair> pairs;
    for (int i = 0; i < 30; ++i) {
        const double x = rng.uniform(0, 100);
        const double y = rng.uniform(0, 100);
        double tx, ty;
        gen.apply(x, y, tx, ty);
        pairs.push_back({x, y, tx + (i % 5 == 0 ? 40.0 : 0.0), ty});
    }
    const RansacResult a = ransac_homography(pairs, {300, 3.0}, 2024);
    const RansacResult b = ransac_homography(pairs, {300, 3.0}, 2024);
    CHECK(a.inliers == b.inliers);
    CHECK(a.homography.m == b.homography.m);
}

TEST_CASE("ransac requires at least four correspondences") {
    const std::vector<PointPair> pairs{{0, 0, 0, 0}, {1, 0, 1, 0}, {0, 1, 0, 1}};
    CHECK_THROWS_AS(ransac_homography(pairs, {}, 1), std::invalid_argument);
}

TEST_CASE("every reported inlier satisfies the error threshold") {
    Rng rng(15);
    Homography gen;
    gen.m = {0.9, 0, 10, 0, 1.1, -5, 0, 0, 1};
    std::vector<PointPair> pairs;
    for (int i = 0; i < 50; ++i) {
        const double x = rng.uniform(0, 250);
        const double y = rng.uniform(0, 250);
        double tx, ty;
        gen.apply(x, y, tx, ty);
        // half the points get bounded noise, half are wild
        if (i % 2 == 0)
            pairs.push_back({x, y, tx + rng.uniform(-1.0, 1.0), ty + rng.uniform(-1.0, 1.0)});
        else
            pairs.push_back({x, y, rng.uniform(0, 250), rng.uniform(0, 250)});
    }
    const RansacConfig cfg{1000, 3.0};
    const RansacResult r = ransac_homography(pairs, cfg, 5);
    const Homography inv = r.homography.inverse();
    for (int idx : r.inliers)
        CHECK(symmetric_transfer_error(r.homography, inv, pairs[idx]) <= cfg.threshold);
}

}  // TEST_SUITE
