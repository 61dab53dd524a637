#include <doctest.h>

#include <cmath>
#include <numbers>

#include "dtm/features.hpp"
#include "dtm/image.hpp"
#include "support/synthetic.hpp"

using namespace dtm;

namespace {

double dot128(const SiftDescriptor& a, const SiftDescriptor& b) {
    double s = 0;
    for (int i = 0; i < 128; ++i)
        s += a.values[i] * b.values[i];
    return s;
}

double norm128(const SiftDescriptor& d) { return std::sqrt(dot128(d, d)); }

}  // namespace

TEST_SUITE("sift") {

TEST_CASE("constant image yields no keypoints") {
    CHECK(detect_sift(GrayImage(64, 64, 128)).empty());
}

TEST_CASE("too-small images are rejected") {
    CHECK_THROWS_AS(detect_sift(GrayImage(16, 64)), std::invalid_argument);
}

TEST_CASE("a bright gaussian blob is detected near its center") {
    const double cx = 31.0, cy = 33.0;
    const GrayImage img = testsupport::gaussian_blob(64, 64, cx, cy, 4.0);
    const std::vector<SiftKeypoint> kps = detect_sift(img);
    REQUIRE(!kps.empty());
    double best = 1e9;
    for (const auto& kp : kps)
        best = std::min(best, std::hypot(kp.x - cx, kp.y - cy));
    CHECK(best <= 2.0);
}

TEST_CASE("detection is deterministic") {
    const GrayImage img = testsupport::textured_image(96, 96, 41);
    const auto a = detect_sift(img);
    const auto b = detect_sift(img);
    REQUIRE(a.size() == b.size());
    for (std::size_t i = 0; i < a.size(); ++i) {
        CHECK(a[i].x == b[i].x);
        CHECK(a[i].y == b[i].y);
        CHECK(a[i].scale == b[i].scale);
        CHECK(a[i].orientation == b[i].orientation);
    }
}

TEST_CASE("keypoints land inside the image with positive scale") {
    const GrayImage img = testsupport::textured_image(128, 96, 43);
    const auto kps = detect_sift(img);
    REQUIRE(kps.size() > 10);
    for (const auto& kp : kps) {
        CHECK(kp.x >= 0);
        CHECK(kp.x < img.width);
        CHECK(kp.y >= 0);
        CHECK(kp.y < img.height);
        CHECK(kp.scale > 0);
        CHECK(kp.orientation >= 0);
        CHECK(kp.orientation < 2 * std::numbers::pi);
    }
}

TEST_CASE("descriptors are unit length in both weighting modes") {
    const GrayImage img = testsupport::textured_image(96, 96, 47);
    const auto kps = detect_sift(img);
    REQUIRE(!kps.empty());
    for (const auto& kp : kps) {
        for (bool weighted : {false, true}) {
            const SiftDescriptor d = sift_descriptor(img, kp, weighted);
            REQUIRE(!d.degenerate);
            CHECK(norm128(d) == doctest::Approx(1.0).epsilon(1e-9));
            for (double v : d.values) {
                CHECK(v >= 0.0);
                CHECK(v <= kSiftClampCeiling + 1e-9);
            }
        }
    }
}

TEST_CASE("weighting modes produce different but deterministic descriptors") {
    const GrayImage img = testsupport::textured_image(96, 96, 53);
    const auto kps = detect_sift(img);
    REQUIRE(!kps.empty());
    const SiftDescriptor on = sift_descriptor(img, kps[0], true);
    const SiftDescriptor off = sift_descriptor(img, kps[0], false);
    CHECK(dot128(on, off) < 1.0 - 1e-6);
    CHECK(sift_descriptor(img, kps[0], true).values == on.values);
    CHECK(sift_descriptor(img, kps[0], false).values == off.values);
}

TEST_CASE("a keypoint in a flat region is flagged degenerate") {
    const GrayImage img(64, 64, 200);
    SiftKeypoint kp{32, 32, 2.0, 0.0};
    const SiftDescriptor d = sift_descriptor(img, kp, false);
    CHECK(d.degenerate);
    for (double v : d.values)
        CHECK(v == 0.0);
}

TEST_CASE("descriptor follows a 90-degree image rotation") {
    const GrayImage img = testsupport::textured_image(80, 80, 59);
    // Rotate the grid exactly: source (x, y) -> rotated (y, w-1-x).
    GrayImage rot(img.height, img.width);
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            rot.at(y, img.width - 1 - x) = img.at(x, y);

    const auto kps = detect_sift(img);
    REQUIRE(kps.size() > 5);
    int checked = 0;
    double mean_sim = 0;
    for (const auto& kp : kps) {
        if (kp.x < 20 || kp.y < 20 || kp.x > 60 || kp.y > 60)
            continue;
        // The permutation's linear part is a rotation by -pi/2, so the
        // co-rotated keypoint orientation shifts by the same angle.
        SiftKeypoint moved;
        moved.x = kp.y;
        moved.y = img.width - 1 - kp.x;
        moved.scale = kp.scale;
        moved.orientation = kp.orientation - std::numbers::pi / 2;
        if (moved.orientation < 0)
            moved.orientation += 2 * std::numbers::pi;
        const SiftDescriptor da = sift_descriptor(img, kp, false);
        const SiftDescriptor db = sift_descriptor(rot, moved, false);
        if (da.degenerate || db.degenerate)
            continue;
        mean_sim += dot128(da, db);
        ++checked;
    }
    REQUIRE(checked >= 3);
    CHECK(mean_sim / checked > 0.9);
}

}  // TEST_SUITE
