#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "dtm/features.hpp"
#include "dtm/image.hpp"

namespace dtm {

// Dot product over the 128 descriptor components; in [0,1] for unit-norm
// non-degenerate inputs.
double conventional_sift_similarity(const SiftDescriptor& a, const SiftDescriptor& b);

// Regroups each descriptor's 4x4 cell grid into 2x2 sub-patches of 2x2 cells
// and scores the best rule-constrained placement of one descriptor's
// sub-patches over the other's grid, by exact enumeration, in both
// directions. Always >= twice the rigid dot product of the same descriptors.
double deformable_sift_similarity(const SiftDescriptor& a, const SiftDescriptor& b);

enum class MatchMode { conventional, deformable };

struct Correspondence {
    int index_a = 0;
    int index_b = 0;
    double similarity = 0;
};

// Mutual nearest neighbors under the mode's similarity. Degenerate
// descriptors never match; similarity ties resolve to the lowest index.
std::vector<Correspondence> match_descriptors(std::span<const SiftDescriptor> a,
                                              std::span<const SiftDescriptor> b, MatchMode mode);

struct PointPair {
    double ax = 0, ay = 0;  // point in the first image
    double bx = 0, by = 0;  // corresponding point in the second image
};

// Normalized DLT (Hartley normalization, SVD nullspace), h33 scaled to 1.
// Throws on fewer than 4 pairs or a degenerate configuration.
Homography estimate_homography_dlt(std::span<const PointPair> pairs);

struct RansacConfig {
    int iterations = 2000;
    double threshold = 3.0;  // symmetric reprojection error, pixels
};

struct RansacResult {
    Homography homography;
    std::vector<int> inliers;  // indices into the input pairs, ascending
    int iterations = 0;
    std::uint64_t seed = 0;
};

// Seeded 4-point hypotheses scored by symmetric transfer error (the larger
// of the forward and backward reprojection distances). The best model is
// refit on its inliers; the refit is kept only when it does not lose
// inliers. Throws when no model reaches 4 inliers.
RansacResult ransac_homography(std::span<const PointPair> pairs, const RansacConfig& config,
                               std::uint64_t seed);

// Symmetric reprojection error of one pair under H.
double symmetric_transfer_error(const Homography& h, const Homography& h_inv,
                                const PointPair& p);

}  // namespace dtm
