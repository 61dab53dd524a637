#pragma once

#include <cstdint>
#include <vector>

#include "dtm/features.hpp"
#include "dtm/image.hpp"

namespace dtm {

struct DtmConfig {
    int n = 2;  // sub-patch rows
    int m = 2;  // sub-patch cols
    int canonical_w = 128;
    int canonical_h = 128;
    int cell_size = 8;
    int bins = 9;
    int sweep_cap = 64;
    // Upper bound on the brute-force anchor-tuple count before enumeration
    // is refused.
    std::uint64_t enum_guard = 100'000'000;

    void validate() const;
};

// Anchor of a sub-patch window in target cell-grid coordinates (top-left).
struct Anchor {
    int x = 0;
    int y = 0;
    bool operator==(const Anchor&) const = default;
};

// Map from sub-patch (i, j) to its anchor; i indexes rows, j columns.
struct Placement {
    int n = 0;
    int m = 0;
    std::vector<Anchor> anchors;  // row-major, anchors[i*m + j]

    Anchor at(int i, int j) const { return anchors[static_cast<std::size_t>(i) * m + j]; }
    Anchor& at(int i, int j) { return anchors[static_cast<std::size_t>(i) * m + j]; }
    bool operator==(const Placement&) const = default;
};

// One tile of the n x m decomposition: its cell span in the source grid and
// the extracted features.
struct SubPatch {
    int row0 = 0;
    int col0 = 0;
    int rows = 0;
    int cols = 0;
    FeatureGrid grid;
};

struct SubPatchDecomposition {
    int n = 0;
    int m = 0;
    std::vector<SubPatch> patches;  // row-major

    const SubPatch& at(int i, int j) const {
        return patches[static_cast<std::size_t>(i) * m + j];
    }
};

// Splits an R x C cell grid so sub-patch (i, j) covers rows
// [floor(i*R/n), floor((i+1)*R/n)) and the matching column span: an exact,
// disjoint partition.
SubPatchDecomposition decompose(const FeatureGrid& grid, int n, int m);

// Floor-spaced anchors over the target grid, clamped so every window fits.
// Throws when no feasible in-bounds placement exists.
Placement init_placement(int target_cells_x, int target_cells_y,
                         const SubPatchDecomposition& decomp);

// Relative-order rule for two sub-patches: the one that starts lower/righter
// in the source must stay strictly lower/righter in the target. Index
// arguments are (row, col) of each sub-patch; any common base works.
bool is_feasible_pair(Anchor a, Anchor b, int ai, int aj, int bi, int bj);

// All unordered neighbor pairs (|di| <= 1 and |dj| <= 1, diagonals included)
// satisfy the pair rule.
bool is_feasible(const Placement& placement);

// Sum over the window's cells and bins of elementwise feature products.
double local_similarity(const FeatureGrid& sub, const FeatureGrid& target, Anchor t);

struct DtmDirectionResult {
    Placement placement;
    double similarity = 0;
    int sweeps = 0;
    bool converged = false;          // placement stabilized before the sweep cap
    std::vector<double> sweep_similarity;  // total after each sweep
};

// Coordinate-descent minimization with a growing search window: each sweep
// visits sub-patches in raster order and moves one to the best strictly
// better feasible anchor within +-s cells of its current position; s grows
// by one per sweep; a sweep with no change terminates.
DtmDirectionResult dtm_direction(const FeatureGrid& source, const FeatureGrid& target,
                                 const DtmConfig& config);

struct BruteForceResult {
    Placement placement;
    double similarity = 0;
};

// Exhaustive enumeration over all in-bounds, feasible anchor tuples. Refuses
// to run when the raw tuple count exceeds config.enum_guard.
BruteForceResult brute_force_dtm(const FeatureGrid& source, const FeatureGrid& target,
                                 const DtmConfig& config);

struct MatchResult {
    double similarity_forward = 0;
    double similarity_backward = 0;
    double similarity_total = 0;
    Placement placement_forward;
    Placement placement_backward;
    int sweeps_forward = 0;
    int sweeps_backward = 0;
};

// Bidirectional score: both images are resized to the canonical size,
// converted to HOG grids, and matched in both directions; the total is the
// sum of the two direction scores.
MatchResult total_score(const GrayImage& a, const GrayImage& b, const DtmConfig& config = {});

}  // namespace dtm
