#pragma once

#include <array>
#include <vector>

#include "dtm/image.hpp"

namespace dtm {

// Per-pixel gradient magnitude and unsigned orientation in [0, pi).
struct GradientField {
    int width = 0;
    int height = 0;
    std::vector<double> magnitude;
    std::vector<double> orientation;

    double mag(int x, int y) const { return magnitude[static_cast<std::size_t>(y) * width + x]; }
    double ori(int x, int y) const { return orientation[static_cast<std::size_t>(y) * width + x]; }
};

// Central differences in the interior, one-sided at the borders.
GradientField gradients(const GrayImage& img);

// Grid of per-cell orientation histograms. values[(cy*cells_x + cx)*bins + b].
struct FeatureGrid {
    int cells_x = 0;
    int cells_y = 0;
    int bins = 0;
    int cell_size = 0;
    std::vector<double> values;

    double at(int cy, int cx, int b) const {
        return values[(static_cast<std::size_t>(cy) * cells_x + cx) * bins + b];
    }
    double& at(int cy, int cx, int b) {
        return values[(static_cast<std::size_t>(cy) * cells_x + cx) * bins + b];
    }
};

// Raw per-cell histograms: gradient magnitude distributed over the two
// orientation bins adjacent to each pixel's angle (wrapping at pi), no
// normalization. Trailing pixels that do not fill a cell are discarded.
FeatureGrid cell_histograms(const GrayImage& img, int cell_size, int bins);

// cell_histograms followed by 2x2-cell block L2 normalization (epsilon in the
// denominator), each cell averaged over the blocks containing it. Grids with
// a single cell row/column normalize over correspondingly smaller blocks.
FeatureGrid hog(const GrayImage& img, int cell_size = 8, int bins = 9);

struct SiftParams {
    int octaves = 4;
    int intervals = 3;           // sampled scales per octave
    double sigma0 = 1.6;         // base blur of octave 0
    double contrast_threshold = 0.03;  // on [0,1] intensities, after refinement
    double edge_ratio = 10.0;    // principal-curvature ratio cutoff
    double secondary_peak_ratio = 0.8;
};

struct SiftKeypoint {
    double x = 0;
    double y = 0;
    double scale = 0;        // sigma, in original-image pixels
    double orientation = 0;  // radians in [0, 2*pi)
};

// DoG scale-space extrema with sub-pixel refinement, contrast and edge
// filtering, and dominant-gradient orientation assignment (at most one
// secondary orientation per point). Deterministic; keypoints sorted.
std::vector<SiftKeypoint> detect_sift(const GrayImage& img, const SiftParams& params = {});

// 4x4 cells x 8 orientation bins, row-major: values[(cell_row*4 + cell_col)*8 + bin].
struct SiftDescriptor {
    std::array<double, 128> values{};
    bool degenerate = false;  // zero gradient energy in the support window
};

inline constexpr double kSiftClampCeiling = 0.2;

// Samples a rotated, scaled 16x16 grid around the keypoint and accumulates
// gradient magnitude into cells/bins with trilinear interpolation. With
// gaussian_weighting the magnitudes are windowed by a Gaussian centered on
// the keypoint; without it all samples count equally. Components are clamped
// at kSiftClampCeiling, then the vector is renormalized to unit L2.
SiftDescriptor sift_descriptor(const GrayImage& img, const SiftKeypoint& kp,
                               bool gaussian_weighting);

}  // namespace dtm
