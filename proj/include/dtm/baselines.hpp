#pragma once

#include <string>

#include "dtm/features.hpp"
#include "dtm/image.hpp"

namespace dtm {

// Rigid-baseline configuration; canonical dims are only used by hog1.
struct BaselineConfig {
    int canonical_w = 128;
    int canonical_h = 128;
    int cell_size = 8;
    int bins = 9;
};

// Higher score = more similar for every method; SAD scores are negated
// distances (<= 0), HOG scores are similarities (>= 0).
struct BaselineScore {
    std::string method;
    double score = 0;
};

// Sum of absolute pixel differences; dimensions must match.
double sad(const GrayImage& a, const GrayImage& b);

// Maximum dot product of the probe grid over all in-bounds cell offsets in
// the base grid; the probe must fit.
double max_sliding_grid_dot(const FeatureGrid& probe, const FeatureGrid& base);

// Resize each image to the other's size and sum the two SADs, negated.
BaselineScore sad1(const GrayImage& a, const GrayImage& b);

// Scan one image over the other at all integer offsets, keep the minimum
// SAD, both directions, negated sum. A scanned image that does not fit is
// first downscaled by the minimal uniform factor that makes it fit.
BaselineScore sad2(const GrayImage& a, const GrayImage& b);

// Both images at canonical size, HOG, full-grid dot product, summed over the
// two (identical) directions.
BaselineScore hog1(const GrayImage& a, const GrayImage& b, const BaselineConfig& cfg = {});

// The smaller HOG grid slides over the larger at all cell offsets; maximum
// dot product per direction, summed. Uses native image sizes; the fit rule
// matches sad2.
BaselineScore hog2(const GrayImage& a, const GrayImage& b, const BaselineConfig& cfg = {});

}  // namespace dtm
