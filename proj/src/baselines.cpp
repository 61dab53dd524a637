#include "dtm/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <stdexcept>

#include "dtm/features.hpp"

namespace dtm {

double sad(const GrayImage& a, const GrayImage& b) {
    if (a.width != b.width || a.height != b.height)
        throw std::invalid_argument("sad: dimension mismatch");
    std::uint64_t sum = 0;
    for (std::size_t i = 0; i < a.pixels.size(); ++i)
        sum += static_cast<std::uint64_t>(std::abs(static_cast<int>(a.pixels[i]) - b.pixels[i]));
    return static_cast<double>(sum);
}

BaselineScore sad1(const GrayImage& a, const GrayImage& b) {
    const double fwd = sad(a, resize_bilinear(b, a.width, a.height));
    const double bwd = sad(resize_bilinear(a, b.width, b.height), b);
    return {"SAD1", -(fwd + bwd)};
}

namespace {

// Shrinks `img` uniformly until it fits inside max_w x max_h.
GrayImage fit_inside(const GrayImage& img, int max_w, int max_h) {
    if (img.width <= max_w && img.height <= max_h)
        return img;
    const double scale = std::min(static_cast<double>(max_w) / img.width,
                                  static_cast<double>(max_h) / img.height);
    const int w = std::clamp(static_cast<int>(std::floor(img.width * scale)), 1, max_w);
    const int h = std::clamp(static_cast<int>(std::floor(img.height * scale)), 1, max_h);
    return resize_bilinear(img, w, h);
}

// Minimum SAD of `probe` over all in-bounds offsets in `base`.
double min_sliding_sad(const GrayImage& probe, const GrayImage& base) {
    const GrayImage p = fit_inside(probe, base.width, base.height);
    double best = std::numeric_limits<double>::infinity();
    for (int oy = 0; oy + p.height <= base.height; ++oy) {
        for (int ox = 0; ox + p.width <= base.width; ++ox) {
            std::uint64_t sum = 0;
            for (int y = 0; y < p.height; ++y)
                for (int x = 0; x < p.width; ++x)
                    sum += static_cast<std::uint64_t>(
                        std::abs(static_cast<int>(p.at(x, y)) - base.at(ox + x, oy + y)));
            best = std::min(best, static_cast<double>(sum));
        }
    }
    return best;
}

double grid_dot(const FeatureGrid& a, const FeatureGrid& b) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.values.size(); ++i)
        sum += a.values[i] * b.values[i];
    return sum;
}

// The probe image is shrunk until its HOG grid fits inside the base grid.
double max_sliding_hog(const GrayImage& probe_img, const FeatureGrid& base,
                       const BaselineConfig& cfg) {
    GrayImage probe = probe_img;
    FeatureGrid g = hog(probe, cfg.cell_size, cfg.bins);
    while (g.cells_x > base.cells_x || g.cells_y > base.cells_y) {
        const double scale = std::min(
            static_cast<double>(base.cells_x * cfg.cell_size) / probe.width,
            static_cast<double>(base.cells_y * cfg.cell_size) / probe.height);
        const int w = std::max(cfg.cell_size, static_cast<int>(std::floor(probe.width * scale)));
        const int h = std::max(cfg.cell_size, static_cast<int>(std::floor(probe.height * scale)));
        if (w == probe.width && h == probe.height)
            throw std::runtime_error("hog2: cannot shrink probe grid to fit");
        probe = resize_bilinear(probe, w, h);
        g = hog(probe, cfg.cell_size, cfg.bins);
    }
    return max_sliding_grid_dot(g, base);
}

}  // namespace

double max_sliding_grid_dot(const FeatureGrid& probe, const FeatureGrid& base) {
    if (probe.bins != base.bins)
        throw std::invalid_argument("max_sliding_grid_dot: bin count mismatch");
    if (probe.cells_x > base.cells_x || probe.cells_y > base.cells_y)
        throw std::invalid_argument("max_sliding_grid_dot: probe grid does not fit");
    double best = -std::numeric_limits<double>::infinity();
    for (int oy = 0; oy + probe.cells_y <= base.cells_y; ++oy) {
        for (int ox = 0; ox + probe.cells_x <= base.cells_x; ++ox) {
            double sum = 0.0;
            for (int cy = 0; cy < probe.cells_y; ++cy)
                for (int cx = 0; cx < probe.cells_x; ++cx)
                    for (int b = 0; b < probe.bins; ++b)
                        sum += probe.at(cy, cx, b) * base.at(oy + cy, ox + cx, b);
            best = std::max(best, sum);
        }
    }
    return best;
}

BaselineScore sad2(const GrayImage& a, const GrayImage& b) {
    const double fwd = min_sliding_sad(a, b);
    const double bwd = min_sliding_sad(b, a);
    return {"SAD2", -(fwd + bwd)};
}

BaselineScore hog1(const GrayImage& a, const GrayImage& b, const BaselineConfig& cfg) {
    const FeatureGrid ga =
        hog(resize_bilinear(a, cfg.canonical_w, cfg.canonical_h), cfg.cell_size, cfg.bins);
    const FeatureGrid gb =
        hog(resize_bilinear(b, cfg.canonical_w, cfg.canonical_h), cfg.cell_size, cfg.bins);
    const double dot = grid_dot(ga, gb);
    return {"HOG1", dot + dot};
}

BaselineScore hog2(const GrayImage& a, const GrayImage& b, const BaselineConfig& cfg) {
    const FeatureGrid ga = hog(a, cfg.cell_size, cfg.bins);
    const FeatureGrid gb = hog(b, cfg.cell_size, cfg.bins);
    const double fwd = max_sliding_hog(a, gb, cfg);
    const double bwd = max_sliding_hog(b, ga, cfg);
    return {"HOG2", fwd + bwd};
}

}  // namespace dtm
