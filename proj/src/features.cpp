#include "dtm/features.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace dtm {

GradientField gradients(const GrayImage& img) {
    if (img.width < 3 || img.height < 3)
        throw std::invalid_argument("gradients: image must be at least 3x3");
    GradientField g;
    g.width = img.width;
    g.height = img.height;
    g.magnitude.resize(img.pixels.size());
    g.orientation.resize(img.pixels.size());
    constexpr double pi = std::numbers::pi;
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            double gx, gy;
            if (x == 0)
                gx = static_cast<double>(img.at(1, y)) - img.at(0, y);
            else if (x == img.width - 1)
                gx = static_cast<double>(img.at(x, y)) - img.at(x - 1, y);
            else
                gx = 0.5 * (static_cast<double>(img.at(x + 1, y)) - img.at(x - 1, y));
            if (y == 0)
                gy = static_cast<double>(img.at(x, 1)) - img.at(x, 0);
            else if (y == img.height - 1)
                gy = static_cast<double>(img.at(x, y)) - img.at(x, y - 1);
            else
                gy = 0.5 * (static_cast<double>(img.at(x, y + 1)) - img.at(x, y - 1));
            const std::size_t idx = static_cast<std::size_t>(y) * img.width + x;
            g.magnitude[idx] = std::hypot(gx, gy);
            double theta = std::atan2(gy, gx);  // (-pi, pi]
            if (theta < 0)
                theta += pi;  // fold to [0, pi)
            if (theta >= pi)
                theta -= pi;
            g.orientation[idx] = theta;
        }
    }
    return g;
}

FeatureGrid cell_histograms(const GrayImage& img, int cell_size, int bins) {
    if (cell_size < 2 || bins < 2)
        throw std::invalid_argument("cell_histograms: cell_size >= 2 and bins >= 2 required");
    if (img.width < cell_size || img.height < cell_size)
        throw std::invalid_argument("cell_histograms: image smaller than one cell");
    const GradientField g = gradients(img);

    FeatureGrid grid;
    grid.cells_x = img.width / cell_size;
    grid.cells_y = img.height / cell_size;
    grid.bins = bins;
    grid.cell_size = cell_size;
    grid.values.assign(static_cast<std::size_t>(grid.cells_x) * grid.cells_y * bins, 0.0);

    constexpr double pi = std::numbers::pi;
    const double bin_width = pi / bins;
    for (int y = 0; y < grid.cells_y * cell_size; ++y) {
        const int cy = y / cell_size;
        for (int x = 0; x < grid.cells_x * cell_size; ++x) {
            const double mag = g.mag(x, y);
            if (mag == 0.0)
                continue;
            const int cx = x / cell_size;
            // Split between the two bins whose centers straddle the angle.
            const double pos = g.ori(x, y) / bin_width - 0.5;
            const int lo = static_cast<int>(std::floor(pos));
            const double frac = pos - lo;
            const int b0 = ((lo % bins) + bins) % bins;
            const int b1 = (b0 + 1) % bins;
            grid.at(cy, cx, b0) += mag * (1.0 - frac);
            grid.at(cy, cx, b1) += mag * frac;
        }
    }
    return grid;
}

FeatureGrid hog(const GrayImage& img, int cell_size, int bins) {
    FeatureGrid raw = cell_histograms(img, cell_size, bins);

    FeatureGrid out = raw;
    std::fill(out.values.begin(), out.values.end(), 0.0);
    std::vector<int> block_count(static_cast<std::size_t>(raw.cells_x) * raw.cells_y, 0);

    const int bw = std::min(2, raw.cells_x);
    const int bh = std::min(2, raw.cells_y);
    constexpr double eps = 1e-5;
    for (int by = 0; by + bh <= raw.cells_y; ++by) {
        for (int bx = 0; bx + bw <= raw.cells_x; ++bx) {
            double sum_sq = 0.0;
            for (int cy = by; cy < by + bh; ++cy)
                for (int cx = bx; cx < bx + bw; ++cx)
                    for (int b = 0; b < bins; ++b)
                        sum_sq += raw.at(cy, cx, b) * raw.at(cy, cx, b);
            const double inv_norm = 1.0 / std::sqrt(sum_sq + eps);
            for (int cy = by; cy < by + bh; ++cy) {
                for (int cx = bx; cx < bx + bw; ++cx) {
                    for (int b = 0; b < bins; ++b)
                        out.at(cy, cx, b) += raw.at(cy, cx, b) * inv_norm;
                    ++block_count[static_cast<std::size_t>(cy) * raw.cells_x + cx];
                }
            }
        }
    }
    for (int cy = 0; cy < raw.cells_y; ++cy)
        for (int cx = 0; cx < raw.cells_x; ++cx) {
            const int n = block_count[static_cast<std::size_t>(cy) * raw.cells_x + cx];
            if (n > 1)
                for (int b = 0; b < bins; ++b)
                    out.at(cy, cx, b) /= n;
        }
    return out;
}

}  // namespace dtm
