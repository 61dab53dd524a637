#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

namespace dtm {

// 8-bit single-channel raster, row-major.
struct GrayImage {
    int width = 0;
    int height = 0;
    std::vector<std::uint8_t> pixels;

    GrayImage() = default;
    GrayImage(int w, int h, std::uint8_t fill = 0);
    GrayImage(int w, int h, std::vector<std::uint8_t> data);

    std::uint8_t at(int x, int y) const { return pixels[static_cast<std::size_t>(y) * width + x]; }
    std::uint8_t& at(int x, int y) { return pixels[static_cast<std::size_t>(y) * width + x]; }

    bool operator==(const GrayImage&) const = default;
};

// Pixel rectangle, min inclusive, max exclusive.
struct BBox {
    int xmin = 0;
    int ymin = 0;
    int xmax = 0;
    int ymax = 0;

    int width() const { return xmax - xmin; }
    int height() const { return ymax - ymin; }
};

// Affine transform mapping output pixel coordinates to source sample
// coordinates: (sx, sy) = (a*x + b*y + c, d*x + e*y + f).
struct AffineMap {
    double a = 1, b = 0, c = 0;
    double d = 0, e = 1, f = 0;

    static AffineMap identity() { return {}; }
    static AffineMap translation(double tx, double ty);
    static AffineMap scaling(double sx, double sy);
    static AffineMap rotation(double radians);  // about the origin, y pointing down

    // Composition: (*this)(other(p)).
    AffineMap compose(const AffineMap& other) const;
    AffineMap inverse() const;

    void apply(double x, double y, double& ox, double& oy) const;
};

// 3x3 projective transform, row-major, h33 normalized to 1 when possible.
struct Homography {
    std::array<double, 9> m{1, 0, 0, 0, 1, 0, 0, 0, 1};

    static Homography identity() { return {}; }
    static Homography from_affine(const AffineMap& a);

    double det() const;
    Homography inverse() const;
    Homography normalized() const;  // scales so m[8] == 1 when |m[8]| > 0

    // Projects (x, y); throws if the point maps to infinity.
    void apply(double x, double y, double& ox, double& oy) const;
};

GrayImage load_pgm(const std::string& path);
void save_pgm(const GrayImage& img, const std::string& path);

GrayImage crop(const GrayImage& img, const BBox& box);

// Bilinear resize. Sample grid: pixel centers at integer coordinates; output
// pixel x maps to source x * (src_w - 1) / (out_w - 1) (likewise y), so
// corners align and same-size resize is the identity. A 1-wide/1-tall output
// samples the source midline.
GrayImage resize_bilinear(const GrayImage& img, int out_w, int out_h);

// Inverse-mapped bilinear warp; samples outside the source read as 0.
GrayImage warp_affine(const GrayImage& img, const AffineMap& map, int out_w, int out_h);

// Same sampling scheme; H maps output pixel coordinates into the source.
GrayImage warp_homography(const GrayImage& img, const Homography& h, int out_w, int out_h);

// Bilinear sample with zero fill outside [0,w-1]x[0,h-1]; shared by the
// warps and the SIFT descriptor sampler.
double sample_bilinear(const GrayImage& img, double x, double y);

}  // namespace dtm
