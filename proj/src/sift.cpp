#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "dtm/features.hpp"

namespace dtm {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;

struct FloatImage {
    int width = 0;
    int height = 0;
    std::vector<double> data;

    FloatImage() = default;
    FloatImage(int w, int h) : width(w), height(h), data(static_cast<std::size_t>(w) * h, 0.0) {}

    double at(int x, int y) const { return data[static_cast<std::size_t>(y) * width + x]; }
    double& at(int x, int y) { return data[static_cast<std::size_t>(y) * width + x]; }
};

FloatImage to_float(const GrayImage& img) {
    FloatImage f(img.width, img.height);
    for (std::size_t i = 0; i < img.pixels.size(); ++i)
        f.data[i] = img.pixels[i] / 255.0;
    return f;
}

// Separable Gaussian blur with border clamping.
FloatImage gaussian_blur(const FloatImage& src, double sigma) {
    if (sigma <= 0)
        return src;
    const int radius = std::max(1, static_cast<int>(std::ceil(4.0 * sigma)));
    std::vector<double> kernel(2 * radius + 1);
    double sum = 0.0;
    for (int i = -radius; i <= radius; ++i) {
        kernel[i + radius] = std::exp(-0.5 * i * i / (sigma * sigma));
        sum += kernel[i + radius];
    }
    for (double& k : kernel)
        k /= sum;

    FloatImage tmp(src.width, src.height);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int xx = std::clamp(x + i, 0, src.width - 1);
                acc += kernel[i + radius] * src.at(xx, y);
            }
            tmp.at(x, y) = acc;
        }
    }
    FloatImage out(src.width, src.height);
    for (int y = 0; y < src.height; ++y) {
        for (int x = 0; x < src.width; ++x) {
            double acc = 0.0;
            for (int i = -radius; i <= radius; ++i) {
                const int yy = std::clamp(y + i, 0, src.height - 1);
                acc += kernel[i + radius] * tmp.at(x, yy);
            }
            out.at(x, y) = acc;
        }
    }
    return out;
}

FloatImage downsample2(const FloatImage& src) {
    FloatImage out(std::max(1, src.width / 2), std::max(1, src.height / 2));
    for (int y = 0; y < out.height; ++y)
        for (int x = 0; x < out.width; ++x)
            out.at(x, y) = src.at(2 * x, 2 * y);
    return out;
}

struct Octave {
    std::vector<FloatImage> gauss;  // intervals + 3 images
    std::vector<FloatImage> dog;    // intervals + 2 images
};

std::vector<Octave> build_scale_space(const GrayImage& img, const SiftParams& p) {
    const double base_sigma = 0.5;  // assumed blur of the raw image
    FloatImage base = to_float(img);
    if (p.sigma0 > base_sigma)
        base = gaussian_blur(base, std::sqrt(p.sigma0 * p.sigma0 - base_sigma * base_sigma));

    const int levels = p.intervals + 3;
    const double k = std::pow(2.0, 1.0 / p.intervals);

    std::vector<Octave> octaves;
    for (int o = 0; o < p.octaves; ++o) {
        if (base.width < 8 || base.height < 8)
            break;
        Octave oct;
        oct.gauss.reserve(levels);
        oct.gauss.push_back(std::move(base));
        double sigma_prev = p.sigma0;
        for (int i = 1; i < levels; ++i) {
            const double sigma_total = p.sigma0 * std::pow(k, i);
            const double sigma_inc =
                std::sqrt(sigma_total * sigma_total - sigma_prev * sigma_prev);
            oct.gauss.push_back(gaussian_blur(oct.gauss.back(), sigma_inc));
            sigma_prev = sigma_total;
        }
        for (int i = 0; i + 1 < levels; ++i) {
            FloatImage d(oct.gauss[i].width, oct.gauss[i].height);
            for (std::size_t j = 0; j < d.data.size(); ++j)
                d.data[j] = oct.gauss[i + 1].data[j] - oct.gauss[i].data[j];
            oct.dog.push_back(std::move(d));
        }
        // Level `intervals` carries blur 2*sigma0; it seeds the next octave.
        base = downsample2(oct.gauss[p.intervals]);
        octaves.push_back(std::move(oct));
    }
    return octaves;
}

struct Candidate {
    int octave;
    double x, y;       // octave-resolution coordinates
    double interval;   // refined scale index within the octave
};

bool is_extremum(const Octave& oct, int layer, int x, int y) {
    const double v = oct.dog[layer].at(x, y);
    bool is_max = true, is_min = true;
    for (int dl = -1; dl <= 1; ++dl) {
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dl == 0 && dy == 0 && dx == 0)
                    continue;
                const double n = oct.dog[layer + dl].at(x + dx, y + dy);
                if (v <= n)
                    is_max = false;
                if (v >= n)
                    is_min = false;
                if (!is_max && !is_min)
                    return false;
            }
        }
    }
    return is_max || is_min;
}

// Quadratic refinement in (x, y, scale). Returns false when the candidate is
// rejected by convergence, contrast, or edge-response tests.
bool refine_candidate(const Octave& oct, const SiftParams& p, int layer, int x, int y,
                      Candidate& out) {
    const int max_steps = 5;
    double ox = 0, oy = 0, os = 0;
    for (int step = 0; step < max_steps; ++step) {
        const FloatImage& d0 = oct.dog[layer - 1];
        const FloatImage& d1 = oct.dog[layer];
        const FloatImage& d2 = oct.dog[layer + 1];

        const double gx = 0.5 * (d1.at(x + 1, y) - d1.at(x - 1, y));
        const double gy = 0.5 * (d1.at(x, y + 1) - d1.at(x, y - 1));
        const double gs = 0.5 * (d2.at(x, y) - d0.at(x, y));

        const double v = d1.at(x, y);
        const double hxx = d1.at(x + 1, y) - 2 * v + d1.at(x - 1, y);
        const double hyy = d1.at(x, y + 1) - 2 * v + d1.at(x, y - 1);
        const double hss = d2.at(x, y) - 2 * v + d0.at(x, y);
        const double hxy = 0.25 * (d1.at(x + 1, y + 1) - d1.at(x - 1, y + 1) -
                                   d1.at(x + 1, y - 1) + d1.at(x - 1, y - 1));
        const double hxs = 0.25 * (d2.at(x + 1, y) - d2.at(x - 1, y) -
                                   d0.at(x + 1, y) + d0.at(x - 1, y));
        const double hys = 0.25 * (d2.at(x, y + 1) - d2.at(x, y - 1) -
                                   d0.at(x, y + 1) + d0.at(x, y - 1));

        // Solve H * offset = -g by Cramer's rule.
        const double det = hxx * (hyy * hss - hys * hys) - hxy * (hxy * hss - hys * hxs) +
                           hxs * (hxy * hys - hyy * hxs);
        if (std::abs(det) < 1e-22)
            return false;
        ox = (-gx * (hyy * hss - hys * hys) - hxy * (-gy * hss + gs * hys) +
              hxs * (-gy * hys + gs * hyy)) / det;
        oy = (hxx * (-gy * hss + gs * hys) + gx * (hxy * hss - hys * hxs) +
              hxs * (hxy * -gs + gy * hxs)) / det;
        os = (hxx * (hyy * -gs + gy * hys) - hxy * (hxy * -gs + gy * hxs) +
              -gx * (hxy * hys - hyy * hxs)) / det;

        if (std::abs(ox) < 0.5 && std::abs(oy) < 0.5 && std::abs(os) < 0.5) {
            const double contrast = v + 0.5 * (gx * ox + gy * oy + gs * os);
            if (std::abs(contrast) < p.contrast_threshold)
                return false;
            // Edge response on the spatial Hessian.
            const double tr = hxx + hyy;
            const double det2 = hxx * hyy - hxy * hxy;
            const double r = p.edge_ratio;
            if (det2 <= 0 || tr * tr * r >= (r + 1) * (r + 1) * det2)
                return false;
            out.x = x + ox;
            out.y = y + oy;
            out.interval = layer + os;
            return true;
        }
        x += static_cast<int>(std::lround(std::clamp(ox, -1.0, 1.0)));
        y += static_cast<int>(std::lround(std::clamp(oy, -1.0, 1.0)));
        layer += static_cast<int>(std::lround(std::clamp(os, -1.0, 1.0)));
        if (layer < 1 || layer > static_cast<int>(oct.dog.size()) - 2 || x < 1 ||
            x >= d1.width - 1 || y < 1 || y >= d1.height - 1)
            return false;
    }
    return false;
}

// Orientation histogram peaks around (x, y) at octave resolution.
std::vector<double> assign_orientations(const FloatImage& gauss, double x, double y,
                                        double sigma_rel, double secondary_ratio) {
    constexpr int kBins = 36;
    const double sigma_w = 1.5 * sigma_rel;
    const int radius = std::max(1, static_cast<int>(std::lround(3.0 * sigma_w)));
    const int cx = static_cast<int>(std::lround(x));
    const int cy = static_cast<int>(std::lround(y));

    std::array<double, kBins> hist{};
    for (int dy = -radius; dy <= radius; ++dy) {
        for (int dx = -radius; dx <= radius; ++dx) {
            const int px = cx + dx;
            const int py = cy + dy;
            if (px < 1 || py < 1 || px >= gauss.width - 1 || py >= gauss.height - 1)
                continue;
            const double gx = 0.5 * (gauss.at(px + 1, py) - gauss.at(px - 1, py));
            const double gy = 0.5 * (gauss.at(px, py + 1) - gauss.at(px, py - 1));
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0)
                continue;
            const double w = std::exp(-0.5 * (dx * dx + dy * dy) / (sigma_w * sigma_w));
            double ang = std::atan2(gy, gx);
            if (ang < 0)
                ang += kTwoPi;
            int bin = static_cast<int>(ang / kTwoPi * kBins) % kBins;
            hist[bin] += w * mag;
        }
    }

    // Two passes of circular box smoothing.
    for (int pass = 0; pass < 2; ++pass) {
        std::array<double, kBins> s{};
        for (int i = 0; i < kBins; ++i)
            s[i] = (hist[(i + kBins - 1) % kBins] + hist[i] + hist[(i + 1) % kBins]) / 3.0;
        hist = s;
    }

    const double peak = *std::max_element(hist.begin(), hist.end());
    if (peak <= 0.0)
        return {};

    auto interp_angle = [&](int i) {
        const double l = hist[(i + kBins - 1) % kBins];
        const double c = hist[i];
        const double r = hist[(i + 1) % kBins];
        const double denom = l - 2 * c + r;
        const double offset = std::abs(denom) > 1e-12 ? 0.5 * (l - r) / denom : 0.0;
        double ang = (i + 0.5 + offset) * (kTwoPi / kBins);
        if (ang < 0)
            ang += kTwoPi;
        if (ang >= kTwoPi)
            ang -= kTwoPi;
        return ang;
    };

    int best = 0;
    for (int i = 1; i < kBins; ++i)
        if (hist[i] > hist[best])
            best = i;

    std::vector<double> result{interp_angle(best)};
    int second = -1;
    for (int i = 0; i < kBins; ++i) {
        if (i == best)
            continue;
        const double l = hist[(i + kBins - 1) % kBins];
        const double r = hist[(i + 1) % kBins];
        if (hist[i] > l && hist[i] > r && hist[i] >= secondary_ratio * peak)
            if (second < 0 || hist[i] > hist[second])
                second = i;
    }
    if (second >= 0)
        result.push_back(interp_angle(second));
    return result;
}

}  // namespace

std::vector<SiftKeypoint> detect_sift(const GrayImage& img, const SiftParams& params) {
    if (img.width < 32 || img.height < 32)
        throw std::invalid_argument("detect_sift: image must be at least 32x32");
    if (params.octaves < 1 || params.intervals < 1)
        throw std::invalid_argument("detect_sift: invalid params");

    const std::vector<Octave> octaves = build_scale_space(img, params);
    std::vector<SiftKeypoint> keypoints;

    for (int o = 0; o < static_cast<int>(octaves.size()); ++o) {
        const Octave& oct = octaves[o];
        const double scale_factor = std::pow(2.0, o);
        const int layers = static_cast<int>(oct.dog.size());
        for (int layer = 1; layer + 1 < layers; ++layer) {
            const FloatImage& d = oct.dog[layer];
            for (int y = 1; y < d.height - 1; ++y) {
                for (int x = 1; x < d.width - 1; ++x) {
                    if (std::abs(d.at(x, y)) < 0.5 * params.contrast_threshold)
                        continue;
                    if (!is_extremum(oct, layer, x, y))
                        continue;
                    Candidate cand{o, 0, 0, 0};
                    if (!refine_candidate(oct, params, layer, x, y, cand))
                        continue;
                    const double sigma_rel =
                        params.sigma0 * std::pow(2.0, cand.interval / params.intervals);
                    const int glevel = std::clamp(static_cast<int>(std::lround(cand.interval)), 0,
                                                  static_cast<int>(oct.gauss.size()) - 1);
                    const std::vector<double> angles = assign_orientations(
                        oct.gauss[glevel], cand.x, cand.y, sigma_rel,
                        params.secondary_peak_ratio);
                    for (double ang : angles) {
                        SiftKeypoint kp;
                        kp.x = cand.x * scale_factor;
                        kp.y = cand.y * scale_factor;
                        kp.scale = sigma_rel * scale_factor;
                        kp.orientation = ang;
                        if (kp.x >= 0 && kp.x < img.width && kp.y >= 0 && kp.y < img.height)
                            keypoints.push_back(kp);
                    }
                }
            }
        }
    }

    std::sort(keypoints.begin(), keypoints.end(), [](const SiftKeypoint& a, const SiftKeypoint& b) {
        if (a.y != b.y)
            return a.y < b.y;
        if (a.x != b.x)
            return a.x < b.x;
        if (a.scale != b.scale)
            return a.scale < b.scale;
        return a.orientation < b.orientation;
    });
    return keypoints;
}

SiftDescriptor sift_descriptor(const GrayImage& img, const SiftKeypoint& kp,
                               bool gaussian_weighting) {
    constexpr int kSamples = 16;  // 16x16 samples -> 4x4 cells of 4x4 samples
    constexpr int kCells = 4;
    constexpr int kBins = 8;

    const double spacing = 0.75 * std::max(kp.scale, 0.1);  // 4 cells span 12*sigma
    const double cos_t = std::cos(kp.orientation);
    const double sin_t = std::sin(kp.orientation);
    const double sigma_w = 0.5 * kSamples * spacing;  // half the window width

    SiftDescriptor desc;
    auto sample_gradient = [&](double px, double py, double& gx, double& gy) {
        gx = 0.5 * (sample_bilinear(img, px + 1, py) - sample_bilinear(img, px - 1, py));
        gy = 0.5 * (sample_bilinear(img, px, py + 1) - sample_bilinear(img, px, py - 1));
    };

    for (int v = 0; v < kSamples; ++v) {
        for (int u = 0; u < kSamples; ++u) {
            const double du = (u - (kSamples - 1) / 2.0) * spacing;
            const double dv = (v - (kSamples - 1) / 2.0) * spacing;
            const double px = kp.x + cos_t * du - sin_t * dv;
            const double py = kp.y + sin_t * du + cos_t * dv;

            double gx, gy;
            sample_gradient(px, py, gx, gy);
            const double mag = std::hypot(gx, gy);
            if (mag == 0.0)
                continue;
            double ang = std::atan2(gy, gx) - kp.orientation;
            while (ang < 0)
                ang += kTwoPi;
            while (ang >= kTwoPi)
                ang -= kTwoPi;

            double w = 1.0;
            if (gaussian_weighting)
                w = std::exp(-0.5 * (du * du + dv * dv) / (sigma_w * sigma_w));

            // Trilinear spread over (cell row, cell col, orientation bin).
            const double pu = (u + 0.5) / 4.0 - 0.5;
            const double pv = (v + 0.5) / 4.0 - 0.5;
            const int cu0 = static_cast<int>(std::floor(pu));
            const int cv0 = static_cast<int>(std::floor(pv));
            const double fu = pu - cu0;
            const double fv = pv - cv0;
            const double ob = ang / (kTwoPi / kBins) - 0.5;
            const int ob0 = static_cast<int>(std::floor(ob));
            const double fo = ob - ob0;

            for (int dv2 = 0; dv2 <= 1; ++dv2) {
                const int cv = cv0 + dv2;
                if (cv < 0 || cv >= kCells)
                    continue;
                const double wv = dv2 == 0 ? 1.0 - fv : fv;
                for (int du2 = 0; du2 <= 1; ++du2) {
                    const int cu = cu0 + du2;
                    if (cu < 0 || cu >= kCells)
                        continue;
                    const double wu = du2 == 0 ? 1.0 - fu : fu;
                    for (int do2 = 0; do2 <= 1; ++do2) {
                        const int b = (((ob0 + do2) % kBins) + kBins) % kBins;
                        const double wo = do2 == 0 ? 1.0 - fo : fo;
                        desc.values[(static_cast<std::size_t>(cv) * kCells + cu) * kBins + b] +=
                            mag * w * wv * wu * wo;
                    }
                }
            }
        }
    }

    double norm_sq = 0.0;
    for (double x : desc.values)
        norm_sq += x * x;
    if (norm_sq <= 0.0) {
        desc.degenerate = true;
        return desc;
    }
    // Clamp and renormalize until both the unit norm and the ceiling hold;
    // renormalizing scales clamped components back over the ceiling, so the
    // pair repeats until the overshoot dies out (geometric, a few rounds on
    // natural gradients).
    for (int round = 0; round < 64; ++round) {
        const double inv = 1.0 / std::sqrt(norm_sq);
        double max_v = 0.0;
        for (double& x : desc.values) {
            x *= inv;
            max_v = std::max(max_v, x);
        }
        if (max_v <= kSiftClampCeiling + 1e-12)
            return desc;
        norm_sq = 0.0;
        for (double& x : desc.values) {
            x = std::min(x, kSiftClampCeiling);
            norm_sq += x * x;
        }
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (double& x : desc.values)
        x *= inv;
    return desc;
}

}  // namespace dtm
