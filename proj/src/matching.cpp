#include "dtm/matching.hpp"

#include <Eigen/Dense>
#include <Eigen/SVD>
#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

#include "dtm/rng.hpp"

namespace dtm {

namespace {

// values[(row*4 + col)*8 + bin] of a 4x4x8 descriptor.
inline double cell_value(const SiftDescriptor& d, int row, int col, int bin) {
    return d.values[(static_cast<std::size_t>(row) * 4 + col) * 8 + bin];
}

// Dot of source sub-patch (i, j) (2x2 cells) against the target window with
// top-left cell (x, y).
double window_dot(const SiftDescriptor& src, const SiftDescriptor& dst, int i, int j, int x,
                  int y) {
    double sum = 0.0;
    for (int r = 0; r < 2; ++r)
        for (int c = 0; c < 2; ++c)
            for (int b = 0; b < 8; ++b)
                sum += cell_value(src, 2 * i + r, 2 * j + c, b) * cell_value(dst, y + r, x + c, b);
    return sum;
}

// One direction of the deformable descriptor score. For the 2x2 sub-patch
// layout every pair is a neighbor, so the ordering rule decouples into
// "both left anchors strictly left of both right anchors" on x and the
// transposed statement on y; each axis admits only a handful of patterns
// over anchors {0,1,2}, and every (x-pattern, y-pattern) combination is
// feasible. Enumeration over those combinations is exact.
double deformable_direction(const SiftDescriptor& src, const SiftDescriptor& dst) {
    double sims[2][2][3][3];
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            for (int y = 0; y < 3; ++y)
                for (int x = 0; x < 3; ++x)
                    sims[i][j][y][x] = window_dot(src, dst, i, j, x, y);

    struct AxisPattern {
        int a00, a01, a10, a11;  // coordinate for sub-patch (row, col)
    };
    std::vector<AxisPattern> x_patterns, y_patterns;
    for (int a00 = 0; a00 < 3; ++a00)
        for (int a01 = 0; a01 < 3; ++a01)
            for (int a10 = 0; a10 < 3; ++a10)
                for (int a11 = 0; a11 < 3; ++a11) {
                    if (std::max(a00, a10) < std::min(a01, a11))
                        x_patterns.push_back({a00, a01, a10, a11});
                    // y: both top anchors strictly above both bottom anchors
                    if (std::max(a00, a01) < std::min(a10, a11))
                        y_patterns.push_back({a00, a01, a10, a11});
                }

    double best = -std::numeric_limits<double>::infinity();
    for (const AxisPattern& xs : x_patterns) {
        for (const AxisPattern& ys : y_patterns) {
            const double total = sims[0][0][ys.a00][xs.a00] + sims[0][1][ys.a01][xs.a01] +
                                 sims[1][0][ys.a10][xs.a10] + sims[1][1][ys.a11][xs.a11];
            best = std::max(best, total);
        }
    }
    return best;
}

}  // namespace

double conventional_sift_similarity(const SiftDescriptor& a, const SiftDescriptor& b) {
    // Accumulated per 2x2-cell block in the same order the deformable
    // enumeration evaluates its rigid placement, so that placement
    // reproduces this value bit for bit.
    double sum = 0.0;
    for (int i = 0; i < 2; ++i)
        for (int j = 0; j < 2; ++j)
            sum += window_dot(a, b, i, j, 2 * j, 2 * i);
    return sum;
}

double deformable_sift_similarity(const SiftDescriptor& a, const SiftDescriptor& b) {
    return deformable_direction(a, b) + deformable_direction(b, a);
}

std::vector<Correspondence> match_descriptors(std::span<const SiftDescriptor> a,
                                              std::span<const SiftDescriptor> b, MatchMode mode) {
    const auto score = [mode](const SiftDescriptor& x, const SiftDescriptor& y) {
        return mode == MatchMode::conventional ? conventional_sift_similarity(x, y)
                                               : deformable_sift_similarity(x, y);
    };

    const int na = static_cast<int>(a.size());
    const int nb = static_cast<int>(b.size());
    std::vector<Correspondence> out;
    if (na == 0 || nb == 0)
        return out;

    std::vector<double> sim(static_cast<std::size_t>(na) * nb,
                            -std::numeric_limits<double>::infinity());
    for (int i = 0; i < na; ++i) {
        if (a[i].degenerate)
            continue;
        for (int j = 0; j < nb; ++j) {
            if (b[j].degenerate)
                continue;
            sim[static_cast<std::size_t>(i) * nb + j] = score(a[i], b[j]);
        }
    }

    std::vector<int> best_b(na, -1), best_a(nb, -1);
    for (int i = 0; i < na; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (int j = 0; j < nb; ++j) {
            const double s = sim[static_cast<std::size_t>(i) * nb + j];
            if (s > best) {
                best = s;
                best_b[i] = j;
            }
        }
        if (best == -std::numeric_limits<double>::infinity())
            best_b[i] = -1;
    }
    for (int j = 0; j < nb; ++j) {
        double best = -std::numeric_limits<double>::infinity();
        for (int i = 0; i < na; ++i) {
            const double s = sim[static_cast<std::size_t>(i) * nb + j];
            if (s > best) {
                best = s;
                best_a[j] = i;
            }
        }
        if (best == -std::numeric_limits<double>::infinity())
            best_a[j] = -1;
    }

    for (int i = 0; i < na; ++i) {
        const int j = best_b[i];
        if (j >= 0 && best_a[j] == i)
            out.push_back({i, j, sim[static_cast<std::size_t>(i) * nb + j]});
    }
    return out;
}

namespace {

struct Normalization {
    double cx, cy, scale;
};

Normalization normalize_points(std::span<const PointPair> pairs, bool first,
                               std::vector<Eigen::Vector2d>& out) {
    double cx = 0, cy = 0;
    for (const PointPair& p : pairs) {
        cx += first ? p.ax : p.bx;
        cy += first ? p.ay : p.by;
    }
    cx /= static_cast<double>(pairs.size());
    cy /= static_cast<double>(pairs.size());
    double mean_dist = 0;
    for (const PointPair& p : pairs)
        mean_dist += std::hypot((first ? p.ax : p.bx) - cx, (first ? p.ay : p.by) - cy);
    mean_dist /= static_cast<double>(pairs.size());
    const double scale = mean_dist > 1e-12 ? std::sqrt(2.0) / mean_dist : 1.0;
    out.clear();
    out.reserve(pairs.size());
    for (const PointPair& p : pairs)
        out.emplace_back(((first ? p.ax : p.bx) - cx) * scale, ((first ? p.ay : p.by) - cy) * scale);
    return {cx, cy, scale};
}

}  // namespace

Homography estimate_homography_dlt(std::span<const PointPair> pairs) {
    if (pairs.size() < 4)
        throw std::invalid_argument("estimate_homography_dlt: need at least 4 point pairs");

    std::vector<Eigen::Vector2d> pa, pb;
    const Normalization na = normalize_points(pairs, true, pa);
    const Normalization nb = normalize_points(pairs, false, pb);

    const int n = static_cast<int>(pairs.size());
    Eigen::MatrixXd A(2 * n, 9);
    for (int i = 0; i < n; ++i) {
        const double px = pa[i].x(), py = pa[i].y();
        const double qx = pb[i].x(), qy = pb[i].y();
        A.row(2 * i) << 0, 0, 0, -px, -py, -1, qy * px, qy * py, qy;
        A.row(2 * i + 1) << px, py, 1, 0, 0, 0, -qx * px, -qx * py, -qx;
    }

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeFullV);
    const Eigen::VectorXd& sv = svd.singularValues();
    // A 2nx9 system determines H up to scale only when its rank is 8; the
    // 8th singular value collapsing signals a degenerate configuration.
    if (sv(7) < 1e-9 * std::max(sv(0), 1e-300))
        throw std::runtime_error("estimate_homography_dlt: degenerate point configuration");
    const Eigen::VectorXd h = svd.matrixV().col(8);

    Eigen::Matrix3d Hn;
    Hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);

    Eigen::Matrix3d Ta, Tb_inv;
    Ta << na.scale, 0, -na.scale * na.cx, 0, na.scale, -na.scale * na.cy, 0, 0, 1;
    Tb_inv << 1.0 / nb.scale, 0, nb.cx, 0, 1.0 / nb.scale, nb.cy, 0, 0, 1;
    Eigen::Matrix3d H = Tb_inv * Hn * Ta;

    Homography result;
    for (int r = 0; r < 3; ++r)
        for (int c = 0; c < 3; ++c)
            result.m[static_cast<std::size_t>(r) * 3 + c] = H(r, c);
    result = result.normalized();
    if (std::abs(result.det()) < 1e-12)
        throw std::runtime_error("estimate_homography_dlt: singular homography");
    return result;
}

double symmetric_transfer_error(const Homography& h, const Homography& h_inv,
                                const PointPair& p) {
    double fx, fy, bx, by;
    h.apply(p.ax, p.ay, fx, fy);
    h_inv.apply(p.bx, p.by, bx, by);
    return std::max(std::hypot(fx - p.bx, fy - p.by), std::hypot(bx - p.ax, by - p.ay));
}

namespace {

std::vector<int> inliers_for(const Homography& h, std::span<const PointPair> pairs,
                             double threshold) {
    const Homography h_inv = h.inverse();
    std::vector<int> idx;
    for (int i = 0; i < static_cast<int>(pairs.size()); ++i) {
        try {
            if (symmetric_transfer_error(h, h_inv, pairs[i]) <= threshold)
                idx.push_back(i);
        } catch (const std::runtime_error&) {
            // point at infinity under this model: not an inlier
        }
    }
    return idx;
}

}  // namespace

RansacResult ransac_homography(std::span<const PointPair> pairs, const RansacConfig& config,
                               std::uint64_t seed) {
    if (pairs.size() < 4)
        throw std::invalid_argument("ransac_homography: need at least 4 correspondences");
    if (config.iterations < 1)
        throw std::invalid_argument("ransac_homography: iterations must be >= 1");

    Rng rng(seed);
    const int n = static_cast<int>(pairs.size());

    Homography best_h;
    std::vector<int> best_inliers;

    for (int it = 0; it < config.iterations; ++it) {
        const std::vector<int> sample = rng.sample_without_replacement(n, 4);
        std::array<PointPair, 4> minimal;
        for (int k = 0; k < 4; ++k)
            minimal[k] = pairs[sample[k]];
        Homography h;
        try {
            h = estimate_homography_dlt(minimal);
        } catch (const std::runtime_error&) {
            continue;
        }
        std::vector<int> inl;
        try {
            inl = inliers_for(h, pairs, config.threshold);
        } catch (const std::runtime_error&) {
            continue;  // non-invertible model
        }
        if (inl.size() > best_inliers.size()) {
            best_inliers = std::move(inl);
            best_h = h;
        }
    }

    if (best_inliers.size() < 4)
        throw std::runtime_error("ransac_homography: no model with >= 4 inliers");

    // One refit pass over the consensus set, kept only if it does not lose
    // support.
    std::vector<PointPair> support;
    support.reserve(best_inliers.size());
    for (int i : best_inliers)
        support.push_back(pairs[i]);
    try {
        const Homography refit = estimate_homography_dlt(support);
        const std::vector<int> refit_inliers = inliers_for(refit, pairs, config.threshold);
        if (refit_inliers.size() >= best_inliers.size()) {
            best_h = refit;
            best_inliers = refit_inliers;
        }
    } catch (const std::runtime_error&) {
        // keep the sample model
    }

    RansacResult res;
    res.homography = best_h;
    res.inliers = std::move(best_inliers);
    res.iterations = config.iterations;
    res.seed = seed;
    return res;
}

}  // namespace dtm
