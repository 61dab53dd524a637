#include "dtm/dtm.hpp"

#include <stdexcept>

namespace dtm {

void DtmConfig::validate() const {
    if (n < 1 || m < 1)
        throw std::invalid_argument("DtmConfig: n and m must be >= 1");
    if (cell_size < 2 || bins < 2)
        throw std::invalid_argument("DtmConfig: cell_size >= 2 and bins >= 2 required");
    if (canonical_w % cell_size != 0 || canonical_h % cell_size != 0)
        throw std::invalid_argument("DtmConfig: canonical dims must be divisible by cell_size");
    if (canonical_w / cell_size < m || canonical_h / cell_size < n)
        throw std::invalid_argument("DtmConfig: canonical cell grid smaller than n x m");
    if (sweep_cap < 1)
        throw std::invalid_argument("DtmConfig: sweep_cap must be >= 1");
}

SubPatchDecomposition decompose(const FeatureGrid& grid, int n, int m) {
    if (n < 1 || m < 1)
        throw std::invalid_argument("decompose: n and m must be >= 1");
    if (grid.cells_y < n || grid.cells_x < m)
        throw std::invalid_argument("decompose: grid too small for requested n x m");

    SubPatchDecomposition d;
    d.n = n;
    d.m = m;
    d.patches.reserve(static_cast<std::size_t>(n) * m);
    for (int i = 0; i < n; ++i) {
        const int r0 = i * grid.cells_y / n;
        const int r1 = (i + 1) * grid.cells_y / n;
        for (int j = 0; j < m; ++j) {
            const int c0 = j * grid.cells_x / m;
            const int c1 = (j + 1) * grid.cells_x / m;
            SubPatch p;
            p.row0 = r0;
            p.col0 = c0;
            p.rows = r1 - r0;
            p.cols = c1 - c0;
            p.grid.cells_x = p.cols;
            p.grid.cells_y = p.rows;
            p.grid.bins = grid.bins;
            p.grid.cell_size = grid.cell_size;
            p.grid.values.reserve(static_cast<std::size_t>(p.rows) * p.cols * grid.bins);
            for (int cy = r0; cy < r1; ++cy)
                for (int cx = c0; cx < c1; ++cx)
                    for (int b = 0; b < grid.bins; ++b)
                        p.grid.values.push_back(grid.at(cy, cx, b));
            d.patches.push_back(std::move(p));
        }
    }
    return d;
}

Placement init_placement(int target_cells_x, int target_cells_y,
                         const SubPatchDecomposition& decomp) {
    Placement p;
    p.n = decomp.n;
    p.m = decomp.m;
    p.anchors.resize(static_cast<std::size_t>(decomp.n) * decomp.m);
    for (int i = 0; i < decomp.n; ++i) {
        for (int j = 0; j < decomp.m; ++j) {
            const SubPatch& sp = decomp.at(i, j);
            if (sp.cols > target_cells_x || sp.rows > target_cells_y)
                throw std::invalid_argument("init_placement: target grid smaller than a sub-patch");
            Anchor a;
            a.x = std::min(j * target_cells_x / decomp.m, target_cells_x - sp.cols);
            a.y = std::min(i * target_cells_y / decomp.n, target_cells_y - sp.rows);
            p.at(i, j) = a;
        }
    }
    if (!is_feasible(p))
        throw std::invalid_argument(
            "init_placement: no feasible initial placement (target too small)");
    return p;
}

bool is_feasible_pair(Anchor a, Anchor b, int ai, int aj, int bi, int bj) {
    if (ai > bi && a.y <= b.y)
        return false;
    if (ai < bi && a.y >= b.y)
        return false;
    if (aj > bj && a.x <= b.x)
        return false;
    if (aj < bj && a.x >= b.x)
        return false;
    return true;
}

bool is_feasible(const Placement& p) {
    for (int i = 0; i < p.n; ++i) {
        for (int j = 0; j < p.m; ++j) {
            // Unordered pairs once: scan neighbors after (i, j) in raster order.
            for (int k = i; k <= std::min(i + 1, p.n - 1); ++k) {
                for (int l = (k == i ? j + 1 : std::max(0, j - 1));
                     l <= std::min(j + 1, p.m - 1); ++l) {
                    if (!is_feasible_pair(p.at(i, j), p.at(k, l), i, j, k, l))
                        return false;
                }
            }
        }
    }
    return true;
}

double local_similarity(const FeatureGrid& sub, const FeatureGrid& target, Anchor t) {
    if (t.x < 0 || t.y < 0 || t.x + sub.cells_x > target.cells_x ||
        t.y + sub.cells_y > target.cells_y)
        throw std::out_of_range("local_similarity: window out of bounds");
    if (sub.bins != target.bins)
        throw std::invalid_argument("local_similarity: bin count mismatch");
    double sum = 0.0;
    for (int cy = 0; cy < sub.cells_y; ++cy)
        for (int cx = 0; cx < sub.cells_x; ++cx)
            for (int b = 0; b < sub.bins; ++b)
                sum += sub.at(cy, cx, b) * target.at(t.y + cy, t.x + cx, b);
    return sum;
}

namespace {

// Candidate anchor feasibility against every already-placed neighbor.
bool feasible_against_neighbors(const Placement& p, int i, int j, Anchor cand) {
    for (int k = std::max(0, i - 1); k <= std::min(i + 1, p.n - 1); ++k) {
        for (int l = std::max(0, j - 1); l <= std::min(j + 1, p.m - 1); ++l) {
            if (k == i && l == j)
                continue;
            if (!is_feasible_pair(cand, p.at(k, l), i, j, k, l))
                return false;
        }
    }
    return true;
}

}  // namespace

DtmDirectionResult dtm_direction(const FeatureGrid& source, const FeatureGrid& target,
                                 const DtmConfig& config) {
    const SubPatchDecomposition decomp = decompose(source, config.n, config.m);
    Placement placement = init_placement(target.cells_x, target.cells_y, decomp);

    // Current per-sub-patch similarities; each only ever increases.
    std::vector<double> sims(placement.anchors.size());
    for (int i = 0; i < config.n; ++i)
        for (int j = 0; j < config.m; ++j)
            sims[static_cast<std::size_t>(i) * config.m + j] =
                local_similarity(decomp.at(i, j).grid, target, placement.at(i, j));

    DtmDirectionResult res;
    res.converged = false;
    int s = 1;
    for (int sweep = 0; sweep < config.sweep_cap; ++sweep) {
        bool changed = false;
        for (int i = 0; i < config.n; ++i) {
            for (int j = 0; j < config.m; ++j) {
                const SubPatch& sp = decomp.at(i, j);
                const Anchor cur = placement.at(i, j);
                const int x_lo = std::max(0, cur.x - s);
                const int x_hi = std::min(target.cells_x - sp.cols, cur.x + s);
                const int y_lo = std::max(0, cur.y - s);
                const int y_hi = std::min(target.cells_y - sp.rows, cur.y + s);

                Anchor best = cur;
                double best_sim = sims[static_cast<std::size_t>(i) * config.m + j];
                for (int y = y_lo; y <= y_hi; ++y) {
                    for (int x = x_lo; x <= x_hi; ++x) {
                        const Anchor cand{x, y};
                        if (cand == cur)
                            continue;
                        if (!feasible_against_neighbors(placement, i, j, cand))
                            continue;
                        const double sim = local_similarity(sp.grid, target, cand);
                        // Strict improvement only; ties keep the first (smallest
                        // y, then x) candidate met in scan order.
                        if (sim > best_sim) {
                            best_sim = sim;
                            best = cand;
                        }
                    }
                }
                if (!(best == cur)) {
                    placement.at(i, j) = best;
                    sims[static_cast<std::size_t>(i) * config.m + j] = best_sim;
                    changed = true;
                }
            }
        }
        double total = 0.0;
        for (double v : sims)
            total += v;
        res.sweep_similarity.push_back(total);
        ++res.sweeps;
        if (!changed) {
            res.converged = true;
            break;
        }
        ++s;
    }

    res.placement = placement;
    double total = 0.0;
    for (double v : sims)
        total += v;
    res.similarity = total;
    return res;
}

BruteForceResult brute_force_dtm(const FeatureGrid& source, const FeatureGrid& target,
                                 const DtmConfig& config) {
    const SubPatchDecomposition decomp = decompose(source, config.n, config.m);

    const int count = config.n * config.m;
    std::vector<int> nx(count), ny(count);
    std::uint64_t tuples = 1;
    for (int idx = 0; idx < count; ++idx) {
        const SubPatch& sp = decomp.patches[idx];
        nx[idx] = target.cells_x - sp.cols + 1;
        ny[idx] = target.cells_y - sp.rows + 1;
        if (nx[idx] < 1 || ny[idx] < 1)
            throw std::invalid_argument("brute_force_dtm: sub-patch does not fit target");
        const std::uint64_t positions =
            static_cast<std::uint64_t>(nx[idx]) * static_cast<std::uint64_t>(ny[idx]);
        if (tuples > config.enum_guard / positions)
            throw std::runtime_error("brute_force_dtm: search space exceeds guard limit");
        tuples *= positions;
    }

    // Per-sub-patch similarity tables over all anchors.
    std::vector<std::vector<double>> table(count);
    for (int idx = 0; idx < count; ++idx) {
        const SubPatch& sp = decomp.patches[idx];
        table[idx].resize(static_cast<std::size_t>(nx[idx]) * ny[idx]);
        for (int y = 0; y < ny[idx]; ++y)
            for (int x = 0; x < nx[idx]; ++x)
                table[idx][static_cast<std::size_t>(y) * nx[idx] + x] =
                    local_similarity(sp.grid, target, Anchor{x, y});
    }

    Placement current;
    current.n = config.n;
    current.m = config.m;
    current.anchors.resize(count);

    BruteForceResult best;
    best.similarity = -1.0;

    // Depth-first assignment in raster order; every earlier neighbor is
    // already fixed, so pairwise pruning is exact.
    auto recurse = [&](auto&& self, int idx, double partial) -> void {
        if (idx == count) {
            if (partial > best.similarity) {
                best.similarity = partial;
                best.placement = current;
            }
            return;
        }
        const int i = idx / config.m;
        const int j = idx % config.m;
        for (int y = 0; y < ny[idx]; ++y) {
            for (int x = 0; x < nx[idx]; ++x) {
                const Anchor cand{x, y};
                bool ok = true;
                // Check against placed neighbors: same row previous col, and
                // the three row-above neighbors.
                if (j > 0 && !is_feasible_pair(cand, current.at(i, j - 1), i, j, i, j - 1))
                    ok = false;
                if (ok && i > 0) {
                    for (int l = std::max(0, j - 1); l <= std::min(j + 1, config.m - 1); ++l) {
                        if (!is_feasible_pair(cand, current.at(i - 1, l), i, j, i - 1, l)) {
                            ok = false;
                            break;
                        }
                    }
                }
                if (!ok)
                    continue;
                current.at(i, j) = cand;
                self(self, idx + 1,
                     partial + table[idx][static_cast<std::size_t>(y) * nx[idx] + x]);
            }
        }
    };
    recurse(recurse, 0, 0.0);

    if (best.similarity < 0)
        throw std::runtime_error("brute_force_dtm: no feasible placement");
    return best;
}

MatchResult total_score(const GrayImage& a, const GrayImage& b, const DtmConfig& config) {
    config.validate();
    const GrayImage ca = resize_bilinear(a, config.canonical_w, config.canonical_h);
    const GrayImage cb = resize_bilinear(b, config.canonical_w, config.canonical_h);
    const FeatureGrid ga = hog(ca, config.cell_size, config.bins);
    const FeatureGrid gb = hog(cb, config.cell_size, config.bins);

    const DtmDirectionResult fwd = dtm_direction(ga, gb, config);
    const DtmDirectionResult bwd = dtm_direction(gb, ga, config);

    MatchResult r;
    r.similarity_forward = fwd.similarity;
    r.similarity_backward = bwd.similarity;
    r.similarity_total = fwd.similarity + bwd.similarity;
    r.placement_forward = fwd.placement;
    r.placement_backward = bwd.placement;
    r.sweeps_forward = fwd.sweeps;
    r.sweeps_backward = bwd.sweeps;
    return r;
}

}  // namespace dtm
