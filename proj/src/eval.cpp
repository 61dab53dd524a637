#include "dtm/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "dtm/rng.hpp"

namespace dtm {

double roc_auc(std::span<const double> pos_scores, std::span<const double> neg_scores) {
    if (pos_scores.empty() || neg_scores.empty())
        throw std::invalid_argument("roc_auc: score lists must be non-empty");

    struct Entry {
        double score;
        bool positive;
    };
    std::vector<Entry> entries;
    entries.reserve(pos_scores.size() + neg_scores.size());
    for (double s : pos_scores)
        entries.push_back({s, true});
    for (double s : neg_scores)
        entries.push_back({s, false});
    std::sort(entries.begin(), entries.end(),
              [](const Entry& a, const Entry& b) { return a.score < b.score; });

    // Twice the Mann-Whitney U statistic, accumulated exactly in integers:
    // a tie group spanning 1-based ranks [a, b] assigns rank (a+b)/2 to each
    // member, so 2 * sum(pos ranks) = sum over groups of (a+b) * pos_count.
    const std::uint64_t p = pos_scores.size();
    const std::uint64_t n = neg_scores.size();
    std::uint64_t two_rank_sum = 0;
    std::size_t i = 0;
    while (i < entries.size()) {
        std::size_t j = i;
        std::uint64_t pos_in_group = 0;
        while (j < entries.size() && entries[j].score == entries[i].score) {
            if (entries[j].positive)
                ++pos_in_group;
            ++j;
        }
        two_rank_sum += (i + 1 + j) * pos_in_group;  // ranks i+1 .. j
        i = j;
    }
    const std::uint64_t num = two_rank_sum - p * (p + 1);  // 2U, in [0, 2pn]
    const std::uint64_t den = 2 * p * n;
    // Emit the smaller side as a direct quotient and the larger as its
    // complement so that the two orientations always sum to exactly 1.
    if (2 * num <= den)
        return static_cast<double>(num) / static_cast<double>(den);
    return 1.0 - static_cast<double>(den - num) / static_cast<double>(den);
}

std::vector<AnnotationRecord> load_annotations(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("annotations: cannot open '" + path + "'");
    const std::filesystem::path base = std::filesystem::path(path).parent_path();

    std::vector<AnnotationRecord> records;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty() || line[0] == '#')
            continue;
        std::istringstream ss(line);
        AnnotationRecord rec;
        if (!(ss >> rec.image_path >> rec.category >> rec.bbox.xmin >> rec.bbox.ymin >>
              rec.bbox.xmax >> rec.bbox.ymax))
            throw std::runtime_error("annotations: malformed record at line " +
                                     std::to_string(line_no));
        if (rec.bbox.xmin >= rec.bbox.xmax || rec.bbox.ymin >= rec.bbox.ymax)
            throw std::runtime_error("annotations: empty bbox at line " + std::to_string(line_no));
        std::filesystem::path p(rec.image_path);
        if (p.is_relative())
            rec.image_path = (base / p).string();
        records.push_back(std::move(rec));
    }
    return records;
}

std::vector<PatchSample> load_corpus(const std::string& annotations_path) {
    const std::vector<AnnotationRecord> records = load_annotations(annotations_path);
    std::vector<PatchSample> corpus;
    corpus.reserve(records.size());
    int line_no = 0;
    for (const AnnotationRecord& rec : records) {
        ++line_no;
        try {
            corpus.push_back({crop(load_pgm(rec.image_path), rec.bbox), rec.category});
        } catch (const std::exception& e) {
            throw std::runtime_error("annotations: record " + std::to_string(line_no) + " (" +
                                     rec.image_path + "): " + e.what());
        }
    }
    return corpus;
}

namespace {

void mean_stddev(std::span<const double> values, double& mean, double& stddev) {
    mean = 0;
    stddev = 0;
    if (values.empty())
        return;
    for (double v : values)
        mean += v;
    mean /= static_cast<double>(values.size());
    if (values.size() > 1) {
        double ss = 0;
        for (double v : values)
            ss += (v - mean) * (v - mean);
        stddev = std::sqrt(ss / static_cast<double>(values.size() - 1));
    }
}

}  // namespace

BenchmarkRun voc_benchmark(const std::vector<PatchSample>& corpus, const std::string& method_tag,
                           const PairScorer& scorer, const BenchConfig& config,
                           std::uint64_t seed) {
    if (config.iterations < 1)
        throw std::invalid_argument("voc_benchmark: iterations must be >= 1");
    if (config.positives < 1 || config.negatives < 1)
        throw std::invalid_argument("voc_benchmark: sample sizes must be >= 1");

    // Index the corpus by category and check every category can serve as a
    // query's own class.
    std::vector<std::string> categories;
    std::vector<std::vector<int>> by_category;
    std::vector<int> category_of(corpus.size());
    for (int idx = 0; idx < static_cast<int>(corpus.size()); ++idx) {
        const std::string& cat = corpus[idx].category;
        auto it = std::find(categories.begin(), categories.end(), cat);
        int ci;
        if (it == categories.end()) {
            ci = static_cast<int>(categories.size());
            categories.push_back(cat);
            by_category.emplace_back();
        } else {
            ci = static_cast<int>(it - categories.begin());
        }
        by_category[ci].push_back(idx);
        category_of[idx] = ci;
    }
    if (categories.size() < 2)
        throw std::invalid_argument("voc_benchmark: corpus needs at least 2 categories");
    const int total = static_cast<int>(corpus.size());
    for (std::size_t c = 0; c < categories.size(); ++c) {
        const int same = static_cast<int>(by_category[c].size());
        if (same - 1 < config.positives)
            throw std::invalid_argument("voc_benchmark: category '" + categories[c] + "' has " +
                                        std::to_string(same) + " patches, too few for " +
                                        std::to_string(config.positives) + " positives");
        if (total - same < config.negatives)
            throw std::invalid_argument("voc_benchmark: only " + std::to_string(total - same) +
                                        " patches outside category '" + categories[c] +
                                        "', too few for " + std::to_string(config.negatives) +
                                        " negatives");
    }

    Rng master(seed);
    std::vector<std::uint64_t> iter_seeds(config.iterations);
    for (auto& s : iter_seeds)
        s = master.fork_seed();

    BenchmarkRun run;
    run.method = method_tag;
    run.auc.reserve(config.iterations);
    for (int it = 0; it < config.iterations; ++it) {
        Rng rng(iter_seeds[it]);
        const int query = static_cast<int>(rng.below(total));
        const int qc = category_of[query];

        std::vector<int> same;
        same.reserve(by_category[qc].size() - 1);
        for (int idx : by_category[qc])
            if (idx != query)
                same.push_back(idx);
        std::vector<int> other;
        other.reserve(total - by_category[qc].size());
        for (int idx = 0; idx < total; ++idx)
            if (category_of[idx] != qc)
                other.push_back(idx);

        const std::vector<int> pos_pick =
            rng.sample_without_replacement(static_cast<int>(same.size()), config.positives);
        const std::vector<int> neg_pick =
            rng.sample_without_replacement(static_cast<int>(other.size()), config.negatives);

        std::vector<double> pos_scores, neg_scores;
        pos_scores.reserve(pos_pick.size());
        neg_scores.reserve(neg_pick.size());
        for (int k : pos_pick)
            pos_scores.push_back(scorer(corpus[query].image, corpus[same[k]].image));
        for (int k : neg_pick)
            neg_scores.push_back(scorer(corpus[query].image, corpus[other[k]].image));

        run.auc.push_back(roc_auc(pos_scores, neg_scores));
    }
    mean_stddev(run.auc, run.mean, run.stddev);
    return run;
}

namespace {

// Forward map (source -> output) for one trial, plus the output canvas size
// that exactly bounds the transformed image.
AffineMap trial_transform(int w, int h, double rotation, double sx, double sy, int& out_w,
                          int& out_h) {
    const AffineMap rs = AffineMap::scaling(sx, sy).compose(AffineMap::rotation(rotation));
    double min_x = 0, min_y = 0, max_x = 0, max_y = 0;
    bool first = true;
    const double xs[2] = {0.0, static_cast<double>(w - 1)};
    const double ys[2] = {0.0, static_cast<double>(h - 1)};
    for (double cx : xs) {
        for (double cy : ys) {
            double tx, ty;
            rs.apply(cx, cy, tx, ty);
            if (first) {
                min_x = max_x = tx;
                min_y = max_y = ty;
                first = false;
            } else {
                min_x = std::min(min_x, tx);
                max_x = std::max(max_x, tx);
                min_y = std::min(min_y, ty);
                max_y = std::max(max_y, ty);
            }
        }
    }
    out_w = static_cast<int>(std::floor(max_x - min_x)) + 1;
    out_h = static_cast<int>(std::floor(max_y - min_y)) + 1;
    return AffineMap::translation(-min_x, -min_y).compose(rs);
}

int count_inliers(std::span<const SiftKeypoint> ka, std::span<const SiftKeypoint> kb,
                  std::span<const Correspondence> matches, const RansacConfig& ransac,
                  std::uint64_t seed) {
    if (matches.size() < 4)
        return 0;
    std::vector<PointPair> pairs;
    pairs.reserve(matches.size());
    for (const Correspondence& c : matches)
        pairs.push_back({ka[c.index_a].x, ka[c.index_a].y, kb[c.index_b].x, kb[c.index_b].y});
    try {
        return static_cast<int>(ransac_homography(pairs, ransac, seed).inliers.size());
    } catch (const std::runtime_error&) {
        return 0;
    }
}

}  // namespace

std::vector<SiftTrialResult> sift_benchmark(const GrayImage& img, const SiftBenchConfig& config,
                                            std::uint64_t seed) {
    if (config.trials < 1)
        throw std::invalid_argument("sift_benchmark: trials must be >= 1");

    const std::vector<SiftKeypoint> keys_a = detect_sift(img, config.sift);
    std::vector<SiftDescriptor> desc_a_conv, desc_a_def;
    desc_a_conv.reserve(keys_a.size());
    desc_a_def.reserve(keys_a.size());
    for (const SiftKeypoint& kp : keys_a) {
        desc_a_conv.push_back(sift_descriptor(img, kp, true));
        desc_a_def.push_back(sift_descriptor(img, kp, false));
    }

    Rng master(seed);
    std::vector<std::uint64_t> trial_seeds(config.trials);
    for (auto& s : trial_seeds)
        s = master.fork_seed();

    std::vector<SiftTrialResult> results;
    results.reserve(config.trials);
    for (int t = 0; t < config.trials; ++t) {
        Rng rng(trial_seeds[t]);
        SiftTrialResult trial;
        trial.rotation = rng.uniform(0.0, 2.0 * std::numbers::pi);
        trial.scale_x = rng.uniform(config.min_axis_scale, config.max_axis_scale);
        trial.scale_y = rng.uniform(config.min_axis_scale, config.max_axis_scale);
        const std::uint64_t conv_seed = rng.fork_seed();
        const std::uint64_t def_seed = rng.fork_seed();
        if (config.identity) {
            trial.rotation = 0;
            trial.scale_x = 1;
            trial.scale_y = 1;
        }

        int out_w = 0, out_h = 0;
        const AffineMap fwd = trial_transform(img.width, img.height, trial.rotation,
                                              trial.scale_x, trial.scale_y, out_w, out_h);
        const GrayImage warped = warp_affine(img, fwd.inverse(), out_w, out_h);

        std::vector<SiftKeypoint> keys_b;
        try {
            keys_b = detect_sift(warped, config.sift);
        } catch (const std::invalid_argument&) {
            results.push_back(trial);  // warped image too small: zero inliers
            continue;
        }
        std::vector<SiftDescriptor> desc_b_conv, desc_b_def;
        desc_b_conv.reserve(keys_b.size());
        desc_b_def.reserve(keys_b.size());
        for (const SiftKeypoint& kp : keys_b) {
            desc_b_conv.push_back(sift_descriptor(warped, kp, true));
            desc_b_def.push_back(sift_descriptor(warped, kp, false));
        }

        const std::vector<Correspondence> conv_matches =
            match_descriptors(desc_a_conv, desc_b_conv, MatchMode::conventional);
        const std::vector<Correspondence> def_matches =
            match_descriptors(desc_a_def, desc_b_def, MatchMode::deformable);

        trial.conventional_matches = static_cast<int>(conv_matches.size());
        trial.deformable_matches = static_cast<int>(def_matches.size());
        trial.conventional_inliers =
            count_inliers(keys_a, keys_b, conv_matches, config.ransac, conv_seed);
        trial.deformable_inliers =
            count_inliers(keys_a, keys_b, def_matches, config.ransac, def_seed);
        results.push_back(trial);
    }
    return results;
}

namespace {

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

}  // namespace

void write_benchmark_table(std::ostream& out, const BenchmarkRun& run) {
    out << "iteration\tmethod\tauc\n";
    for (std::size_t i = 0; i < run.auc.size(); ++i)
        out << i << "\t" << run.method << "\t" << fmt(run.auc[i]) << "\n";
    out << "mean\t" << run.method << "\t" << fmt(run.mean) << "\n";
    out << "std\t" << run.method << "\t" << fmt(run.stddev) << "\n";
}

void write_sift_table(std::ostream& out, std::span<const SiftTrialResult> trials) {
    out << "trial\trotation\tscale_x\tscale_y\tconventional_inliers\tdeformable_inliers\n";
    std::vector<double> conv, def;
    conv.reserve(trials.size());
    def.reserve(trials.size());
    for (std::size_t i = 0; i < trials.size(); ++i) {
        const SiftTrialResult& t = trials[i];
        out << i << "\t" << fmt(t.rotation) << "\t" << fmt(t.scale_x) << "\t" << fmt(t.scale_y)
            << "\t" << t.conventional_inliers << "\t" << t.deformable_inliers << "\n";
        conv.push_back(t.conventional_inliers);
        def.push_back(t.deformable_inliers);
    }
    double conv_mean, conv_std, def_mean, def_std;
    mean_stddev(conv, conv_mean, conv_std);
    mean_stddev(def, def_mean, def_std);
    out << "mean\t-\t-\t-\t" << fmt(conv_mean) << "\t" << fmt(def_mean) << "\n";
    out << "std\t-\t-\t-\t" << fmt(conv_std) << "\t" << fmt(def_std) << "\n";
}

}  // namespace dtm
