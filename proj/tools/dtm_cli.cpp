#include <CLI11.hpp>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>

#include "dtm/baselines.hpp"
#include "dtm/dtm.hpp"
#include "dtm/eval.hpp"
#include "dtm/matching.hpp"

namespace {

struct CommonOpts {
    std::string grid = "2x2";
    std::string canon = "128x128";
    int cell_size = 8;
    int bins = 9;
    std::uint64_t seed = 0;
    std::string out;
};

void add_dtm_flags(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--grid", o.grid, "Sub-patch grid NxM (rows x cols)");
    cmd->add_option("--canon", o.canon, "Canonical resize WxH in pixels");
    cmd->add_option("--cell-size", o.cell_size, "HOG cell size in pixels");
    cmd->add_option("--bins", o.bins, "HOG orientation bins");
}

std::pair<int, int> parse_pair(const std::string& s, char sep, const char* what) {
    const auto pos = s.find(sep);
    if (pos == std::string::npos)
        throw CLI::ValidationError(std::string(what) + ": expected <a>" + sep + "<b>, got '" + s +
                                   "'");
    try {
        return {std::stoi(s.substr(0, pos)), std::stoi(s.substr(pos + 1))};
    } catch (const std::exception&) {
        throw CLI::ValidationError(std::string(what) + ": malformed '" + s + "'");
    }
}

dtm::DtmConfig make_config(const CommonOpts& o) {
    dtm::DtmConfig cfg;
    const auto [n, m] = parse_pair(o.grid, 'x', "--grid");
    const auto [w, h] = parse_pair(o.canon, 'x', "--canon");
    cfg.n = n;
    cfg.m = m;
    cfg.canonical_w = w;
    cfg.canonical_h = h;
    cfg.cell_size = o.cell_size;
    cfg.bins = o.bins;
    cfg.validate();
    return cfg;
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6f", v);
    return buf;
}

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write output file '" + path + "'");
    out << content;
}

void print_placement(std::ostream& os, const char* tag, const dtm::Placement& p) {
    for (int i = 0; i < p.n; ++i)
        for (int j = 0; j < p.m; ++j)
            os << tag << "_anchor\t" << i << "\t" << j << "\t" << p.at(i, j).x << "\t"
               << p.at(i, j).y << "\n";
}

int run_match(const std::string& path_a, const std::string& path_b, const CommonOpts& opts) {
    const dtm::DtmConfig cfg = make_config(opts);
    const dtm::GrayImage a = dtm::load_pgm(path_a);
    const dtm::GrayImage b = dtm::load_pgm(path_b);
    const dtm::MatchResult r = dtm::total_score(a, b, cfg);

    std::ostringstream os;
    os << "similarity_total\t" << fmt(r.similarity_total) << "\n";
    os << "similarity_forward\t" << fmt(r.similarity_forward) << "\n";
    os << "similarity_backward\t" << fmt(r.similarity_backward) << "\n";
    os << "sweeps_forward\t" << r.sweeps_forward << "\n";
    os << "sweeps_backward\t" << r.sweeps_backward << "\n";
    print_placement(os, "forward", r.placement_forward);
    print_placement(os, "backward", r.placement_backward);
    write_output(opts.out, os.str());
    return 0;
}

dtm::PairScorer make_scorer(const std::string& method, const dtm::DtmConfig& cfg) {
    const dtm::BaselineConfig bcfg{cfg.canonical_w, cfg.canonical_h, cfg.cell_size, cfg.bins};
    if (method == "dtm")
        return [cfg](const dtm::GrayImage& a, const dtm::GrayImage& b) {
            return dtm::total_score(a, b, cfg).similarity_total;
        };
    if (method == "sad1")
        return [](const dtm::GrayImage& a, const dtm::GrayImage& b) {
            return dtm::sad1(a, b).score;
        };
    if (method == "sad2")
        return [](const dtm::GrayImage& a, const dtm::GrayImage& b) {
            return dtm::sad2(a, b).score;
        };
    if (method == "hog1")
        return [bcfg](const dtm::GrayImage& a, const dtm::GrayImage& b) {
            return dtm::hog1(a, b, bcfg).score;
        };
    if (method == "hog2")
        return [bcfg](const dtm::GrayImage& a, const dtm::GrayImage& b) {
            return dtm::hog2(a, b, bcfg).score;
        };
    throw std::runtime_error("unknown method '" + method +
                             "' (valid: dtm, sad1, sad2, hog1, hog2)");
}

int run_bench_patches(const std::string& annotations, const std::string& method,
                      const dtm::BenchConfig& bench, const CommonOpts& opts) {
    const dtm::DtmConfig cfg = make_config(opts);
    const dtm::PairScorer scorer = make_scorer(method, cfg);
    const std::vector<dtm::PatchSample> corpus = dtm::load_corpus(annotations);
    const dtm::BenchmarkRun run = dtm::voc_benchmark(corpus, method, scorer, bench, opts.seed);

    std::ostringstream os;
    dtm::write_benchmark_table(os, run);
    write_output(opts.out, os.str());
    std::cerr << method << ": mean AUC " << fmt(run.mean) << ", std " << fmt(run.stddev) << " over "
              << run.auc.size() << " iterations\n";
    return 0;
}

int run_bench_sift(const std::string& image_path, const dtm::SiftBenchConfig& cfg,
                   const CommonOpts& opts) {
    const dtm::GrayImage img = dtm::load_pgm(image_path);
    const std::vector<dtm::SiftTrialResult> trials = dtm::sift_benchmark(img, cfg, opts.seed);

    std::ostringstream os;
    dtm::write_sift_table(os, trials);
    write_output(opts.out, os.str());

    double conv = 0, def = 0;
    for (const auto& t : trials) {
        conv += t.conventional_inliers;
        def += t.deformable_inliers;
    }
    std::cerr << "conventional mean inliers " << fmt(conv / trials.size())
              << ", deformable mean inliers " << fmt(def / trials.size()) << " over "
              << trials.size() << " trials\n";
    return 0;
}

int run_sift_match(const std::string& path_a, const std::string& path_b,
                   const std::string& method, const CommonOpts& opts) {
    dtm::MatchMode mode;
    if (method == "conventional")
        mode = dtm::MatchMode::conventional;
    else if (method == "deformable")
        mode = dtm::MatchMode::deformable;
    else
        throw std::runtime_error("unknown method '" + method +
                                 "' (valid: conventional, deformable)");

    const dtm::GrayImage a = dtm::load_pgm(path_a);
    const dtm::GrayImage b = dtm::load_pgm(path_b);
    const std::vector<dtm::SiftKeypoint> ka = dtm::detect_sift(a);
    const std::vector<dtm::SiftKeypoint> kb = dtm::detect_sift(b);

    const bool weighting = mode == dtm::MatchMode::conventional;
    std::vector<dtm::SiftDescriptor> da, db;
    da.reserve(ka.size());
    db.reserve(kb.size());
    for (const auto& kp : ka)
        da.push_back(dtm::sift_descriptor(a, kp, weighting));
    for (const auto& kp : kb)
        db.push_back(dtm::sift_descriptor(b, kp, weighting));

    const std::vector<dtm::Correspondence> matches = dtm::match_descriptors(da, db, mode);

    std::vector<bool> inlier(matches.size(), false);
    if (matches.size() >= 4) {
        std::vector<dtm::PointPair> pairs;
        pairs.reserve(matches.size());
        for (const auto& c : matches)
            pairs.push_back({ka[c.index_a].x, ka[c.index_a].y, kb[c.index_b].x, kb[c.index_b].y});
        try {
            const dtm::RansacResult rr = dtm::ransac_homography(pairs, {}, opts.seed);
            for (int i : rr.inliers)
                inlier[i] = true;
        } catch (const std::runtime_error&) {
            // no consensus model: all matches exported as outliers
        }
    } else {
        std::cerr << "warning: only " << matches.size()
                  << " correspondences; homography estimation needs >= 4\n";
    }

    std::ostringstream os;
    os << "index_a\tindex_b\tx_a\ty_a\tx_b\ty_b\tsimilarity\tinlier\n";
    for (std::size_t i = 0; i < matches.size(); ++i) {
        const auto& c = matches[i];
        os << c.index_a << "\t" << c.index_b << "\t" << fmt(ka[c.index_a].x) << "\t"
           << fmt(ka[c.index_a].y) << "\t" << fmt(kb[c.index_b].x) << "\t" << fmt(kb[c.index_b].y)
           << "\t" << fmt(c.similarity) << "\t" << (inlier[i] ? 1 : 0) << "\n";
    }
    write_output(opts.out, os.str());
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Deformable template matching toolkit"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string path_a, path_b, annotations, method = "dtm";
    dtm::BenchConfig bench;
    dtm::SiftBenchConfig sift_cfg;

    CLI::App* match = app.add_subcommand("match", "Score two image templates");
    match->add_option("image1", path_a, "First PGM image")->required();
    match->add_option("image2", path_b, "Second PGM image")->required();
    add_dtm_flags(match, opts);
    match->add_option("--out", opts.out, "Write the report to a file instead of stdout");

    CLI::App* bp = app.add_subcommand("bench-patches", "Patch-matching AUC benchmark");
    bp->add_option("annotations", annotations, "Annotation file")->required();
    bp->add_option("--method", method, "dtm, sad1, sad2, hog1 or hog2");
    bp->add_option("--iterations", bench.iterations, "Benchmark iterations");
    bp->add_option("--positives", bench.positives, "Positive patches per iteration");
    bp->add_option("--negatives", bench.negatives, "Negative patches per iteration");
    bp->add_option("--seed", opts.seed, "RNG seed");
    bp->add_option("--out", opts.out, "Output table path");
    add_dtm_flags(bp, opts);

    CLI::App* bs = app.add_subcommand("bench-sift", "Transformed-image inlier benchmark");
    bs->add_option("image", path_a, "Textured PGM image")->required();
    bs->add_option("--trials", sift_cfg.trials, "Number of random transforms");
    bs->add_option("--seed", opts.seed, "RNG seed");
    bs->add_option("--out", opts.out, "Output table path");
    bs->add_flag("--identity", sift_cfg.identity, "Force the identity transform (testing aid)");

    CLI::App* sm = app.add_subcommand("sift-match", "Export keypoint correspondences");
    sm->add_option("image1", path_a, "First PGM image")->required();
    sm->add_option("image2", path_b, "Second PGM image")->required();
    sm->add_option("--method", method, "conventional or deformable")->required();
    sm->add_option("--seed", opts.seed, "RANSAC seed");
    sm->add_option("--out", opts.out, "Output table path");

    CLI11_PARSE(app, argc, argv);

    try {
        if (match->parsed())
            return run_match(path_a, path_b, opts);
        if (bp->parsed())
            return run_bench_patches(annotations, method, bench, opts);
        if (bs->parsed()) {
            if (sift_cfg.trials < 1)
                throw std::runtime_error("--trials must be >= 1");
            return run_bench_sift(path_a, sift_cfg, opts);
        }
        if (sm->parsed())
            return run_sift_match(path_a, path_b, method, opts);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
