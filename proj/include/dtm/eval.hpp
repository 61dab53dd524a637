#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "dtm/features.hpp"
#include "dtm/image.hpp"
#include "dtm/matching.hpp"

namespace dtm {

// Probability that a positive outscores a negative, ties half-credited.
// Computed from ranks; complementary calls sum to exactly 1.
double roc_auc(std::span<const double> pos_scores, std::span<const double> neg_scores);

// One line of the annotation file: image path, category, bbox.
struct AnnotationRecord {
    std::string image_path;
    std::string category;
    BBox bbox;
};

// Line format: <path> <category> <xmin> <ymin> <xmax> <ymax>, '#' comments
// allowed. Paths are resolved relative to the annotation file's directory.
std::vector<AnnotationRecord> load_annotations(const std::string& path);

struct PatchSample {
    GrayImage image;
    std::string category;
};

// Loads every annotated image and crops the patch. Errors cite the
// offending annotation line.
std::vector<PatchSample> load_corpus(const std::string& annotations_path);

struct BenchConfig {
    int iterations = 100;
    int positives = 100;
    int negatives = 100;
};

struct BenchmarkRun {
    std::string method;
    std::vector<double> auc;  // one value per iteration
    double mean = 0;
    double stddev = 0;  // sample standard deviation (n-1)
};

using PairScorer = std::function<double(const GrayImage&, const GrayImage&)>;

// Patch-matching protocol: per iteration draw one query patch, `positives`
// same-category patches (query excluded) and `negatives` patches pooled from
// all other categories, all without replacement; score each against the
// query and record the AUC. Iterations use independent derived seeds.
BenchmarkRun voc_benchmark(const std::vector<PatchSample>& corpus, const std::string& method_tag,
                           const PairScorer& scorer, const BenchConfig& config,
                           std::uint64_t seed);

struct SiftBenchConfig {
    int trials = 100;
    double min_axis_scale = 0.5;
    double max_axis_scale = 1.0;
    SiftParams sift;
    RansacConfig ransac;
    bool identity = false;  // force the identity transform (testing aid)
};

struct SiftTrialResult {
    double rotation = 0;
    double scale_x = 1;
    double scale_y = 1;
    int conventional_inliers = 0;
    int deformable_inliers = 0;
    int conventional_matches = 0;  // mutual-NN correspondences fed to RANSAC
    int deformable_matches = 0;
};

// Feature-matching protocol: per trial draw a rotation and per-axis scales,
// warp the image, detect and describe keypoints on both images, match with
// the conventional and the deformable similarity (both see the identical
// transform), and record each mode's RANSAC inlier count. Trials that
// produce too few matches record zero inliers.
std::vector<SiftTrialResult> sift_benchmark(const GrayImage& img, const SiftBenchConfig& config,
                                            std::uint64_t seed);

// Tabular emission, one header row then one row per entry, then mean/std
// summary rows. Tab-delimited.
void write_benchmark_table(std::ostream& out, const BenchmarkRun& run);
void write_sift_table(std::ostream& out, std::span<const SiftTrialResult> trials);

}  // namespace dtm
