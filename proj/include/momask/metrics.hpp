#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "momask/matrix.hpp"
#include "momask/motion.hpp"

namespace momask {

// Mean Euclidean distance between corresponding joints, treating coordinates
// as millimeters. Requires a joint layout.
double mpjpe(const MotionSequence& pred, const MotionSequence& gt);

struct JerkSeries {
    Matrix magnitudes; // (T-3) x joints, length/s^3
    double fps = 0.0;

    size_t frames() const { return magnitudes.rows; }
    size_t joints() const { return magnitudes.cols; }
};

// Third backward difference of each joint position scaled by fps^3, then the
// Euclidean norm over (x,y,z).
JerkSeries jerk(const MotionSequence& seq);

// Per-frame-and-joint term |Jp-Jt| / (Jt+Jp), split into the over-estimation
// (noise) and under-estimation (static) parts; a frame where both jerks are
// zero contributes 0. total is defined as noise + static so the decomposition
// is exact by construction.
struct SjpeReport {
    double total = 0.0;
    double noise = 0.0;
    double static_part = 0.0;
};
SjpeReport sjpe(const JerkSeries& pred, const JerkSeries& gt);

// ||mu_a - mu_b||^2 + Tr(Sa + Sb - 2 (Sa Sb)^{1/2}); the square-root trace
// goes through S = Sa^{1/2} Sb Sa^{1/2}, symmetric eigensolve, negative
// eigenvalues clamped. Raw value may be a hair below zero; clamp in reports.
double fid_from_stats(const std::vector<double>& mu_a, const Matrix& cov_a,
                      const std::vector<double>& mu_b, const Matrix& cov_b);

// Sample mean/covariance (ddof=1) per set; sets smaller than F+1 rows get a
// 1e-6 ridge on the covariance diagonal.
double fid(const Matrix& feats_a, const Matrix& feats_b);

void feature_stats(const Matrix& feats, std::vector<double>& mu, Matrix& cov);

struct RetrievalResult {
    double r_precision_1 = 0.0;
    double r_precision_2 = 0.0;
    double r_precision_3 = 0.0;
    double mm_dist = 0.0;
};

// For each motion, ranks its paired condition feature against pool_size-1
// seeded distractors by Euclidean distance (strictly-closer counts).
RetrievalResult retrieval_metrics(const Matrix& cond_feats, const Matrix& motion_feats,
                                  size_t pool_size, uint64_t seed);

// Per condition: seeded shuffle, pair the first r generations with the next
// r, mean paired distance; then mean over conditions.
double multimodality(const std::vector<Matrix>& per_condition, size_t r, uint64_t seed);

inline constexpr const char* kFeatureExtractorName = "desc_v1";

// Per-dimension mean / std / mean |first difference| / mean |jerk|, pooled
// round-robin into min(D,16) groups, 4*min(D,16) <= 64 values total.
std::vector<double> default_features(const MotionSequence& seq);

struct MetricReport {
    std::string extractor = kFeatureExtractorName;
    std::optional<double> mpjpe_mm;
    std::optional<double> fid;
    std::optional<SjpeReport> sjpe;
    std::optional<RetrievalResult> retrieval;
    std::optional<double> multimodality;
    std::optional<double> codebook_perplexity;

    std::string to_json() const;
};

// frame, gt_jerk, pred_jerk, term, sign rows (means over joints) for plotting
void write_jerk_csv(const std::filesystem::path& path, const JerkSeries& pred,
                    const JerkSeries& gt);

} // namespace momask
