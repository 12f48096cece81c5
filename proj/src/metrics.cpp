#include "momask/metrics.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

#include <json.hpp>

#include "momask/errors.hpp"
#include "momask/kernels.hpp"
#include "momask/linalg.hpp"
#include "momask/rng.hpp"

namespace momask {

using nlohmann::json;

double mpjpe(const MotionSequence& pred, const MotionSequence& gt) {
    if (pred.length() != gt.length() || pred.dims() != gt.dims())
        throw std::invalid_argument("mpjpe: shape mismatch");
    if (!(pred.layout == gt.layout)) throw std::invalid_argument("mpjpe: layouts differ");
    if (gt.layout.joint_count == 0) throw DataError("mpjpe: layout has no joints");

    double sum = 0.0;
    for (size_t t = 0; t < gt.length(); ++t)
        for (size_t off : gt.layout.position_offsets) {
            double d2 = 0.0;
            for (size_t k = 0; k < 3; ++k) {
                double diff = pred.frames(t, off + k) - gt.frames(t, off + k);
                d2 += diff * diff;
            }
            sum += std::sqrt(d2);
        }
    return sum / (static_cast<double>(gt.length()) * static_cast<double>(gt.layout.joint_count));
}

JerkSeries jerk(const MotionSequence& seq) {
    if (seq.length() < 4) throw DataError("jerk: need at least 4 frames");
    if (seq.layout.joint_count == 0) throw DataError("jerk: layout has no joints");

    const size_t t_len = seq.length(), joints = seq.layout.joint_count;
    Matrix positions(t_len, joints * 3);
    for (size_t t = 0; t < t_len; ++t)
        for (size_t j = 0; j < joints; ++j) {
            size_t off = seq.layout.position_offsets[j];
            for (size_t k = 0; k < 3; ++k) positions(t, 3 * j + k) = seq.frames(t, off + k);
        }

    Matrix diffs;
    third_difference(positions, seq.fps * seq.fps * seq.fps, diffs);

    JerkSeries out;
    out.fps = seq.fps;
    out.magnitudes = Matrix(diffs.rows, joints);
    for (size_t t = 0; t < diffs.rows; ++t)
        for (size_t j = 0; j < joints; ++j) {
            double d2 = 0.0;
            for (size_t k = 0; k < 3; ++k) d2 += diffs(t, 3 * j + k) * diffs(t, 3 * j + k);
            out.magnitudes(t, j) = std::sqrt(d2);
        }
    return out;
}

SjpeReport sjpe(const JerkSeries& pred, const JerkSeries& gt) {
    if (!pred.magnitudes.same_shape(gt.magnitudes))
        throw std::invalid_argument("sjpe: jerk series shapes differ");

    double noise_sum = 0.0, static_sum = 0.0;
    const size_t count = gt.magnitudes.data.size();
    for (size_t i = 0; i < count; ++i) {
        double jp = pred.magnitudes.data[i], jt = gt.magnitudes.data[i];
        double denom = jt + jp;
        if (denom == 0.0) continue;
        noise_sum += std::max(0.0, jp - jt) / denom;
        static_sum += std::max(0.0, jt - jp) / denom;
    }

    SjpeReport rep;
    if (count > 0) {
        rep.noise = noise_sum / static_cast<double>(count);
        rep.static_part = static_sum / static_cast<double>(count);
    }
    rep.total = rep.noise + rep.static_part;
    return rep;
}

void feature_stats(const Matrix& feats, std::vector<double>& mu, Matrix& cov) {
    const size_t n = feats.rows, f = feats.cols;
    if (n == 0) throw std::invalid_argument("feature_stats: empty feature set");

    mu.assign(f, 0.0);
    for (size_t i = 0; i < n; ++i)
        for (size_t j = 0; j < f; ++j) mu[j] += feats(i, j);
    for (auto& v : mu) v /= static_cast<double>(n);

    cov = Matrix(f, f);
    const double denom = n > 1 ? static_cast<double>(n - 1) : 1.0;
    for (size_t i = 0; i < n; ++i)
        for (size_t a = 0; a < f; ++a) {
            double da = feats(i, a) - mu[a];
            if (da == 0.0) continue;
            for (size_t b = 0; b < f; ++b) cov(a, b) += da * (feats(i, b) - mu[b]) / denom;
        }
    if (n < f + 1)
        for (size_t a = 0; a < f; ++a) cov(a, a) += 1e-6;
}

double fid_from_stats(const std::vector<double>& mu_a, const Matrix& cov_a,
                      const std::vector<double>& mu_b, const Matrix& cov_b) {
    const size_t f = mu_a.size();
    if (mu_b.size() != f || cov_a.rows != f || cov_a.cols != f || !cov_b.same_shape(cov_a))
        throw std::invalid_argument("fid: dimension mismatch");

    double mean_term = 0.0;
    for (size_t j = 0; j < f; ++j) {
        double d = mu_a[j] - mu_b[j];
        mean_term += d * d;
    }

    double trace_ab = 0.0;
    for (size_t j = 0; j < f; ++j) trace_ab += cov_a(j, j) + cov_b(j, j);

    Matrix root_a = symmetric_sqrt(cov_a);
    Matrix inner = matmul(matmul(root_a, cov_b), root_a);
    for (size_t i = 0; i < f; ++i)
        for (size_t j = i + 1; j < f; ++j) {
            double v = 0.5 * (inner(i, j) + inner(j, i));
            inner(i, j) = v;
            inner(j, i) = v;
        }
    return mean_term + trace_ab - 2.0 * sqrt_eigen_trace(inner);
}

double fid(const Matrix& feats_a, const Matrix& feats_b) {
    if (feats_a.cols != feats_b.cols) throw std::invalid_argument("fid: dimension mismatch");
    std::vector<double> mu_a, mu_b;
    Matrix cov_a, cov_b;
    feature_stats(feats_a, mu_a, cov_a);
    feature_stats(feats_b, mu_b, cov_b);
    return fid_from_stats(mu_a, cov_a, mu_b, cov_b);
}

RetrievalResult retrieval_metrics(const Matrix& cond_feats, const Matrix& motion_feats,
                                  size_t pool_size, uint64_t seed) {
    if (!cond_feats.same_shape(motion_feats))
        throw std::invalid_argument("retrieval: paired feature shapes differ");
    const size_t n = motion_feats.rows;
    if (pool_size < 2) throw std::invalid_argument("retrieval: pool_size must be >= 2");
    if (n < pool_size) throw std::invalid_argument("retrieval: fewer pairs than pool_size");

    Rng rng(seed);
    size_t hit1 = 0, hit2 = 0, hit3 = 0;
    double dist_sum = 0.0;
    std::vector<size_t> others(n - 1);

    for (size_t i = 0; i < n; ++i) {
        double true_d = euclidean_distance(motion_feats.row(i), cond_feats.row(i));
        dist_sum += true_d;

        size_t at = 0;
        for (size_t j = 0; j < n; ++j)
            if (j != i) others[at++] = j;
        // first pool_size-1 after a partial shuffle = uniform distractor set
        for (size_t k = 0; k + 1 < pool_size; ++k) {
            size_t j = k + static_cast<size_t>(rng.uniform_int(others.size() - k));
            std::swap(others[k], others[j]);
        }

        size_t rank = 1;
        for (size_t k = 0; k + 1 < pool_size; ++k) {
            double d = euclidean_distance(motion_feats.row(i), cond_feats.row(others[k]));
            if (d < true_d) ++rank;
        }
        if (rank <= 1) ++hit1;
        if (rank <= 2) ++hit2;
        if (rank <= 3) ++hit3;
    }

    RetrievalResult res;
    res.r_precision_1 = static_cast<double>(hit1) / static_cast<double>(n);
    res.r_precision_2 = static_cast<double>(hit2) / static_cast<double>(n);
    res.r_precision_3 = static_cast<double>(hit3) / static_cast<double>(n);
    res.mm_dist = dist_sum / static_cast<double>(n);
    return res;
}

double multimodality(const std::vector<Matrix>& per_condition, size_t r, uint64_t seed) {
    if (r < 1) throw std::invalid_argument("multimodality: r must be >= 1");
    if (per_condition.empty()) throw std::invalid_argument("multimodality: no conditions");

    Rng rng(seed);
    double cond_sum = 0.0;
    for (const auto& gens : per_condition) {
        if (gens.rows < 2 * r)
            throw std::invalid_argument("multimodality: a condition has fewer than 2r generations");
        std::vector<size_t> order(gens.rows);
        for (size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        double pair_sum = 0.0;
        for (size_t k = 0; k < r; ++k)
            pair_sum += euclidean_distance(gens.row(order[k]), gens.row(order[r + k]));
        cond_sum += pair_sum / static_cast<double>(r);
    }
    return cond_sum / static_cast<double>(per_condition.size());
}

std::vector<double> default_features(const MotionSequence& seq) {
    if (seq.length() < 4) throw DataError("features: need at least 4 frames");
    const size_t t_len = seq.length(), dims = seq.dims();
    const size_t groups = std::min<size_t>(dims, 16);

    std::vector<double> mean(dims, 0.0), sd(dims, 0.0), vel(dims, 0.0), jrk(dims, 0.0);
    for (size_t d = 0; d < dims; ++d) {
        for (size_t t = 0; t < t_len; ++t) mean[d] += seq.frames(t, d);
        mean[d] /= static_cast<double>(t_len);
        for (size_t t = 0; t < t_len; ++t) {
            double diff = seq.frames(t, d) - mean[d];
            sd[d] += diff * diff;
        }
        sd[d] = std::sqrt(sd[d] / static_cast<double>(t_len));
        for (size_t t = 1; t < t_len; ++t)
            vel[d] += std::abs(seq.frames(t, d) - seq.frames(t - 1, d));
        vel[d] /= static_cast<double>(t_len - 1);
        double scale = seq.fps * seq.fps * seq.fps;
        for (size_t t = 3; t < t_len; ++t)
            jrk[d] += std::abs((seq.frames(t, d) - 3.0 * seq.frames(t - 1, d) +
                                3.0 * seq.frames(t - 2, d) - seq.frames(t - 3, d)) * scale);
        jrk[d] /= static_cast<double>(t_len - 3);
    }

    // round-robin pooling: group g owns dims d with d % groups == g
    auto pool = [&](const std::vector<double>& per_dim, std::vector<double>& out) {
        std::vector<double> acc(groups, 0.0);
        std::vector<size_t> cnt(groups, 0);
        for (size_t d = 0; d < dims; ++d) {
            acc[d % groups] += per_dim[d];
            cnt[d % groups] += 1;
        }
        for (size_t g = 0; g < groups; ++g) out.push_back(acc[g] / static_cast<double>(cnt[g]));
    };

    std::vector<double> feats;
    feats.reserve(4 * groups);
    pool(mean, feats);
    pool(sd, feats);
    pool(vel, feats);
    pool(jrk, feats);
    return feats;
}

std::string MetricReport::to_json() const {
    json j;
    j["extractor"] = extractor;
    if (mpjpe_mm) j["mpjpe_mm"] = *mpjpe_mm;
    if (fid) j["fid"] = std::max(0.0, *fid);
    if (sjpe) {
        j["sjpe_total"] = sjpe->total;
        j["sjpe_noise"] = sjpe->noise;
        j["sjpe_static"] = sjpe->static_part;
    }
    if (retrieval) {
        j["r_precision_1"] = retrieval->r_precision_1;
        j["r_precision_2"] = retrieval->r_precision_2;
        j["r_precision_3"] = retrieval->r_precision_3;
        j["mm_dist"] = retrieval->mm_dist;
    }
    if (multimodality) j["multimodality"] = *multimodality;
    if (codebook_perplexity) j["codebook_perplexity"] = *codebook_perplexity;
    return j.dump(2);
}

void write_jerk_csv(const std::filesystem::path& path, const JerkSeries& pred,
                    const JerkSeries& gt) {
    if (!pred.magnitudes.same_shape(gt.magnitudes))
        throw std::invalid_argument("jerk csv: series shapes differ");
    std::ofstream os(path);
    if (!os) throw DataError("jerk csv: cannot open " + path.string());
    os << "frame,gt_jerk,pred_jerk,term,sign\n";
    const size_t joints = gt.magnitudes.cols;
    for (size_t t = 0; t < gt.magnitudes.rows; ++t) {
        double gt_mean = 0.0, pred_mean = 0.0, term_mean = 0.0;
        for (size_t j = 0; j < joints; ++j) {
            double jp = pred.magnitudes(t, j), jt = gt.magnitudes(t, j);
            gt_mean += jt;
            pred_mean += jp;
            if (jt + jp > 0.0) term_mean += std::abs(jp - jt) / (jt + jp);
        }
        gt_mean /= static_cast<double>(joints);
        pred_mean /= static_cast<double>(joints);
        term_mean /= static_cast<double>(joints);
        int sign = pred_mean > gt_mean ? 1 : (pred_mean < gt_mean ? -1 : 0);
        os << t << ',' << gt_mean << ',' << pred_mean << ',' << term_mean << ',' << sign << '\n';
    }
}

} // namespace momask
