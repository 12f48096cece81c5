#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <vector>

#include <doctest.h>

#include "momask/errors.hpp"
#include "momask/metrics.hpp"
#include "momask/motion.hpp"
#include "momask/rng.hpp"

using namespace momask;
namespace fs = std::filesystem;

namespace {

MotionSequence make_motion(size_t frames, size_t dims, double fps = 20.0) {
    MotionSequence seq;
    seq.frames = Matrix(frames, dims);
    seq.fps = fps;
    seq.layout = default_layout(dims);
    return seq;
}

Matrix gaussian_features(size_t n, size_t d, double mean, double sd, uint64_t seed) {
    Rng rng(seed);
    Matrix m(n, d);
    for (auto& v : m.data) v = mean + sd * rng.normal();
    return m;
}

} // namespace

TEST_SUITE("metrics") {

TEST_CASE("mpjpe: zero for identical sequences, plain distances otherwise") {
    MotionSequence gt = make_motion(3, 6);
    for (size_t t = 0; t < 3; ++t)
        for (size_t c = 0; c < 6; ++c) gt.frames(t, c) = static_cast<double>(t + c);

    CHECK(mpjpe(gt, gt) == 0.0);

    // offset every joint by (10, 0, 0) millimeters
    MotionSequence pred = gt;
    for (size_t t = 0; t < 3; ++t)
        for (size_t j = 0; j < 2; ++j) pred.frames(t, 3 * j) += 10.0;
    CHECK(mpjpe(pred, gt) == doctest::Approx(10.0).epsilon(1e-12));

    // one frame, two joints: errors (3,4,0) and (0,0,0) average to 2.5
    MotionSequence a = make_motion(1, 6), b = make_motion(1, 6);
    a.frames(0, 0) = 3.0;
    a.frames(0, 1) = 4.0;
    CHECK(mpjpe(a, b) == doctest::Approx(2.5).epsilon(1e-12));
}

TEST_CASE("mpjpe validation") {
    MotionSequence a = make_motion(2, 6), b = make_motion(3, 6);
    CHECK_THROWS_AS(mpjpe(a, b), std::invalid_argument);

    MotionSequence c = make_motion(2, 6);
    c.layout.lateral_axis = 1;
    CHECK_THROWS_AS(mpjpe(a, c), std::invalid_argument);

    MotionSequence d = make_motion(2, 4), e = make_motion(2, 4); // 4 dims: no joints
    CHECK_THROWS_AS(mpjpe(d, e), DataError);
}

TEST_CASE("jerk: constant motion has zero jerk") {
    MotionSequence seq = make_motion(10, 6);
    for (auto& v : seq.frames.data) v = 3.25;
    JerkSeries js = jerk(seq);
    CHECK(js.frames() == 7);
    CHECK(js.joints() == 2);
    for (double v : js.magnitudes.data) CHECK(v == 0.0);
}

TEST_CASE("jerk: quadratic motion has exactly zero third difference") {
    MotionSequence seq = make_motion(12, 3, 1.0);
    for (size_t t = 0; t < 12; ++t) {
        double q = static_cast<double>(t * t);
        seq.frames(t, 0) = q;
        seq.frames(t, 1) = 2.0 * q;
        seq.frames(t, 2) = 0.5 * q;
    }
    JerkSeries js = jerk(seq);
    for (double v : js.magnitudes.data) CHECK(v == 0.0);
}

TEST_CASE("jerk: cubic t^3 at unit fps is exactly 6 on the moving axis") {
    MotionSequence seq = make_motion(9, 3, 1.0);
    for (size_t t = 0; t < 9; ++t)
        seq.frames(t, 0) = static_cast<double>(t * t * t); // y and z stay 0
    JerkSeries js = jerk(seq);
    REQUIRE(js.frames() == 6);
    for (size_t t = 0; t < 6; ++t) CHECK(js.magnitudes(t, 0) == 6.0);
}

TEST_CASE("jerk: synthetic cubic joints scale with their coefficients") {
    MotionSequence seq = synth_motion(SynthKind::Cubic, 10, 0, 12);
    JerkSeries js = jerk(seq);
    REQUIRE(js.joints() == 4);
    for (size_t j = 0; j < 4; ++j) {
        double a = 1.0 + 0.5 * static_cast<double>(j);
        // all three coordinates move as a*t^3: norm is sqrt(3)*6a
        double want = std::sqrt(108.0 * a * a);
        for (size_t t = 0; t < js.frames(); ++t) CHECK(js.magnitudes(t, j) == want);
    }
}

TEST_CASE("jerk: fps cubes into the magnitude") {
    MotionSequence one = make_motion(8, 3, 1.0);
    MotionSequence two = make_motion(8, 3, 2.0);
    Rng rng(6);
    for (size_t i = 0; i < one.frames.data.size(); ++i)
        one.frames.data[i] = two.frames.data[i] = rng.normal();
    JerkSeries ja = jerk(one), jb = jerk(two);
    for (size_t i = 0; i < ja.magnitudes.data.size(); ++i)
        CHECK(jb.magnitudes.data[i] == doctest::Approx(8.0 * ja.magnitudes.data[i]).epsilon(1e-12));
}

TEST_CASE("jerk validation") {
    MotionSequence short_seq = make_motion(3, 6);
    CHECK_THROWS_AS(jerk(short_seq), DataError);
    MotionSequence no_joints = make_motion(8, 4);
    CHECK_THROWS_AS(jerk(no_joints), DataError);
}

TEST_CASE("sjpe closed forms") {
    JerkSeries gt, pred;
    gt.magnitudes = Matrix(4, 2, 1.0);
    pred.magnitudes = Matrix(4, 2, 1.0);

    SjpeReport same = sjpe(pred, gt);
    CHECK(same.total == 0.0);
    CHECK(same.noise == 0.0);
    CHECK(same.static_part == 0.0);

    // pred = 2 * gt: every term |2-1|/3, all of it over-estimation
    for (auto& v : pred.magnitudes.data) v = 2.0;
    SjpeReport over = sjpe(pred, gt);
    CHECK(over.total == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(over.noise == doctest::Approx(1.0 / 3.0).epsilon(1e-12));
    CHECK(over.static_part == 0.0);

    // pred = 0: every term 1, all of it under-estimation
    for (auto& v : pred.magnitudes.data) v = 0.0;
    SjpeReport under = sjpe(pred, gt);
    CHECK(under.total == 1.0);
    CHECK(under.noise == 0.0);
    CHECK(under.static_part == 1.0);

    // both zero contributes nothing
    JerkSeries za, zb;
    za.magnitudes = Matrix(2, 1, 0.0);
    zb.magnitudes = Matrix(2, 1, 0.0);
    SjpeReport zero = sjpe(za, zb);
    CHECK(zero.total == 0.0);
}

TEST_CASE("sjpe decomposition is exact and swaps cleanly") {
    Rng rng(12);
    JerkSeries a, b;
    a.magnitudes = Matrix(100, 100);
    b.magnitudes = Matrix(100, 100);
    for (size_t i = 0; i < a.magnitudes.data.size(); ++i) {
        a.magnitudes.data[i] = std::abs(rng.normal());
        b.magnitudes.data[i] = rng.uniform() < 0.1 ? 0.0 : std::abs(rng.normal());
    }
    SjpeReport ab = sjpe(a, b);
    CHECK(ab.total == ab.noise + ab.static_part); // bitwise, by construction

    SjpeReport ba = sjpe(b, a);
    CHECK(ab.total == ba.total);
    CHECK(ab.noise == ba.static_part);
    CHECK(ab.static_part == ba.noise);

    JerkSeries wrong;
    wrong.magnitudes = Matrix(3, 3);
    CHECK_THROWS_AS(sjpe(a, wrong), std::invalid_argument);
}

TEST_CASE("fid of a set against itself is numerically zero") {
    Matrix feats = gaussian_features(200, 6, 0.0, 1.0, 5);
    double v = fid(feats, feats);
    CHECK(std::abs(v) < 1e-6);
}

TEST_CASE("fid is symmetric") {
    Matrix a = gaussian_features(150, 5, 0.0, 1.0, 7);
    Matrix b = gaussian_features(180, 5, 0.5, 1.3, 8);
    CHECK(std::abs(fid(a, b) - fid(b, a)) < 1e-9);
    CHECK(fid(a, b) > 0.0);
}

TEST_CASE("fid closed form for diagonal covariances") {
    // equal means, Sa = diag(1,4), Sb = diag(4,1):
    // tr(Sa) + tr(Sb) - 2 tr(sqrt(Sa Sb)) = 5 + 5 - 2*(2+2) = 2
    std::vector<double> mu{0.0, 0.0};
    Matrix cov_a(2, 2), cov_b(2, 2);
    cov_a(0, 0) = 1.0;
    cov_a(1, 1) = 4.0;
    cov_b(0, 0) = 4.0;
    cov_b(1, 1) = 1.0;
    CHECK(fid_from_stats(mu, cov_a, mu, cov_b) == doctest::Approx(2.0).epsilon(1e-9));

    // mean displacement adds its squared norm
    std::vector<double> mu2{3.0, 4.0};
    CHECK(fid_from_stats(mu, cov_a, mu2, cov_a) == doctest::Approx(25.0).epsilon(1e-9));
}

TEST_CASE("fid between unit gaussians one mean apart lands near 1") {
    Matrix a = gaussian_features(10000, 1, 0.0, 1.0, 21);
    Matrix b = gaussian_features(10000, 1, 1.0, 1.0, 22);
    CHECK(fid(a, b) == doctest::Approx(1.0).epsilon(0.02));
}

TEST_CASE("feature stats use ddof 1 and ridge tiny sets") {
    Matrix feats(3, 1);
    feats(0, 0) = 1.0;
    feats(1, 0) = 2.0;
    feats(2, 0) = 3.0;
    std::vector<double> mu;
    Matrix cov;
    feature_stats(feats, mu, cov);
    CHECK(mu[0] == 2.0);
    CHECK(cov(0, 0) == doctest::Approx(1.0).epsilon(1e-12)); // sample variance, n-1

    Matrix tiny(1, 2, 1.0); // rows < F+1: ridge keeps the covariance usable
    feature_stats(tiny, mu, cov);
    CHECK(cov(0, 0) == doctest::Approx(1e-6).epsilon(1e-9));
    CHECK(cov(0, 1) == 0.0);
}

TEST_CASE("retrieval: exact matches rank first every time") {
    Matrix feats = gaussian_features(64, 4, 0.0, 1.0, 31);
    RetrievalResult res = retrieval_metrics(feats, feats, 32, 3);
    CHECK(res.r_precision_1 == 1.0);
    CHECK(res.r_precision_2 == 1.0);
    CHECK(res.r_precision_3 == 1.0);
    CHECK(res.mm_dist == 0.0);
}

TEST_CASE("retrieval: unrelated features match at chance") {
    const size_t n = 10000;
    Matrix cond = gaussian_features(n, 4, 0.0, 1.0, 41);
    Matrix motion = gaussian_features(n, 4, 0.0, 1.0, 42);
    RetrievalResult res = retrieval_metrics(cond, motion, 32, 7);
    double sigma1 = std::sqrt((1.0 / 32) * (31.0 / 32) / n);
    CHECK(std::abs(res.r_precision_1 - 1.0 / 32) < 3 * sigma1);
    double sigma3 = std::sqrt((3.0 / 32) * (29.0 / 32) / n);
    CHECK(std::abs(res.r_precision_3 - 3.0 / 32) < 3 * sigma3);
    CHECK(res.r_precision_1 <= res.r_precision_2);
    CHECK(res.r_precision_2 <= res.r_precision_3);
    CHECK(res.mm_dist > 0.0);
}

TEST_CASE("retrieval validation") {
    Matrix a = gaussian_features(10, 3, 0.0, 1.0, 1);
    Matrix b = gaussian_features(11, 3, 0.0, 1.0, 2);
    CHECK_THROWS_AS(retrieval_metrics(a, b, 4, 0), std::invalid_argument);
    CHECK_THROWS_AS(retrieval_metrics(a, a, 1, 0), std::invalid_argument);
    CHECK_THROWS_AS(retrieval_metrics(a, a, 11, 0), std::invalid_argument);
}

TEST_CASE("multimodality: identical generations collapse to zero") {
    Matrix rows(6, 3, 2.5);
    CHECK(multimodality({rows, rows}, 3, 9) == 0.0);
}

TEST_CASE("multimodality: equidistant fixtures return the common distance") {
    // 2r rows of d/sqrt(2) * e_i: every pairwise distance is exactly d
    const size_t r = 2;
    const double d = 5.0;
    Matrix rows(2 * r, 2 * r, 0.0);
    for (size_t i = 0; i < 2 * r; ++i) rows(i, i) = d / std::sqrt(2.0);

    double v = multimodality({rows, rows}, r, 123);
    CHECK(v == doctest::Approx(d).epsilon(1e-12));

    // doubling the spread doubles the metric
    for (auto& x : rows.data) x *= 2.0;
    CHECK(multimodality({rows}, r, 123) == doctest::Approx(2.0 * d).epsilon(1e-12));
}

TEST_CASE("multimodality validation") {
    Matrix rows(4, 2, 0.0);
    CHECK_THROWS_AS(multimodality({rows}, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(multimodality({}, 1, 1), std::invalid_argument);
    CHECK_THROWS_AS(multimodality({rows}, 3, 1), std::invalid_argument); // needs 6 rows
}

TEST_CASE("default features: constant motion reduces to its mean") {
    MotionSequence seq = make_motion(20, 6);
    for (auto& v : seq.frames.data) v = 5.0;
    std::vector<double> f = default_features(seq);
    REQUIRE(f.size() == 24); // 4 blocks of min(6,16) groups
    for (size_t g = 0; g < 6; ++g) {
        CHECK(f[g] == 5.0);       // means
        CHECK(f[6 + g] == 0.0);   // stds
        CHECK(f[12 + g] == 0.0);  // velocities
        CHECK(f[18 + g] == 0.0);  // jerks
    }
}

TEST_CASE("default features: dimension pooling is round robin and capped at 16") {
    MotionSequence wide = make_motion(8, 40);
    std::vector<double> f = default_features(wide);
    CHECK(f.size() == 64);

    // dims d, d+16, d+32 share a group: loading them equally moves one mean slot
    MotionSequence probe = make_motion(8, 40);
    for (size_t t = 0; t < 8; ++t) {
        probe.frames(t, 3) = 12.0;
        probe.frames(t, 19) = 12.0;
        probe.frames(t, 35) = 12.0;
    }
    std::vector<double> g = default_features(probe);
    CHECK(g[3] == doctest::Approx(12.0).epsilon(1e-12)); // group 3 mean: all members = 12
    for (size_t k = 0; k < 16; ++k)
        if (k != 3) CHECK(g[k] == 0.0);
}

TEST_CASE("default features: deterministic and length-sensitive") {
    MotionSequence seq = synth_motion(SynthKind::RandomSmooth, 40, 4, 10);
    auto a = default_features(seq);
    auto b = default_features(seq);
    CHECK(a == b);

    MotionSequence tiny = make_motion(3, 6);
    CHECK_THROWS_AS(default_features(tiny), DataError);
}

TEST_CASE("report JSON exposes exactly the metrics that were set") {
    MetricReport rep;
    rep.mpjpe_mm = 12.5;
    rep.fid = -1e-12; // raw FID may dip below zero; the report clamps
    SjpeReport s;
    s.noise = 0.25;
    s.static_part = 0.05;
    s.total = 0.30;
    rep.sjpe = s;

    std::string text = rep.to_json();
    CHECK(text.find("\"extractor\": \"desc_v1\"") != std::string::npos);
    CHECK(text.find("\"mpjpe_mm\": 12.5") != std::string::npos);
    CHECK(text.find("\"fid\": 0.0") != std::string::npos);
    CHECK(text.find("\"sjpe_total\": 0.3") != std::string::npos);
    CHECK(text.find("\"sjpe_noise\": 0.25") != std::string::npos);
    CHECK(text.find("\"sjpe_static\": 0.05") != std::string::npos);
    CHECK(text.find("r_precision_1") == std::string::npos);
    CHECK(text.find("multimodality") == std::string::npos);

    rep.retrieval = RetrievalResult{1.0, 1.0, 1.0, 0.0};
    rep.multimodality = 2.5;
    rep.codebook_perplexity = 9.0;
    std::string full = rep.to_json();
    CHECK(full.find("\"r_precision_1\": 1.0") != std::string::npos);
    CHECK(full.find("\"mm_dist\": 0.0") != std::string::npos);
    CHECK(full.find("\"multimodality\": 2.5") != std::string::npos);
    CHECK(full.find("\"codebook_perplexity\": 9.0") != std::string::npos);
}

TEST_CASE("jerk CSV golden output") {
    JerkSeries gt, pred;
    gt.magnitudes = Matrix(2, 2);
    pred.magnitudes = Matrix(2, 2);
    gt.magnitudes(0, 0) = 1.0;
    gt.magnitudes(0, 1) = 3.0;
    pred.magnitudes(0, 0) = 3.0;
    pred.magnitudes(0, 1) = 1.0;
    // row 1: gt (2,2) vs pred (1,1): terms 1/3 each, pred mean below gt
    gt.magnitudes(1, 0) = 2.0;
    gt.magnitudes(1, 1) = 2.0;
    pred.magnitudes(1, 0) = 1.0;
    pred.magnitudes(1, 1) = 1.0;

    fs::path path = fs::temp_directory_path() / "momask_jerk_golden.csv";
    write_jerk_csv(path, pred, gt);
    std::ifstream is(path);
    std::stringstream buf;
    buf << is.rdbuf();
    std::string want =
        "frame,gt_jerk,pred_jerk,term,sign\n"
        "0,2,2,0.5,0\n"
        "1,2,1,0.333333,-1\n";
    CHECK(buf.str() == want);
    fs::remove(path);

    JerkSeries wrong;
    wrong.magnitudes = Matrix(1, 2);
    CHECK_THROWS_AS(write_jerk_csv(path, pred, wrong), std::invalid_argument);
}

} // TEST_SUITE
