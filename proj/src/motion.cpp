#include "momask/motion.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include <json.hpp>

#include "momask/errors.hpp"
#include "momask/rng.hpp"

namespace momask {

using nlohmann::json;

namespace {

constexpr char kMagic[4] = {'M', 'O', 'T', '1'};
constexpr double kPi = 3.14159265358979323846;

template <typename T>
void write_le(std::ostream& os, T v) {
    static_assert(std::is_trivially_copyable_v<T>);
    unsigned char buf[sizeof(T)];
    std::memcpy(buf, &v, sizeof(T));
    os.write(reinterpret_cast<const char*>(buf), sizeof(T));
}

template <typename T>
T read_le(std::istream& is, const char* what) {
    unsigned char buf[sizeof(T)];
    is.read(reinterpret_cast<char*>(buf), sizeof(T));
    if (is.gcount() != static_cast<std::streamsize>(sizeof(T)))
        throw FormatError(std::string("truncated payload while reading ") + what);
    T v;
    std::memcpy(&v, buf, sizeof(T));
    return v;
}

} // namespace

void JointLayout::validate() const {
    if (position_offsets.size() != joint_count)
        throw DataError("layout: position_offsets size does not match joint_count");
    std::set<size_t> used;
    for (size_t off : position_offsets) {
        if (off + 3 > total_dims)
            throw DataError("layout: joint offset out of range");
        for (size_t k = 0; k < 3; ++k)
            if (!used.insert(off + k).second)
                throw DataError("layout: overlapping joint offsets");
    }
    std::set<size_t> paired;
    for (auto [l, r] : mirror_pairs) {
        if (l >= joint_count || r >= joint_count || l == r)
            throw DataError("layout: invalid mirror pair");
        if (!paired.insert(l).second || !paired.insert(r).second)
            throw DataError("layout: joint appears in more than one mirror pair");
    }
    if (lateral_axis && (*lateral_axis < 0 || *lateral_axis > 2))
        throw DataError("layout: lateral_axis must be x, y or z");
}

std::string JointLayout::to_json() const {
    json j;
    j["total_dims"] = total_dims;
    j["joint_count"] = joint_count;
    j["position_offsets"] = position_offsets;
    json pairs = json::array();
    for (auto [l, r] : mirror_pairs) pairs.push_back({l, r});
    j["mirror_pairs"] = pairs;
    if (lateral_axis) j["lateral_axis"] = std::string(1, "xyz"[*lateral_axis]);
    return j.dump();
}

JointLayout JointLayout::from_json(const std::string& text) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw FormatError(std::string("layout JSON: ") + e.what());
    }
    JointLayout lay;
    try {
        lay.total_dims = j.at("total_dims").get<size_t>();
        lay.joint_count = j.at("joint_count").get<size_t>();
        lay.position_offsets = j.at("position_offsets").get<std::vector<size_t>>();
        for (const auto& p : j.at("mirror_pairs"))
            lay.mirror_pairs.emplace_back(p.at(0).get<size_t>(), p.at(1).get<size_t>());
        if (j.contains("lateral_axis")) {
            std::string a = j["lateral_axis"].get<std::string>();
            if (a != "x" && a != "y" && a != "z")
                throw FormatError("layout: lateral_axis must be x, y or z");
            lay.lateral_axis = static_cast<int>(a[0] - 'x');
        }
    } catch (const json::exception& e) {
        throw FormatError(std::string("layout JSON: ") + e.what());
    }
    lay.validate();
    return lay;
}

void MotionSequence::validate() const {
    if (frames.rows < 1 || frames.cols < 1)
        throw DataError("motion: frames must be at least 1x1");
    if (!frames.all_finite())
        throw DataError("motion: non-finite value");
    if (!(fps > 0.0))
        throw DataError("motion: fps must be positive");
    layout.validate();
    if (layout.total_dims != frames.cols)
        throw DataError("motion: dimension mismatch between frames and layout");
}

void save_motion(const MotionSequence& seq, const std::filesystem::path& path) {
    seq.validate();
    std::ofstream os(path, std::ios::binary);
    if (!os) throw DataError("cannot open for writing: " + path.string());
    os.write(kMagic, 4);
    write_le<uint32_t>(os, static_cast<uint32_t>(seq.frames.rows));
    write_le<uint32_t>(os, static_cast<uint32_t>(seq.frames.cols));
    write_le<float>(os, static_cast<float>(seq.fps));
    std::string lay = seq.layout.to_json();
    if (lay.size() > 0xFFFF) throw DataError("layout JSON exceeds 64 KiB");
    write_le<uint16_t>(os, static_cast<uint16_t>(lay.size()));
    os.write(lay.data(), static_cast<std::streamsize>(lay.size()));
    for (double v : seq.frames.data) write_le<float>(os, static_cast<float>(v));
    if (!os) throw DataError("write failed: " + path.string());
}

namespace {

MotionSequence load_binary(const std::filesystem::path& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw DataError("cannot open: " + path.string());
    char magic[4];
    is.read(magic, 4);
    if (is.gcount() != 4 || std::memcmp(magic, kMagic, 4) != 0)
        throw FormatError("bad magic in " + path.string());
    auto t = read_le<uint32_t>(is, "frame count");
    auto d = read_le<uint32_t>(is, "frame dims");
    auto fps = read_le<float>(is, "fps");
    auto lay_len = read_le<uint16_t>(is, "layout length");
    std::string lay_text(lay_len, '\0');
    is.read(lay_text.data(), lay_len);
    if (is.gcount() != static_cast<std::streamsize>(lay_len))
        throw FormatError("truncated layout in " + path.string());

    MotionSequence seq;
    seq.fps = fps;
    seq.layout = JointLayout::from_json(lay_text);
    if (seq.layout.total_dims != d)
        throw FormatError("dimension mismatch with declared header in " + path.string());
    seq.frames = Matrix(t, d);
    for (size_t i = 0; i < seq.frames.data.size(); ++i)
        seq.frames.data[i] = read_le<float>(is, "frame payload");
    seq.validate();
    return seq;
}

} // namespace

MotionSequence import_csv(const std::filesystem::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open: " + path.string());
    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty CSV: " + path.string());
    if (line.rfind("fps=", 0) != 0)
        throw FormatError("CSV header must be fps=<real>: " + path.string());
    double fps = 0.0;
    try {
        fps = std::stod(line.substr(4));
    } catch (const std::exception&) {
        throw FormatError("bad fps value in " + path.string());
    }

    std::vector<std::vector<double>> rows;
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            try {
                row.push_back(std::stod(cell));
            } catch (const std::exception&) {
                throw FormatError("bad decimal '" + cell + "' in " + path.string());
            }
        if (!rows.empty() && row.size() != rows.front().size())
            throw FormatError("ragged CSV row in " + path.string());
        rows.push_back(std::move(row));
    }
    if (rows.empty()) throw FormatError("CSV has no data rows: " + path.string());

    MotionSequence seq;
    seq.fps = fps;
    seq.frames = Matrix(rows.size(), rows.front().size());
    for (size_t r = 0; r < rows.size(); ++r)
        for (size_t c = 0; c < rows[r].size(); ++c) seq.frames(r, c) = rows[r][c];
    seq.layout = default_layout(seq.frames.cols);
    seq.validate();
    return seq;
}

MotionSequence load_motion(const std::filesystem::path& path) {
    if (path.extension() == ".csv") return import_csv(path);
    return load_binary(path);
}

MotionSequence mirror(const MotionSequence& seq) {
    seq.validate();
    if (!seq.layout.lateral_axis)
        throw DataError("mirror: layout without mirror metadata");
    const int axis = *seq.layout.lateral_axis;
    MotionSequence out = seq;
    for (size_t t = 0; t < seq.frames.rows; ++t) {
        auto row = out.frames.row(t);
        for (auto [l, r] : seq.layout.mirror_pairs) {
            size_t lo = seq.layout.position_offsets[l];
            size_t ro = seq.layout.position_offsets[r];
            for (size_t k = 0; k < 3; ++k) std::swap(row[lo + k], row[ro + k]);
        }
        for (size_t off : seq.layout.position_offsets)
            row[off + axis] = -row[off + axis];
    }
    return out;
}

DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::array<double, 3>& ratios, uint64_t seed) {
    for (double r : ratios)
        if (r < 0.0) throw std::invalid_argument("split_dataset: negative ratio");
    double sum = ratios[0] + ratios[1] + ratios[2];
    if (std::abs(sum - 1.0) > 1e-9)
        throw std::invalid_argument("split_dataset: ratios must sum to 1");

    const size_t n = ids.size();
    // epsilon compensates for decimal ratios that are not exactly
    // representable (floor(0.15 * 20) must be 3, not 2)
    auto sized = [n](double r) { return static_cast<size_t>(std::floor(r * static_cast<double>(n) + 1e-9)); };
    size_t n_train = sized(ratios[0]);
    size_t n_val = sized(ratios[1]);
    size_t n_test = sized(ratios[2]);
    n_train += n - (n_train + n_val + n_test); // remainder -> train

    std::vector<std::string> shuffled = ids;
    Rng rng(seed);
    rng.shuffle(shuffled);

    DatasetSplit split;
    split.ratios = ratios;
    split.train.assign(shuffled.begin(), shuffled.begin() + static_cast<long>(n_train));
    split.val.assign(shuffled.begin() + static_cast<long>(n_train),
                     shuffled.begin() + static_cast<long>(n_train + n_val));
    split.test.assign(shuffled.begin() + static_cast<long>(n_train + n_val), shuffled.end());
    return split;
}

SynthKind parse_synth_kind(const std::string& name) {
    if (name == "sine_walk") return SynthKind::SineWalk;
    if (name == "random_smooth") return SynthKind::RandomSmooth;
    if (name == "cubic") return SynthKind::Cubic;
    if (name == "constant") return SynthKind::Constant;
    throw std::invalid_argument("unknown synth kind: " + name);
}

JointLayout default_layout(size_t dims) {
    JointLayout lay;
    lay.total_dims = dims;
    if (dims % 3 == 0) {
        lay.joint_count = dims / 3;
        for (size_t j = 0; j < lay.joint_count; ++j) lay.position_offsets.push_back(3 * j);
        for (size_t j = 1; j + 1 < lay.joint_count; j += 2) lay.mirror_pairs.emplace_back(j, j + 1);
        lay.lateral_axis = 0;
    }
    return lay;
}

MotionSequence synth_motion(SynthKind kind, size_t length, uint64_t seed, size_t dims) {
    if (length < 4) throw std::invalid_argument("synth_motion: length must be >= 4");
    if (dims < 1) throw std::invalid_argument("synth_motion: dims must be >= 1");
    if (kind != SynthKind::RandomSmooth && dims % 3 != 0)
        throw std::invalid_argument("synth_motion: positional kinds need dims divisible by 3");

    MotionSequence seq;
    seq.layout = default_layout(dims);
    seq.frames = Matrix(length, dims);
    seq.fps = (kind == SynthKind::Cubic) ? 1.0 : 20.0;
    Rng rng(seed);

    switch (kind) {
    case SynthKind::Constant: {
        std::vector<double> vals(dims);
        for (auto& v : vals) v = rng.uniform(-1.0, 1.0);
        for (size_t t = 0; t < length; ++t)
            for (size_t d = 0; d < dims; ++d) seq.frames(t, d) = vals[d];
        break;
    }
    case SynthKind::Cubic: {
        const size_t joints = dims / 3;
        for (size_t t = 0; t < length; ++t) {
            double t3 = static_cast<double>(t) * static_cast<double>(t) * static_cast<double>(t);
            for (size_t j = 0; j < joints; ++j) {
                double a = 1.0 + 0.5 * static_cast<double>(j);
                for (size_t k = 0; k < 3; ++k) seq.frames(t, 3 * j + k) = a * t3;
            }
        }
        break;
    }
    case SynthKind::SineWalk: {
        const size_t joints = dims / 3;
        std::vector<double> freq(joints), amp(dims), phase(dims), base(dims);
        for (auto& f : freq) f = rng.uniform(0.5, 2.0);
        for (auto& a : amp) a = rng.uniform(0.1, 0.5);
        for (auto& p : phase) p = rng.uniform(0.0, 2.0 * kPi);
        for (auto& b : base) b = rng.uniform(-1.0, 1.0);
        for (size_t t = 0; t < length; ++t) {
            double sec = static_cast<double>(t) / seq.fps;
            for (size_t j = 0; j < joints; ++j)
                for (size_t k = 0; k < 3; ++k) {
                    size_t d = 3 * j + k;
                    // forward drift on z so it walks
                    double drift = (k == 2) ? 0.8 * sec : 0.0;
                    seq.frames(t, d) = base[d] + drift + amp[d] * std::sin(2.0 * kPi * freq[j] * sec + phase[d]);
                }
        }
        break;
    }
    case SynthKind::RandomSmooth: {
        constexpr int kWaves = 3;
        std::vector<double> freq(dims * kWaves), amp(dims * kWaves), phase(dims * kWaves);
        for (auto& f : freq) f = rng.uniform(0.1, 1.0);
        for (auto& a : amp) a = rng.uniform(0.2, 1.0);
        for (auto& p : phase) p = rng.uniform(0.0, 2.0 * kPi);
        for (size_t t = 0; t < length; ++t) {
            double sec = static_cast<double>(t) / seq.fps;
            for (size_t d = 0; d < dims; ++d) {
                double v = 0.0;
                for (int w = 0; w < kWaves; ++w) {
                    size_t i = d * kWaves + static_cast<size_t>(w);
                    v += amp[i] * std::sin(2.0 * kPi * freq[i] * sec + phase[i]);
                }
                seq.frames(t, d) = v;
            }
        }
        break;
    }
    }
    return seq;
}

LatentSequence patch(const MotionSequence& seq, size_t stride) {
    if (stride < 1) throw std::invalid_argument("patch: stride must be >= 1");
    const size_t t_len = seq.frames.rows, d = seq.frames.cols;
    const size_t n = (t_len + stride - 1) / stride;
    LatentSequence lat;
    lat.stride = stride;
    lat.codes = Matrix(n, stride * d); // tail window zero-padded
    for (size_t w = 0; w < n; ++w)
        for (size_t s = 0; s < stride; ++s) {
            size_t t = w * stride + s;
            if (t >= t_len) break;
            for (size_t c = 0; c < d; ++c) lat.codes(w, s * d + c) = seq.frames(t, c);
        }
    return lat;
}

MotionSequence unpatch(const LatentSequence& lat, size_t frame_count,
                       const JointLayout& layout, double fps) {
    const size_t d = layout.total_dims;
    if (lat.codes.cols != lat.stride * d)
        throw DataError("unpatch: dimension mismatch (codes.cols != stride * D)");
    if (frame_count > lat.codes.rows * lat.stride)
        throw DataError("unpatch: frame_count exceeds latent coverage");
    MotionSequence seq;
    seq.fps = fps;
    seq.layout = layout;
    seq.frames = Matrix(frame_count, d);
    for (size_t t = 0; t < frame_count; ++t) {
        size_t w = t / lat.stride, s = t % lat.stride;
        for (size_t c = 0; c < d; ++c) seq.frames(t, c) = lat.codes(w, s * d + c);
    }
    return seq;
}

} // namespace momask
