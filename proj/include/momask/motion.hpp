#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "momask/matrix.hpp"

namespace momask {

// Skeleton description for a frame layout. position_offsets[j] is the index
// of joint j's (x,y,z) triple inside a frame; frames may carry extra feature
// dims that no joint owns. lateral_axis is required for mirroring only.
struct JointLayout {
    size_t total_dims = 0;
    size_t joint_count = 0;
    std::vector<size_t> position_offsets;
    std::vector<std::pair<size_t, size_t>> mirror_pairs;
    std::optional<int> lateral_axis; // 0=x, 1=y, 2=z

    void validate() const;
    std::string to_json() const;
    static JointLayout from_json(const std::string& text);

    bool operator==(const JointLayout&) const = default;
};

struct MotionSequence {
    Matrix frames; // T x D
    double fps = 0.0;
    JointLayout layout;

    size_t length() const { return frames.rows; }
    size_t dims() const { return frames.cols; }
    void validate() const;
};

// Downsampled view produced by the temporal patcher: n = ceil(T/stride) rows
// of d = stride*D stacked frames.
struct LatentSequence {
    Matrix codes; // n x d
    size_t stride = 1;

    size_t length() const { return codes.rows; }
    size_t dim() const { return codes.cols; }
};

struct DatasetSplit {
    std::vector<std::string> train, val, test;
    std::array<double, 3> ratios{};
};

// Binary motion file: magic "MOT1", LE u32 T, u32 D, f32 fps, u16 layout JSON
// length, layout JSON, then T*D LE f32 row-major. ".csv" files use the
// authoring import: header line "fps=<real>", then rows of D decimals.
MotionSequence load_motion(const std::filesystem::path& path);
void save_motion(const MotionSequence& seq, const std::filesystem::path& path);
MotionSequence import_csv(const std::filesystem::path& path);

// Swaps mirror-paired joint triples and negates the lateral coordinate of
// every joint. Requires layout.lateral_axis.
MotionSequence mirror(const MotionSequence& seq);

// Deterministic shuffle + partition. val/test get floor(ratio*n) (exact
// rational rounding), train absorbs the remainder.
DatasetSplit split_dataset(const std::vector<std::string>& ids,
                           const std::array<double, 3>& ratios, uint64_t seed);

enum class SynthKind { SineWalk, RandomSmooth, Cubic, Constant };
SynthKind parse_synth_kind(const std::string& name);

// Desk-scale clip generators. random_smooth accepts any dims >= 1; the
// positional kinds need dims divisible by 3. cubic uses fps=1 and per-joint
// coefficient a_j = 1 + 0.5*j so joint 0 is exactly t^3.
MotionSequence synth_motion(SynthKind kind, size_t length, uint64_t seed, size_t dims = 12);

LatentSequence patch(const MotionSequence& seq, size_t stride);
MotionSequence unpatch(const LatentSequence& lat, size_t frame_count,
                       const JointLayout& layout, double fps);

// Positional layout over D dims: D/3 joints when D % 3 == 0 (pairs
// (1,2),(3,4),... mirrored across x), otherwise a joint-less feature layout.
JointLayout default_layout(size_t dims);

} // namespace momask
