#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "momask/config.hpp"
#include "momask/errors.hpp"
#include "momask/log.hpp"
#include "momask/manifest.hpp"
#include "momask/masked_gen.hpp"
#include "momask/metrics.hpp"
#include "momask/motion.hpp"
#include "momask/parallel.hpp"
#include "momask/predictor.hpp"
#include "momask/residual_gen.hpp"
#include "momask/rvq.hpp"

namespace fs = std::filesystem;
using namespace momask;
using nlohmann::json;

namespace {

std::string read_text(const fs::path& path) {
    std::ifstream is(path);
    if (!is) throw DataError("cannot open: " + path.string());
    std::ostringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

std::vector<fs::path> list_files(const fs::path& dir, const std::string& what) {
    if (!fs::is_directory(dir)) throw DataError(what + " is not a directory: " + dir.string());
    std::vector<fs::path> files;
    for (const auto& entry : fs::directory_iterator(dir))
        if (entry.is_regular_file()) files.push_back(entry.path());
    std::sort(files.begin(), files.end());
    if (files.empty()) throw DataError("no files in " + dir.string());
    return files;
}

MotionSequence load_motion_named(const fs::path& path) {
    try {
        return load_motion(path);
    } catch (const DataError& e) {
        std::string msg = e.what();
        if (msg.find(path.filename().string()) == std::string::npos)
            throw DataError(path.string() + ": " + msg);
        throw;
    }
}

// Token grid plus the framing needed to turn it back into motion.
struct TokenFile {
    TokenGrid grid;
    size_t frame_count = 0;
    double fps = 0.0;
    size_t stride = 1;
    JointLayout layout;
};

void write_token_file(const fs::path& path, const TokenFile& tf) {
    json j = json::parse(tf.grid.to_json());
    j["frame_count"] = tf.frame_count;
    j["fps"] = tf.fps;
    j["stride"] = tf.stride;
    j["layout"] = json::parse(tf.layout.to_json());
    atomic_write_text(path, j.dump(2) + "\n");
}

TokenFile load_token_file(const fs::path& path) {
    std::string text = read_text(path);
    TokenFile tf;
    try {
        json j = json::parse(text);
        tf.grid = TokenGrid::from_json(text);
        tf.frame_count = j.at("frame_count").get<size_t>();
        tf.fps = j.at("fps").get<double>();
        tf.stride = j.at("stride").get<size_t>();
        tf.layout = JointLayout::from_json(j.at("layout").dump());
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return tf;
}

std::map<std::string, int32_t> load_labels(const fs::path& path) {
    std::map<std::string, int32_t> labels;
    try {
        json j = json::parse(read_text(path));
        if (!j.is_object()) throw FormatError("labels file must be a JSON object");
        for (const auto& [name, id] : j.items()) labels[name] = id.get<int32_t>();
    } catch (const json::exception& e) {
        throw FormatError(path.string() + ": " + e.what());
    }
    return labels;
}

std::string clip_stem(const fs::path& path) {
    std::string stem = path.stem().string();
    // tokens files are <clip>.tokens.json; strip the inner suffix too
    if (stem.size() > 7 && stem.ends_with(".tokens")) stem.resize(stem.size() - 7);
    return stem;
}

int cmd_tokenize(const RunConfig& cfg, const fs::path& motion_dir, const fs::path& out,
                 const std::optional<fs::path>& config_path) {
    fs::create_directories(out / "tokens");
    auto files = list_files(motion_dir, "motion input");

    std::vector<LatentSequence> dataset;
    std::vector<MotionSequence> seqs;
    for (const auto& f : files) {
        MotionSequence seq = load_motion_named(f);
        dataset.push_back(patch(seq, static_cast<size_t>(cfg.stride)));
        seqs.push_back(std::move(seq));
    }
    log::info("tokenize: ", files.size(), " clips, stride ", cfg.stride);

    RvqTrainLog train_log;
    CodebookStack stack = train_rvq(dataset, cfg.rvq, cfg.epochs, cfg.seed, &train_log);
    atomic_write_text(out / "stack.json", stack.to_json() + "\n");

    RunManifest manifest;
    manifest.command = "tokenize";
    manifest.seed = cfg.seed;
    manifest.config_json = cfg.to_json();
    for (const auto& f : files) manifest.add_input(f);
    if (config_path) manifest.add_input(*config_path);

    std::vector<fs::path> outputs{out / "stack.json"};
    for (size_t i = 0; i < files.size(); ++i) {
        EncodeResult enc = rvq_encode(stack, dataset[i], stack.layer_count());
        TokenFile tf{enc.grid, seqs[i].length(), seqs[i].fps, static_cast<size_t>(cfg.stride),
                     seqs[i].layout};
        fs::path tok = out / "tokens" / (clip_stem(files[i]) + ".tokens.json");
        write_token_file(tok, tf);
        outputs.push_back(tok);
    }

    {
        std::ostringstream csv;
        csv << "epoch,mse,commit";
        for (size_t v = 0; v < stack.layer_count(); ++v) csv << ",perplexity_" << v;
        csv << "\n";
        for (size_t e = 0; e < train_log.epoch_mse.size(); ++e) {
            csv << e << ',' << train_log.epoch_mse[e] << ',' << train_log.epoch_commit[e];
            for (double p : train_log.epoch_perplexity[e]) csv << ',' << p;
            csv << "\n";
        }
        atomic_write_text(out / "mse_log.csv", csv.str());
        outputs.push_back(out / "mse_log.csv");
    }

    for (const auto& o : outputs) manifest.add_output(o);
    manifest.write(out / "manifest.json");
    log::info("tokenize: final mse ", train_log.epoch_mse.back());
    return 0;
}

int cmd_train_predictor(const RunConfig& cfg, const fs::path& tokens_dir, const fs::path& stack_path,
                        const std::optional<fs::path>& labels_path, const fs::path& out,
                        const std::optional<fs::path>& config_path) {
    fs::create_directories(out);
    CodebookStack stack = CodebookStack::from_json(read_text(stack_path));
    auto files = list_files(tokens_dir, "token input");

    std::map<std::string, int32_t> labels;
    if (labels_path) labels = load_labels(*labels_path);

    std::vector<LabeledRow> base_corpus;
    std::vector<GridExample> grids;
    for (const auto& f : files) {
        TokenFile tf = load_token_file(f);
        if (tf.grid.layers != stack.layer_count())
            throw DataError(f.string() + ": grid depth does not match the codebook stack");
        ConditionRef cond = ConditionRef::null();
        if (auto it = labels.find(clip_stem(f)); it != labels.end())
            cond = ConditionRef::label_id(it->second);
        base_corpus.emplace_back(tf.grid.row(0), cond);
        grids.push_back(GridExample{std::move(tf.grid), cond});
    }

    CountTrainConfig base_cfg;
    base_cfg.alpha = cfg.predictor_alpha;
    base_cfg.uncond_drop = cfg.uncond_drop;
    base_cfg.position_buckets = cfg.position_buckets;
    base_cfg.vocab = static_cast<int>(stack.layers[0].size());

    CountPredictor pred;
    pred.models[0] = train_count_predictor(base_corpus, 0, base_cfg, cfg.seed);

    ResidualTrainConfig res_cfg;
    res_cfg.alpha = cfg.predictor_alpha;
    res_cfg.replace_ratio = cfg.replace_ratio;
    res_cfg.uncond_drop = cfg.uncond_drop;
    res_cfg.position_buckets = cfg.position_buckets;
    for (size_t j = 1; j < stack.layer_count(); ++j)
        pred.models[static_cast<int>(j)] =
            train_residual(grids, stack, static_cast<int>(j), res_cfg, cfg.seed);

    atomic_write_text(out / "predictor.json", pred.to_json() + "\n");

    RunManifest manifest;
    manifest.command = "train-predictor";
    manifest.seed = cfg.seed;
    manifest.config_json = cfg.to_json();
    manifest.add_input(stack_path);
    for (const auto& f : files) manifest.add_input(f);
    if (labels_path) manifest.add_input(*labels_path);
    if (config_path) manifest.add_input(*config_path);
    manifest.add_output(out / "predictor.json");
    manifest.write(out / "manifest.json");
    log::info("train-predictor: ", files.size(), " grids, ", stack.layer_count(), " layers");
    return 0;
}

std::pair<size_t, size_t> parse_region(const std::string& text) {
    auto colon = text.find(':');
    if (colon == std::string::npos) throw ConfigError("--inpaint wants a:b token indices");
    try {
        long a = std::stol(text.substr(0, colon));
        long b = std::stol(text.substr(colon + 1));
        if (a < 0 || b < 0) throw ConfigError("--inpaint indices must be non-negative");
        return {static_cast<size_t>(a), static_cast<size_t>(b)};
    } catch (const std::logic_error&) {
        throw ConfigError("--inpaint wants a:b token indices");
    }
}

int cmd_generate(const RunConfig& cfg, const fs::path& stack_path, const fs::path& predictor_path,
                 const fs::path& out, std::optional<int32_t> condition, std::optional<int> length,
                 const std::optional<std::string>& inpaint_arg,
                 const std::optional<fs::path>& input_path, double fps,
                 const std::optional<fs::path>& config_path) {
    fs::create_directories(out);
    CodebookStack stack = CodebookStack::from_json(read_text(stack_path));
    CountPredictor pred = CountPredictor::from_json(read_text(predictor_path));
    if (pred.models.size() != stack.layer_count())
        throw ModelError("generate: predictor layer count does not match the stack");

    DecodeConfig dc = cfg.decode;
    dc.seed = cfg.seed;
    ConditionRef cond = condition ? ConditionRef::label_id(*condition) : ConditionRef::null();

    std::vector<int32_t> base_row;
    std::vector<size_t> masked_counts;
    size_t base_passes = 0;
    size_t n = 0, frame_count = 0, stride = static_cast<size_t>(cfg.stride);
    double out_fps = fps;
    JointLayout layout;
    std::optional<TokenFile> input;
    std::optional<std::pair<size_t, size_t>> region;

    if (inpaint_arg) {
        if (!input_path) throw ConfigError("--inpaint needs --input tokens");
        input = load_token_file(*input_path);
        if (input->grid.layers != stack.layer_count())
            throw DataError(input_path->string() + ": grid depth does not match the codebook stack");
        region = parse_region(*inpaint_arg);
        n = input->grid.length;
        if (region->second > n || region->first >= region->second)
            throw DataError("inpaint region outside the token sequence");
        frame_count = input->frame_count;
        out_fps = input->fps;
        stride = input->stride;
        layout = input->layout;

        InpaintResult ir = inpaint(pred, input->grid.row(0), {*region}, cond, dc);
        base_row = std::move(ir.tokens);
        masked_counts = std::move(ir.masked_counts);
        base_passes = ir.predictor_passes;
    } else {
        if (!length) throw ConfigError("generate needs --length (frames) unless inpainting");
        if (*length < 1) throw ConfigError("--length must be >= 1");
        frame_count = static_cast<size_t>(*length);
        n = (frame_count + stride - 1) / stride;
        size_t dims = stack.code_dim() / stride;
        if (dims * stride != stack.code_dim())
            throw ModelError("generate: stack code_dim is not divisible by the stride");
        layout = default_layout(dims);

        DecodeResult dr = iterative_decode(pred, n, cond, dc);
        base_row = std::move(dr.tokens);
        masked_counts = std::move(dr.masked_counts);
        base_passes = dr.predictor_passes;
    }

    Rng res_rng(fnv1a64_u64(cfg.seed ^ 0x72657369ULL));
    size_t res_passes = 0;
    // cond-only promises no unconditional influence anywhere, and scale 0
    // cancels the guidance term exactly
    double res_scale = dc.cond_only ? 0.0 : cfg.residual_cfg_scale;
    TokenGrid grid = progressive_decode(pred, stack, base_row, cond, res_scale,
                                        res_rng, false, &res_passes);
    if (region) {
        for (size_t i = 0; i < n; ++i) {
            if (i >= region->first && i < region->second) continue;
            for (size_t v = 0; v < grid.layers; ++v) grid.at(v, i) = input->grid.at(v, i);
        }
    }

    LatentSequence lat = rvq_decode(stack, grid, stack.layer_count(), stride);
    MotionSequence motion = unpatch(lat, frame_count, layout, out_fps);
    save_motion(motion, out / "generated.mot");

    TokenFile tf{grid, frame_count, out_fps, stride, layout};
    write_token_file(out / "generated.tokens.json", tf);

    json decode_log;
    decode_log["masked_counts"] = masked_counts;
    decode_log["base_passes"] = base_passes;
    decode_log["residual_passes"] = res_passes;
    decode_log["total_passes"] = base_passes + res_passes;
    atomic_write_text(out / "decode_log.json", decode_log.dump(2) + "\n");

    RunManifest manifest;
    manifest.command = "generate";
    manifest.seed = cfg.seed;
    manifest.config_json = cfg.to_json();
    manifest.add_input(stack_path);
    manifest.add_input(predictor_path);
    if (input_path) manifest.add_input(*input_path);
    if (config_path) manifest.add_input(*config_path);
    manifest.add_output(out / "generated.mot");
    manifest.add_output(out / "generated.tokens.json");
    manifest.add_output(out / "decode_log.json");
    manifest.write(out / "manifest.json");
    log::info("generate: ", base_passes + res_passes, " predictor passes, ", n, " tokens");
    return 0;
}

int cmd_eval(const RunConfig& cfg, const fs::path& pred_dir, const fs::path& gt_dir,
             const fs::path& out, size_t pool_size, const std::optional<fs::path>& config_path) {
    fs::create_directories(out);
    auto gt_files = list_files(gt_dir, "ground-truth");
    auto pred_files = list_files(pred_dir, "prediction");

    for (const auto& p : pred_files)
        if (!fs::exists(gt_dir / p.filename()))
            throw DataError("missing ground truth for " + (gt_dir / p.filename()).string());
    for (const auto& g : gt_files)
        if (!fs::exists(pred_dir / g.filename()))
            throw DataError("missing prediction for " + (pred_dir / g.filename()).string());

    Matrix pred_feats, gt_feats;
    double mpjpe_sum = 0.0, noise_sum = 0.0, static_sum = 0.0;
    size_t joint_pairs = 0;
    std::vector<fs::path> outputs;

    for (size_t i = 0; i < gt_files.size(); ++i) {
        MotionSequence gt = load_motion_named(gt_files[i]);
        MotionSequence pr = load_motion_named(pred_dir / gt_files[i].filename());

        std::vector<double> pf = default_features(pr);
        std::vector<double> gf = default_features(gt);
        if (pred_feats.rows == 0) {
            pred_feats = Matrix(gt_files.size(), pf.size());
            gt_feats = Matrix(gt_files.size(), gf.size());
        }
        if (pf.size() != pred_feats.cols || gf.size() != gt_feats.cols)
            throw DataError(gt_files[i].string() + ": feature width differs across clips");
        std::copy(pf.begin(), pf.end(), pred_feats.row(i).begin());
        std::copy(gf.begin(), gf.end(), gt_feats.row(i).begin());

        if (gt.layout.joint_count > 0 && pr.layout.joint_count == gt.layout.joint_count) {
            mpjpe_sum += mpjpe(pr, gt);
            JerkSeries jp = jerk(pr), jg = jerk(gt);
            SjpeReport rep = sjpe(jp, jg);
            noise_sum += rep.noise;
            static_sum += rep.static_part;
            joint_pairs += 1;

            fs::path csv = out / ("jerk_" + gt_files[i].stem().string() + ".csv");
            write_jerk_csv(csv, jp, jg);
            outputs.push_back(csv);
        }
    }

    MetricReport report;
    report.fid = fid(pred_feats, gt_feats);
    if (joint_pairs > 0) {
        report.mpjpe_mm = mpjpe_sum / static_cast<double>(joint_pairs);
        SjpeReport agg;
        agg.noise = noise_sum / static_cast<double>(joint_pairs);
        agg.static_part = static_sum / static_cast<double>(joint_pairs);
        agg.total = agg.noise + agg.static_part;
        report.sjpe = agg;
    }
    if (gt_files.size() >= pool_size)
        report.retrieval = retrieval_metrics(gt_feats, pred_feats, pool_size, cfg.seed);
    else
        log::info("eval: ", gt_files.size(), " pairs < pool ", pool_size, ", skipping retrieval");

    atomic_write_text(out / "report.json", report.to_json() + "\n");
    outputs.push_back(out / "report.json");

    RunManifest manifest;
    manifest.command = "eval";
    manifest.seed = cfg.seed;
    manifest.config_json = cfg.to_json();
    manifest.metrics_json = report.to_json();
    for (const auto& f : gt_files) manifest.add_input(f);
    for (const auto& f : pred_files) manifest.add_input(pred_dir / f.filename());
    if (config_path) manifest.add_input(*config_path);
    for (const auto& o : outputs) manifest.add_output(o);
    manifest.write(out / "manifest.json");
    log::info("eval: ", gt_files.size(), " pairs");
    return 0;
}

int cmd_plot(const fs::path& csv_path, const fs::path& out) {
    fs::create_directories(out);
    std::ifstream is(csv_path);
    if (!is) throw DataError("cannot open: " + csv_path.string());

    std::string line;
    if (!std::getline(is, line)) throw FormatError("empty CSV: " + csv_path.string());
    std::vector<std::string> names;
    {
        std::istringstream hs(line);
        std::string cell;
        while (std::getline(hs, cell, ',')) names.push_back(cell);
    }
    if (names.size() < 2) throw FormatError("plot wants at least two CSV columns");

    std::vector<std::vector<double>> cols(names.size());
    while (std::getline(is, line)) {
        if (line.empty()) continue;
        std::istringstream ls(line);
        std::string cell;
        size_t c = 0;
        while (std::getline(ls, cell, ',')) {
            if (c >= names.size()) throw FormatError("ragged CSV row in " + csv_path.string());
            try {
                cols[c].push_back(std::stod(cell));
            } catch (const std::logic_error&) {
                throw FormatError("bad number '" + cell + "' in " + csv_path.string());
            }
            ++c;
        }
        if (c != names.size()) throw FormatError("ragged CSV row in " + csv_path.string());
    }
    if (cols[0].empty()) throw FormatError("CSV has no data rows: " + csv_path.string());

    const double width = 720.0, height = 405.0, margin = 45.0;
    double x_min = cols[0].front(), x_max = cols[0].back();
    if (x_max == x_min) x_max = x_min + 1.0;
    double y_min = 0.0, y_max = -1e300;
    for (size_t c = 1; c < cols.size(); ++c)
        for (double v : cols[c]) {
            y_min = std::min(y_min, v);
            y_max = std::max(y_max, v);
        }
    if (y_max <= y_min) y_max = y_min + 1.0;

    auto sx = [&](double x) { return margin + (x - x_min) / (x_max - x_min) * (width - 2 * margin); };
    auto sy = [&](double y) {
        return height - margin - (y - y_min) / (y_max - y_min) * (height - 2 * margin);
    };

    static const char* palette[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b"};
    std::ostringstream svg;
    svg << "<svg xmlns=\"http://www.w3.org/2000/svg\" viewBox=\"0 0 " << width << ' ' << height
        << "\">\n<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << height - margin << "\" x2=\"" << width - margin
        << "\" y2=\"" << height - margin << "\" stroke=\"black\"/>\n";
    svg << "<line x1=\"" << margin << "\" y1=\"" << margin << "\" x2=\"" << margin << "\" y2=\""
        << height - margin << "\" stroke=\"black\"/>\n";
    for (size_t c = 1; c < cols.size(); ++c) {
        svg << "<polyline fill=\"none\" stroke=\"" << palette[(c - 1) % 6]
            << "\" stroke-width=\"1.5\" points=\"";
        for (size_t i = 0; i < cols[c].size(); ++i)
            svg << sx(cols[0][i]) << ',' << sy(cols[c][i]) << ' ';
        svg << "\"/>\n";
        svg << "<text x=\"" << width - margin + 4 << "\" y=\"" << margin + 16.0 * (c - 1)
            << "\" font-size=\"11\" fill=\"" << palette[(c - 1) % 6] << "\">" << names[c]
            << "</text>\n";
    }
    svg << "<text x=\"" << width / 2 << "\" y=\"" << height - 10
        << "\" font-size=\"12\" text-anchor=\"middle\">" << names[0] << "</text>\n</svg>\n";

    fs::path out_file = out / (csv_path.stem().string() + ".svg");
    atomic_write_text(out_file, svg.str());
    log::info("plot: wrote ", out_file.string());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"motion tokenizer, masked generator and evaluation toolkit"};
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_arg, out_arg = "out";
    uint64_t seed_arg = 0;
    int jobs_arg = 0;
    auto* config_opt = app.add_option("--config", config_arg, "JSON run configuration");
    auto* seed_opt = app.add_option("--seed", seed_arg, "override the config seed");
    auto* jobs_opt = app.add_option("--jobs", jobs_arg, "worker thread cap (0 = default)");
    app.add_option("--out", out_arg, "output directory");

    auto* tokenize = app.add_subcommand("tokenize", "train the quantizer and emit token files");
    std::string motion_dir;
    tokenize->add_option("motions", motion_dir, "directory of motion files")->required();

    auto* trainp = app.add_subcommand("train-predictor", "fit count models on token files");
    std::string tokens_dir, stack_arg, labels_arg;
    trainp->add_option("tokens", tokens_dir, "directory of token files")->required();
    trainp->add_option("--stack", stack_arg, "codebook stack JSON")->required();
    auto* labels_opt = trainp->add_option("--labels", labels_arg, "clip name -> label id JSON");

    auto* generate = app.add_subcommand("generate", "decode new motion from the models");
    std::string gen_stack, gen_pred, inpaint_arg, input_arg;
    int length_arg = 0;
    int32_t condition_arg = 0;
    double cfg_arg = 0.0, fps_arg = 20.0;
    int iters_arg = 0;
    bool cond_only_arg = false;
    generate->add_option("--stack", gen_stack, "codebook stack JSON")->required();
    generate->add_option("--predictor", gen_pred, "predictor JSON")->required();
    auto* condition_opt = generate->add_option("--condition", condition_arg, "label id");
    auto* length_opt = generate->add_option("--length", length_arg, "frames to generate");
    auto* inpaint_opt = generate->add_option("--inpaint", inpaint_arg, "token region a:b to redo");
    auto* input_opt = generate->add_option("--input", input_arg, "token file to inpaint");
    auto* cfg_scale_opt = generate->add_option("--cfg", cfg_arg, "guidance scale override");
    auto* iters_opt = generate->add_option("--iters", iters_arg, "decode iterations override");
    generate->add_option("--fps", fps_arg, "frame rate for fresh generations");
    generate->add_flag("--cond-only", cond_only_arg, "skip the unconditional branch");

    auto* eval = app.add_subcommand("eval", "compare predicted motions against ground truth");
    std::string pred_dir, gt_dir;
    size_t pool_arg = 32;
    eval->add_option("--pred", pred_dir, "directory of predicted motions")->required();
    eval->add_option("--gt", gt_dir, "directory of ground-truth motions")->required();
    eval->add_option("--pool", pool_arg, "retrieval pool size");

    auto* plot = app.add_subcommand("plot", "render a metrics CSV as an SVG line chart");
    std::string csv_arg;
    plot->add_option("csv", csv_arg, "CSV file with a leading x column")->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    try {
        RunConfig cfg;
        std::optional<fs::path> config_path;
        if (config_opt->count() > 0) {
            config_path = fs::path(config_arg);
            cfg = RunConfig::load(*config_path);
        }
        if (seed_opt->count() > 0) cfg.seed = seed_arg;
        if (jobs_opt->count() > 0) cfg.jobs = jobs_arg;
        if (cfg_scale_opt->count() > 0) {
            if (cfg_arg < 0.0) throw ConfigError("--cfg must be >= 0");
            cfg.decode.cfg_scale = cfg_arg;
            cfg.residual_cfg_scale = cfg_arg; // one knob for both phases
        }
        if (iters_opt->count() > 0) cfg.decode.iterations = iters_arg;
        if (cond_only_arg) cfg.decode.cond_only = true;
        cfg.decode.seed = cfg.seed;
        cfg.validate();
        set_jobs(cfg.jobs);

        fs::path out(out_arg);
        if (tokenize->parsed()) return cmd_tokenize(cfg, motion_dir, out, config_path);
        if (trainp->parsed()) {
            std::optional<fs::path> labels;
            if (labels_opt->count() > 0) labels = fs::path(labels_arg);
            return cmd_train_predictor(cfg, tokens_dir, stack_arg, labels, out, config_path);
        }
        if (generate->parsed()) {
            std::optional<int32_t> condition;
            if (condition_opt->count() > 0) condition = condition_arg;
            std::optional<int> length;
            if (length_opt->count() > 0) length = length_arg;
            std::optional<std::string> inpaint;
            if (inpaint_opt->count() > 0) inpaint = inpaint_arg;
            std::optional<fs::path> input;
            if (input_opt->count() > 0) input = fs::path(input_arg);
            return cmd_generate(cfg, gen_stack, gen_pred, out, condition, length, inpaint, input,
                                fps_arg, config_path);
        }
        if (eval->parsed()) return cmd_eval(cfg, pred_dir, gt_dir, out, pool_arg, config_path);
        if (plot->parsed()) return cmd_plot(csv_arg, out);
        return 2;
    } catch (const ConfigError& e) {
        log::error(e.what());
        return 2;
    } catch (const DataError& e) {
        log::error(e.what());
        return 3;
    } catch (const ModelError& e) {
        log::error(e.what());
        return 4;
    } catch (const std::exception& e) {
        log::error(e.what());
        return 3;
    }
}
