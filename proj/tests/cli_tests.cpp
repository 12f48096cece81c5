// End-to-end checks of the command line binary. argv[1] is the path to it;
// each scenario runs in a scratch directory under the system temp dir.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "momask/errors.hpp"
#include "momask/motion.hpp"
#include "momask/predictor.hpp"
#include "momask/rng.hpp"
#include "momask/rvq.hpp"

namespace fs = std::filesystem;
using namespace momask;
using nlohmann::json;

namespace {

int failures = 0;
std::string cli;

void check(bool ok, const std::string& what) {
    if (ok) {
        std::printf("  ok: %s\n", what.c_str());
    } else {
        std::printf("  FAILED: %s\n", what.c_str());
        ++failures;
    }
}

int run(const std::string& args) {
    std::string cmd = cli + " " + args + " > /dev/null 2>&1";
    int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

int run_sh(const std::string& cmd) {
    int rc = std::system(cmd.c_str());
    if (rc == -1) return -1;
    return WEXITSTATUS(rc);
}

std::string slurp(const fs::path& p) {
    std::ifstream is(p);
    std::stringstream buf;
    buf << is.rdbuf();
    return buf.str();
}

void write_text(const fs::path& p, const std::string& text) {
    std::ofstream os(p);
    os << text;
}

} // namespace

int main(int argc, char** argv) {
    if (argc < 2) {
        std::printf("usage: cli_tests <momask-binary>\n");
        return 1;
    }
    cli = argv[1];

    fs::path root = fs::temp_directory_path() / "momask_cli_tests";
    fs::remove_all(root);
    fs::create_directories(root / "motions");

    // fixture corpus: 12 smooth clips, 12 dims (4 joints), varied lengths
    std::vector<std::string> stems;
    for (int i = 0; i < 12; ++i) {
        MotionSequence seq = synth_motion(SynthKind::RandomSmooth, 40 + 2 * i,
                                          static_cast<uint64_t>(100 + i), 12);
        char name[32];
        std::snprintf(name, sizeof(name), "clip%02d", i);
        stems.push_back(name);
        save_motion(seq, root / "motions" / (std::string(name) + ".mot"));
    }
    {
        json labels;
        for (size_t i = 0; i < stems.size(); ++i)
            labels[stems[i]] = static_cast<int>(i % 3);
        write_text(root / "labels.json", labels.dump());
    }
    // small quantizer so 12 clips are enough data
    write_text(root / "config.json",
               R"({"seed": 5, "stride": 4, "epochs": 3,)"
               R"( "rvq": {"codebook_size": 16, "num_residual_layers": 2}})");
    std::string cfg_flag = " --config " + (root / "config.json").string();

    std::printf("cli binary: %s\n", cli.c_str());

    std::printf("argument handling\n");
    check(run("") == 2, "no subcommand exits 2");
    check(run("--help") == 0, "--help exits 0");
    check(run("frobnicate") == 2, "unknown subcommand exits 2");
    check(run("tokenize") == 2, "missing required positional exits 2");

    std::printf("tokenize\n");
    fs::path out1 = root / "tok1";
    check(run("tokenize " + (root / "motions").string() + cfg_flag + " --out " + out1.string()) == 0,
          "tokenize exits 0");
    check(fs::exists(out1 / "stack.json"), "stack.json written");
    check(fs::exists(out1 / "mse_log.csv"), "mse_log.csv written");
    check(fs::exists(out1 / "manifest.json"), "manifest.json written");
    for (const auto& s : stems)
        if (!fs::exists(out1 / "tokens" / (s + ".tokens.json"))) {
            check(false, "missing tokens for " + s);
            break;
        }

    CodebookStack stack = CodebookStack::from_json(slurp(out1 / "stack.json"));
    check(stack.layer_count() == 3, "stack has base + 2 residual layers");
    check(stack.layers[0].size() == 16, "base codebook size from config");
    check(stack.code_dim() == 48, "code dim = stride * dims");
    {
        json tok = json::parse(slurp(out1 / "tokens" / "clip00.tokens.json"));
        check(tok.at("frame_count") == 40, "token file records the frame count");
        check(tok.at("stride") == 4, "token file records the stride");
        check(tok.at("tokens").size() == 3, "token grid is full depth");
        check(tok.at("tokens")[0].size() == 10, "n = ceil(T / stride)");
    }

    // determinism: the same invocation into another directory matches byte for byte
    fs::path out2 = root / "tok2";
    check(run("tokenize " + (root / "motions").string() + cfg_flag + " --out " + out2.string()) == 0,
          "second tokenize exits 0");
    check(slurp(out1 / "stack.json") == slurp(out2 / "stack.json"), "stack.json reproducible");
    check(slurp(out1 / "manifest.json") == slurp(out2 / "manifest.json"),
          "manifests identical across output directories");

    // seed override changes the manifest seed field
    fs::path out3 = root / "tok3";
    check(run("tokenize " + (root / "motions").string() + cfg_flag + " --seed 9 --out " +
              out3.string()) == 0,
          "tokenize with --seed exits 0");
    check(json::parse(slurp(out3 / "manifest.json")).at("seed") == 9, "--seed overrides the config");

    check(run("tokenize " + (root / "motions").string() + " --out " + (root / "tokx").string() +
              " --config " + (root / "missing.json").string()) == 2,
          "missing config exits 2");
    fs::create_directories(root / "empty");
    check(run("tokenize " + (root / "empty").string() + cfg_flag + " --out " +
              (root / "tok_empty").string()) == 3,
          "empty motion dir exits 3");

    write_text(root / "bad_config.json", R"({"seed": 1, "wobble": true})");
    check(run("tokenize " + (root / "motions").string() + " --config " +
              (root / "bad_config.json").string() + " --out " + (root / "tokbad").string()) == 2,
          "unknown config key exits 2");

    std::printf("train-predictor\n");
    fs::path outp = root / "pred";
    check(run("train-predictor " + (out1 / "tokens").string() + " --stack " +
              (out1 / "stack.json").string() + " --labels " + (root / "labels.json").string() +
              cfg_flag + " --out " + outp.string()) == 0,
          "train-predictor exits 0");
    CountPredictor pred = CountPredictor::from_json(slurp(outp / "predictor.json"));
    check(pred.models.size() == 3, "one count model per layer");
    check(pred.models.count(0) == 1 && pred.models.count(2) == 1, "layers 0 and 2 present");
    check(pred.vocab() == 16, "predictor vocab matches the base codebook");

    check(run("train-predictor " + (root / "empty").string() + " --stack " +
              (out1 / "stack.json").string() + cfg_flag + " --out " + (root / "predx").string()) == 3,
          "empty token dir exits 3");

    std::printf("generate\n");
    fs::path outg = root / "gen";
    std::string gen_base = "generate --stack " + (out1 / "stack.json").string() + " --predictor " +
                           (outp / "predictor.json").string() + cfg_flag;
    check(run(gen_base + " --condition 1 --length 43 --out " + outg.string()) == 0,
          "generate exits 0");
    {
        MotionSequence gen = load_motion(outg / "generated.mot");
        check(gen.length() == 43, "generated frame count honors --length");
        check(gen.dims() == 12, "generated dims = code_dim / stride");
        check(gen.fps == 20.0, "default fps");
        json dl = json::parse(slurp(outg / "decode_log.json"));
        check(dl.at("masked_counts").size() == 10, "ten decode iterations logged");
        check(dl.at("base_passes") == 10, "ten base predictor passes");
        check(dl.at("residual_passes") == 2, "one pass per residual layer");
        check(dl.at("total_passes") == 12, "pass total adds up");
        json tok = json::parse(slurp(outg / "generated.tokens.json"));
        check(tok.at("tokens").size() == 3, "generated grid is full depth");
        check(tok.at("tokens")[0].size() == 11, "11 tokens for 43 frames at stride 4");
    }

    // zero guidance must equal the conditional-only decode end to end
    fs::path outa = root / "gen_cfg0", outb = root / "gen_condonly";
    check(run(gen_base + " --condition 1 --length 43 --cfg 0 --out " + outa.string()) == 0,
          "generate --cfg 0 exits 0");
    check(run(gen_base + " --condition 1 --length 43 --cond-only --out " + outb.string()) == 0,
          "generate --cond-only exits 0");
    check(slurp(outa / "generated.mot") == slurp(outb / "generated.mot"),
          "--cfg 0 and --cond-only produce identical motion bytes");
    check(slurp(outa / "generated.tokens.json") == slurp(outb / "generated.tokens.json"),
          "--cfg 0 and --cond-only produce identical tokens");

    check(run(gen_base + " --length 30 --seed 4 --out " + (root / "genu").string()) == 0,
          "unconditional generate exits 0");
    check(run(gen_base + " --out " + (root / "genx").string()) == 2,
          "generate without --length exits 2");

    std::printf("inpaint\n");
    fs::path outi = root / "inp";
    fs::path input_tokens = out1 / "tokens" / "clip03.tokens.json";
    check(run(gen_base + " --inpaint 2:5 --input " + input_tokens.string() + " --out " +
              outi.string()) == 0,
          "inpaint exits 0");
    {
        json in_tok = json::parse(slurp(input_tokens));
        json out_tok = json::parse(slurp(outi / "generated.tokens.json"));
        check(out_tok.at("frame_count") == in_tok.at("frame_count"), "frame count preserved");
        check(out_tok.at("fps") == in_tok.at("fps"), "fps preserved");
        bool outside_same = true;
        size_t n = in_tok.at("tokens")[0].size();
        for (size_t v = 0; v < 3; ++v)
            for (size_t i = 0; i < n; ++i) {
                if (i >= 2 && i < 5) continue;
                if (in_tok.at("tokens")[v][i] != out_tok.at("tokens")[v][i]) outside_same = false;
            }
        check(outside_same, "tokens outside the region survive at every layer");
    }
    check(run(gen_base + " --inpaint 2-5 --input " + input_tokens.string() + " --out " +
              (root / "inpx").string()) == 2,
          "malformed region exits 2");
    check(run(gen_base + " --inpaint 0:999 --input " + input_tokens.string() + " --out " +
              (root / "inpy").string()) == 3,
          "region past the end exits 3");
    check(run(gen_base + " --inpaint 2:5 --out " + (root / "inpz").string()) == 2,
          "inpaint without --input exits 2");

    std::printf("eval\n");
    fs::path gt_dir = root / "gt", pr_dir = root / "pr";
    fs::create_directories(gt_dir);
    fs::create_directories(pr_dir);
    Rng noise(7);
    for (int i = 0; i < 6; ++i) {
        MotionSequence seq = synth_motion(SynthKind::RandomSmooth, 50, 500 + i, 12);
        char name[32];
        std::snprintf(name, sizeof(name), "pair%02d.mot", i);
        save_motion(seq, gt_dir / name);
        for (auto& v : seq.frames.data) v += 0.01 * noise.normal();
        save_motion(seq, pr_dir / name);
    }
    fs::path oute = root / "eval";
    check(run("eval --pred " + pr_dir.string() + " --gt " + gt_dir.string() + " --pool 4" +
              cfg_flag + " --out " + oute.string()) == 0,
          "eval exits 0");
    {
        json rep = json::parse(slurp(oute / "report.json"));
        check(rep.contains("fid"), "report has fid");
        check(rep.contains("mpjpe_mm"), "report has mpjpe");
        check(rep.contains("sjpe_total") && rep.contains("sjpe_noise") &&
                  rep.contains("sjpe_static"),
              "report has the sjpe split");
        check(rep.contains("r_precision_1"), "report has retrieval at pool 4");
        check(rep.at("extractor") == "desc_v1", "report names the feature extractor");
        double total = rep.at("sjpe_total");
        double parts = static_cast<double>(rep.at("sjpe_noise")) +
                       static_cast<double>(rep.at("sjpe_static"));
        check(total == parts, "sjpe total equals noise + static exactly");
        check(fs::exists(oute / "jerk_pair00.csv"), "per-pair jerk curves written");
        json man = json::parse(slurp(oute / "manifest.json"));
        check(man.contains("metrics"), "manifest embeds the metric report");
    }

    // a pool larger than the pair count skips retrieval but still succeeds
    fs::path oute2 = root / "eval_skip";
    check(run("eval --pred " + pr_dir.string() + " --gt " + gt_dir.string() + " --pool 32" +
              cfg_flag + " --out " + oute2.string()) == 0,
          "eval with an oversized pool exits 0");
    check(!json::parse(slurp(oute2 / "report.json")).contains("r_precision_1"),
          "oversized pool omits retrieval");

    fs::remove(pr_dir / "pair05.mot");
    check(run("eval --pred " + pr_dir.string() + " --gt " + gt_dir.string() + cfg_flag +
              " --out " + (root / "evalx").string()) == 3,
          "missing prediction exits 3");

    std::printf("plot\n");
    check(run("plot " + (out1 / "mse_log.csv").string() + " --out " + (root / "plots").string()) == 0,
          "plot exits 0");
    {
        std::string svg = slurp(root / "plots" / "mse_log.svg");
        check(svg.find("<svg") == 0, "output is an svg document");
        check(svg.find("<polyline") != std::string::npos, "svg has polylines");
    }
    write_text(root / "bad.csv", "only_one_column\n1\n2\n");
    check(run("plot " + (root / "bad.csv").string() + " --out " + (root / "plots").string()) == 3,
          "unplottable csv exits 3");

    std::printf("model errors\n");
    {
        // a predictor missing the residual layers cannot drive generation
        CountTrainConfig tc;
        tc.vocab = 16;
        tc.uncond_drop = 0.0;
        CountPredictor small;
        small.models[0] = train_count_predictor({{{0, 1, 2}, ConditionRef::null()}}, 0, tc, 1);
        write_text(root / "small_predictor.json", small.to_json());
        check(run("generate --stack " + (out1 / "stack.json").string() + " --predictor " +
                  (root / "small_predictor.json").string() + cfg_flag + " --length 20 --out " +
                  (root / "genm").string()) == 4,
              "layer-count mismatch exits 4");
    }

    std::printf("logging\n");
    {
        fs::path err = root / "stderr.txt";
        int rc = run_sh("MOMASK_LOG=info " + cli + " tokenize " + (root / "motions").string() +
                        cfg_flag + " --out " + (root / "tokl").string() + " 2> " + err.string() +
                        " > /dev/null");
        check(rc == 0, "tokenize with MOMASK_LOG=info exits 0");
        check(slurp(err).find("[info]") != std::string::npos, "info logging reaches stderr");
        int rc2 = run_sh("MOMASK_LOG=error " + cli + " eval --pred " + pr_dir.string() +
                         " --gt " + gt_dir.string() + " --out " + (root / "evq").string() +
                         " 2> " + err.string() + " > /dev/null");
        check(rc2 == 3, "failing eval exits 3");
        check(slurp(err).find("[error]") != std::string::npos, "errors reach stderr");
    }

    if (failures == 0) fs::remove_all(root);
    std::printf("%s: %d failure(s)\n", failures == 0 ? "PASS" : "FAIL", failures);
    return failures == 0 ? 0 : 1;
}
