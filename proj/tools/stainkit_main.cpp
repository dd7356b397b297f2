// Command-line frontend: chroma histograms and distances, the four color
// transfer baselines, recoloring quality scores, instance-segmentation
// evaluation, darkening series generation, and the scripted study runner.

#include <cstdio>
#include <filesystem>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "stainkit/colorspaces.hpp"
#include "stainkit/error.hpp"
#include "stainkit/histogram.hpp"
#include "stainkit/io.hpp"
#include "stainkit/quality.hpp"
#include "stainkit/segmetrics.hpp"
#include "stainkit/study.hpp"
#include "stainkit/synth.hpp"
#include "stainkit/transfer.hpp"

namespace {

using namespace stainkit;

int exit_code_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ParameterError:
        case ErrorCode::HeterogeneousRows:
            return 2;
        case ErrorCode::IoFailure:
        case ErrorCode::UnsupportedFormat:
            return 3;
        case ErrorCode::EmptyHistogram:
        case ErrorCode::LowSignal:
        case ErrorCode::DegenerateRank:
            return 4;
    }
    return 1;
}

struct HistFlags {
    int bins = 64;
    double range = 3.0;
    double epsilon = kDefaultChromaEpsilon;
    bool uniform_weight = false;

    HistogramParams params() const {
        HistogramParams p;
        p.bins = bins;
        p.range = range;
        p.epsilon = epsilon;
        p.weighted = !uniform_weight;
        return p;
    }
};

void add_hist_flags(CLI::App* cmd, HistFlags& flags) {
    cmd->add_option("--bins", flags.bins, "Histogram bins per chroma axis")
        ->capture_default_str();
    cmd->add_option("--range", flags.range, "Symmetric log-chroma clamp range")
        ->capture_default_str();
    cmd->add_option("--epsilon", flags.epsilon, "Log-ratio epsilon on [0,1] intensities")
        ->capture_default_str();
    cmd->add_flag("--uniform-weight", flags.uniform_weight,
                  "Weight pixels uniformly instead of by intensity magnitude");
}

ColorHistogram load_histogram_arg(const std::string& path, const HistFlags& flags) {
    const std::string ext = std::filesystem::path(path).extension().string();
    if (ext == ".png") return compute_histogram(read_image(path), flags.params());
    return load_histogram(path);
}

std::vector<std::string> split_list(const std::string& csv) {
    std::vector<std::string> out;
    std::stringstream ss(csv);
    std::string item;
    while (std::getline(ss, item, ','))
        if (!item.empty()) out.push_back(item);
    return out;
}

// ---- subcommand bodies ----

struct HistArgs {
    std::string input;
    std::string output;
    HistFlags flags;
};

void run_hist(const HistArgs& args) {
    const ColorHistogram hist = compute_histogram(read_image(args.input), args.flags.params());
    save_histogram(hist, args.output);
    std::printf("wrote %s\n", args.output.c_str());
}

struct DistArgs {
    std::string a, b;
    std::string metrics = "hellinger,kl";
    std::string output;
    HistFlags flags;
};

void run_dist(const DistArgs& args) {
    const ColorHistogram ha = load_histogram_arg(args.a, args.flags);
    const ColorHistogram hb = load_histogram_arg(args.b, args.flags);
    bool want_h = false, want_kl = false;
    for (const std::string& m : split_list(args.metrics)) {
        if (m == "hellinger")
            want_h = true;
        else if (m == "kl")
            want_kl = true;
        else
            raise(ErrorCode::ParameterError, "unknown metric: " + m + " (use hellinger,kl)");
    }
    if (!want_h && !want_kl)
        raise(ErrorCode::ParameterError, "at least one metric is required");

    nlohmann::ordered_json j;
    if (want_h) {
        const double v = hellinger_distance(ha, hb);
        std::printf("hellinger %s\n", format_report_number(v).c_str());
        j["hellinger"] = v;
    }
    if (want_kl) {
        const double v = kl_divergence(ha, hb);
        std::printf("kl %s\n", format_report_number(v).c_str());
        j["kl"] = v;
    }
    if (!args.output.empty()) write_text_file(j.dump(2) + "\n", args.output);
}

struct TransferArgs {
    std::string method;
    std::string source, target, output;
    MacenkoParams macenko;
    VahadaneParams vahadane;
    bool exact = false;
};

void run_transfer(const TransferArgs& args) {
    TransferOptions options;
    options.macenko = args.macenko;
    options.vahadane = args.vahadane;
    options.vahadane.init = args.macenko;
    options.exact_histogram = args.exact;
    const RgbImage out = apply_transfer(transfer_method_from_name(args.method),
                                        read_image(args.source), read_image(args.target), options);
    write_image(out, args.output);
    std::printf("wrote %s\n", args.output.c_str());
}

struct QualityArgs {
    std::string source, recolored, target, output;
    HistFlags flags;
};

void run_quality(const QualityArgs& args) {
    const QualityReport report =
        quality_report(read_image(args.source), read_image(args.recolored),
                       read_image(args.target), args.flags.params());
    const std::string json = quality_report_to_json(report);
    if (args.output.empty())
        std::fputs(json.c_str(), stdout);
    else
        write_text_file(json, args.output);
}

struct SegEvalArgs {
    std::string pred, gt;
    std::string metrics = "f1,aji,dice";
    double iou = 0.5;
    std::string output;
};

void run_seg_eval(const SegEvalArgs& args) {
    const SegReport report =
        evaluate_segmentation(read_labelmap(args.pred), read_labelmap(args.gt), args.iou);
    bool want_f1 = false, want_aji = false, want_dice = false;
    for (const std::string& m : split_list(args.metrics)) {
        if (m == "f1")
            want_f1 = true;
        else if (m == "aji")
            want_aji = true;
        else if (m == "dice")
            want_dice = true;
        else
            raise(ErrorCode::ParameterError, "unknown metric: " + m + " (use f1,aji,dice)");
    }
    if (!want_f1 && !want_aji && !want_dice)
        raise(ErrorCode::ParameterError, "at least one metric is required");

    nlohmann::ordered_json j;
    if (want_f1) {
        j["f1"] = report.f1;
        j["tp"] = report.tp;
        j["fp"] = report.fp;
        j["fn"] = report.fn;
    }
    if (want_aji) j["aji"] = report.aji;
    if (want_dice) j["dice"] = report.dice;
    const std::string json = j.dump(2) + "\n";
    std::fputs(json.c_str(), stdout);
    if (!args.output.empty()) write_text_file(json, args.output);
}

struct SeriesArgs {
    std::string base;
    std::string synth_config;
    std::vector<double> factors;
    std::string outdir;
};

void run_series(const SeriesArgs& args) {
    if (args.base.empty() == args.synth_config.empty())
        raise(ErrorCode::ParameterError, "series needs exactly one of --base or --synth");

    const std::filesystem::path outdir(args.outdir);
    RgbImage base;
    if (!args.base.empty()) {
        base = read_image(args.base);
    } else {
        const SynthSpec spec = synth_spec_from_json(read_text_file(args.synth_config));
        SynthResult synth = synthesize_stain_image(spec);
        base = std::move(synth.image);
        if (spec.law == ConcentrationLaw::BlobCells) {
            write_labelmap(synth.labels, outdir / "labels.png");
            std::printf("wrote %s\n", (outdir / "labels.png").string().c_str());
        }
        write_text_file(stain_matrix_to_json(synth.stains), outdir / "stains.json");
        std::printf("wrote %s\n", (outdir / "stains.json").string().c_str());
    }

    SeriesSpec series;
    series.base = base;
    series.factors = args.factors;
    const std::vector<RgbImage> darkened = darken_series(series);

    write_image(base, outdir / "original.png");
    std::printf("wrote %s\n", (outdir / "original.png").string().c_str());
    for (std::size_t i = 0; i < darkened.size(); ++i) {
        char name[48];
        std::snprintf(name, sizeof(name), "factor-%g.png", args.factors[i]);
        write_image(darkened[i], outdir / name);
        std::printf("wrote %s\n", (outdir / name).string().c_str());
    }
}

struct StudyArgs {
    std::string config;
    bool summary = false;
};

void run_study_cmd(const StudyArgs& args) {
    StudyConfig config = study_config_from_json(read_text_file(args.config));
    if (args.summary) config.summary = true;
    const StudyResult result = run_study(config);
    if (config.table_path)
        std::printf("wrote %s\n", config.table_path->string().c_str());
    else
        std::fputs(report_to_csv(result.table).c_str(), stdout);
    if (config.scatter_path) std::printf("wrote %s\n", config.scatter_path->string().c_str());
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Stain color toolkit: chroma histograms, color transfer, and evaluation"};
    app.require_subcommand(1);

    HistArgs hist_args;
    CLI::App* hist_cmd = app.add_subcommand("hist", "Compute a log-chroma histogram of an image");
    hist_cmd->add_option("input", hist_args.input, "Input PNG image")->required();
    hist_cmd->add_option("-o,--output", hist_args.output,
                         "Output histogram file (.json or binary)")
        ->required();
    add_hist_flags(hist_cmd, hist_args.flags);

    DistArgs dist_args;
    CLI::App* dist_cmd =
        app.add_subcommand("dist", "Distances between two histograms (or images)");
    dist_cmd->add_option("a", dist_args.a, "First image (.png) or histogram file")->required();
    dist_cmd->add_option("b", dist_args.b, "Second image (.png) or histogram file")->required();
    dist_cmd->add_option("--metric", dist_args.metrics, "Comma list from: hellinger,kl")
        ->capture_default_str();
    dist_cmd->add_option("-o,--output", dist_args.output, "Optional JSON output path");
    add_hist_flags(dist_cmd, dist_args.flags);

    TransferArgs transfer_args;
    CLI::App* transfer_cmd = app.add_subcommand("transfer", "Recolor a source toward a target");
    transfer_cmd
        ->add_option("--method", transfer_args.method,
                     "One of: reinhard, macenko, vahadane, histmatch")
        ->required();
    transfer_cmd->add_option("--source", transfer_args.source, "Source PNG")->required();
    transfer_cmd->add_option("--target", transfer_args.target, "Target PNG")->required();
    transfer_cmd->add_option("-o,--output", transfer_args.output, "Output PNG")->required();
    transfer_cmd
        ->add_option("--beta-od", transfer_args.macenko.beta_od,
                     "Tissue threshold on OD magnitude")
        ->capture_default_str();
    transfer_cmd
        ->add_option("--alpha-pct", transfer_args.macenko.alpha_pct,
                     "Stain angle percentile")
        ->capture_default_str();
    transfer_cmd->add_option("--stains", transfer_args.vahadane.stains, "Dictionary stain count")
        ->capture_default_str();
    transfer_cmd
        ->add_option("--lambda", transfer_args.vahadane.lambda_sparse,
                     "Sparsity weight of the dictionary fit")
        ->capture_default_str();
    transfer_cmd->add_option("--iters", transfer_args.vahadane.iters, "Dictionary alternations")
        ->capture_default_str();
    transfer_cmd->add_flag("--exact", transfer_args.exact,
                           "Exact histogram specification (histmatch only)");

    QualityArgs quality_args;
    CLI::App* quality_cmd =
        app.add_subcommand("quality", "Score a recoloring against source and target");
    quality_cmd->add_option("--source", quality_args.source, "Source PNG")->required();
    quality_cmd->add_option("--recolored", quality_args.recolored, "Recolored PNG")->required();
    quality_cmd->add_option("--target", quality_args.target, "Target PNG")->required();
    quality_cmd->add_option("-o,--output", quality_args.output, "Optional JSON output path");
    add_hist_flags(quality_cmd, quality_args.flags);

    SegEvalArgs seg_args;
    CLI::App* seg_cmd =
        app.add_subcommand("seg-eval", "Evaluate predicted instances against ground truth");
    seg_cmd->add_option("--pred", seg_args.pred, "Predicted label map PNG")->required();
    seg_cmd->add_option("--gt", seg_args.gt, "Ground-truth label map PNG")->required();
    seg_cmd->add_option("--metrics", seg_args.metrics, "Comma list from: f1,aji,dice")
        ->capture_default_str();
    seg_cmd->add_option("--iou", seg_args.iou, "IoU threshold for instance matching")
        ->capture_default_str();
    seg_cmd->add_option("-o,--output", seg_args.output, "Optional JSON output path");

    SeriesArgs series_args;
    CLI::App* series_cmd =
        app.add_subcommand("series", "Write a darkening series from a base or synthetic image");
    series_cmd->add_option("--base", series_args.base, "Base PNG image");
    series_cmd->add_option("--synth", series_args.synth_config, "Synthesis config JSON");
    series_cmd
        ->add_option("--factors", series_args.factors,
                     "Strictly increasing darkening factors, each >= 1")
        ->required()
        ->delimiter(',');
    series_cmd->add_option("-o,--outdir", series_args.outdir, "Output directory")->required();

    StudyArgs study_args;
    CLI::App* study_cmd =
        app.add_subcommand("study", "Run the darkening-series study from a JSON config");
    study_cmd->add_option("config", study_args.config, "Study config JSON (\"v\": 1)")->required();
    study_cmd->add_flag("--summary", study_args.summary, "Append a mean ± std row to the table");

    try {
        app.parse(argc, argv);
        if (hist_cmd->parsed()) run_hist(hist_args);
        if (dist_cmd->parsed()) run_dist(dist_args);
        if (transfer_cmd->parsed()) run_transfer(transfer_args);
        if (quality_cmd->parsed()) run_quality(quality_args);
        if (seg_cmd->parsed()) run_seg_eval(seg_args);
        if (series_cmd->parsed()) run_series(series_args);
        if (study_cmd->parsed()) run_study_cmd(study_args);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 2;
    } catch (const stainkit::StainError& e) {
        std::fprintf(stderr, "error (%s): %s\n", error_code_name(e.code()), e.what());
        return exit_code_for(e.code());
    } catch (const std::exception& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
    return 0;
}
