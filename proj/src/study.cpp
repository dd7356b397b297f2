#include "stainkit/study.hpp"

#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "stainkit/error.hpp"
#include "stainkit/segmetrics.hpp"

namespace stainkit {

namespace {

ReportRow study_row(const std::string& set, double factor, const HistogramDistance& dist,
                    const SegReport* seg) {
    ReportRow row;
    row.add("set", set);
    row.add("factor", factor);
    row.add("h_dist", dist.hellinger);
    row.add("kl_div", dist.kl);
    if (seg) {
        row.add("f1", seg->f1);
        row.add("aji", seg->aji);
        row.add("dice", seg->dice);
        row.add("tp", static_cast<std::int64_t>(seg->tp));
        row.add("fp", static_cast<std::int64_t>(seg->fp));
        row.add("fn", static_cast<std::int64_t>(seg->fn));
    }
    return row;
}

}  // namespace

StudyConfig study_config_from_json(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::UnsupportedFormat, std::string("invalid study JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("v", 0) != 1)
        raise(ErrorCode::ParameterError, "study config must be a JSON object with \"v\": 1");

    StudyConfig config;
    if (j.contains("base_image")) config.base_image = j["base_image"].get<std::string>();
    if (j.contains("synth")) config.synth = synth_spec_from_json(j["synth"].dump());
    if (config.base_image.has_value() == config.synth.has_value())
        raise(ErrorCode::ParameterError,
              "study config needs exactly one of \"base_image\" or \"synth\"");

    if (!j.contains("factors") || !j["factors"].is_array() || j["factors"].empty())
        raise(ErrorCode::ParameterError, "study config needs a non-empty \"factors\" array");
    for (const auto& f : j["factors"]) config.factors.push_back(f.get<double>());

    if (j.contains("hist")) {
        const auto& h = j["hist"];
        config.hist.bins = h.value("bins", config.hist.bins);
        config.hist.range = h.value("range", config.hist.range);
        config.hist.epsilon = h.value("epsilon", config.hist.epsilon);
        config.hist.weighted = h.value("weighted", config.hist.weighted);
    }

    if (j.contains("gt")) config.gt_path = j["gt"].get<std::string>();
    if (j.contains("predictions")) {
        for (const auto& p : j["predictions"])
            config.prediction_paths.push_back(p.get<std::string>());
    }
    config.threshold_segmenter = j.value("threshold_segmenter", false);
    config.threshold = j.value("threshold", config.threshold);
    if (j.contains("table")) config.table_path = j["table"].get<std::string>();
    if (j.contains("scatter")) config.scatter_path = j["scatter"].get<std::string>();
    config.summary = j.value("summary", false);
    const std::string fmt = j.value("format", std::string("csv"));
    if (fmt == "csv")
        config.format = ReportFormat::Csv;
    else if (fmt == "json")
        config.format = ReportFormat::Json;
    else
        raise(ErrorCode::ParameterError, "format must be \"csv\" or \"json\"");
    return config;
}

LabelMap threshold_segment(const RgbImage& img, double threshold) {
    std::vector<std::uint8_t> mask(img.pixel_count(), 0);
    for (std::size_t i = 0; i < mask.size(); ++i) {
        const double mean = (static_cast<double>(img.data[i * 3]) +
                             static_cast<double>(img.data[i * 3 + 1]) +
                             static_cast<double>(img.data[i * 3 + 2])) /
                            3.0;
        mask[i] = mean < threshold ? 1 : 0;
    }
    return connected_components(mask, img.width, img.height);
}

StudyResult run_study(const StudyConfig& config) {
    if (config.base_image.has_value() == config.synth.has_value())
        raise(ErrorCode::ParameterError, "study needs exactly one base source");
    if (config.factors.empty())
        raise(ErrorCode::ParameterError, "study needs at least one darkening factor");

    RgbImage base;
    std::optional<LabelMap> gt;
    if (config.base_image) {
        base = read_image(*config.base_image);
    } else {
        SynthResult synth = synthesize_stain_image(*config.synth);
        base = std::move(synth.image);
        if (config.synth->law == ConcentrationLaw::BlobCells) gt = std::move(synth.labels);
    }
    if (config.gt_path) gt = read_labelmap(*config.gt_path);

    const bool explicit_preds = !config.prediction_paths.empty();
    if (explicit_preds && config.prediction_paths.size() != config.factors.size() + 1)
        raise(ErrorCode::ParameterError,
              "predictions must list one label map for the original plus one per factor");
    const bool want_seg = gt.has_value() && (explicit_preds || config.threshold_segmenter);

    SeriesSpec series;
    series.base = base;
    series.factors = config.factors;
    const std::vector<RgbImage> darkened = darken_series(series);

    const ColorHistogram base_hist = compute_histogram(base, config.hist);

    const auto evaluate = [&](const RgbImage& img, std::size_t pred_index,
                              const HistogramDistance& dist, const std::string& set,
                              double factor) {
        SegReport seg;
        if (want_seg) {
            const LabelMap pred = explicit_preds
                                      ? read_labelmap(config.prediction_paths[pred_index])
                                      : threshold_segment(img, config.threshold);
            seg = evaluate_segmentation(pred, *gt);
        }
        return study_row(set, factor, dist, want_seg ? &seg : nullptr);
    };

    StudyResult result;
    result.table.rows.push_back(
        evaluate(base, 0, histogram_distance(base_hist, base_hist), "original", 1.0));

    for (std::size_t i = 0; i < darkened.size(); ++i) {
        const ColorHistogram h = compute_histogram(darkened[i], config.hist);
        const HistogramDistance dist = histogram_distance(h, base_hist);
        char name[48];
        std::snprintf(name, sizeof(name), "factor-%g", config.factors[i]);
        result.table.rows.push_back(evaluate(darkened[i], i + 1, dist, name, config.factors[i]));

        ReportRow scatter_row;
        scatter_row.add("factor", config.factors[i]);
        scatter_row.add("h_dist", dist.hellinger);
        scatter_row.add("kl_div", dist.kl);
        result.scatter.rows.push_back(std::move(scatter_row));
    }

    result.table = make_report(result.table.rows);
    result.scatter = make_report(result.scatter.rows);
    if (config.summary) append_summary_row(result.table);

    if (config.table_path) write_report(result.table, config.format, *config.table_path);
    if (config.scatter_path) write_report(result.scatter, ReportFormat::Csv, *config.scatter_path);
    return result;
}

}  // namespace stainkit
