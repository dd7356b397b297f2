#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "stainkit/histogram.hpp"
#include "stainkit/image.hpp"
#include "stainkit/io.hpp"
#include "stainkit/synth.hpp"

namespace stainkit {

// Configuration for the two built-in experiments:
//  (a) darkening-series color drift: Hellinger/KL distance of each darkened
//      set against the base, and
//  (b) when segmentations are available, how the segmentation scores move
//      with that color drift.
struct StudyConfig {
    // Exactly one base source: an image file or a synthesis spec.
    std::optional<std::filesystem::path> base_image;
    std::optional<SynthSpec> synth;

    std::vector<double> factors;  // strictly increasing, >= 1
    HistogramParams hist;

    // Segmentation sources, all optional:
    //  - ground truth comes from `gt_path` or from blob-cells synthesis;
    //  - predictions come from `prediction_paths` (original first, then one
    //    per factor) or from the built-in threshold segmenter.
    std::optional<std::filesystem::path> gt_path;
    std::vector<std::filesystem::path> prediction_paths;
    bool threshold_segmenter = false;
    double threshold = 180.0;

    std::optional<std::filesystem::path> table_path;    // report destination
    std::optional<std::filesystem::path> scatter_path;  // CSV: factor, h_dist, kl_div
    ReportFormat format = ReportFormat::Csv;
    bool summary = false;  // append a mean ± std row to the table
};

StudyConfig study_config_from_json(const std::string& text);

struct StudyResult {
    Report table;     // one "original" row plus one row per factor
    Report scatter;   // columns: factor, h_dist, kl_div (factor rows only)
};

// Foreground = pixels with mean intensity below `threshold`, labeled into
// 8-connected instances.
LabelMap threshold_segment(const RgbImage& img, double threshold);

StudyResult run_study(const StudyConfig& config);

}  // namespace stainkit
