#include "stainkit/quality.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"
#include "stainkit/error.hpp"

namespace stainkit {

namespace {

Plane laplacian_plane(const RgbImage& img, int channel) {
    Plane out(img.width, img.height);
    const auto sample = [&](int x, int y) {
        x = std::clamp(x, 0, img.width - 1);
        y = std::clamp(y, 0, img.height - 1);
        return static_cast<double>(img.at(x, y, channel));
    };
    for (int y = 0; y < img.height; ++y)
        for (int x = 0; x < img.width; ++x)
            out.values[static_cast<std::size_t>(y) * img.width + x] =
                sample(x - 1, y) + sample(x + 1, y) + sample(x, y - 1) + sample(x, y + 1) -
                4.0 * sample(x, y);
    return out;
}

}  // namespace

DetailMap laplacian_detail(const RgbImage& img) {
    if (img.width < 1 || img.height < 1)
        raise(ErrorCode::ParameterError, "detail map needs a non-empty image");
    return {laplacian_plane(img, 0), laplacian_plane(img, 1), laplacian_plane(img, 2)};
}

double color_matching_loss(const RgbImage& recolored, const ColorHistogram& target_hist) {
    const ColorHistogram h = compute_histogram(recolored, target_hist.params());
    return hellinger_distance(h, target_hist);
}

double reconstruction_loss(const RgbImage& source, const RgbImage& recolored) {
    if (!source.same_size(recolored))
        raise(ErrorCode::ParameterError, "images differ in size");
    const DetailMap a = laplacian_detail(source);
    const DetailMap b = laplacian_detail(recolored);
    double sum = 0.0;
    const std::size_t n = a.r.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        sum += std::abs(a.r.values[i] - b.r.values[i]);
        sum += std::abs(a.g.values[i] - b.g.values[i]);
        sum += std::abs(a.b.values[i] - b.b.values[i]);
    }
    return sum / (3.0 * static_cast<double>(n));
}

QualityReport quality_report(const RgbImage& source, const RgbImage& recolored,
                             const RgbImage& target, const HistogramParams& params) {
    QualityReport report;
    const ColorHistogram target_hist = compute_histogram(target, params);
    const ColorHistogram recolored_hist = compute_histogram(recolored, params);
    report.l_color = hellinger_distance(recolored_hist, target_hist);
    report.l_reconstruction = reconstruction_loss(source, recolored);
    report.combined = report.alpha * report.l_color + report.beta * report.l_reconstruction;
    report.hellinger_to_target = report.l_color;
    report.kl_to_target = kl_divergence(recolored_hist, target_hist);
    return report;
}

std::string quality_report_to_json(const QualityReport& report) {
    nlohmann::ordered_json j;
    j["l_color"] = report.l_color;
    j["l_reconstruction"] = report.l_reconstruction;
    j["alpha"] = report.alpha;
    j["beta"] = report.beta;
    j["combined"] = report.combined;
    j["hellinger_to_target"] = report.hellinger_to_target;
    j["kl_to_target"] = report.kl_to_target;
    j["note"] = report.note;
    return j.dump(2) + "\n";
}

}  // namespace stainkit
