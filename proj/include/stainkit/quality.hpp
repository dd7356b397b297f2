#pragma once

#include <string>

#include "stainkit/histogram.hpp"
#include "stainkit/image.hpp"

namespace stainkit {

// Per-channel Laplacian responses of an image, same dimensions as the source.
struct DetailMap {
    Plane r, g, b;
};

// Weighted recoloring objective: a color term (Hellinger distance between the
// recolored image's chroma histogram and the target's) plus a reconstruction
// term (L1 between Laplacian detail maps), combined as alpha*color +
// beta*reconstruction. The adversarial realism term of the full training
// objective needs a trained discriminator and is omitted; `note` records that.
struct QualityReport {
    double l_color = 0.0;
    double l_reconstruction = 0.0;
    double alpha = 32.0;
    double beta = 1.5;
    double combined = 0.0;
    double hellinger_to_target = 0.0;
    double kl_to_target = 0.0;
    std::string note = "realism (discriminator) term omitted";
};

// 3x3 Laplacian [[0,1,0],[1,-4,1],[0,1,0]] per channel on real-valued 8-bit
// intensities, with replicate-padded borders.
DetailMap laplacian_detail(const RgbImage& img);

// Hellinger distance between the recolored image's histogram (computed with
// the target histogram's own parameters) and the target histogram.
double color_matching_loss(const RgbImage& recolored, const ColorHistogram& target_hist);

// Mean absolute difference between the two images' Laplacian detail maps,
// averaged over pixels and channels.
double reconstruction_loss(const RgbImage& source, const RgbImage& recolored);

QualityReport quality_report(const RgbImage& source, const RgbImage& recolored,
                             const RgbImage& target,
                             const HistogramParams& params = HistogramParams{});

std::string quality_report_to_json(const QualityReport& report);

}  // namespace stainkit
