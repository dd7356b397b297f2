#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stainkit/colorspaces.hpp"
#include "stainkit/image.hpp"

namespace stainkit {

struct HistogramParams {
    int bins = 64;
    double range = 3.0;
    double epsilon = kDefaultChromaEpsilon;
    bool weighted = true;
};

/// Normalized n x n x 3 log-chroma color histogram.
/// Storage is channel-major: index = (channel * n + u_bin) * n + v_bin,
/// channel 0/1/2 holding the R/G/B chroma planes.
struct ColorHistogram {
    int n = 64;
    double range = 3.0;
    double epsilon = kDefaultChromaEpsilon;
    bool weighted = true;
    std::vector<double> bins;

    ColorHistogram() = default;
    explicit ColorHistogram(const HistogramParams& p)
        : n(p.bins), range(p.range), epsilon(p.epsilon), weighted(p.weighted),
          bins(static_cast<std::size_t>(3) * p.bins * p.bins, 0.0) {}

    HistogramParams params() const { return HistogramParams{n, range, epsilon, weighted}; }

    double& at(int channel, int u, int v) {
        return bins[(static_cast<std::size_t>(channel) * n + u) * n + v];
    }
    double at(int channel, int u, int v) const {
        return bins[(static_cast<std::size_t>(channel) * n + u) * n + v];
    }

    bool same_shape(const ColorHistogram& other) const {
        return n == other.n && bins.size() == other.bins.size();
    }

    bool operator==(const ColorHistogram&) const = default;
};

/// Bin index for a clamped log-chroma coordinate in [-range, range].
inline int chroma_bin_index(double value, double range, int n) {
    if (value <= -range) return 0;
    if (value >= range) return n - 1;
    int idx = static_cast<int>((value + range) / (2.0 * range) * n);
    return idx >= n ? n - 1 : idx;
}

ColorHistogram compute_histogram(const RgbImage& img, const HistogramParams& params);
ColorHistogram compute_histogram(const RgbImage& img, int bins = 64, double range = 3.0,
                                 double epsilon = kDefaultChromaEpsilon, bool weighted = true);

double hellinger_distance(const ColorHistogram& a, const ColorHistogram& b);
double kl_divergence(const ColorHistogram& a, const ColorHistogram& b, double smoothing = 1e-8);

struct HistogramDistance {
    double hellinger = 0.0;
    double kl = 0.0;
};

HistogramDistance histogram_distance(const ColorHistogram& a, const ColorHistogram& b,
                                     double smoothing = 1e-8);

// Serialization. JSON carries {n, range, epsilon, weighted, bins}; the binary
// form is the "LCH1" layout: magic, u32 n, f64 range, f64 epsilon, u8 weighted,
// then 3*n*n little-endian f64 bins in storage order.
std::string histogram_to_json(const ColorHistogram& hist);
ColorHistogram histogram_from_json(const std::string& text);
std::vector<std::uint8_t> histogram_to_binary(const ColorHistogram& hist);
ColorHistogram histogram_from_binary(const std::vector<std::uint8_t>& bytes);

}  // namespace stainkit
