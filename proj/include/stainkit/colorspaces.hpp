#pragma once

#include "stainkit/image.hpp"

namespace stainkit {

/// Epsilon for the log-chroma ratios, expressed for intensities normalized to [0, 1].
inline constexpr double kDefaultChromaEpsilon = 1.0 / 255.0;

/// Per-pixel log ratios of one channel against the other two.
/// Reciprocal pairs are exact negations: u_g = -u_r, u_b = -v_r, v_b = -v_g.
struct LogChromaPlanes {
    Plane u_r, v_r;
    Plane u_g, v_g;
    Plane u_b, v_b;
};

/// Log-chroma coordinates of a single pixel, intensities in [0, 1].
struct LogChroma {
    double u_r, v_r, v_g;

    double u_g() const { return -u_r; }
    double u_b() const { return -v_r; }
    double v_b() const { return -v_g; }
};

inline LogChroma pixel_log_chroma(double r, double g, double b, double epsilon) {
    return LogChroma{
        std::log((r + epsilon) / (g + epsilon)),
        std::log((r + epsilon) / (b + epsilon)),
        std::log((g + epsilon) / (b + epsilon)),
    };
}

LogChromaPlanes rgb_to_log_chroma(const RgbImage& img, double epsilon = kDefaultChromaEpsilon);

/// Decorrelated log space used by statistics-matching color transfer:
/// l is the achromatic axis, alpha yellow-blue, beta red-green.
struct LalphabetaImage {
    Plane l, alpha, beta;
};

LalphabetaImage rgb_to_lalphabeta(const RgbImage& img);
RgbImage lalphabeta_to_rgb(const LalphabetaImage& img);

/// Beer-Lambert optical density planes, OD_c = -log10((I_c + eps0) / i0)
/// where eps0 = 1e-6 is applied only at zero intensity.
struct OdImage {
    Plane r, g, b;
    double i0 = 255.0;
};

double od_from_intensity(double intensity, double i0 = 255.0);
double intensity_from_od(double od, double i0 = 255.0);

OdImage rgb_to_od(const RgbImage& img, double i0 = 255.0);
RgbImage od_to_rgb(const OdImage& od);

/// Population mean and standard deviation of a plane.
struct ChannelStats {
    double mean = 0.0;
    double stddev = 0.0;
};

ChannelStats plane_stats(const Plane& plane);

}  // namespace stainkit
