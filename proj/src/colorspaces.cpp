#include "stainkit/colorspaces.hpp"

#include <Eigen/Dense>

namespace stainkit {

namespace {

// Reinhard et al. RGB->LMS matrix with each row rescaled to unit sum, so the
// achromatic axis (R = G = B) maps to identical LMS values and alpha = beta = 0
// holds exactly for gray pixels.
const Eigen::Matrix3d& rgb_to_lms() {
    static const Eigen::Matrix3d m = [] {
        Eigen::Matrix3d raw;
        raw << 0.3811, 0.5783, 0.0402,
               0.1967, 0.7244, 0.0782,
               0.0241, 0.1288, 0.8444;
        for (int i = 0; i < 3; ++i) raw.row(i) /= raw.row(i).sum();
        return raw;
    }();
    return m;
}

const Eigen::Matrix3d& lms_to_rgb() {
    static const Eigen::Matrix3d m = rgb_to_lms().inverse();
    return m;
}

constexpr double kInvSqrt3 = 0.57735026918962576451;
constexpr double kInvSqrt6 = 0.40824829046386301637;
constexpr double kInvSqrt2 = 0.70710678118654752440;

}  // namespace

LogChromaPlanes rgb_to_log_chroma(const RgbImage& img, double epsilon) {
    if (!(epsilon > 0.0)) raise(ErrorCode::ParameterError, "log-chroma epsilon must be positive");

    LogChromaPlanes out{
        Plane(img.width, img.height), Plane(img.width, img.height),
        Plane(img.width, img.height), Plane(img.width, img.height),
        Plane(img.width, img.height), Plane(img.width, img.height),
    };
    const std::size_t n = img.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        const double r = img.data[p * 3 + 0] / 255.0;
        const double g = img.data[p * 3 + 1] / 255.0;
        const double b = img.data[p * 3 + 2] / 255.0;
        const LogChroma lc = pixel_log_chroma(r, g, b, epsilon);
        out.u_r.values[p] = lc.u_r;
        out.v_r.values[p] = lc.v_r;
        out.u_g.values[p] = lc.u_g();
        out.v_g.values[p] = lc.v_g;
        out.u_b.values[p] = lc.u_b();
        out.v_b.values[p] = lc.v_b();
    }
    return out;
}

LalphabetaImage rgb_to_lalphabeta(const RgbImage& img) {
    LalphabetaImage out{Plane(img.width, img.height), Plane(img.width, img.height),
                        Plane(img.width, img.height)};
    const Eigen::Matrix3d& m = rgb_to_lms();
    const std::size_t n = img.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        // +1 offset keeps the log stage away from log(0) for pure black.
        const Eigen::Vector3d rgb(img.data[p * 3 + 0] + 1.0, img.data[p * 3 + 1] + 1.0,
                                  img.data[p * 3 + 2] + 1.0);
        const Eigen::Vector3d lms = m * rgb;
        const double lL = std::log10(lms(0));
        const double lM = std::log10(lms(1));
        const double lS = std::log10(lms(2));
        out.l.values[p] = kInvSqrt3 * (lL + lM + lS);
        out.alpha.values[p] = kInvSqrt6 * (lL + lM - 2.0 * lS);
        out.beta.values[p] = kInvSqrt2 * (lL - lM);
    }
    return out;
}

RgbImage lalphabeta_to_rgb(const LalphabetaImage& img) {
    RgbImage out(img.l.width, img.l.height);
    const Eigen::Matrix3d& m = lms_to_rgb();
    const std::size_t n = out.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        const double l = img.l.values[p] * kInvSqrt3;
        const double a = img.alpha.values[p] * kInvSqrt6;
        const double b = img.beta.values[p] * kInvSqrt2;
        const Eigen::Vector3d lms(std::pow(10.0, l + a + b), std::pow(10.0, l + a - b),
                                  std::pow(10.0, l - 2.0 * a));
        const Eigen::Vector3d rgb = m * lms;
        out.data[p * 3 + 0] = quantize_channel(rgb(0) - 1.0);
        out.data[p * 3 + 1] = quantize_channel(rgb(1) - 1.0);
        out.data[p * 3 + 2] = quantize_channel(rgb(2) - 1.0);
    }
    return out;
}

double od_from_intensity(double intensity, double i0) {
    if (!(i0 > 0.0)) raise(ErrorCode::ParameterError, "reference intensity i0 must be positive");
    const double v = intensity == 0.0 ? 1e-6 : intensity;
    return -std::log10(v / i0);
}

double intensity_from_od(double od, double i0) {
    if (!(i0 > 0.0)) raise(ErrorCode::ParameterError, "reference intensity i0 must be positive");
    return i0 * std::pow(10.0, -od);
}

OdImage rgb_to_od(const RgbImage& img, double i0) {
    if (!(i0 > 0.0)) raise(ErrorCode::ParameterError, "reference intensity i0 must be positive");
    OdImage out{Plane(img.width, img.height), Plane(img.width, img.height),
                Plane(img.width, img.height), i0};
    const std::size_t n = img.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        out.r.values[p] = od_from_intensity(img.data[p * 3 + 0], i0);
        out.g.values[p] = od_from_intensity(img.data[p * 3 + 1], i0);
        out.b.values[p] = od_from_intensity(img.data[p * 3 + 2], i0);
    }
    return out;
}

RgbImage od_to_rgb(const OdImage& od) {
    RgbImage out(od.r.width, od.r.height);
    const std::size_t n = out.pixel_count();
    for (std::size_t p = 0; p < n; ++p) {
        out.data[p * 3 + 0] = quantize_channel(intensity_from_od(od.r.values[p], od.i0));
        out.data[p * 3 + 1] = quantize_channel(intensity_from_od(od.g.values[p], od.i0));
        out.data[p * 3 + 2] = quantize_channel(intensity_from_od(od.b.values[p], od.i0));
    }
    return out;
}

ChannelStats plane_stats(const Plane& plane) {
    const std::size_t n = plane.values.size();
    if (n == 0) return {};
    double sum = 0.0;
    for (double v : plane.values) sum += v;
    const double mean = sum / static_cast<double>(n);
    double var = 0.0;
    for (double v : plane.values) {
        const double d = v - mean;
        var += d * d;
    }
    var /= static_cast<double>(n);
    return ChannelStats{mean, std::sqrt(var)};
}

}  // namespace stainkit
