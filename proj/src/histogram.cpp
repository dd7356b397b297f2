#include "stainkit/histogram.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>

#include "json.hpp"

namespace stainkit {

namespace {

void check_same_shape(const ColorHistogram& a, const ColorHistogram& b) {
    if (!a.same_shape(b))
        raise(ErrorCode::ParameterError, "histogram shapes differ");
}

void store_le_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
    for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>((v >> (8 * i)) & 0xff));
}

void store_le_f64(std::vector<std::uint8_t>& out, double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof(bits));
    for (int i = 0; i < 8; ++i) out.push_back(static_cast<std::uint8_t>((bits >> (8 * i)) & 0xff));
}

std::uint32_t load_le_u32(const std::uint8_t* p) {
    std::uint32_t v = 0;
    for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
    return v;
}

double load_le_f64(const std::uint8_t* p) {
    std::uint64_t bits = 0;
    for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(p[i]) << (8 * i);
    double v;
    std::memcpy(&v, &bits, sizeof(v));
    return v;
}

constexpr char kBinaryMagic[4] = {'L', 'C', 'H', '1'};

}  // namespace

ColorHistogram compute_histogram(const RgbImage& img, const HistogramParams& params) {
    if (params.bins < 2) raise(ErrorCode::ParameterError, "histogram needs at least 2 bins");
    if (!(params.range > 0.0)) raise(ErrorCode::ParameterError, "histogram range must be positive");
    if (!(params.epsilon > 0.0)) raise(ErrorCode::ParameterError, "log-chroma epsilon must be positive");

    ColorHistogram hist(params);
    const int n = params.bins;
    const double range = params.range;
    const std::size_t count = img.pixel_count();
    for (std::size_t p = 0; p < count; ++p) {
        const double r = img.data[p * 3 + 0] / 255.0;
        const double g = img.data[p * 3 + 1] / 255.0;
        const double b = img.data[p * 3 + 2] / 255.0;
        const double w = params.weighted ? std::sqrt(r * r + g * g + b * b) : 1.0;
        if (w == 0.0) continue;
        const LogChroma lc = pixel_log_chroma(r, g, b, params.epsilon);
        hist.at(0, chroma_bin_index(lc.u_r, range, n), chroma_bin_index(lc.v_r, range, n)) += w;
        hist.at(1, chroma_bin_index(lc.u_g(), range, n), chroma_bin_index(lc.v_g, range, n)) += w;
        hist.at(2, chroma_bin_index(lc.u_b(), range, n), chroma_bin_index(lc.v_b(), range, n)) += w;
    }

    double total = 0.0;
    for (double v : hist.bins) total += v;
    if (!(total > 0.0))
        raise(ErrorCode::EmptyHistogram, "image carries no histogram mass (all-black input)");
    for (double& v : hist.bins) v /= total;
    return hist;
}

ColorHistogram compute_histogram(const RgbImage& img, int bins, double range, double epsilon,
                                 bool weighted) {
    return compute_histogram(img, HistogramParams{bins, range, epsilon, weighted});
}

double hellinger_distance(const ColorHistogram& a, const ColorHistogram& b) {
    check_same_shape(a, b);
    double sum = 0.0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        const double d = std::sqrt(a.bins[i]) - std::sqrt(b.bins[i]);
        sum += d * d;
    }
    const double h = std::sqrt(0.5 * sum);
    return std::clamp(h, 0.0, 1.0);
}

double kl_divergence(const ColorHistogram& a, const ColorHistogram& b, double smoothing) {
    check_same_shape(a, b);
    if (smoothing < 0.0) raise(ErrorCode::ParameterError, "KL smoothing must be non-negative");

    const double count = static_cast<double>(a.bins.size());
    double za = smoothing * count;
    double zb = smoothing * count;
    for (double v : a.bins) za += v;
    for (double v : b.bins) zb += v;

    double kl = 0.0;
    for (std::size_t i = 0; i < a.bins.size(); ++i) {
        const double p = (a.bins[i] + smoothing) / za;
        const double q = (b.bins[i] + smoothing) / zb;
        if (p > 0.0) kl += p * std::log(p / q);
    }
    return std::max(kl, 0.0);
}

HistogramDistance histogram_distance(const ColorHistogram& a, const ColorHistogram& b,
                                     double smoothing) {
    return HistogramDistance{hellinger_distance(a, b), kl_divergence(a, b, smoothing)};
}

std::string histogram_to_json(const ColorHistogram& hist) {
    nlohmann::ordered_json j;
    j["n"] = hist.n;
    j["range"] = hist.range;
    j["epsilon"] = hist.epsilon;
    j["weighted"] = hist.weighted;
    j["bins"] = hist.bins;
    return j.dump();
}

ColorHistogram histogram_from_json(const std::string& text) {
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::UnsupportedFormat, std::string("invalid histogram JSON: ") + e.what());
    }
    ColorHistogram hist;
    try {
        hist.n = j.at("n").get<int>();
        hist.range = j.at("range").get<double>();
        hist.epsilon = j.at("epsilon").get<double>();
        hist.weighted = j.at("weighted").get<bool>();
        hist.bins = j.at("bins").get<std::vector<double>>();
    } catch (const nlohmann::json::exception& e) {
        raise(ErrorCode::UnsupportedFormat, std::string("invalid histogram JSON: ") + e.what());
    }
    if (hist.n < 2 || hist.bins.size() != static_cast<std::size_t>(3) * hist.n * hist.n)
        raise(ErrorCode::UnsupportedFormat, "histogram JSON bin count does not match n");
    return hist;
}

std::vector<std::uint8_t> histogram_to_binary(const ColorHistogram& hist) {
    std::vector<std::uint8_t> out;
    out.reserve(25 + hist.bins.size() * 8);
    out.insert(out.end(), kBinaryMagic, kBinaryMagic + 4);
    store_le_u32(out, static_cast<std::uint32_t>(hist.n));
    store_le_f64(out, hist.range);
    store_le_f64(out, hist.epsilon);
    out.push_back(hist.weighted ? 1 : 0);
    for (double v : hist.bins) store_le_f64(out, v);
    return out;
}

ColorHistogram histogram_from_binary(const std::vector<std::uint8_t>& bytes) {
    if (bytes.size() < 25 || std::memcmp(bytes.data(), kBinaryMagic, 4) != 0)
        raise(ErrorCode::UnsupportedFormat, "not an LCH1 histogram blob");
    ColorHistogram hist;
    hist.n = static_cast<int>(load_le_u32(bytes.data() + 4));
    hist.range = load_le_f64(bytes.data() + 8);
    hist.epsilon = load_le_f64(bytes.data() + 16);
    hist.weighted = bytes[24] != 0;
    if (hist.n < 2) raise(ErrorCode::UnsupportedFormat, "LCH1 blob has invalid bin count");
    const std::size_t expected = static_cast<std::size_t>(3) * hist.n * hist.n;
    if (bytes.size() != 25 + expected * 8)
        raise(ErrorCode::UnsupportedFormat, "LCH1 blob length does not match header");
    hist.bins.resize(expected);
    for (std::size_t i = 0; i < expected; ++i)
        hist.bins[i] = load_le_f64(bytes.data() + 25 + i * 8);
    return hist;
}

}  // namespace stainkit
