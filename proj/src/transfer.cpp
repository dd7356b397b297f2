#include "stainkit/transfer.hpp"

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "stainkit/error.hpp"

namespace stainkit {

namespace {

constexpr int kMinTissuePixels = 100;
constexpr double kRankRatio = 0.01;       // sigma2/sigma1 below this is rank-1
constexpr double kRescalePercentile = 99.0;

void require_nonempty(const RgbImage& img, const char* what) {
    if (img.width < 1 || img.height < 1 || img.data.empty())
        raise(ErrorCode::ParameterError, std::string(what) + " image is empty");
}

Eigen::Matrix3Xd od_matrix(const RgbImage& img) {
    const OdImage od = rgb_to_od(img);
    const std::size_t n = img.pixel_count();
    Eigen::Matrix3Xd m(3, static_cast<Eigen::Index>(n));
    for (std::size_t i = 0; i < n; ++i) {
        m(0, static_cast<Eigen::Index>(i)) = od.r.values[i];
        m(1, static_cast<Eigen::Index>(i)) = od.g.values[i];
        m(2, static_cast<Eigen::Index>(i)) = od.b.values[i];
    }
    return m;
}

RgbImage od_matrix_to_rgb(const Eigen::Matrix3Xd& m, int width, int height) {
    OdImage od;
    od.r = Plane(width, height);
    od.g = Plane(width, height);
    od.b = Plane(width, height);
    const std::size_t n = od.r.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        od.r.values[i] = m(0, static_cast<Eigen::Index>(i));
        od.g.values[i] = m(1, static_cast<Eigen::Index>(i));
        od.b.values[i] = m(2, static_cast<Eigen::Index>(i));
    }
    return od_to_rgb(od);
}

Eigen::Matrix<double, 3, Eigen::Dynamic> stain_basis(const StainMatrix& stains) {
    Eigen::Matrix<double, 3, Eigen::Dynamic> s(3, stains.stain_count());
    for (int j = 0; j < stains.stain_count(); ++j)
        for (int c = 0; c < 3; ++c) s(c, j) = stains.columns[j][c];
    return s;
}

// Least-squares concentrations against the basis, clamped at zero.
Eigen::MatrixXd solve_concentrations(const Eigen::Matrix3Xd& od,
                                     const Eigen::Matrix<double, 3, Eigen::Dynamic>& s) {
    const Eigen::MatrixXd gram = s.transpose() * s;
    Eigen::MatrixXd c = gram.ldlt().solve(s.transpose() * od);
    return c.cwiseMax(0.0);
}

std::vector<double> plane_of_row(const Eigen::MatrixXd& c, int row) {
    std::vector<double> v(static_cast<std::size_t>(c.cols()));
    for (Eigen::Index i = 0; i < c.cols(); ++i) v[static_cast<std::size_t>(i)] = c(row, i);
    return v;
}

ConcentrationMap concentration_map_from(const Eigen::MatrixXd& c, int width, int height) {
    ConcentrationMap map;
    map.width = width;
    map.height = height;
    for (Eigen::Index j = 0; j < c.rows(); ++j) {
        Plane p(width, height);
        for (Eigen::Index i = 0; i < c.cols(); ++i)
            p.values[static_cast<std::size_t>(i)] = c(j, i);
        map.planes.push_back(std::move(p));
    }
    return map;
}

// Rescales each source concentration row so its 99th percentile matches the
// target's, the robust-maximum convention of stain normalization.
void rescale_rows_to_target(Eigen::MatrixXd& c_src, const Eigen::MatrixXd& c_tgt) {
    for (Eigen::Index j = 0; j < c_src.rows() && j < c_tgt.rows(); ++j) {
        const double p_src = percentile(plane_of_row(c_src, static_cast<int>(j)), kRescalePercentile);
        const double p_tgt = percentile(plane_of_row(c_tgt, static_cast<int>(j)), kRescalePercentile);
        if (p_src > 0.0) c_src.row(j) *= p_tgt / p_src;
    }
}

struct OdEigenBasis {
    Eigen::Vector3d e1, e2, e3;  // descending eigenvalue order, signs canonical
    Eigen::Matrix3Xd tissue;     // OD vectors above the tissue threshold
};

OdEigenBasis tissue_eigenbasis(const RgbImage& img, double beta_od) {
    if (beta_od <= 0.0) raise(ErrorCode::ParameterError, "tissue threshold must be positive");
    const Eigen::Matrix3Xd od = od_matrix(img);

    std::vector<Eigen::Index> keep;
    for (Eigen::Index i = 0; i < od.cols(); ++i)
        if (od.col(i).norm() > beta_od) keep.push_back(i);
    if (keep.size() < kMinTissuePixels)
        raise(ErrorCode::LowSignal,
              "too few tissue pixels above the optical-density threshold (" +
                  std::to_string(keep.size()) + " < " + std::to_string(kMinTissuePixels) + ")");

    OdEigenBasis basis;
    basis.tissue.resize(3, static_cast<Eigen::Index>(keep.size()));
    for (std::size_t i = 0; i < keep.size(); ++i) basis.tissue.col(static_cast<Eigen::Index>(i)) = od.col(keep[i]);

    const Eigen::Matrix3d moment =
        basis.tissue * basis.tissue.transpose() / static_cast<double>(keep.size());
    Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> solver(moment);
    if (solver.info() != Eigen::Success)
        raise(ErrorCode::DegenerateRank, "eigendecomposition of the OD moment matrix failed");
    const Eigen::Vector3d evals = solver.eigenvalues();  // ascending
    const double s1 = std::sqrt(std::max(0.0, evals(2)));
    const double s2 = std::sqrt(std::max(0.0, evals(1)));
    if (s1 <= 0.0 || s2 < kRankRatio * s1)
        raise(ErrorCode::DegenerateRank, "optical densities span a single stain direction");

    basis.e1 = solver.eigenvectors().col(2);
    basis.e2 = solver.eigenvectors().col(1);
    basis.e3 = solver.eigenvectors().col(0);
    // Canonical signs: the summed tissue projection on each axis is >= 0.
    Eigen::Vector3d proj_sum = basis.tissue.rowwise().sum();
    if (basis.e1.dot(proj_sum) < 0.0) basis.e1 = -basis.e1;
    if (basis.e2.dot(proj_sum) < 0.0) basis.e2 = -basis.e2;
    if (basis.e3.dot(proj_sum) < 0.0) basis.e3 = -basis.e3;
    return basis;
}

std::array<double, 3> to_unit_nonneg_column(Eigen::Vector3d v) {
    v = v.cwiseMax(0.0);
    const double norm = v.norm();
    if (norm <= 0.0)
        raise(ErrorCode::DegenerateRank, "estimated stain direction collapsed to zero");
    v /= norm;
    return {v(0), v(1), v(2)};
}

// ---- exact histogram matching helpers ----

// Integer sums over replicate-padded square neighborhoods; with a fixed
// sample count per pixel these order identically to the neighborhood means.
std::vector<std::uint32_t> neighborhood_sums(const RgbImage& img, int channel, int radius) {
    std::vector<std::uint32_t> sums(img.pixel_count());
    for (int y = 0; y < img.height; ++y) {
        for (int x = 0; x < img.width; ++x) {
            std::uint32_t s = 0;
            for (int dy = -radius; dy <= radius; ++dy) {
                const int yy = std::clamp(y + dy, 0, img.height - 1);
                for (int dx = -radius; dx <= radius; ++dx) {
                    const int xx = std::clamp(x + dx, 0, img.width - 1);
                    s += img.at(xx, yy, channel);
                }
            }
            sums[static_cast<std::size_t>(y) * img.width + x] = s;
        }
    }
    return sums;
}

std::array<std::uint64_t, 256> channel_histogram(const RgbImage& img, int channel) {
    std::array<std::uint64_t, 256> h{};
    const std::size_t n = img.pixel_count();
    for (std::size_t i = 0; i < n; ++i) h[img.data[i * 3 + channel]]++;
    return h;
}

// Apportions the target histogram to `total` pixels by largest remainder,
// ties resolved toward lower bins. Exact when the pixel counts already match.
std::array<std::uint64_t, 256> resample_histogram(const std::array<std::uint64_t, 256>& target,
                                                  std::uint64_t target_total,
                                                  std::uint64_t total) {
    std::array<std::uint64_t, 256> out{};
    if (target_total == 0) return out;
    std::uint64_t assigned = 0;
    std::array<std::uint64_t, 256> remainder{};
    for (int v = 0; v < 256; ++v) {
        const unsigned __int128 num =
            static_cast<unsigned __int128>(target[v]) * static_cast<unsigned __int128>(total);
        out[v] = static_cast<std::uint64_t>(num / target_total);
        remainder[v] = static_cast<std::uint64_t>(num % target_total);
        assigned += out[v];
    }
    // Largest-remainder apportionment; at most 255 counts remain, spent on the
    // bins with the largest fractional parts, ties toward lower bins.
    std::array<int, 256> order;
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(),
                     [&remainder](int a, int b) { return remainder[a] > remainder[b]; });
    for (int i = 0; assigned < total && i < 256; ++i) {
        ++out[order[static_cast<std::size_t>(i)]];
        ++assigned;
    }
    return out;
}

void histogram_match_cdf_channel(const RgbImage& source, const RgbImage& target, int channel,
                                 RgbImage& out) {
    const auto hs = channel_histogram(source, channel);
    const auto ht = channel_histogram(target, channel);
    const std::uint64_t ns = source.pixel_count();
    const std::uint64_t nt = target.pixel_count();

    std::array<std::uint64_t, 256> cum_s{}, cum_t{};
    std::uint64_t acc = 0;
    for (int v = 0; v < 256; ++v) {
        acc += hs[v];
        cum_s[v] = acc;
    }
    acc = 0;
    for (int v = 0; v < 256; ++v) {
        acc += ht[v];
        cum_t[v] = acc;
    }

    // m(v) = smallest u with cumT(u)/nt >= cumS(v)/ns, in exact integer form.
    std::array<std::uint8_t, 256> lut{};
    int u = 0;
    for (int v = 0; v < 256; ++v) {
        while (u < 255 &&
               static_cast<unsigned __int128>(cum_t[u]) * ns <
                   static_cast<unsigned __int128>(cum_s[v]) * nt)
            ++u;
        lut[v] = static_cast<std::uint8_t>(u);
    }

    const std::size_t n = source.pixel_count();
    for (std::size_t i = 0; i < n; ++i) out.data[i * 3 + channel] = lut[source.data[i * 3 + channel]];
}

void histogram_match_exact_channel(const RgbImage& source, const RgbImage& target, int channel,
                                   RgbImage& out) {
    const std::size_t n = source.pixel_count();
    const auto sum3 = neighborhood_sums(source, channel, 1);
    const auto sum5 = neighborhood_sums(source, channel, 2);

    std::vector<std::uint32_t> order(n);
    std::iota(order.begin(), order.end(), 0u);
    std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
        const std::uint8_t va = source.data[static_cast<std::size_t>(a) * 3 + channel];
        const std::uint8_t vb = source.data[static_cast<std::size_t>(b) * 3 + channel];
        if (va != vb) return va < vb;
        if (sum3[a] != sum3[b]) return sum3[a] < sum3[b];
        if (sum5[a] != sum5[b]) return sum5[a] < sum5[b];
        return a < b;
    });

    const auto ht = channel_histogram(target, channel);
    const auto counts = resample_histogram(ht, target.pixel_count(), n);

    std::size_t pos = 0;
    for (int v = 0; v < 256; ++v)
        for (std::uint64_t k = 0; k < counts[v]; ++k)
            out.data[static_cast<std::size_t>(order[pos++]) * 3 + channel] =
                static_cast<std::uint8_t>(v);
}

}  // namespace

std::string stain_matrix_to_json(const StainMatrix& m) {
    nlohmann::ordered_json j;
    j["columns"] = nlohmann::ordered_json::array();
    for (const auto& col : m.columns) j["columns"].push_back({col[0], col[1], col[2]});
    j["space"] = "od";
    return j.dump(2) + "\n";
}

StainMatrix stain_matrix_from_json(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::UnsupportedFormat, std::string("invalid stain matrix JSON: ") + e.what());
    }
    if (!j.contains("columns") || !j["columns"].is_array())
        raise(ErrorCode::UnsupportedFormat, "stain matrix JSON lacks a columns array");
    StainMatrix m;
    for (const auto& col : j["columns"]) {
        if (!col.is_array() || col.size() != 3)
            raise(ErrorCode::UnsupportedFormat, "stain matrix columns must have 3 components");
        m.columns.push_back({col[0].get<double>(), col[1].get<double>(), col[2].get<double>()});
    }
    return m;
}

TransferMethod transfer_method_from_name(const std::string& name) {
    if (name == "reinhard") return TransferMethod::Reinhard;
    if (name == "macenko") return TransferMethod::Macenko;
    if (name == "vahadane") return TransferMethod::Vahadane;
    if (name == "histmatch") return TransferMethod::HistMatch;
    raise(ErrorCode::ParameterError, "unknown transfer method: " + name);
}

std::string transfer_method_name(TransferMethod method) {
    switch (method) {
        case TransferMethod::Reinhard: return "reinhard";
        case TransferMethod::Macenko: return "macenko";
        case TransferMethod::Vahadane: return "vahadane";
        case TransferMethod::HistMatch: return "histmatch";
    }
    raise(ErrorCode::ParameterError, "invalid transfer method value");
}

double percentile(std::vector<double> values, double p) {
    if (values.empty()) raise(ErrorCode::ParameterError, "percentile of an empty sample");
    if (p < 0.0 || p > 100.0) raise(ErrorCode::ParameterError, "percentile must be in [0, 100]");
    std::sort(values.begin(), values.end());
    const double rank = p / 100.0 * static_cast<double>(values.size() - 1);
    const std::size_t lo = static_cast<std::size_t>(std::floor(rank));
    const std::size_t hi = std::min(lo + 1, values.size() - 1);
    const double frac = rank - static_cast<double>(lo);
    return values[lo] * (1.0 - frac) + values[hi] * frac;
}

LalphabetaImage reinhard_transfer_planes(const RgbImage& source, const RgbImage& target) {
    require_nonempty(source, "source");
    require_nonempty(target, "target");
    const LalphabetaImage src = rgb_to_lalphabeta(source);
    const LalphabetaImage tgt = rgb_to_lalphabeta(target);

    LalphabetaImage out;
    const Plane* src_planes[3] = {&src.l, &src.alpha, &src.beta};
    const Plane* tgt_planes[3] = {&tgt.l, &tgt.alpha, &tgt.beta};
    Plane* out_planes[3] = {&out.l, &out.alpha, &out.beta};
    for (int c = 0; c < 3; ++c) {
        const ChannelStats ss = plane_stats(*src_planes[c]);
        const ChannelStats ts = plane_stats(*tgt_planes[c]);
        Plane p(source.width, source.height);
        // A constant channel leaves rounding residue in the spread, so treat
        // anything at that scale as zero variance rather than amplifying it.
        if (ss.stddev <= 1e-9 * std::max(1.0, std::abs(ss.mean))) {
            std::fill(p.values.begin(), p.values.end(), ts.mean);
        } else {
            const double gain = ts.stddev / ss.stddev;
            for (std::size_t i = 0; i < p.values.size(); ++i)
                p.values[i] = (src_planes[c]->values[i] - ss.mean) * gain + ts.mean;
        }
        *out_planes[c] = std::move(p);
    }
    return out;
}

RgbImage reinhard_transfer(const RgbImage& source, const RgbImage& target) {
    return lalphabeta_to_rgb(reinhard_transfer_planes(source, target));
}

StainMatrix macenko_estimate_stains(const RgbImage& img, const MacenkoParams& params) {
    require_nonempty(img, "input");
    if (params.alpha_pct <= 0.0 || params.alpha_pct >= 50.0)
        raise(ErrorCode::ParameterError, "angle percentile must be in (0, 50)");
    const OdEigenBasis basis = tissue_eigenbasis(img, params.beta_od);

    std::vector<double> angles(static_cast<std::size_t>(basis.tissue.cols()));
    for (Eigen::Index i = 0; i < basis.tissue.cols(); ++i) {
        const Eigen::Vector3d od = basis.tissue.col(i);
        angles[static_cast<std::size_t>(i)] = std::atan2(basis.e2.dot(od), basis.e1.dot(od));
    }
    const double phi_lo = percentile(angles, params.alpha_pct);
    const double phi_hi = percentile(angles, 100.0 - params.alpha_pct);

    StainMatrix m;
    m.columns.push_back(
        to_unit_nonneg_column(std::cos(phi_lo) * basis.e1 + std::sin(phi_lo) * basis.e2));
    m.columns.push_back(
        to_unit_nonneg_column(std::cos(phi_hi) * basis.e1 + std::sin(phi_hi) * basis.e2));
    return m;
}

ConcentrationMap stain_concentrations(const RgbImage& img, const StainMatrix& stains) {
    require_nonempty(img, "input");
    if (stains.stain_count() < 1) raise(ErrorCode::ParameterError, "stain matrix is empty");
    const Eigen::MatrixXd c = solve_concentrations(od_matrix(img), stain_basis(stains));
    return concentration_map_from(c, img.width, img.height);
}

RgbImage macenko_normalize(const RgbImage& source, const RgbImage& target,
                           const MacenkoParams& params) {
    const StainMatrix s_src = macenko_estimate_stains(source, params);
    const StainMatrix s_tgt = macenko_estimate_stains(target, params);

    Eigen::MatrixXd c_src = solve_concentrations(od_matrix(source), stain_basis(s_src));
    const Eigen::MatrixXd c_tgt = solve_concentrations(od_matrix(target), stain_basis(s_tgt));
    rescale_rows_to_target(c_src, c_tgt);

    const Eigen::Matrix3Xd od_out = stain_basis(s_tgt) * c_src;
    return od_matrix_to_rgb(od_out, source.width, source.height);
}

VahadaneFit vahadane_fit_dictionary(const RgbImage& img, const VahadaneParams& params) {
    require_nonempty(img, "input");
    if (params.stains < 2 || params.stains > 3)
        raise(ErrorCode::ParameterError, "dictionary supports 2 or 3 stains");
    if (params.iters < 1) raise(ErrorCode::ParameterError, "iteration count must be positive");
    if (params.lambda_sparse < 0.0)
        raise(ErrorCode::ParameterError, "sparsity weight must be non-negative");

    const int k = params.stains;
    const double lambda = params.lambda_sparse;

    // Geometric initialization; also enforces the tissue-signal precondition.
    const StainMatrix init = macenko_estimate_stains(img, params.init);
    Eigen::MatrixXd s(3, k);
    for (int j = 0; j < 2; ++j)
        for (int c = 0; c < 3; ++c) s(c, j) = init.columns[static_cast<std::size_t>(j)][c];
    if (k == 3) {
        const OdEigenBasis basis = tissue_eigenbasis(img, params.init.beta_od);
        Eigen::Vector3d third = basis.e3.cwiseMax(0.0);
        if (third.norm() <= 0.0) third = Eigen::Vector3d::Constant(1.0);
        s.col(2) = third / third.norm();
    }

    const Eigen::Matrix3Xd x = od_matrix(img);
    const Eigen::Index n = x.cols();
    Eigen::MatrixXd c = Eigen::MatrixXd::Zero(k, n);

    VahadaneFit fit;
    const auto objective = [&]() {
        return (x - s * c).squaredNorm() + lambda * c.sum();
    };
    fit.objective.push_back(objective());

    constexpr int kInnerSweeps = 20;
    for (int iter = 0; iter < params.iters; ++iter) {
        // Concentration step: projected coordinate descent per pixel on
        // ||x - S c||^2 + lambda * sum(c), c >= 0.
        const Eigen::MatrixXd gram = s.transpose() * s;        // k x k
        const Eigen::MatrixXd sx = s.transpose() * x;          // k x n
        for (int sweep = 0; sweep < kInnerSweeps; ++sweep) {
            for (int j = 0; j < k; ++j) {
                const double gjj = gram(j, j);
                if (gjj <= 1e-12) {
                    c.row(j).setZero();
                    continue;
                }
                // numer = s_j'x - sum_{i != j} G_ji c_i - lambda/2
                Eigen::RowVectorXd numer = sx.row(j) - gram.row(j) * c;
                numer.array() += gjj * c.row(j).array() - lambda / 2.0;
                c.row(j) = (numer / gjj).cwiseMax(0.0);
            }
        }

        // Dictionary step: exact column minimization with projection onto the
        // non-negative unit ball (exact because the column quadratic is
        // isotropic).
        const Eigen::MatrixXd a = c * c.transpose();  // k x k
        const Eigen::MatrixXd b = x * c.transpose();  // 3 x k
        for (int j = 0; j < k; ++j) {
            const double ajj = a(j, j);
            if (ajj <= 1e-12) continue;  // unused atom; keep its direction
            Eigen::Vector3d r = b.col(j);
            for (int i = 0; i < k; ++i)
                if (i != j) r -= s.col(i) * a(i, j);
            r /= ajj;
            r = r.cwiseMax(0.0);
            const double norm = r.norm();
            if (norm > 1.0) r /= norm;
            s.col(j) = r;
        }
        fit.objective.push_back(objective());
    }

    // Normalize columns to exactly unit length, moving the scale into the
    // concentrations; this preserves S*C and can only shrink the L1 term.
    for (int j = 0; j < k; ++j) {
        const double norm = s.col(j).norm();
        if (norm > 0.0) {
            s.col(j) /= norm;
            c.row(j) *= norm;
        } else {
            for (int comp = 0; comp < 3; ++comp)
                s(comp, j) = init.columns[static_cast<std::size_t>(std::min(j, 1))][comp];
        }
    }
    fit.objective.push_back(objective());

    fit.stains.columns.resize(static_cast<std::size_t>(k));
    for (int j = 0; j < k; ++j)
        fit.stains.columns[static_cast<std::size_t>(j)] = {s(0, j), s(1, j), s(2, j)};
    fit.concentrations = concentration_map_from(c, img.width, img.height);
    return fit;
}

RgbImage vahadane_normalize(const RgbImage& source, const RgbImage& target,
                            const VahadaneParams& params) {
    const VahadaneFit fit_src = vahadane_fit_dictionary(source, params);
    const VahadaneFit fit_tgt = vahadane_fit_dictionary(target, params);

    // The sparsity penalty shrinks the fitted concentrations; for recoloring,
    // re-derive them as the plain non-negative projection onto each dictionary
    // so that target == source reproduces the source.
    Eigen::MatrixXd c_src =
        solve_concentrations(od_matrix(source), stain_basis(fit_src.stains));
    const Eigen::MatrixXd c_tgt =
        solve_concentrations(od_matrix(target), stain_basis(fit_tgt.stains));
    rescale_rows_to_target(c_src, c_tgt);

    const Eigen::Matrix3Xd od_out = stain_basis(fit_tgt.stains) * c_src;
    return od_matrix_to_rgb(od_out, source.width, source.height);
}

RgbImage histogram_match(const RgbImage& source, const RgbImage& target, bool exact) {
    require_nonempty(source, "source");
    require_nonempty(target, "target");
    RgbImage out(source.width, source.height);
    for (int channel = 0; channel < 3; ++channel) {
        if (exact)
            histogram_match_exact_channel(source, target, channel, out);
        else
            histogram_match_cdf_channel(source, target, channel, out);
    }
    return out;
}

RgbImage apply_transfer(TransferMethod method, const RgbImage& source, const RgbImage& target,
                        const TransferOptions& options) {
    switch (method) {
        case TransferMethod::Reinhard: return reinhard_transfer(source, target);
        case TransferMethod::Macenko: return macenko_normalize(source, target, options.macenko);
        case TransferMethod::Vahadane: return vahadane_normalize(source, target, options.vahadane);
        case TransferMethod::HistMatch:
            return histogram_match(source, target, options.exact_histogram);
    }
    raise(ErrorCode::ParameterError, "invalid transfer method value");
}

}  // namespace stainkit
