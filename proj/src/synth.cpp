#include "stainkit/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "json.hpp"
#include "stainkit/colorspaces.hpp"
#include "stainkit/error.hpp"

namespace stainkit {

namespace {

// Portable deterministic uniforms in [0, 1): the top 53 bits of a 64-bit
// Mersenne Twister draw, so results do not depend on the standard library's
// distribution implementations.
class Uniform01 {
public:
    explicit Uniform01(std::uint64_t seed) : rng_(seed) {}
    double next() {
        return static_cast<double>(rng_() >> 11) * (1.0 / 9007199254740992.0);
    }
    double next_in(double lo, double hi) { return lo + next() * (hi - lo); }

private:
    std::mt19937_64 rng_;
};

struct Cell {
    double cx, cy;    // center
    double a, b;      // semi-axes (a >= b)
    double cos_t, sin_t;
    double conc;
    double bound;     // conservative collision radius
};

void validate_spec(const SynthSpec& spec) {
    if (spec.width < 1 || spec.height < 1)
        raise(ErrorCode::ParameterError, "synthesis needs positive dimensions");
    if (spec.sparse_density < 0.0 || spec.sparse_density > 1.0)
        raise(ErrorCode::ParameterError, "stain activation density must be in [0, 1]");
    if (spec.sparse_conc_min < 0.0 || spec.sparse_conc_max < spec.sparse_conc_min)
        raise(ErrorCode::ParameterError, "invalid concentration range");
    if (spec.cell_radius_min < 1.0 || spec.cell_radius_max < spec.cell_radius_min)
        raise(ErrorCode::ParameterError, "invalid cell radius range");
    if (spec.cell_conc_min < 0.0 || spec.cell_conc_max < spec.cell_conc_min)
        raise(ErrorCode::ParameterError, "invalid cell concentration range");
    if (spec.cells_per_10k_px <= 0.0)
        raise(ErrorCode::ParameterError, "cell density must be positive");
    if (spec.background_od < 0.0)
        raise(ErrorCode::ParameterError, "background density must be non-negative");
    if (spec.background_jitter < 0.0 || spec.background_jitter >= 1.0)
        raise(ErrorCode::ParameterError, "background jitter must be in [0, 1)");
    if (spec.cell_jitter < 0.0 || spec.cell_jitter >= 1.0)
        raise(ErrorCode::ParameterError, "cell jitter must be in [0, 1)");
}

SynthResult synthesize_sparse_random(const SynthSpec& spec, const StainMatrix& stains) {
    Uniform01 rng(spec.seed);
    const int k = stains.stain_count();
    ConcentrationMap conc;
    conc.width = spec.width;
    conc.height = spec.height;
    for (int j = 0; j < k; ++j) conc.planes.emplace_back(spec.width, spec.height);

    const std::size_t n = conc.planes.front().values.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (int j = 0; j < k; ++j) {
            // Both draws always happen so the stream layout is fixed.
            const bool active = rng.next() < spec.sparse_density;
            const double c = rng.next_in(spec.sparse_conc_min, spec.sparse_conc_max);
            conc.planes[static_cast<std::size_t>(j)].values[i] = active ? c : 0.0;
        }
    }

    SynthResult result;
    result.stains = stains;
    result.concentrations = std::move(conc);
    result.labels = LabelMap(spec.width, spec.height);
    return result;
}

SynthResult synthesize_blob_cells(const SynthSpec& spec, const StainMatrix& stains) {
    if (stains.stain_count() < 2)
        raise(ErrorCode::ParameterError, "the cell law needs at least two stains");
    Uniform01 rng(spec.seed);

    const double area = static_cast<double>(spec.width) * static_cast<double>(spec.height);
    const int target_cells = std::max(1, static_cast<int>(area / 10000.0 * spec.cells_per_10k_px));
    const int max_attempts = target_cells * 40;

    std::vector<Cell> cells;
    for (int attempt = 0; attempt < max_attempts && static_cast<int>(cells.size()) < target_cells;
         ++attempt) {
        Cell c;
        c.cx = rng.next_in(0.0, static_cast<double>(spec.width));
        c.cy = rng.next_in(0.0, static_cast<double>(spec.height));
        c.a = rng.next_in(spec.cell_radius_min, spec.cell_radius_max);
        c.b = c.a * rng.next_in(0.6, 1.0);
        const double theta = rng.next_in(0.0, 3.141592653589793);
        c.cos_t = std::cos(theta);
        c.sin_t = std::sin(theta);
        c.conc = rng.next_in(spec.cell_conc_min, spec.cell_conc_max);
        c.bound = c.a + 1.0;

        bool overlaps = false;
        for (const Cell& other : cells) {
            const double dx = c.cx - other.cx;
            const double dy = c.cy - other.cy;
            const double min_d = c.bound + other.bound;
            if (dx * dx + dy * dy < min_d * min_d) {
                overlaps = true;
                break;
            }
        }
        if (!overlaps) cells.push_back(c);
    }

    ConcentrationMap conc;
    conc.width = spec.width;
    conc.height = spec.height;
    conc.planes.emplace_back(spec.width, spec.height);  // stain 0: cells
    conc.planes.emplace_back(spec.width, spec.height);  // stain 1: background
    LabelMap labels(spec.width, spec.height);

    // Rasterize cells first so overlapping pixels (impossible by construction,
    // but kept simple) would take the later id deterministically.
    for (std::size_t ci = 0; ci < cells.size(); ++ci) {
        const Cell& c = cells[ci];
        const int x0 = std::max(0, static_cast<int>(std::floor(c.cx - c.a - 1.0)));
        const int x1 = std::min(spec.width - 1, static_cast<int>(std::ceil(c.cx + c.a + 1.0)));
        const int y0 = std::max(0, static_cast<int>(std::floor(c.cy - c.a - 1.0)));
        const int y1 = std::min(spec.height - 1, static_cast<int>(std::ceil(c.cy + c.a + 1.0)));
        for (int y = y0; y <= y1; ++y) {
            for (int x = x0; x <= x1; ++x) {
                const double dx = (static_cast<double>(x) + 0.5) - c.cx;
                const double dy = (static_cast<double>(y) + 0.5) - c.cy;
                const double u = (dx * c.cos_t + dy * c.sin_t) / c.a;
                const double v = (-dx * c.sin_t + dy * c.cos_t) / c.b;
                if (u * u + v * v <= 1.0) {
                    const std::size_t i = static_cast<std::size_t>(y) * spec.width + x;
                    conc.planes[0].values[i] = c.conc;
                    labels.ids[i] = static_cast<std::uint32_t>(ci + 1);
                }
            }
        }
    }

    // Per-pixel texture: bounded relative jitter on the background stain for
    // non-cell pixels and on the cell stain inside cells. Triangular profile
    // (sum of two uniforms) so the concentration density has no hard edges.
    // All draws always happen so the stream layout does not depend on coverage.
    const std::size_t n = conc.planes[0].values.size();
    for (std::size_t i = 0; i < n; ++i) {
        const double bg_jitter =
            spec.background_jitter * (rng.next() + rng.next() - 1.0);
        const double fg_jitter = spec.cell_jitter * (rng.next() + rng.next() - 1.0);
        if (labels.ids[i] == 0)
            conc.planes[1].values[i] = spec.background_od * (1.0 + bg_jitter);
        else
            conc.planes[0].values[i] *= 1.0 + fg_jitter;
    }

    SynthResult result;
    result.stains = stains;
    result.concentrations = std::move(conc);
    result.labels = std::move(labels);
    return result;
}

}  // namespace

StainMatrix default_stain_pair() {
    StainMatrix m;
    m.columns.push_back({0.650, 0.704, 0.286});
    m.columns.push_back({0.269, 0.568, 0.778});
    for (auto& col : m.columns) {
        const double norm = std::sqrt(col[0] * col[0] + col[1] * col[1] + col[2] * col[2]);
        for (double& v : col) v /= norm;
    }
    return m;
}

SynthResult synthesize_stain_image(const SynthSpec& spec) {
    validate_spec(spec);
    const StainMatrix stains = spec.stains.stain_count() > 0 ? spec.stains : default_stain_pair();
    for (const auto& col : stains.columns)
        for (double v : col)
            if (v < 0.0) raise(ErrorCode::ParameterError, "stain components must be non-negative");

    SynthResult result = spec.law == ConcentrationLaw::SparseRandom
                             ? synthesize_sparse_random(spec, stains)
                             : synthesize_blob_cells(spec, stains);

    // Beer-Lambert composition: OD = S * C, channel by channel.
    OdImage od;
    od.r = Plane(spec.width, spec.height);
    od.g = Plane(spec.width, spec.height);
    od.b = Plane(spec.width, spec.height);
    Plane* channels[3] = {&od.r, &od.g, &od.b};
    const std::size_t n = od.r.values.size();
    for (std::size_t i = 0; i < n; ++i) {
        for (int c = 0; c < 3; ++c) {
            double sum = 0.0;
            for (int j = 0; j < result.stains.stain_count(); ++j)
                sum += result.stains.columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] *
                       result.concentrations.planes[static_cast<std::size_t>(j)].values[i];
            channels[c]->values[i] = sum;
        }
    }
    result.image = od_to_rgb(od);
    return result;
}

std::string synth_spec_to_json(const SynthSpec& spec) {
    nlohmann::ordered_json j;
    j["v"] = 1;
    j["width"] = spec.width;
    j["height"] = spec.height;
    j["seed"] = spec.seed;
    j["law"] = spec.law == ConcentrationLaw::SparseRandom ? "sparse-random" : "blob-cells";
    if (spec.stains.stain_count() > 0) {
        j["stains"] = nlohmann::ordered_json::array();
        for (const auto& col : spec.stains.columns) j["stains"].push_back({col[0], col[1], col[2]});
    }
    j["sparse_density"] = spec.sparse_density;
    j["sparse_conc_min"] = spec.sparse_conc_min;
    j["sparse_conc_max"] = spec.sparse_conc_max;
    j["cells_per_10k_px"] = spec.cells_per_10k_px;
    j["cell_radius_min"] = spec.cell_radius_min;
    j["cell_radius_max"] = spec.cell_radius_max;
    j["cell_conc_min"] = spec.cell_conc_min;
    j["cell_conc_max"] = spec.cell_conc_max;
    j["cell_jitter"] = spec.cell_jitter;
    j["background_od"] = spec.background_od;
    j["background_jitter"] = spec.background_jitter;
    return j.dump(2) + "\n";
}

SynthSpec synth_spec_from_json(const std::string& text) {
    nlohmann::ordered_json j;
    try {
        j = nlohmann::ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::UnsupportedFormat, std::string("invalid synthesis JSON: ") + e.what());
    }
    if (!j.is_object() || j.value("v", 0) != 1)
        raise(ErrorCode::ParameterError, "synthesis config must be a JSON object with \"v\": 1");
    SynthSpec spec;
    spec.width = j.value("width", spec.width);
    spec.height = j.value("height", spec.height);
    spec.seed = j.value("seed", spec.seed);
    const std::string law = j.value("law", std::string("blob-cells"));
    if (law == "sparse-random")
        spec.law = ConcentrationLaw::SparseRandom;
    else if (law == "blob-cells")
        spec.law = ConcentrationLaw::BlobCells;
    else
        raise(ErrorCode::ParameterError, "unknown concentration law: " + law);
    if (j.contains("stains")) {
        for (const auto& col : j["stains"]) {
            if (!col.is_array() || col.size() != 3)
                raise(ErrorCode::ParameterError, "stain columns must have 3 components");
            spec.stains.columns.push_back(
                {col[0].get<double>(), col[1].get<double>(), col[2].get<double>()});
        }
    }
    spec.sparse_density = j.value("sparse_density", spec.sparse_density);
    spec.sparse_conc_min = j.value("sparse_conc_min", spec.sparse_conc_min);
    spec.sparse_conc_max = j.value("sparse_conc_max", spec.sparse_conc_max);
    spec.cells_per_10k_px = j.value("cells_per_10k_px", spec.cells_per_10k_px);
    spec.cell_radius_min = j.value("cell_radius_min", spec.cell_radius_min);
    spec.cell_radius_max = j.value("cell_radius_max", spec.cell_radius_max);
    spec.cell_conc_min = j.value("cell_conc_min", spec.cell_conc_min);
    spec.cell_conc_max = j.value("cell_conc_max", spec.cell_conc_max);
    spec.cell_jitter = j.value("cell_jitter", spec.cell_jitter);
    spec.background_od = j.value("background_od", spec.background_od);
    spec.background_jitter = j.value("background_jitter", spec.background_jitter);
    return spec;
}

RgbImage darken(const RgbImage& base, double factor) {
    if (factor < 1.0) raise(ErrorCode::ParameterError, "darkening factor must be >= 1");
    if (base.width < 1 || base.height < 1)
        raise(ErrorCode::ParameterError, "darkening needs a non-empty image");
    OdImage od = rgb_to_od(base);
    for (Plane* p : {&od.r, &od.g, &od.b})
        for (double& v : p->values) v *= factor;
    return od_to_rgb(od);
}

std::vector<RgbImage> darken_series(const SeriesSpec& spec) {
    for (std::size_t i = 0; i < spec.factors.size(); ++i) {
        if (spec.factors[i] < 1.0)
            raise(ErrorCode::ParameterError, "darkening factors must be >= 1");
        if (i > 0 && spec.factors[i] <= spec.factors[i - 1])
            raise(ErrorCode::ParameterError, "darkening factors must be strictly increasing");
    }
    std::vector<RgbImage> out;
    out.reserve(spec.factors.size());
    for (double f : spec.factors) out.push_back(darken(spec.base, f));
    return out;
}

}  // namespace stainkit
