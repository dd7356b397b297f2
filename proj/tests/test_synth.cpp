#include <algorithm>
#include <cmath>
#include <set>

#include "doctest.h"
#include "oracles.hpp"
#include "stainkit/synth.hpp"
#include "stainkit/transfer.hpp"

using namespace stainkit;

namespace {

SynthSpec blob_spec(std::uint64_t seed, int side = 128) {
    SynthSpec spec;
    spec.width = side;
    spec.height = side;
    spec.seed = seed;
    spec.law = ConcentrationLaw::BlobCells;
    return spec;
}

SynthSpec sparse_spec(std::uint64_t seed, int side = 96) {
    SynthSpec spec;
    spec.width = side;
    spec.height = side;
    spec.seed = seed;
    spec.law = ConcentrationLaw::SparseRandom;
    return spec;
}

double mean_intensity(const RgbImage& img) {
    double sum = 0.0;
    for (std::uint8_t v : img.data) sum += v;
    return sum / static_cast<double>(img.data.size());
}

}  // namespace

TEST_CASE("default stain pair has unit columns about 37 degrees apart") {
    const StainMatrix m = default_stain_pair();
    REQUIRE(m.stain_count() == 2);
    for (const auto& col : m.columns) {
        const double norm = std::sqrt(col[0] * col[0] + col[1] * col[1] + col[2] * col[2]);
        CHECK(std::abs(norm - 1.0) <= 1e-12);
    }
    const double angle = oracle::angle_deg(m.columns[0], m.columns[1]);
    CHECK(angle > 30.0);
    CHECK(angle < 45.0);
}

TEST_CASE("synthesis is bit-for-bit deterministic") {
    for (const SynthSpec& spec : {blob_spec(42), sparse_spec(42)}) {
        const SynthResult a = synthesize_stain_image(spec);
        const SynthResult b = synthesize_stain_image(spec);
        CHECK(a.image == b.image);
        CHECK(a.labels == b.labels);
        REQUIRE(a.concentrations.planes.size() == b.concentrations.planes.size());
        for (std::size_t j = 0; j < a.concentrations.planes.size(); ++j)
            CHECK(a.concentrations.planes[j] == b.concentrations.planes[j]);
        CHECK(a.stains.columns == b.stains.columns);
    }
    const SynthResult a = synthesize_stain_image(blob_spec(42));
    const SynthResult c = synthesize_stain_image(blob_spec(43));
    CHECK(a.image != c.image);
}

TEST_CASE("sparse law respects the activation density") {
    SUBCASE("density zero leaves the canvas white") {
        SynthSpec spec = sparse_spec(7);
        spec.sparse_density = 0.0;
        const SynthResult r = synthesize_stain_image(spec);
        CHECK(r.labels == LabelMap(spec.width, spec.height));
        for (const auto& plane : r.concentrations.planes)
            for (double v : plane.values) CHECK(v == 0.0);
        for (std::uint8_t v : r.image.data) CHECK(v == 255);
    }
    SUBCASE("density one activates every stain at every pixel") {
        SynthSpec spec = sparse_spec(7);
        spec.sparse_density = 1.0;
        const SynthResult r = synthesize_stain_image(spec);
        for (const auto& plane : r.concentrations.planes)
            for (double v : plane.values) {
                CHECK(v >= spec.sparse_conc_min);
                CHECK(v <= spec.sparse_conc_max);
            }
    }
    SUBCASE("intermediate density hits it within a few percent") {
        SynthSpec spec = sparse_spec(7, 128);
        spec.sparse_density = 0.4;
        const SynthResult r = synthesize_stain_image(spec);
        for (const auto& plane : r.concentrations.planes) {
            std::size_t active = 0;
            for (double v : plane.values)
                if (v != 0.0) ++active;
            const double frac = static_cast<double>(active) / static_cast<double>(plane.values.size());
            CHECK(std::abs(frac - 0.4) < 0.03);
        }
    }
}

TEST_CASE("cell law produces contiguous separated instances with disjoint stains") {
    const SynthResult r = synthesize_stain_image(blob_spec(11, 192));
    const LabelMap& labels = r.labels;

    std::set<std::uint32_t> ids;
    for (std::uint32_t id : labels.ids)
        if (id != 0) ids.insert(id);
    REQUIRE(ids.size() >= 5);
    // Ids are 1..k with no gaps.
    CHECK(*ids.begin() == 1);
    CHECK(*ids.rbegin() == ids.size());

    // Distinct instances never touch, even diagonally.
    for (int y = 0; y < labels.height; ++y)
        for (int x = 0; x < labels.width; ++x) {
            const std::uint32_t id = labels.at(x, y);
            if (id == 0) continue;
            for (int dy = -1; dy <= 1; ++dy)
                for (int dx = -1; dx <= 1; ++dx) {
                    const int nx = x + dx, ny = y + dy;
                    if (nx < 0 || ny < 0 || nx >= labels.width || ny >= labels.height) continue;
                    const std::uint32_t nid = labels.at(nx, ny);
                    CHECK((nid == 0 || nid == id));
                }
        }

    // Stain 0 lives exactly on the cells, stain 1 exactly on the background.
    const Plane& cells = r.concentrations.planes[0];
    const Plane& background = r.concentrations.planes[1];
    for (std::size_t i = 0; i < labels.ids.size(); ++i) {
        if (labels.ids[i] == 0) {
            CHECK(cells.values[i] == 0.0);
            CHECK(background.values[i] > 0.0);
        } else {
            CHECK(cells.values[i] > 0.0);
            CHECK(background.values[i] == 0.0);
        }
    }
}

TEST_CASE("stain estimation closes the loop on synthetic images") {
    SUBCASE("sparse law") {
        const SynthResult r = synthesize_stain_image(sparse_spec(5, 128));
        const StainMatrix est = macenko_estimate_stains(r.image);
        CHECK(oracle::stain_pair_angle_error(est.columns, r.stains.columns) < 2.0);
    }
    SUBCASE("cell law") {
        const SynthResult r = synthesize_stain_image(blob_spec(5, 192));
        const StainMatrix est = macenko_estimate_stains(r.image);
        CHECK(oracle::stain_pair_angle_error(est.columns, r.stains.columns) < 3.0);
    }
}

TEST_CASE("custom stain columns are used as given") {
    SynthSpec spec = blob_spec(3);
    spec.stains.columns.push_back({0.05, 0.90, 0.42});
    spec.stains.columns.push_back({0.35, 0.50, 0.80});
    const SynthResult r = synthesize_stain_image(spec);
    CHECK(r.stains.columns == spec.stains.columns);

    SynthSpec bad = spec;
    bad.stains.columns[0][1] = -0.2;
    CHECK_THROWS_AS(synthesize_stain_image(bad), StainError);
}

TEST_CASE("darkening by factor one is the identity") {
    const SynthResult r = synthesize_stain_image(blob_spec(9));
    CHECK(darken(r.image, 1.0) == r.image);
}

TEST_CASE("darkening doubles optical density pixel by pixel") {
    RgbImage img(3, 1);
    for (int x = 0; x < 3; ++x)
        for (int c = 0; c < 3; ++c) img.at(x, 0, c) = static_cast<std::uint8_t>(128 + 10 * x);
    const RgbImage dark = darken(img, 2.0);
    // intensity 128/255 has density log10(255/128) = 0.29936; doubled gives
    // 0.59872, i.e. intensity 0.25197 -> 64.25 -> 64.
    CHECK(dark.at(0, 0, 0) == 64);
    // White stays white at any factor.
    RgbImage white(2, 2);
    std::fill(white.data.begin(), white.data.end(), std::uint8_t{255});
    CHECK(darken(white, 3.0) == white);
}

TEST_CASE("darkening reduces mean intensity monotonically") {
    SeriesSpec series;
    series.base = synthesize_stain_image(blob_spec(13)).image;
    series.factors = {1.0, 1.2, 1.5, 2.0, 3.0};
    const std::vector<RgbImage> out = darken_series(series);
    REQUIRE(out.size() == 5);
    CHECK(out[0] == series.base);
    double prev = mean_intensity(out[0]);
    for (std::size_t i = 1; i < out.size(); ++i) {
        const double cur = mean_intensity(out[i]);
        CHECK(cur <= prev);
        prev = cur;
    }
    CHECK(mean_intensity(out.back()) < mean_intensity(out.front()));
}

TEST_CASE("darkening rejects invalid factors") {
    const RgbImage img(4, 4);
    CHECK_THROWS_AS(darken(img, 0.5), StainError);
    SeriesSpec series;
    series.base = img;
    series.factors = {1.0, 1.0};
    CHECK_THROWS_AS(darken_series(series), StainError);
    series.factors = {2.0, 1.5};
    CHECK_THROWS_AS(darken_series(series), StainError);
    series.factors = {0.5};
    CHECK_THROWS_AS(darken_series(series), StainError);
}

TEST_CASE("synthesis spec JSON round-trips every field") {
    SynthSpec spec;
    spec.width = 80;
    spec.height = 60;
    spec.seed = 987654321;
    spec.law = ConcentrationLaw::SparseRandom;
    spec.stains.columns.push_back({0.1, 0.8, 0.5});
    spec.stains.columns.push_back({0.6, 0.3, 0.7});
    spec.sparse_density = 0.25;
    spec.sparse_conc_min = 0.4;
    spec.sparse_conc_max = 2.25;
    spec.cells_per_10k_px = 12.0;
    spec.cell_radius_min = 2.0;
    spec.cell_radius_max = 5.5;
    spec.cell_conc_min = 0.3;
    spec.cell_conc_max = 0.9;
    spec.cell_jitter = 0.35;
    spec.background_od = 0.05;
    spec.background_jitter = 0.6;

    const SynthSpec back = synth_spec_from_json(synth_spec_to_json(spec));
    CHECK(back.width == spec.width);
    CHECK(back.height == spec.height);
    CHECK(back.seed == spec.seed);
    CHECK(back.law == spec.law);
    CHECK(back.stains.columns == spec.stains.columns);
    CHECK(back.sparse_density == spec.sparse_density);
    CHECK(back.sparse_conc_min == spec.sparse_conc_min);
    CHECK(back.sparse_conc_max == spec.sparse_conc_max);
    CHECK(back.cells_per_10k_px == spec.cells_per_10k_px);
    CHECK(back.cell_radius_min == spec.cell_radius_min);
    CHECK(back.cell_radius_max == spec.cell_radius_max);
    CHECK(back.cell_conc_min == spec.cell_conc_min);
    CHECK(back.cell_conc_max == spec.cell_conc_max);
    CHECK(back.cell_jitter == spec.cell_jitter);
    CHECK(back.background_od == spec.background_od);
    CHECK(back.background_jitter == spec.background_jitter);

    // Defaults survive a minimal document; absent stains stay empty.
    const SynthSpec minimal = synth_spec_from_json("{\"v\": 1}");
    CHECK(minimal.width == 256);
    CHECK(minimal.law == ConcentrationLaw::BlobCells);
    CHECK(minimal.stains.stain_count() == 0);
}

TEST_CASE("synthesis spec JSON rejects malformed documents") {
    CHECK_THROWS_AS(synth_spec_from_json("not json"), StainError);
    CHECK_THROWS_AS(synth_spec_from_json("[1,2]"), StainError);
    CHECK_THROWS_AS(synth_spec_from_json("{\"v\": 2}"), StainError);
    CHECK_THROWS_AS(synth_spec_from_json("{\"v\": 1, \"law\": \"perlin\"}"), StainError);
    CHECK_THROWS_AS(synth_spec_from_json("{\"v\": 1, \"stains\": [[0.1, 0.2]]}"), StainError);
}

TEST_CASE("synthesis validates its parameters") {
    SynthSpec spec = blob_spec(1);
    spec.width = 0;
    CHECK_THROWS_AS(synthesize_stain_image(spec), StainError);

    spec = sparse_spec(1);
    spec.sparse_density = 1.5;
    CHECK_THROWS_AS(synthesize_stain_image(spec), StainError);
    spec = sparse_spec(1);
    spec.sparse_conc_max = spec.sparse_conc_min - 0.1;
    CHECK_THROWS_AS(synthesize_stain_image(spec), StainError);

    spec = blob_spec(1);
    spec.cell_radius_min = 0.5;
    CHECK_THROWS_AS(synthesize_stain_image(spec), StainError);
    spec = blob_spec(1);
    spec.cells_per_10k_px = 0.0;
    CHECK_THROWS_AS(synthesize_stain_image(spec), StainError);
    spec = blob_spec(1);
    spec.background_jitter = 1.0;
    CHECK_THROWS_AS(synthesize_stain_image(spec), StainError);
    spec = blob_spec(1);
    spec.cell_jitter = -0.1;
    CHECK_THROWS_AS(synthesize_stain_image(spec), StainError);
    spec = blob_spec(1);
    spec.background_od = -0.01;
    CHECK_THROWS_AS(synthesize_stain_image(spec), StainError);
}
