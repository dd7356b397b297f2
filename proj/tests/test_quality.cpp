#include <cmath>

#include "doctest.h"
#include "json.hpp"
#include "oracles.hpp"
#include "stainkit/quality.hpp"
#include "stainkit/synth.hpp"
#include "stainkit/transfer.hpp"

using namespace stainkit;

TEST_CASE("laplacian of a constant image is zero everywhere") {
    const DetailMap d = laplacian_detail(oracle::constant_image(7, 5, 80, 160, 240));
    for (const Plane* p : {&d.r, &d.g, &d.b})
        for (double v : p->values) CHECK(v == 0.0);
}

TEST_CASE("laplacian of an isolated spike has the textbook stencil") {
    RgbImage img(8, 8);
    img.at(3, 3, 0) = 10;
    const DetailMap d = laplacian_detail(img);
    CHECK(d.r.at(3, 3) == -40.0);  // -4 * 10
    CHECK(d.r.at(2, 3) == 10.0);
    CHECK(d.r.at(4, 3) == 10.0);
    CHECK(d.r.at(3, 2) == 10.0);
    CHECK(d.r.at(3, 4) == 10.0);
    CHECK(d.r.at(2, 2) == 0.0);  // diagonals are not in the stencil
    CHECK(d.r.at(4, 4) == 0.0);
    CHECK(d.r.at(0, 0) == 0.0);
    // Untouched channels stay flat.
    for (double v : d.g.values) CHECK(v == 0.0);
}

TEST_CASE("laplacian of a linear ramp vanishes away from the borders") {
    RgbImage img(9, 6);
    for (int y = 0; y < 6; ++y)
        for (int x = 0; x < 9; ++x)
            for (int c = 0; c < 3; ++c) img.at(x, y, c) = static_cast<std::uint8_t>(10 * x);
    const DetailMap d = laplacian_detail(img);
    for (int y = 1; y < 5; ++y)
        for (int x = 1; x < 8; ++x) CHECK(d.r.at(x, y) == 0.0);
}

TEST_CASE("detail loss ignores global brightness shifts") {
    const RgbImage img = oracle::random_image(32, 32, 81, 40, 200);
    RgbImage shifted = img;
    for (auto& v : shifted.data) v = static_cast<std::uint8_t>(v + 20);
    CHECK(reconstruction_loss(img, img) == 0.0);
    CHECK(reconstruction_loss(img, shifted) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("blurring costs reconstruction loss") {
    const RgbImage img = oracle::random_image(32, 32, 83);
    RgbImage blurred = img;
    for (int y = 0; y < 32; ++y)
        for (int x = 1; x < 31; ++x)
            for (int c = 0; c < 3; ++c)
                blurred.at(x, y, c) = static_cast<std::uint8_t>(
                    (img.at(x - 1, y, c) + img.at(x, y, c) + img.at(x + 1, y, c)) / 3);
    CHECK(reconstruction_loss(img, blurred) > 0.1);
}

TEST_CASE("detail maps mismatch raises a parameter error") {
    const RgbImage a = oracle::constant_image(4, 4, 1, 2, 3);
    const RgbImage b = oracle::constant_image(5, 4, 1, 2, 3);
    CHECK_THROWS_AS(reconstruction_loss(a, b), StainError);
}

TEST_CASE("recoloring that equals the target has zero color loss") {
    const RgbImage target = oracle::random_image(24, 24, 85, 30, 220);
    const ColorHistogram h = compute_histogram(target);
    CHECK(color_matching_loss(target, h) <= 1e-12);
}

TEST_CASE("quality report combines the two losses linearly") {
    SynthSpec spec;
    spec.width = 96;
    spec.height = 96;
    spec.seed = 77;
    spec.cell_conc_min = 0.6;
    spec.cell_conc_max = 1.1;
    const RgbImage source = synthesize_stain_image(spec).image;
    const RgbImage target = darken(source, 1.4);
    const RgbImage recolored = histogram_match(source, target, true);

    const QualityReport q = quality_report(source, recolored, target);
    CHECK(q.alpha == 32.0);
    CHECK(q.beta == 1.5);
    CHECK(q.combined == q.alpha * q.l_color + q.beta * q.l_reconstruction);
    CHECK(q.hellinger_to_target == q.l_color);
    CHECK(q.l_color >= 0.0);
    CHECK(q.l_reconstruction >= 0.0);
    CHECK(q.kl_to_target >= 0.0);

    // Recoloring toward the target must beat leaving the image alone.
    const QualityReport noop = quality_report(source, source, target);
    CHECK(q.l_color <= noop.l_color);
    CHECK(noop.l_reconstruction == 0.0);
}

TEST_CASE("quality report serializes every field") {
    const RgbImage source = oracle::random_image(16, 16, 91, 50, 200);
    const RgbImage target = oracle::random_image(16, 16, 92, 50, 200);
    const QualityReport q = quality_report(source, target, target);
    const auto j = nlohmann::json::parse(quality_report_to_json(q));
    CHECK(j.at("l_color").get<double>() == doctest::Approx(q.l_color).epsilon(1e-9));
    CHECK(j.at("l_reconstruction").get<double>() ==
          doctest::Approx(q.l_reconstruction).epsilon(1e-9));
    CHECK(j.at("alpha").get<double>() == 32.0);
    CHECK(j.at("beta").get<double>() == 1.5);
    CHECK(j.at("combined").get<double>() == doctest::Approx(q.combined).epsilon(1e-9));
    CHECK(j.at("hellinger_to_target").get<double>() ==
          doctest::Approx(q.hellinger_to_target).epsilon(1e-9));
    CHECK(j.at("kl_to_target").get<double>() == doctest::Approx(q.kl_to_target).epsilon(1e-9));
    CHECK(j.at("note").get<std::string>() == q.note);
}
