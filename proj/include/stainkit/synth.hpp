#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "stainkit/image.hpp"
#include "stainkit/transfer.hpp"

namespace stainkit {

// How per-pixel stain concentrations are generated.
//  SparseRandom: each stain is independently active per pixel with a fixed
//    probability; active concentrations are uniform in a range.
//  BlobCells: non-overlapping elliptical "cells" of pure stain 0 on a weak
//    pure-stain-1 background, with an instance label map.
enum class ConcentrationLaw { SparseRandom, BlobCells };

struct SynthSpec {
    int width = 256;
    int height = 256;
    std::uint64_t seed = 0;
    ConcentrationLaw law = ConcentrationLaw::BlobCells;
    StainMatrix stains;  // empty -> default_stain_pair()

    // SparseRandom parameters.
    double sparse_density = 0.65;
    double sparse_conc_min = 0.7;
    double sparse_conc_max = 1.5;

    // BlobCells parameters.
    double cells_per_10k_px = 55.0;
    double cell_radius_min = 6.0;
    double cell_radius_max = 14.0;
    double cell_conc_min = 0.8;
    double cell_conc_max = 1.5;
    double cell_jitter = 0.08;  // per-pixel relative texture inside cells
    double background_od = 0.15;
    double background_jitter = 0.25;  // relative, bounded
};

struct SynthResult {
    RgbImage image;
    StainMatrix stains;
    ConcentrationMap concentrations;
    LabelMap labels;  // all-zero for SparseRandom
};

// Two absorbance-like unit vectors roughly 37 degrees apart, the default
// ground-truth stain pair for synthetic images.
StainMatrix default_stain_pair();

// Deterministic Beer-Lambert synthesis: image = od_to_rgb(S * C) with the
// concentrations drawn by `spec.law`. Same seed, same bits.
SynthResult synthesize_stain_image(const SynthSpec& spec);

std::string synth_spec_to_json(const SynthSpec& spec);
SynthSpec synth_spec_from_json(const std::string& text);

// Scales the optical densities of `base` by `factor` (>= 1 darkens; 1 is the
// identity on every pixel).
RgbImage darken(const RgbImage& base, double factor);

struct SeriesSpec {
    RgbImage base;
    std::vector<double> factors;  // strictly increasing, every factor >= 1
};

// One darkened image per factor, in order.
std::vector<RgbImage> darken_series(const SeriesSpec& spec);

}  // namespace stainkit
