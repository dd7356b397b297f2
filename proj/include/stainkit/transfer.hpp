#pragma once

#include <array>
#include <string>
#include <vector>

#include "stainkit/colorspaces.hpp"
#include "stainkit/image.hpp"

namespace stainkit {

// Unit-norm, non-negative stain vectors in optical-density space, one column
// per stain. Columns are ordered by ascending angle in the dominant plane for
// the geometric estimator and by dictionary index for the sparse fit.
struct StainMatrix {
    std::vector<std::array<double, 3>> columns;

    int stain_count() const { return static_cast<int>(columns.size()); }
};

std::string stain_matrix_to_json(const StainMatrix& m);
StainMatrix stain_matrix_from_json(const std::string& text);

// Per-pixel non-negative stain concentrations, one plane per stain vector.
struct ConcentrationMap {
    int width = 0;
    int height = 0;
    std::vector<Plane> planes;
};

enum class TransferMethod { Reinhard, Macenko, Vahadane, HistMatch };

TransferMethod transfer_method_from_name(const std::string& name);
std::string transfer_method_name(TransferMethod method);

struct MacenkoParams {
    double beta_od = 0.15;  // tissue threshold on OD magnitude
    double alpha_pct = 1.0; // angle percentile for the extreme stain directions
};

struct VahadaneParams {
    int stains = 2;
    double lambda_sparse = 0.1;
    int iters = 50;
    MacenkoParams init;  // geometric initialization of the dictionary
};

// Statistics matching in the decorrelated log color space: every output
// channel has the target's mean and standard deviation. A zero-variance
// source channel maps every pixel to the target mean.
RgbImage reinhard_transfer(const RgbImage& source, const RgbImage& target);

// The pre-quantization planes of reinhard_transfer, for verifying the
// statistics contract without 8-bit rounding noise.
LalphabetaImage reinhard_transfer_planes(const RgbImage& source, const RgbImage& target);

// Geometric stain estimation: extreme-percentile directions of tissue-pixel
// angles in the top-2 eigenplane of the OD second-moment matrix.
// Errors: LowSignal when fewer than 100 pixels exceed beta_od in OD
// magnitude; DegenerateRank when the OD spread is essentially rank-1.
StainMatrix macenko_estimate_stains(const RgbImage& img, const MacenkoParams& params = {});

// Least-squares concentrations of `img` against the stain basis, clamped to
// be non-negative. Computed over all pixels.
ConcentrationMap stain_concentrations(const RgbImage& img, const StainMatrix& stains);

// Stain normalization: source concentrations, per-stain 99th-percentile
// rescaled to the target's, recomposed with the target's stain vectors.
RgbImage macenko_normalize(const RgbImage& source, const RgbImage& target,
                           const MacenkoParams& params = {});

struct VahadaneFit {
    StainMatrix stains;
    ConcentrationMap concentrations;
    // objective[0] is the value at initialization; one entry is appended per
    // alternation, plus a final entry after column renormalization. The
    // sequence is non-increasing.
    std::vector<double> objective;
};

// Sparse dictionary fit of the OD image: alternating non-negative least
// squares minimizing ||OD - S*C||_F^2 + lambda*|C|_1 with S >= 0, C >= 0 and
// unit-capped dictionary columns (renormalized to unit length at the end).
VahadaneFit vahadane_fit_dictionary(const RgbImage& img, const VahadaneParams& params = {});

// Structure-preserving normalization: dictionaries are fitted to both images,
// the source's least-squares concentrations against its dictionary
// (99th-percentile rescaled to the target's) are recomposed with the target's
// dictionary. The sparsity penalty shapes the dictionaries only; recoloring
// uses unpenalized projections so that target == source is a near-identity.
RgbImage vahadane_normalize(const RgbImage& source, const RgbImage& target,
                            const VahadaneParams& params = {});

// Per-channel histogram specification. Default mode is classical CDF
// matching. Exact mode enforces the target histogram exactly (resampled to
// the source pixel count by largest-remainder apportionment) using a total
// pixel order: value, then 3x3 and 5x5 replicate-padded neighborhood means,
// then raster index.
RgbImage histogram_match(const RgbImage& source, const RgbImage& target, bool exact = false);

// Linear-interpolation percentile (p in [0,100]) of an unsorted sample.
double percentile(std::vector<double> values, double p);

struct TransferOptions {
    MacenkoParams macenko;
    VahadaneParams vahadane;
    bool exact_histogram = false;
};

RgbImage apply_transfer(TransferMethod method, const RgbImage& source, const RgbImage& target,
                        const TransferOptions& options = {});

}  // namespace stainkit
