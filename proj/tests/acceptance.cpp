// Acceptance sweep: one pass/fail line per shipped guarantee. Each check
// exercises the library end to end the way a release gate would, with fixed
// seeds so a failure is reproducible by rerunning the binary.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "oracles.hpp"
#include "stainkit/colorspaces.hpp"
#include "stainkit/histogram.hpp"
#include "stainkit/io.hpp"
#include "stainkit/segmetrics.hpp"
#include "stainkit/study.hpp"
#include "stainkit/synth.hpp"
#include "stainkit/transfer.hpp"

using namespace stainkit;
namespace fs = std::filesystem;

namespace {

struct Outcome {
    bool ok = true;
    std::string detail;

    void require(bool cond, const std::string& what) {
        if (!cond && ok) {
            ok = false;
            detail = what;
        }
    }
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string fmt(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.4g", v);
    return buf;
}

// ---------- criterion 1: distance identities, symmetry, range ----------

Outcome criterion_identities() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    std::vector<ColorHistogram> hists;
    for (std::uint32_t seed = 0; seed < 100; ++seed) {
        const RgbImage img = oracle::random_image(48, 48, 9000 + seed);
        const ColorHistogram h = compute_histogram(img);
        const double self_h = hellinger_distance(h, h);
        const double self_kl = kl_divergence(h, h);
        out.require(self_h <= 1e-9, "self Hellinger " + fmt(self_h) + " at seed " + std::to_string(seed));
        out.require(self_kl <= 1e-9, "self KL " + fmt(self_kl) + " at seed " + std::to_string(seed));
        hists.push_back(h);
    }
    for (std::size_t i = 0; i + 1 < hists.size(); i += 2) {
        const double ab = hellinger_distance(hists[i], hists[i + 1]);
        const double ba = hellinger_distance(hists[i + 1], hists[i]);
        out.require(ab == ba, "asymmetric Hellinger at pair " + std::to_string(i));
        out.require(ab >= 0.0 && ab <= 1.0, "Hellinger out of range: " + fmt(ab));
    }
    const double elapsed = seconds_since(t0);
    out.require(elapsed < 10.0, "runtime " + fmt(elapsed) + " s exceeds 10 s");
    if (out.ok) out.detail = fmt(elapsed) + " s";
    return out;
}

// ---------- criterion 2: hand-computed distance values ----------

Outcome criterion_hand_values() {
    Outcome out;
    HistogramParams p;
    p.bins = 2;
    ColorHistogram half(p), point(p), quarter(p);
    half.bins[0] = 0.5;
    half.bins[1] = 0.5;
    point.bins[0] = 1.0;
    quarter.bins[0] = 0.25;
    quarter.bins[1] = 0.75;

    const double h = hellinger_distance(half, point);
    out.require(std::abs(h - 0.5412) <= 1e-4, "Hellinger((.5,.5),(1,0)) = " + fmt(h));
    const double kl = kl_divergence(half, quarter);
    out.require(std::abs(kl - 0.1438) <= 1e-3, "KL((.5,.5),(.25,.75)) = " + fmt(kl));
    if (out.ok) out.detail = "H=" + fmt(h) + ", KL=" + fmt(kl);
    return out;
}

// ---------- criterion 3: log-chroma antisymmetry + brightness insensitivity ----------

Outcome criterion_illumination() {
    Outcome out;
    const SynthSpec spec = synth_spec_from_json(R"({
        "v": 1, "width": 256, "height": 256, "seed": 11, "law": "blob-cells",
        "stains": [[0.05, 0.90, 0.42], [0.35, 0.50, 0.80]],
        "cell_conc_min": 0.08, "cell_conc_max": 0.16, "cell_jitter": 0.4,
        "background_od": 0.08, "background_jitter": 0.6})");
    const RgbImage img = synthesize_stain_image(spec).image;

    const LogChromaPlanes planes = rgb_to_log_chroma(img);
    for (std::size_t i = 0; i < planes.u_r.values.size(); ++i) {
        if (planes.u_g.values[i] != -planes.u_r.values[i] ||
            planes.u_b.values[i] != -planes.v_r.values[i] ||
            planes.v_b.values[i] != -planes.v_g.values[i]) {
            out.require(false, "reciprocal plane mismatch at pixel " + std::to_string(i));
            break;
        }
    }

    RgbImage halved = img;
    for (auto& v : halved.data) v = quantize_channel(0.5 * static_cast<double>(v));
    const double h = hellinger_distance(compute_histogram(img), compute_histogram(halved));
    out.require(h < 0.05, "halving shifted Hellinger by " + fmt(h));
    if (out.ok) out.detail = "halving shift " + fmt(h);
    return out;
}

// ---------- criterion 4: stain recovery + dictionary objective descent ----------

double relative_od_error(const RgbImage& img, const VahadaneFit& fit) {
    const OdImage od = rgb_to_od(img);
    const Plane* ch[3] = {&od.r, &od.g, &od.b};
    double num = 0.0, den = 0.0;
    for (std::size_t i = 0; i < od.r.values.size(); ++i) {
        for (int c = 0; c < 3; ++c) {
            double recon = 0.0;
            for (int j = 0; j < fit.stains.stain_count(); ++j)
                recon += fit.stains.columns[static_cast<std::size_t>(j)][static_cast<std::size_t>(c)] *
                         fit.concentrations.planes[static_cast<std::size_t>(j)].values[i];
            num += std::abs(recon - ch[c]->values[i]);
            den += std::abs(ch[c]->values[i]);
        }
    }
    return num / den;
}

Outcome criterion_stain_recovery() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();
    int macenko_hits = 0;
    int vahadane_hits = 0;
    bool monotone = true;
    for (std::uint64_t seed = 1; seed <= 50; ++seed) {
        SynthSpec spec;
        spec.width = 96;
        spec.height = 96;
        spec.seed = seed;
        spec.law = ConcentrationLaw::SparseRandom;
        const SynthResult synth = synthesize_stain_image(spec);

        const StainMatrix est = macenko_estimate_stains(synth.image);
        if (oracle::stain_pair_angle_error(est.columns, synth.stains.columns) < 2.0) ++macenko_hits;

        const VahadaneFit fit = vahadane_fit_dictionary(synth.image);
        if (relative_od_error(synth.image, fit) < 0.05) ++vahadane_hits;
        for (std::size_t i = 1; i < fit.objective.size(); ++i)
            if (fit.objective[i] > fit.objective[i - 1] +
                                       1e-9 * std::max(1.0, std::abs(fit.objective[i - 1])))
                monotone = false;
    }
    out.require(macenko_hits >= 48,
                "geometric recovery within 2 deg in only " + std::to_string(macenko_hits) + "/50");
    out.require(vahadane_hits >= 48,
                "dictionary reconstruction under 0.05 in only " + std::to_string(vahadane_hits) + "/50");
    out.require(monotone, "dictionary objective increased during a fit");
    const double elapsed = seconds_since(t0);
    out.require(elapsed < 120.0, "runtime " + fmt(elapsed) + " s exceeds 120 s");
    if (out.ok)
        out.detail = std::to_string(macenko_hits) + "/50, " + std::to_string(vahadane_hits) +
                     "/50, " + fmt(elapsed) + " s";
    return out;
}

// ---------- criterion 5: transfer improvement grid ----------

Outcome criterion_transfer_improvement() {
    Outcome out;
    SynthSpec spec;
    spec.width = 192;
    spec.height = 192;
    spec.seed = 11;
    spec.cell_conc_min = 0.6;
    spec.cell_conc_max = 1.1;
    SeriesSpec series;
    series.base = synthesize_stain_image(spec).image;
    series.factors = {1.0, 1.2, 1.5, 2.0, 3.0};
    const std::vector<RgbImage> sets = darken_series(series);

    std::vector<ColorHistogram> hists;
    for (const RgbImage& img : sets) hists.push_back(compute_histogram(img));

    TransferOptions options;
    options.exact_histogram = true;
    const TransferMethod methods[] = {TransferMethod::Reinhard, TransferMethod::Macenko,
                                      TransferMethod::Vahadane, TransferMethod::HistMatch};
    double hist_match_sum = 0.0;
    int hist_match_count = 0;
    for (std::size_t i = 0; i < sets.size() && out.ok; ++i) {
        for (std::size_t j = 0; j < sets.size() && out.ok; ++j) {
            if (i == j) continue;
            const double before = hellinger_distance(hists[i], hists[j]);
            for (TransferMethod m : methods) {
                const RgbImage recolored = apply_transfer(m, sets[i], sets[j], options);
                const double after = hellinger_distance(compute_histogram(recolored), hists[j]);
                out.require(after <= before + 1e-12,
                            transfer_method_name(m) + " worsened pair (" + std::to_string(i) +
                                "," + std::to_string(j) + "): " + fmt(before) + " -> " + fmt(after));
                if (m == TransferMethod::HistMatch) {
                    hist_match_sum += after;
                    ++hist_match_count;
                }
            }
        }
    }
    const double mean = hist_match_sum / std::max(1, hist_match_count);
    out.require(mean < 0.05, "exact-matching grid mean " + fmt(mean));
    if (out.ok) out.detail = "exact-matching grid mean " + fmt(mean);
    return out;
}

// ---------- criterion 6: statistics transfer matches target moments ----------

Outcome criterion_moment_matching() {
    Outcome out;
    for (std::uint32_t k = 0; k < 20; ++k) {
        const RgbImage source = oracle::random_image(64, 64, 7000 + 2 * k, 10, 250);
        const RgbImage target = oracle::random_image(64, 64, 7001 + 2 * k, 30, 220);
        const LalphabetaImage got = reinhard_transfer_planes(source, target);
        const LalphabetaImage want = rgb_to_lalphabeta(target);
        const Plane* gp[3] = {&got.l, &got.alpha, &got.beta};
        const Plane* wp[3] = {&want.l, &want.alpha, &want.beta};
        for (int c = 0; c < 3; ++c) {
            const ChannelStats g = plane_stats(*gp[c]);
            const ChannelStats w = plane_stats(*wp[c]);
            out.require(std::abs(g.mean - w.mean) < 1e-3,
                        "mean off by " + fmt(std::abs(g.mean - w.mean)) + " on pair " +
                            std::to_string(k));
            out.require(std::abs(g.stddev - w.stddev) < 1e-3,
                        "spread off by " + fmt(std::abs(g.stddev - w.stddev)) + " on pair " +
                            std::to_string(k));
        }
    }
    if (out.ok) out.detail = "20 pairs";
    return out;
}

// ---------- criterion 7: segmentation metrics vs brute force ----------

struct TwoInstanceMap {
    LabelMap map;
    std::uint64_t inst[2];
};

struct FastScores {
    double f1, aji, dice;
    int tp, fp, fn;
};

int popcount64(std::uint64_t v) { return static_cast<int>(__builtin_popcountll(v)); }

// Brute force on 8x8 bitmasks: every quantity from first principles.
FastScores bitmask_scores(const std::uint64_t a[2], const std::uint64_t b[2]) {
    int inter[2][2], uni[2][2];
    double iou[2][2];
    for (int p = 0; p < 2; ++p)
        for (int g = 0; g < 2; ++g) {
            inter[p][g] = popcount64(a[p] & b[g]);
            uni[p][g] = popcount64(a[p]) + popcount64(b[g]) - inter[p][g];
            iou[p][g] = uni[p][g] == 0 ? 0.0 : static_cast<double>(inter[p][g]) / uni[p][g];
        }

    // Greedy one-to-one matching at IoU > 0.5: descending IoU, lower
    // prediction id first, then lower ground-truth id.
    struct Cand {
        double iou;
        int p, g;
    };
    std::vector<Cand> cands;
    for (int p = 0; p < 2; ++p)
        for (int g = 0; g < 2; ++g)
            if (iou[p][g] > 0.5) cands.push_back({iou[p][g], p, g});
    std::sort(cands.begin(), cands.end(), [](const Cand& x, const Cand& y) {
        if (x.iou != y.iou) return x.iou > y.iou;
        if (x.p != y.p) return x.p < y.p;
        return x.g < y.g;
    });
    bool used_p[2] = {false, false}, used_g[2] = {false, false};
    int tp = 0;
    for (const Cand& c : cands) {
        if (used_p[c.p] || used_g[c.g]) continue;
        used_p[c.p] = used_g[c.g] = true;
        ++tp;
    }
    FastScores s;
    s.tp = tp;
    s.fp = 2 - tp;
    s.fn = 2 - tp;
    s.f1 = 2.0 * tp / (2.0 * tp + s.fp + s.fn);

    // Aggregated Jaccard: each ground-truth instance takes its best
    // overlapping prediction (ties to the lower id); unmatched prediction
    // areas enter the denominator.
    double num = 0.0, den = 0.0;
    bool matched[2] = {false, false};
    for (int g = 0; g < 2; ++g) {
        int best = -1;
        double best_iou = 0.0;
        for (int p = 0; p < 2; ++p)
            if (iou[p][g] > best_iou) {
                best_iou = iou[p][g];
                best = p;
            }
        if (best >= 0) {
            num += inter[best][g];
            den += uni[best][g];
            matched[best] = true;
        } else {
            den += popcount64(b[g]);
        }
    }
    for (int p = 0; p < 2; ++p)
        if (!matched[p]) den += popcount64(a[p]);
    s.aji = den > 0.0 ? num / den : 1.0;

    const std::uint64_t fa = a[0] | a[1], fb = b[0] | b[1];
    s.dice = 2.0 * popcount64(fa & fb) / static_cast<double>(popcount64(fa) + popcount64(fb));
    return s;
}

Outcome criterion_segmentation_oracle() {
    Outcome out;
    const auto t0 = std::chrono::steady_clock::now();

    std::vector<TwoInstanceMap> family;
    for (int y3 = 0; y3 <= 5; ++y3)
        for (int x3 = 0; x3 <= 5; ++x3)
            for (int y2 = 0; y2 <= 6; ++y2)
                for (int x2 = 0; x2 <= 6; ++x2) {
                    if (x2 + 1 >= x3 && x2 <= x3 + 2 && y2 + 1 >= y3 && y2 <= y3 + 2) continue;
                    TwoInstanceMap t{LabelMap(8, 8), {0, 0}};
                    for (int dy = 0; dy < 3; ++dy)
                        for (int dx = 0; dx < 3; ++dx) {
                            t.map.at(x3 + dx, y3 + dy) = 1;
                            t.inst[0] |= std::uint64_t{1} << ((y3 + dy) * 8 + (x3 + dx));
                        }
                    for (int dy = 0; dy < 2; ++dy)
                        for (int dx = 0; dx < 2; ++dx) {
                            t.map.at(x2 + dx, y2 + dy) = 2;
                            t.inst[1] |= std::uint64_t{1} << ((y2 + dy) * 8 + (x2 + dx));
                        }
                    family.push_back(std::move(t));
                }
    out.require(family.size() == 1280, "family size " + std::to_string(family.size()));

    for (std::size_t i = 0; i < family.size() && out.ok; ++i) {
        for (std::size_t j = 0; j < family.size(); ++j) {
            const SegReport lib = evaluate_segmentation(family[i].map, family[j].map);
            const FastScores ref = bitmask_scores(family[i].inst, family[j].inst);
            if (std::abs(lib.f1 - ref.f1) > 1e-12 || std::abs(lib.aji - ref.aji) > 1e-12 ||
                std::abs(lib.dice - ref.dice) > 1e-12 || lib.tp != ref.tp || lib.fp != ref.fp ||
                lib.fn != ref.fn) {
                out.require(false, "exhaustive sweep mismatch at pair (" + std::to_string(i) + "," +
                                       std::to_string(j) + ")");
                break;
            }
        }
    }

    for (std::uint32_t seed = 0; seed < 200 && out.ok; ++seed) {
        const LabelMap pred = oracle::random_labelmap(32, 32, 5000 + seed, 4);
        const LabelMap gt = oracle::random_labelmap(32, 32, 6000 + seed, 4);
        const SegReport lib = evaluate_segmentation(pred, gt);
        const oracle::SegScores ref = oracle::oracle_segmentation(pred, gt);
        out.require(std::abs(lib.f1 - ref.f1) <= 1e-12 && std::abs(lib.aji - ref.aji) <= 1e-12 &&
                        std::abs(lib.dice - ref.dice) <= 1e-12,
                    "random-map mismatch at seed " + std::to_string(seed));
    }

    // Relabeling invariance: permuting instance ids changes nothing.
    for (std::uint32_t seed = 0; seed < 20 && out.ok; ++seed) {
        const LabelMap pred = oracle::random_labelmap(24, 24, 6500 + seed, 4);
        const LabelMap gt = oracle::random_labelmap(24, 24, 6600 + seed, 4);
        auto permute = [](LabelMap m) {
            for (auto& id : m.ids)
                if (id != 0) id = 5 * id + 13;
            return m;
        };
        const SegReport a = evaluate_segmentation(pred, gt);
        const SegReport b = evaluate_segmentation(permute(pred), permute(gt));
        out.require(a.f1 == b.f1 && a.aji == b.aji && a.dice == b.dice,
                    "relabeling changed a score at seed " + std::to_string(seed));
    }

    const double elapsed = seconds_since(t0);
    out.require(elapsed < 60.0, "runtime " + fmt(elapsed) + " s exceeds 60 s");
    if (out.ok) out.detail = "1280^2 sweep + 200 random, " + fmt(elapsed) + " s";
    return out;
}

// ---------- criterion 8: distances grow strictly with darkening ----------

Outcome criterion_monotone_drift() {
    Outcome out;
    SynthSpec spec;
    spec.width = 192;
    spec.height = 192;
    spec.seed = 11;
    spec.cell_conc_min = 0.6;
    spec.cell_conc_max = 1.1;
    SeriesSpec series;
    series.base = synthesize_stain_image(spec).image;
    series.factors = {1.0, 1.2, 1.5, 2.0, 3.0};
    const std::vector<RgbImage> sets = darken_series(series);

    const ColorHistogram base_hist = compute_histogram(series.base);
    std::vector<double> h, kl;
    for (const RgbImage& img : sets) {
        const ColorHistogram hist = compute_histogram(img);
        h.push_back(hellinger_distance(hist, base_hist));
        kl.push_back(kl_divergence(hist, base_hist));
    }
    std::string trace;
    for (std::size_t i = 0; i < h.size(); ++i)
        trace += (i ? ", " : "") + fmt(h[i]);
    for (std::size_t i = 1; i < h.size(); ++i) {
        out.require(h[i] > h[i - 1], "Hellinger not strictly increasing: " + trace);
        out.require(kl[i] > kl[i - 1], "KL not strictly increasing at factor index " +
                                           std::to_string(i));
    }
    if (out.ok) out.detail = "H: " + trace;
    return out;
}

// ---------- criterion 9: study table mirrors the degradation ordering ----------

double row_number(const ReportRow& row, const std::string& name) {
    for (const auto& [key, value] : row.fields) {
        if (key != name) continue;
        if (std::holds_alternative<double>(value)) return std::get<double>(value);
        if (std::holds_alternative<std::int64_t>(value))
            return static_cast<double>(std::get<std::int64_t>(value));
    }
    return std::numeric_limits<double>::quiet_NaN();
}

Outcome criterion_study_table() {
    Outcome out;
    StudyConfig config;
    SynthSpec spec;
    spec.width = 256;
    spec.height = 256;
    spec.seed = 11;
    config.synth = spec;
    config.factors = {1.0, 1.2, 1.5, 2.0, 3.0};
    config.threshold_segmenter = true;
    config.threshold = 180.0;

    const StudyResult result = run_study(config);
    out.require(result.table.rows.size() == 6,
                "expected 6 rows, got " + std::to_string(result.table.rows.size()));
    if (!out.ok) return out;

    const ReportRow& original = result.table.rows[0];
    const ReportRow& control = result.table.rows[1];  // factor 1
    for (const char* col : {"h_dist", "kl_div", "f1", "aji", "dice", "tp", "fp", "fn"}) {
        const double a = row_number(original, col);
        const double b = row_number(control, col);
        out.require(std::abs(a - b) <= 1e-6,
                    std::string("control row differs from original on ") + col + ": " + fmt(a) +
                        " vs " + fmt(b));
    }

    // Over the factor rows the color drift increases; dice and aji must not.
    for (std::size_t r = 2; r < result.table.rows.size(); ++r) {
        const ReportRow& prev = result.table.rows[r - 1];
        const ReportRow& cur = result.table.rows[r];
        out.require(row_number(cur, "h_dist") >= row_number(prev, "h_dist"),
                    "color drift not increasing at row " + std::to_string(r));
        out.require(row_number(cur, "dice") <= row_number(prev, "dice") + 1e-12,
                    "dice increased at row " + std::to_string(r));
        out.require(row_number(cur, "aji") <= row_number(prev, "aji") + 1e-12,
                    "aji increased at row " + std::to_string(r));
    }
    if (out.ok)
        out.detail = "dice " + fmt(row_number(result.table.rows[1], "dice")) + " -> " +
                     fmt(row_number(result.table.rows.back(), "dice"));
    return out;
}

// ---------- criterion 10: bit-exact file round-trips ----------

Outcome criterion_roundtrips() {
    Outcome out;
    const fs::path dir = fs::temp_directory_path() / "stainkit-acceptance";
    fs::remove_all(dir);
    fs::create_directories(dir);

    for (std::uint32_t seed = 0; seed < 5; ++seed) {
        const RgbImage img = oracle::random_image(33 + static_cast<int>(seed), 25, 8000 + seed);
        write_image(img, dir / ("img" + std::to_string(seed) + ".png"));
        out.require(read_image(dir / ("img" + std::to_string(seed) + ".png")) == img,
                    "image round-trip changed pixels at seed " + std::to_string(seed));
    }

    std::mt19937 rng(424242);
    for (std::uint32_t k = 0; k < 3; ++k) {
        LabelMap map(21, 17);
        std::uniform_int_distribution<std::uint32_t> dist(0, 65535);
        for (auto& id : map.ids) id = dist(rng);
        write_labelmap(map, dir / ("map" + std::to_string(k) + ".png"));
        out.require(read_labelmap(dir / ("map" + std::to_string(k) + ".png")) == map,
                    "label round-trip changed ids at run " + std::to_string(k));
    }

    HistogramParams exotic;
    exotic.bins = 48;
    exotic.range = 2.5;
    exotic.weighted = false;
    for (const HistogramParams& p : {HistogramParams{}, exotic}) {
        const ColorHistogram h = compute_histogram(oracle::random_image(40, 30, 8100), p);
        save_histogram(h, dir / "h.json");
        out.require(load_histogram(dir / "h.json") == h, "JSON histogram round-trip drifted");
        save_histogram(h, dir / "h.lch");
        out.require(load_histogram(dir / "h.lch") == h, "binary histogram round-trip drifted");
    }

    std::vector<ReportRow> rows;
    rows.push_back(ReportRow{}
                       .add("set", std::string("original"))
                       .add("note", std::string("plain text"))
                       .add("n", std::int64_t{12})
                       .add("score", 0.73125));
    rows.push_back(ReportRow{}
                       .add("set", std::string("factor, with comma"))
                       .add("note", std::string("says \"quoted\""))
                       .add("n", std::int64_t{-3})
                       .add("score", -0.125));
    const Report report = make_report(rows);

    write_report(report, ReportFormat::Json, dir / "r.json");
    out.require(read_report_json(dir / "r.json") == report, "JSON report round-trip drifted");
    write_report(read_report_json(dir / "r.json"), ReportFormat::Json, dir / "r2.json");
    out.require(read_text_file(dir / "r.json") == read_text_file(dir / "r2.json"),
                "JSON report re-serialization drifted");

    write_report(report, ReportFormat::Csv, dir / "r.csv");
    out.require(read_report_csv(dir / "r.csv") == report, "CSV report round-trip drifted");

    std::error_code ec;
    fs::remove_all(dir, ec);
    if (out.ok) out.detail = "images, labels, histograms, reports";
    return out;
}

}  // namespace

int main() {
    struct Criterion {
        int number;
        const char* description;
        std::function<Outcome()> run;
    };
    const std::vector<Criterion> criteria = {
        {1, "distance identities, exact symmetry, bounded range", criterion_identities},
        {2, "hand-computed distance values", criterion_hand_values},
        {3, "log-chroma antisymmetry and brightness-halving insensitivity", criterion_illumination},
        {4, "stain recovery accuracy and dictionary objective descent", criterion_stain_recovery},
        {5, "every transfer method weakly reduces color distance", criterion_transfer_improvement},
        {6, "statistics transfer matches target channel moments", criterion_moment_matching},
        {7, "segmentation metrics equal brute force", criterion_segmentation_oracle},
        {8, "color distances grow strictly with darkening", criterion_monotone_drift},
        {9, "segmentation scores fall as color drift grows", criterion_study_table},
        {10, "file round-trips are bit-exact", criterion_roundtrips},
    };

    int failures = 0;
    for (const Criterion& c : criteria) {
        Outcome out;
        try {
            out = c.run();
        } catch (const std::exception& e) {
            out.ok = false;
            out.detail = std::string("exception: ") + e.what();
        }
        std::printf("%s: criterion %d — %s%s%s\n", out.ok ? "PASS" : "FAIL", c.number,
                    c.description, out.detail.empty() ? "" : " — ", out.detail.c_str());
        std::fflush(stdout);
        if (!out.ok) ++failures;
    }
    if (failures) std::printf("%d of %zu criteria failed\n", failures, criteria.size());
    else          std::printf("all %zu criteria passed\n", criteria.size());
    return failures == 0 ? 0 : 1;
}
