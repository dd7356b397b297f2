#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

#include "stainkit/histogram.hpp"
#include "stainkit/image.hpp"

namespace stainkit {

// PNG rasters. read_image accepts 8-bit RGB, RGBA (alpha dropped), grayscale
// (replicated to three channels) and opaque palette files; label maps are 8- or
// 16-bit single-channel PNGs and are always written as 16-bit.
RgbImage read_image(const std::filesystem::path& path);
void write_image(const RgbImage& img, const std::filesystem::path& path);

LabelMap read_labelmap(const std::filesystem::path& path);
void write_labelmap(const LabelMap& map, const std::filesystem::path& path);

// Histogram files: ".json" extension selects the JSON form, anything else the
// LCH1 binary form.
void save_histogram(const ColorHistogram& hist, const std::filesystem::path& path);
ColorHistogram load_histogram(const std::filesystem::path& path);

using ReportValue = std::variant<std::int64_t, double, std::string>;

/// One report row: ordered column name / value pairs.
struct ReportRow {
    std::vector<std::pair<std::string, ReportValue>> fields;

    ReportRow& add(const std::string& name, std::int64_t v) {
        fields.emplace_back(name, ReportValue(v));
        return *this;
    }
    ReportRow& add(const std::string& name, double v) {
        fields.emplace_back(name, ReportValue(v));
        return *this;
    }
    ReportRow& add(const std::string& name, const std::string& v) {
        fields.emplace_back(name, ReportValue(v));
        return *this;
    }

    bool operator==(const ReportRow&) const = default;
};

/// Rows plus the column order; columns stay meaningful for empty reports.
struct Report {
    std::vector<std::string> columns;
    std::vector<ReportRow> rows;

    bool operator==(const Report&) const = default;
};

enum class ReportFormat { Json, Csv };

/// Derive columns from the rows; every row must carry the same columns.
Report make_report(const std::vector<ReportRow>& rows);

void write_report(const Report& report, ReportFormat format, const std::filesystem::path& path);
void write_report(const std::vector<ReportRow>& rows, ReportFormat format,
                  const std::filesystem::path& path);

Report read_report_json(const std::filesystem::path& path);
Report read_report_csv(const std::filesystem::path& path);

/// Append a "mean ± std" row over the numeric columns.
void append_summary_row(Report& report);

/// Render a double with 6 significant digits (the report number format).
std::string format_report_number(double v);

std::string report_to_json(const Report& report);
std::string report_to_csv(const Report& report);

void write_text_file(const std::string& text, const std::filesystem::path& path);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace stainkit
