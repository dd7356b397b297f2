#include "stainkit/io.hpp"

#include <png.h>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <memory>
#include <sstream>

#include "json.hpp"

namespace stainkit {

namespace {

struct FileHandle {
    std::FILE* fp = nullptr;
    explicit FileHandle(const std::filesystem::path& path, const char* mode)
        : fp(std::fopen(path.string().c_str(), mode)) {}
    ~FileHandle() {
        if (fp) std::fclose(fp);
    }
    FileHandle(const FileHandle&) = delete;
    FileHandle& operator=(const FileHandle&) = delete;
};

void ensure_parent_dir(const std::filesystem::path& path) {
    const auto parent = path.parent_path();
    if (!parent.empty()) {
        std::error_code ec;
        std::filesystem::create_directories(parent, ec);
        if (ec) raise(ErrorCode::IoFailure, "cannot create directory " + parent.string());
    }
}

// Silences libpng's stderr chatter; errors still longjmp back to the caller.
void png_warning_sink(png_structp, png_const_charp) {}
[[noreturn]] void png_error_sink(png_structp png, png_const_charp) { png_longjmp(png, 1); }

struct DecodedPng {
    png_uint_32 width = 0;
    png_uint_32 height = 0;
    int bit_depth = 0;
    int color_type = 0;
    int channels = 0;
    bool has_trns = false;
    std::vector<std::uint8_t> bytes;  // row-major, post-transform
};

// Reads and decodes a PNG. `for_labelmap` keeps single-channel data unexpanded
// (8- or 16-bit); otherwise everything is normalized to 8-bit RGB.
DecodedPng decode_png(const std::filesystem::path& path, bool for_labelmap) {
    FileHandle file(path, "rb");
    if (!file.fp) raise(ErrorCode::IoFailure, "cannot open " + path.string());

    png_byte sig[8];
    if (std::fread(sig, 1, 8, file.fp) != 8 || png_sig_cmp(sig, 0, 8) != 0)
        raise(ErrorCode::UnsupportedFormat, path.string() + " is not a PNG file");

    png_structp png = png_create_read_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(ErrorCode::IoFailure, "libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_read_struct(&png, nullptr, nullptr);
        raise(ErrorCode::IoFailure, "libpng initialization failed");
    }
    png_set_error_fn(png, nullptr, png_error_sink, png_warning_sink);

    DecodedPng out;
    std::vector<png_bytep> row_ptrs;
    // Locals mutated between setjmp and longjmp are indeterminate after the
    // jump, so the pending error lives on the heap behind an untouched pointer.
    struct PendingError {
        ErrorCode code = ErrorCode::IoFailure;
        std::string msg;
    };
    const auto pending = std::make_unique<PendingError>();

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_read_struct(&png, &info, nullptr);
        if (pending->msg.empty()) raise(ErrorCode::IoFailure, "failed to decode " + path.string());
        raise(pending->code, pending->msg);
    }

    png_init_io(png, file.fp);
    png_set_sig_bytes(png, 8);
    png_read_info(png, info);

    out.width = png_get_image_width(png, info);
    out.height = png_get_image_height(png, info);
    out.bit_depth = png_get_bit_depth(png, info);
    out.color_type = png_get_color_type(png, info);
    out.has_trns = png_get_valid(png, info, PNG_INFO_tRNS) != 0;

    if (for_labelmap) {
        if (out.color_type != PNG_COLOR_TYPE_GRAY) {
            pending->code = ErrorCode::UnsupportedFormat;
            pending->msg = path.string() + ": label maps must be single-channel PNG";
            png_longjmp(png, 1);
        }
        if (out.bit_depth < 8) png_set_expand_gray_1_2_4_to_8(png);
    } else {
        if (out.bit_depth == 16) {
            pending->code = ErrorCode::UnsupportedFormat;
            pending->msg = path.string() + ": 16-bit color PNG is not supported as an image";
            png_longjmp(png, 1);
        }
        if (out.color_type == PNG_COLOR_TYPE_PALETTE) {
            if (out.has_trns) {
                pending->code = ErrorCode::UnsupportedFormat;
                pending->msg = path.string() + ": palette PNG with alpha is not supported";
                png_longjmp(png, 1);
            }
            png_set_palette_to_rgb(png);
        }
        if (out.color_type == PNG_COLOR_TYPE_GRAY && out.bit_depth < 8)
            png_set_expand_gray_1_2_4_to_8(png);
        if (out.color_type == PNG_COLOR_TYPE_GRAY || out.color_type == PNG_COLOR_TYPE_GRAY_ALPHA)
            png_set_gray_to_rgb(png);
        if (out.color_type & PNG_COLOR_MASK_ALPHA) png_set_strip_alpha(png);
    }

    png_read_update_info(png, info);
    out.channels = png_get_channels(png, info);
    out.bit_depth = png_get_bit_depth(png, info);

    const std::size_t row_bytes = png_get_rowbytes(png, info);
    out.bytes.resize(row_bytes * out.height);
    row_ptrs.resize(out.height);
    for (png_uint_32 y = 0; y < out.height; ++y)
        row_ptrs[y] = out.bytes.data() + static_cast<std::size_t>(y) * row_bytes;

    png_read_image(png, row_ptrs.data());
    png_read_end(png, nullptr);
    png_destroy_read_struct(&png, &info, nullptr);
    return out;
}

void encode_png(const std::filesystem::path& path, int width, int height, int bit_depth,
                int color_type, const std::vector<std::uint8_t>& bytes) {
    ensure_parent_dir(path);
    FileHandle file(path, "wb");
    if (!file.fp) raise(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");

    png_structp png = png_create_write_struct(PNG_LIBPNG_VER_STRING, nullptr, nullptr, nullptr);
    if (!png) raise(ErrorCode::IoFailure, "libpng initialization failed");
    png_infop info = png_create_info_struct(png);
    if (!info) {
        png_destroy_write_struct(&png, nullptr);
        raise(ErrorCode::IoFailure, "libpng initialization failed");
    }
    png_set_error_fn(png, nullptr, png_error_sink, png_warning_sink);

    std::vector<png_bytep> row_ptrs(height);
    const int channels = color_type == PNG_COLOR_TYPE_RGB ? 3 : 1;
    const std::size_t row_bytes = static_cast<std::size_t>(width) * channels * (bit_depth / 8);
    for (int y = 0; y < height; ++y)
        row_ptrs[y] = const_cast<png_bytep>(bytes.data() + static_cast<std::size_t>(y) * row_bytes);

    if (setjmp(png_jmpbuf(png))) {
        png_destroy_write_struct(&png, &info);
        raise(ErrorCode::IoFailure, "failed to write " + path.string());
    }

    png_init_io(png, file.fp);
    png_set_IHDR(png, info, width, height, bit_depth, color_type, PNG_INTERLACE_NONE,
                 PNG_COMPRESSION_TYPE_DEFAULT, PNG_FILTER_TYPE_DEFAULT);
    png_write_info(png, info);
    png_write_image(png, row_ptrs.data());
    png_write_end(png, nullptr);
    png_destroy_write_struct(&png, &info);
}

bool looks_like_int(const std::string& s) {
    if (s.empty()) return false;
    std::size_t i = s[0] == '-' ? 1 : 0;
    if (i == s.size()) return false;
    for (; i < s.size(); ++i)
        if (!std::isdigit(static_cast<unsigned char>(s[i]))) return false;
    return true;
}

bool looks_like_double(const std::string& s, double& out) {
    if (s.empty()) return false;
    char* end = nullptr;
    out = std::strtod(s.c_str(), &end);
    return end == s.c_str() + s.size();
}

std::string csv_quote(const std::string& field) {
    if (field.find_first_of(",\"\r\n") == std::string::npos) return field;
    std::string out = "\"";
    for (char c : field) {
        out += c;
        if (c == '"') out += '"';
    }
    out += '"';
    return out;
}

std::string value_to_string(const ReportValue& v) {
    if (std::holds_alternative<std::int64_t>(v)) return std::to_string(std::get<std::int64_t>(v));
    if (std::holds_alternative<double>(v)) return format_report_number(std::get<double>(v));
    return std::get<std::string>(v);
}

void check_homogeneous(const Report& report) {
    for (const auto& row : report.rows) {
        if (row.fields.size() != report.columns.size())
            raise(ErrorCode::HeterogeneousRows, "report rows carry different columns");
        for (std::size_t i = 0; i < row.fields.size(); ++i)
            if (row.fields[i].first != report.columns[i])
                raise(ErrorCode::HeterogeneousRows, "report rows carry different columns");
    }
}

}  // namespace

RgbImage read_image(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) raise(ErrorCode::IoFailure, "no such file: " + path.string());
    DecodedPng png = decode_png(path, false);
    if (png.channels != 3 || png.bit_depth != 8)
        raise(ErrorCode::UnsupportedFormat, path.string() + ": unsupported PNG layout");
    RgbImage img(static_cast<int>(png.width), static_cast<int>(png.height));
    img.data = std::move(png.bytes);
    return img;
}

void write_image(const RgbImage& img, const std::filesystem::path& path) {
    if (img.width < 1 || img.height < 1)
        raise(ErrorCode::ParameterError, "cannot write an empty image");
    encode_png(path, img.width, img.height, 8, PNG_COLOR_TYPE_RGB, img.data);
}

LabelMap read_labelmap(const std::filesystem::path& path) {
    if (!std::filesystem::exists(path)) raise(ErrorCode::IoFailure, "no such file: " + path.string());
    DecodedPng png = decode_png(path, true);
    LabelMap map(static_cast<int>(png.width), static_cast<int>(png.height));
    const std::size_t count = map.pixel_count();
    if (png.bit_depth == 8) {
        for (std::size_t i = 0; i < count; ++i) map.ids[i] = png.bytes[i];
    } else if (png.bit_depth == 16) {
        // PNG 16-bit samples are big-endian.
        for (std::size_t i = 0; i < count; ++i)
            map.ids[i] = (static_cast<std::uint32_t>(png.bytes[i * 2]) << 8) | png.bytes[i * 2 + 1];
    } else {
        raise(ErrorCode::UnsupportedFormat, path.string() + ": unsupported label bit depth");
    }
    return map;
}

void write_labelmap(const LabelMap& map, const std::filesystem::path& path) {
    if (map.width < 1 || map.height < 1)
        raise(ErrorCode::ParameterError, "cannot write an empty label map");
    std::vector<std::uint8_t> bytes(map.pixel_count() * 2);
    for (std::size_t i = 0; i < map.pixel_count(); ++i) {
        const std::uint32_t id = map.ids[i];
        if (id > 0xffff)
            raise(ErrorCode::ParameterError, "instance id exceeds the 16-bit PNG range");
        bytes[i * 2] = static_cast<std::uint8_t>(id >> 8);
        bytes[i * 2 + 1] = static_cast<std::uint8_t>(id & 0xff);
    }
    encode_png(path, map.width, map.height, 16, PNG_COLOR_TYPE_GRAY, bytes);
}

void save_histogram(const ColorHistogram& hist, const std::filesystem::path& path) {
    if (path.extension() == ".json") {
        write_text_file(histogram_to_json(hist), path);
        return;
    }
    ensure_parent_dir(path);
    const auto bytes = histogram_to_binary(hist);
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out) raise(ErrorCode::IoFailure, "failed to write " + path.string());
}

ColorHistogram load_histogram(const std::filesystem::path& path) {
    if (path.extension() == ".json") return histogram_from_json(read_text_file(path));
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoFailure, "cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return histogram_from_binary(bytes);
}

Report make_report(const std::vector<ReportRow>& rows) {
    Report report;
    if (!rows.empty())
        for (const auto& f : rows.front().fields) report.columns.push_back(f.first);
    report.rows = rows;
    check_homogeneous(report);
    return report;
}

std::string report_to_json(const Report& report) {
    check_homogeneous(report);
    nlohmann::ordered_json arr = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json obj;
        for (const auto& [name, value] : row.fields) {
            if (std::holds_alternative<std::int64_t>(value)) {
                obj[name] = std::get<std::int64_t>(value);
            } else if (std::holds_alternative<double>(value)) {
                // Store the 6-significant-digit value so the file and the
                // parsed report agree exactly.
                obj[name] = std::strtod(format_report_number(std::get<double>(value)).c_str(), nullptr);
            } else {
                obj[name] = std::get<std::string>(value);
            }
        }
        arr.push_back(std::move(obj));
    }
    return arr.dump(2) + "\n";
}

std::string report_to_csv(const Report& report) {
    check_homogeneous(report);
    std::string out;
    for (std::size_t i = 0; i < report.columns.size(); ++i) {
        if (i) out += ',';
        out += csv_quote(report.columns[i]);
    }
    out += "\r\n";
    for (const auto& row : report.rows) {
        for (std::size_t i = 0; i < row.fields.size(); ++i) {
            if (i) out += ',';
            out += csv_quote(value_to_string(row.fields[i].second));
        }
        out += "\r\n";
    }
    return out;
}

void write_report(const Report& report, ReportFormat format, const std::filesystem::path& path) {
    write_text_file(format == ReportFormat::Json ? report_to_json(report) : report_to_csv(report),
                    path);
}

void write_report(const std::vector<ReportRow>& rows, ReportFormat format,
                  const std::filesystem::path& path) {
    write_report(make_report(rows), format, path);
}

Report read_report_json(const std::filesystem::path& path) {
    nlohmann::ordered_json arr;
    try {
        arr = nlohmann::ordered_json::parse(read_text_file(path));
    } catch (const nlohmann::json::parse_error& e) {
        raise(ErrorCode::UnsupportedFormat, std::string("invalid report JSON: ") + e.what());
    }
    if (!arr.is_array()) raise(ErrorCode::UnsupportedFormat, "report JSON must be an array");
    Report report;
    for (const auto& obj : arr) {
        ReportRow row;
        for (auto it = obj.begin(); it != obj.end(); ++it) {
            if (it->is_number_integer())
                row.add(it.key(), it->get<std::int64_t>());
            else if (it->is_number_float())
                row.add(it.key(), it->get<double>());
            else
                row.add(it.key(), it->get<std::string>());
        }
        report.rows.push_back(std::move(row));
    }
    if (!report.rows.empty())
        for (const auto& f : report.rows.front().fields) report.columns.push_back(f.first);
    check_homogeneous(report);
    return report;
}

Report read_report_csv(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    std::vector<std::vector<std::string>> records;
    std::vector<std::string> record;
    std::string field;
    bool in_quotes = false;
    bool any_field = false;
    for (std::size_t i = 0; i < text.size(); ++i) {
        const char c = text[i];
        if (in_quotes) {
            if (c == '"') {
                if (i + 1 < text.size() && text[i + 1] == '"') {
                    field += '"';
                    ++i;
                } else {
                    in_quotes = false;
                }
            } else {
                field += c;
            }
        } else if (c == '"') {
            in_quotes = true;
        } else if (c == ',') {
            record.push_back(field);
            field.clear();
            any_field = true;
        } else if (c == '\r' || c == '\n') {
            if (c == '\r' && i + 1 < text.size() && text[i + 1] == '\n') ++i;
            if (any_field || !field.empty()) {
                record.push_back(field);
                records.push_back(record);
            }
            record.clear();
            field.clear();
            any_field = false;
        } else {
            field += c;
        }
    }
    if (any_field || !field.empty()) {
        record.push_back(field);
        records.push_back(record);
    }

    Report report;
    if (records.empty()) return report;
    report.columns = records.front();
    for (std::size_t r = 1; r < records.size(); ++r) {
        if (records[r].size() != report.columns.size())
            raise(ErrorCode::HeterogeneousRows, "CSV rows carry different column counts");
        ReportRow row;
        for (std::size_t i = 0; i < records[r].size(); ++i) {
            const std::string& s = records[r][i];
            double d;
            if (looks_like_int(s))
                row.add(report.columns[i], static_cast<std::int64_t>(std::stoll(s)));
            else if (looks_like_double(s, d))
                row.add(report.columns[i], d);
            else
                row.add(report.columns[i], s);
        }
        report.rows.push_back(std::move(row));
    }
    return report;
}

void append_summary_row(Report& report) {
    check_homogeneous(report);
    if (report.rows.empty()) return;
    ReportRow summary;
    bool labeled = false;
    for (std::size_t col = 0; col < report.columns.size(); ++col) {
        bool numeric = true;
        std::vector<double> values;
        for (const auto& row : report.rows) {
            const ReportValue& v = row.fields[col].second;
            if (std::holds_alternative<std::int64_t>(v))
                values.push_back(static_cast<double>(std::get<std::int64_t>(v)));
            else if (std::holds_alternative<double>(v))
                values.push_back(std::get<double>(v));
            else {
                numeric = false;
                break;
            }
        }
        if (numeric) {
            double mean = 0.0;
            for (double v : values) mean += v;
            mean /= static_cast<double>(values.size());
            double var = 0.0;
            for (double v : values) var += (v - mean) * (v - mean);
            var /= static_cast<double>(values.size());
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.3g ± %.3g", mean, std::sqrt(var));
            summary.add(report.columns[col], std::string(buf));
        } else {
            summary.add(report.columns[col], std::string(labeled ? "" : "summary"));
            labeled = true;
        }
    }
    report.rows.push_back(std::move(summary));
}

std::string format_report_number(double v) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.6g", v);
    return buf;
}

void write_text_file(const std::string& text, const std::filesystem::path& path) {
    ensure_parent_dir(path);
    std::ofstream out(path, std::ios::binary);
    if (!out) raise(ErrorCode::IoFailure, "cannot open " + path.string() + " for writing");
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    if (!out) raise(ErrorCode::IoFailure, "failed to write " + path.string());
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) raise(ErrorCode::IoFailure, "cannot open " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace stainkit
