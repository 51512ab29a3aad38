#include "gmface/io.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <sstream>

namespace gmface {

namespace {

std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return std::move(buf).str();
}

// Token scanner over raw PGM bytes. Comments run from '#' to end of line.
struct PnmScanner {
    const std::string& data;
    size_t pos = 0;

    void skip_space_and_comments() {
        while (pos < data.size()) {
            const char ch = data[pos];
            if (std::isspace(static_cast<unsigned char>(ch))) {
                ++pos;
            } else if (ch == '#') {
                while (pos < data.size() && data[pos] != '\n') ++pos;
            } else {
                break;
            }
        }
    }

    long next_int(const char* what) {
        skip_space_and_comments();
        if (pos >= data.size()) {
            throw ParseError(std::string("unexpected end of file while reading ") + what,
                             static_cast<long>(pos));
        }
        const size_t start = pos;
        long value = 0;
        bool any = false;
        while (pos < data.size() && std::isdigit(static_cast<unsigned char>(data[pos]))) {
            value = value * 10 + (data[pos] - '0');
            ++pos;
            any = true;
        }
        if (!any) {
            throw ParseError(std::string("expected integer for ") + what,
                             static_cast<long>(start));
        }
        return value;
    }
};

std::string format_real(double value) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

double parse_real(const std::string& token, const char* what, long line_no) {
    char* end = nullptr;
    const double value = std::strtod(token.c_str(), &end);
    if (end == token.c_str() || *end != '\0') {
        throw ParseError("line " + std::to_string(line_no) + ": bad real for " + what +
                         ": '" + token + "'");
    }
    return value;
}

std::FILE* open_for_write(const std::filesystem::path& path) {
    std::FILE* f = std::fopen(path.string().c_str(), "wb");
    if (!f) {
        throw IoError("cannot write " + path.string());
    }
    return f;
}

struct FileCloser {
    std::FILE* f;
    ~FileCloser() { if (f) std::fclose(f); }
};

}  // namespace

ImageGrid read_image(const std::filesystem::path& path) {
    const std::string data = read_file(path);
    if (data.size() < 2 || data[0] != 'P' || (data[1] != '2' && data[1] != '5')) {
        throw ParseError(path.string() + ": unsupported magic (expected P2 or P5)", 0);
    }
    const bool binary = data[1] == '5';
    PnmScanner scan{data, 2};

    const long width = scan.next_int("width");
    const long height = scan.next_int("height");
    const long maxval = scan.next_int("maxval");
    if (width < 1 || height < 1) {
        throw ParseError(path.string() + ": invalid dimensions", static_cast<long>(scan.pos));
    }
    if (maxval < 1 || maxval > 65535) {
        throw ParseError(path.string() + ": maxval out of range [1, 65535]",
                         static_cast<long>(scan.pos));
    }

    ImageGrid grid = ImageGrid::zeros(static_cast<int>(height), static_cast<int>(width));
    const size_t count = grid.pixels.size();

    if (binary) {
        // Exactly one whitespace byte separates the header from the raster.
        if (scan.pos >= data.size() ||
            !std::isspace(static_cast<unsigned char>(data[scan.pos]))) {
            throw ParseError(path.string() + ": missing separator before binary raster",
                             static_cast<long>(scan.pos));
        }
        ++scan.pos;
        const int bytes_per = maxval > 255 ? 2 : 1;
        if (data.size() - scan.pos < count * bytes_per) {
            throw ParseError(path.string() + ": truncated raster data",
                             static_cast<long>(data.size()));
        }
        for (size_t i = 0; i < count; ++i) {
            unsigned long v;
            if (bytes_per == 1) {
                v = static_cast<unsigned char>(data[scan.pos + i]);
            } else {
                // Two-byte samples are big-endian.
                v = (static_cast<unsigned long>(static_cast<unsigned char>(data[scan.pos + 2 * i]))
                     << 8) |
                    static_cast<unsigned char>(data[scan.pos + 2 * i + 1]);
            }
            if (v > static_cast<unsigned long>(maxval)) {
                throw ParseError(path.string() + ": sample exceeds maxval",
                                 static_cast<long>(scan.pos + i * bytes_per));
            }
            grid.pixels[i] = static_cast<double>(v) / maxval;
        }
    } else {
        for (size_t i = 0; i < count; ++i) {
            const long v = scan.next_int("pixel value");
            if (v > maxval) {
                throw ParseError(path.string() + ": sample exceeds maxval",
                                 static_cast<long>(scan.pos));
            }
            grid.pixels[i] = static_cast<double>(v) / maxval;
        }
    }
    return grid;
}

void write_image(const ImageGrid& grid, const std::filesystem::path& path, int maxval) {
    if (maxval < 1 || maxval > 65535) {
        throw std::invalid_argument("write_image: maxval out of range [1, 65535]");
    }
    std::FILE* f = open_for_write(path);
    FileCloser closer{f};
    std::fprintf(f, "P5\n%d %d\n%d\n", grid.width, grid.height, maxval);
    const int bytes_per = maxval > 255 ? 2 : 1;
    for (double value : grid.pixels) {
        const double clamped = std::clamp(value, 0.0, 1.0);
        const unsigned long q = static_cast<unsigned long>(std::lround(clamped * maxval));
        if (bytes_per == 2) {
            std::fputc(static_cast<int>((q >> 8) & 0xff), f);
        }
        std::fputc(static_cast<int>(q & 0xff), f);
    }
    if (std::ferror(f)) {
        throw IoError("write failure on " + path.string());
    }
}

void write_model(const GmModel& model, const std::filesystem::path& path) {
    std::FILE* f = open_for_write(path);
    FileCloser closer{f};
    std::fprintf(f, "GMFACE 1\n%d %d %d\n", model.component_count(), model.height,
                 model.width);
    for (const GaussianComponent& comp : model.components) {
        std::fprintf(f, "%s %s %s %s %s %s\n", format_real(comp.w).c_str(),
                     format_real(comp.mu.x1).c_str(), format_real(comp.mu.x2).c_str(),
                     format_real(comp.chol.l11).c_str(), format_real(comp.chol.l21).c_str(),
                     format_real(comp.chol.l22).c_str());
    }
    if (std::ferror(f)) {
        throw IoError("write failure on " + path.string());
    }
}

GmModel read_model(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw IoError("cannot open " + path.string());
    }
    std::string magic;
    int version = 0;
    if (!(in >> magic >> version) || magic != "GMFACE") {
        throw ParseError(path.string() + ": not a GMFACE model file");
    }
    if (version != 1) {
        throw ParseError(path.string() + ": unsupported version " + std::to_string(version));
    }
    int m = 0, h = 0, w = 0;
    if (!(in >> m >> h >> w)) {
        throw ParseError(path.string() + ": malformed header line");
    }
    if (m < 1 || h < 1 || w < 1) {
        throw ParseError(path.string() + ": invalid header values (m, H, W must be >= 1)");
    }

    GmModel model;
    model.height = h;
    model.width = w;
    model.components.resize(m);
    for (int i = 0; i < m; ++i) {
        GaussianComponent& comp = model.components[i];
        std::string tok[6];
        for (std::string& t : tok) {
            if (!(in >> t)) {
                throw ParseError(path.string() + ": expected " + std::to_string(m) +
                                 " component records, got " + std::to_string(i));
            }
        }
        const long line = i + 3;
        comp.w = parse_real(tok[0], "w", line);
        comp.mu.x1 = parse_real(tok[1], "mu_x1", line);
        comp.mu.x2 = parse_real(tok[2], "mu_x2", line);
        comp.chol.l11 = parse_real(tok[3], "l11", line);
        comp.chol.l21 = parse_real(tok[4], "l21", line);
        comp.chol.l22 = parse_real(tok[5], "l22", line);

        const bool finite = std::isfinite(comp.w) && std::isfinite(comp.mu.x1) &&
                            std::isfinite(comp.mu.x2) && std::isfinite(comp.chol.l11) &&
                            std::isfinite(comp.chol.l21) && std::isfinite(comp.chol.l22);
        if (!finite) {
            throw ParseError(path.string() + ": component " + std::to_string(i + 1) +
                             " has non-finite fields");
        }
        if (!comp.chol.valid()) {
            throw ParseError(path.string() + ": component " + std::to_string(i + 1) +
                             " violates the Cholesky invariant (l11, l22 must be > 0)");
        }
    }
    std::string trailing;
    if (in >> trailing) {
        throw ParseError(path.string() + ": trailing data after " + std::to_string(m) +
                         " components");
    }
    return model;
}

void export_surface(const ImageGrid& grid, const std::filesystem::path& path, bool invert) {
    std::FILE* f = open_for_write(path);
    FileCloser closer{f};
    std::fprintf(f, "r,c,x1,x2,value\n");
    for (int r = 1; r <= grid.height; ++r) {
        for (int c = 1; c <= grid.width; ++c) {
            const Vec2 x = pixel_coords(r, c, grid.height, grid.width);
            const double value = invert ? 1.0 - grid.at(r, c) : grid.at(r, c);
            std::fprintf(f, "%d,%d,%s,%s,%s\n", r, c, format_real(x.x1).c_str(),
                         format_real(x.x2).c_str(), format_real(value).c_str());
        }
    }
    if (std::ferror(f)) {
        throw IoError("write failure on " + path.string());
    }
}

void export_cross_sections(const ImageGrid& grid, const std::filesystem::path& path,
                           bool invert, const std::vector<int>& rows,
                           const std::vector<int>& cols) {
    for (int r : rows) {
        if (r < 1 || r > grid.height) {
            throw std::invalid_argument("export_cross_sections: row " + std::to_string(r) +
                                        " out of range");
        }
    }
    for (int c : cols) {
        if (c < 1 || c > grid.width) {
            throw std::invalid_argument("export_cross_sections: column " + std::to_string(c) +
                                        " out of range");
        }
    }
    std::FILE* f = open_for_write(path);
    FileCloser closer{f};
    std::fprintf(f, "series,index,coord,value\n");
    auto emit = [&](const std::string& series, int index, double coord, double raw) {
        const double value = invert ? 1.0 - raw : raw;
        std::fprintf(f, "%s,%d,%s,%s\n", series.c_str(), index, format_real(coord).c_str(),
                     format_real(value).c_str());
    };
    for (int r : rows) {
        const std::string series = "row" + std::to_string(r);
        for (int c = 1; c <= grid.width; ++c) {
            emit(series, c, static_cast<double>(c) / grid.width, grid.at(r, c));
        }
    }
    for (int c : cols) {
        const std::string series = "col" + std::to_string(c);
        for (int r = 1; r <= grid.height; ++r) {
            emit(series, r, static_cast<double>(r) / grid.height, grid.at(r, c));
        }
    }
    if (std::ferror(f)) {
        throw IoError("write failure on " + path.string());
    }
}

void export_loss_history(const std::vector<std::pair<int, LossReport>>& history,
                         const std::filesystem::path& path) {
    if (history.empty()) {
        throw std::invalid_argument("export_loss_history: empty history");
    }
    std::FILE* f = open_for_write(path);
    FileCloser closer{f};
    std::fprintf(f, "epoch,l2,l_inf,total\n");
    for (const auto& [epoch, report] : history) {
        std::fprintf(f, "%d,%s,%s,%s\n", epoch, format_real(report.l2).c_str(),
                     format_real(report.l_inf).c_str(), format_real(report.total).c_str());
    }
    if (std::ferror(f)) {
        throw IoError("write failure on " + path.string());
    }
}

std::vector<ImageGrid> load_dataset(const std::filesystem::path& dir) {
    if (!std::filesystem::is_directory(dir)) {
        throw IoError(dir.string() + " is not a directory");
    }
    std::vector<std::filesystem::path> files;
    for (const auto& entry : std::filesystem::directory_iterator(dir)) {
        if (!entry.is_regular_file()) continue;
        std::string ext = entry.path().extension().string();
        std::transform(ext.begin(), ext.end(), ext.begin(),
                       [](unsigned char ch) { return std::tolower(ch); });
        if (ext == ".pgm") files.push_back(entry.path());
    }
    if (files.empty()) {
        throw IoError("no PGM files in " + dir.string());
    }
    // Lexicographic filename order, independent of filesystem enumeration.
    std::sort(files.begin(), files.end(), [](const auto& a, const auto& b) {
        return a.filename().string() < b.filename().string();
    });

    std::vector<ImageGrid> images;
    images.reserve(files.size());
    for (const auto& file : files) {
        ImageGrid grid = read_image(file);
        if (!images.empty() &&
            (grid.height != images.front().height || grid.width != images.front().width)) {
            throw IoError(file.string() + ": dimensions " + std::to_string(grid.height) + "x" +
                          std::to_string(grid.width) + " differ from the rest of the dataset (" +
                          std::to_string(images.front().height) + "x" +
                          std::to_string(images.front().width) + ")");
        }
        images.push_back(std::move(grid));
    }
    return images;
}

}  // namespace gmface
