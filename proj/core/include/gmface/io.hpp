// Persistence: PGM images, the GMFACE v1 model format, CSV exporters.
//
// Model files are line-oriented text so they stay diffable and inspectable:
//
//   GMFACE 1
//   <m> <H> <W>
//   <w> <mu_x1> <mu_x2> <l11> <l21> <l22>     (m records)
//
// Reals are written with 17 significant digits, so write/read round-trips
// 64-bit floats bit-exactly. Loaders reject invalid data rather than
// repairing it.

#pragma once

#include <filesystem>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "gmface/model.hpp"
#include "gmface/train.hpp"

namespace gmface {

// Malformed file contents; offset is the byte position of the failure when
// it is known, -1 otherwise.
class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, long offset = -1)
        : std::runtime_error(what), offset_(offset) {}
    long offset() const { return offset_; }

private:
    long offset_;
};

class IoError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Read a P2 (ASCII) or P5 (binary) PGM file, maxval <= 65535; pixel values
// are mapped to [0, 1] by value / maxval.
ImageGrid read_image(const std::filesystem::path& path);

// Clamp to [0, 1], quantize to round(value * maxval), write binary PGM (P5).
void write_image(const ImageGrid& grid, const std::filesystem::path& path, int maxval = 255);

// GMFACE v1 model persistence. read_model validates every invariant
// (component count, finite fields, positive L diagonals) and throws
// ParseError on violation.
void write_model(const GmModel& model, const std::filesystem::path& path);
GmModel read_model(const std::filesystem::path& path);

// Full-surface CSV with header r,c,x1,x2,value (H*W rows). With invert,
// values are exported as 1 - value.
void export_surface(const ImageGrid& grid, const std::filesystem::path& path, bool invert);

// Cross-section CSV with header series,index,coord,value: one series per
// requested row ("row<r>", sweeping c) and per requested column ("col<c>",
// sweeping r). Indices are 1-based.
void export_cross_sections(const ImageGrid& grid, const std::filesystem::path& path,
                           bool invert, const std::vector<int>& rows,
                           const std::vector<int>& cols);

// CSV with header epoch,l2,l_inf,total. Throws on an empty history.
void export_loss_history(const std::vector<std::pair<int, LossReport>>& history,
                         const std::filesystem::path& path);

// Load every PGM in a directory in lexicographic filename order; all images
// must share one H x W. Errors name the offending file.
std::vector<ImageGrid> load_dataset(const std::filesystem::path& dir);

}  // namespace gmface
