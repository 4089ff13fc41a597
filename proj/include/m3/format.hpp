#pragma once

// Binary file formats. Every file starts with a 4096-byte header so the data
// region begins on a page boundary on all common page sizes; all multi-byte
// integers little-endian, all floats IEEE-754 binary64 little-endian.
//
//   M3MX  dense matrix   header {magic, version u32, rows u64, cols u64,
//                         elem_code u32 (0 = binary64), zero pad} + rows*cols f64
//   M3LB  labels          header {magic, version u32, rows u64,
//                         num_classes u32, zero pad} + rows u8
//   M3A4  u32 assignments same header shape as M3LB + rows u32
//   M3MD  model           no page header: magic, version u32, C u32, D u64,
//                         lambda f64, C*(D+1) f64 row-major

#include <cstddef>
#include <cstdint>
#include <string>
#include <variant>
#include <vector>

namespace m3 {

inline constexpr std::size_t kHeaderBytes = 4096;
inline constexpr std::uint32_t kFormatVersion = 1;
inline constexpr std::uint32_t kElemFloat64 = 0;

struct MatrixHeader {
    std::uint64_t rows = 0;
    std::uint64_t cols = 0;
    std::uint32_t version = kFormatVersion;
    std::uint32_t elem_code = kElemFloat64;

    std::uint64_t data_bytes() const { return rows * cols * sizeof(double); }
    std::uint64_t file_bytes() const { return kHeaderBytes + data_bytes(); }
};

struct LabelHeader {
    std::uint64_t rows = 0;
    std::uint32_t num_classes = 0;
    std::uint32_t version = kFormatVersion;

    std::uint64_t file_bytes() const { return kHeaderBytes + rows; }
};

using AnyHeader = std::variant<MatrixHeader, LabelHeader>;

// Parses and fully validates the header of an M3MX or M3LB file, including
// the file-size invariant. Throws std::runtime_error whose message contains
// "not an M3 file", "truncated or corrupt" or "unsupported format".
AnyHeader read_header(const std::string& path);

// Typed variants; throw "truncated or corrupt" style errors as above and
// reject the other magic.
MatrixHeader read_matrix_header(const std::string& path);
LabelHeader read_label_header(const std::string& path);

// Serialize a header into a kHeaderBytes buffer (zero padded).
std::vector<std::uint8_t> encode_matrix_header(const MatrixHeader& h);
std::vector<std::uint8_t> encode_label_header(const LabelHeader& h);

struct LabelData {
    std::vector<std::uint8_t> labels;
    std::uint32_t num_classes = 0;
};

// Reads the whole label file; validates every label < num_classes.
LabelData read_labels(const std::string& path);

void write_labels(const std::string& path, const std::vector<std::uint8_t>& labels,
                  std::uint32_t num_classes);

}  // namespace m3
