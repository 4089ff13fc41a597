#include "m3/format.hpp"

#include <sys/stat.h>

#include <cerrno>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace m3 {

namespace {

constexpr char kMatrixMagic[4] = {'M', '3', 'M', 'X'};
constexpr char kLabelMagic[4] = {'M', '3', 'L', 'B'};

void put_u32(std::uint8_t* p, std::uint32_t v) {
    p[0] = static_cast<std::uint8_t>(v);
    p[1] = static_cast<std::uint8_t>(v >> 8);
    p[2] = static_cast<std::uint8_t>(v >> 16);
    p[3] = static_cast<std::uint8_t>(v >> 24);
}

void put_u64(std::uint8_t* p, std::uint64_t v) {
    for (int i = 0; i < 8; ++i) p[i] = static_cast<std::uint8_t>(v >> (8 * i));
}

std::uint32_t get_u32(const std::uint8_t* p) {
    return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
           (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint64_t get_u64(const std::uint8_t* p) {
    std::uint64_t v = 0;
    for (int i = 7; i >= 0; --i) v = (v << 8) | p[i];
    return v;
}

std::uint64_t file_size_of(const std::string& path) {
    struct stat st{};
    if (::stat(path.c_str(), &st) != 0)
        throw std::runtime_error(path + ": " + std::strerror(errno));
    return static_cast<std::uint64_t>(st.st_size);
}

std::vector<std::uint8_t> read_header_block(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open: " + std::strerror(errno));
    std::vector<std::uint8_t> buf(kHeaderBytes);
    in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (in.gcount() != static_cast<std::streamsize>(kHeaderBytes))
        throw std::runtime_error(path + ": truncated or corrupt (shorter than header)");
    return buf;
}

}  // namespace

AnyHeader read_header(const std::string& path) {
    const auto buf = read_header_block(path);
    const auto size = file_size_of(path);

    if (std::memcmp(buf.data(), kMatrixMagic, 4) == 0) {
        MatrixHeader h;
        h.version = get_u32(buf.data() + 4);
        h.rows = get_u64(buf.data() + 8);
        h.cols = get_u64(buf.data() + 16);
        h.elem_code = get_u32(buf.data() + 24);
        if (h.version != kFormatVersion)
            throw std::runtime_error(path + ": unsupported format (version " +
                                     std::to_string(h.version) + ")");
        if (h.elem_code != kElemFloat64)
            throw std::runtime_error(path + ": unsupported format (elem_code " +
                                     std::to_string(h.elem_code) + ")");
        if (h.cols < 1) throw std::runtime_error(path + ": truncated or corrupt (cols < 1)");
        if (size != h.file_bytes())
            throw std::runtime_error(path + ": truncated or corrupt (file is " +
                                     std::to_string(size) + " bytes, header implies " +
                                     std::to_string(h.file_bytes()) + ")");
        return h;
    }
    if (std::memcmp(buf.data(), kLabelMagic, 4) == 0) {
        LabelHeader h;
        h.version = get_u32(buf.data() + 4);
        h.rows = get_u64(buf.data() + 8);
        h.num_classes = get_u32(buf.data() + 16);
        if (h.version != kFormatVersion)
            throw std::runtime_error(path + ": unsupported format (version " +
                                     std::to_string(h.version) + ")");
        if (h.num_classes < 1 || h.num_classes > 256)
            throw std::runtime_error(path + ": truncated or corrupt (num_classes " +
                                     std::to_string(h.num_classes) + ")");
        if (size != h.file_bytes())
            throw std::runtime_error(path + ": truncated or corrupt (file is " +
                                     std::to_string(size) + " bytes, header implies " +
                                     std::to_string(h.file_bytes()) + ")");
        return h;
    }
    throw std::runtime_error(path + ": not an M3 file");
}

MatrixHeader read_matrix_header(const std::string& path) {
    auto h = read_header(path);
    if (!std::holds_alternative<MatrixHeader>(h))
        throw std::runtime_error(path + ": not an M3 matrix file");
    return std::get<MatrixHeader>(h);
}

LabelHeader read_label_header(const std::string& path) {
    auto h = read_header(path);
    if (!std::holds_alternative<LabelHeader>(h))
        throw std::runtime_error(path + ": not an M3 label file");
    return std::get<LabelHeader>(h);
}

std::vector<std::uint8_t> encode_matrix_header(const MatrixHeader& h) {
    std::vector<std::uint8_t> buf(kHeaderBytes, 0);
    std::memcpy(buf.data(), kMatrixMagic, 4);
    put_u32(buf.data() + 4, h.version);
    put_u64(buf.data() + 8, h.rows);
    put_u64(buf.data() + 16, h.cols);
    put_u32(buf.data() + 24, h.elem_code);
    return buf;
}

std::vector<std::uint8_t> encode_label_header(const LabelHeader& h) {
    std::vector<std::uint8_t> buf(kHeaderBytes, 0);
    std::memcpy(buf.data(), kLabelMagic, 4);
    put_u32(buf.data() + 4, h.version);
    put_u64(buf.data() + 8, h.rows);
    put_u32(buf.data() + 16, h.num_classes);
    return buf;
}

LabelData read_labels(const std::string& path) {
    const LabelHeader h = read_label_header(path);
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error(path + ": cannot open: " + std::strerror(errno));
    in.seekg(static_cast<std::streamoff>(kHeaderBytes));
    LabelData out;
    out.num_classes = h.num_classes;
    out.labels.resize(h.rows);
    in.read(reinterpret_cast<char*>(out.labels.data()), static_cast<std::streamsize>(h.rows));
    if (in.gcount() != static_cast<std::streamsize>(h.rows))
        throw std::runtime_error(path + ": truncated or corrupt (label data short)");
    for (std::size_t i = 0; i < out.labels.size(); ++i) {
        if (out.labels[i] >= h.num_classes)
            throw std::runtime_error(path + ": label " + std::to_string(out.labels[i]) +
                                     " at row " + std::to_string(i) + " >= num_classes " +
                                     std::to_string(h.num_classes));
    }
    return out;
}

void write_labels(const std::string& path, const std::vector<std::uint8_t>& labels,
                  std::uint32_t num_classes) {
    LabelHeader h;
    h.rows = labels.size();
    h.num_classes = num_classes;
    const auto head = encode_label_header(h);
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error(path + ": cannot create: " + std::strerror(errno));
    out.write(reinterpret_cast<const char*>(head.data()), static_cast<std::streamsize>(head.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
    if (!out) {
        out.close();
        std::remove(path.c_str());
        throw std::runtime_error(path + ": write failed: " + std::strerror(errno));
    }
}

}  // namespace m3
