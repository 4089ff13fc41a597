#include "m3/mapped_matrix.hpp"

#include <fcntl.h>
#include <sys/mman.h>
#include <sys/stat.h>
#include <unistd.h>

#include <cerrno>
#include <chrono>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <stdexcept>
#include <utility>

namespace m3 {

namespace {

[[noreturn]] void throw_errno(const std::string& path, const std::string& what, int err) {
    if (err == ENOSPC)
        throw std::runtime_error(path + ": disk full (" + what + ")");
    if (err == EACCES || err == EPERM)
        throw std::runtime_error(path + ": permission denied (" + what + ")");
    throw std::runtime_error(path + ": " + what + " failed: " + std::strerror(err));
}

struct FdGuard {
    int fd = -1;
    ~FdGuard() { if (fd >= 0) ::close(fd); }
    int take() { return std::exchange(fd, -1); }
};

}  // namespace

ChunkPlan ChunkPlan::defaults() {
    ChunkPlan plan;
    if (const char* env = std::getenv("M3_CHUNK_ROWS")) {
        char* end = nullptr;
        const unsigned long long v = std::strtoull(env, &end, 10);
        if (end && *end == '\0' && v >= 1) plan.chunk_rows = v;
    }
    return plan;
}

MappedMatrix MappedMatrix::create_mapped(const std::string& path, std::uint64_t rows,
                                         std::uint64_t cols) {
    if (cols < 1) throw std::invalid_argument("create_mapped: cols must be >= 1");
    MatrixHeader h;
    h.rows = rows;
    h.cols = cols;
    const std::uint64_t total = h.file_bytes();

    FdGuard fd;
    fd.fd = ::open(path.c_str(), O_RDWR | O_CREAT | O_TRUNC, 0644);
    if (fd.fd < 0) throw_errno(path, "open", errno);

    // Reserve blocks up front so a full disk surfaces here as ENOSPC instead
    // of as SIGBUS on a later store through the mapping.
    if (int err = ::posix_fallocate(fd.fd, 0, static_cast<off_t>(total)); err != 0) {
        ::unlink(path.c_str());
        throw_errno(path, "allocate", err);
    }

    const auto head = encode_matrix_header(h);
    if (::pwrite(fd.fd, head.data(), head.size(), 0) != static_cast<ssize_t>(head.size())) {
        const int err = errno;
        ::unlink(path.c_str());
        throw_errno(path, "write header", err);
    }

    void* base = ::mmap(nullptr, total, PROT_READ | PROT_WRITE, MAP_SHARED, fd.fd, 0);
    if (base == MAP_FAILED) {
        const int err = errno;
        ::unlink(path.c_str());
        throw std::runtime_error(path + ": mapping failed (" + std::strerror(err) + ")");
    }

    MappedMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.backing_ = Backing::Mapped;
    m.writable_ = true;
    m.path_ = path;
    m.map_base_ = base;
    m.map_len_ = total;
    m.fd_ = fd.take();
    m.data_ = reinterpret_cast<double*>(static_cast<char*>(base) + kHeaderBytes);
    return m;
}

MappedMatrix MappedMatrix::open_mapped(const std::string& path, bool writable) {
    const MatrixHeader h = read_matrix_header(path);

    FdGuard fd;
    fd.fd = ::open(path.c_str(), writable ? O_RDWR : O_RDONLY);
    if (fd.fd < 0) throw_errno(path, "open", errno);

    const std::uint64_t total = h.file_bytes();
    const int prot = writable ? (PROT_READ | PROT_WRITE) : PROT_READ;
    void* base = ::mmap(nullptr, total, prot, MAP_SHARED, fd.fd, 0);
    if (base == MAP_FAILED)
        throw std::runtime_error(path + ": mapping failed (" + std::strerror(errno) + ")");

    MappedMatrix m;
    m.rows_ = h.rows;
    m.cols_ = h.cols;
    m.backing_ = Backing::Mapped;
    m.writable_ = writable;
    m.path_ = path;
    m.map_base_ = base;
    m.map_len_ = total;
    m.fd_ = fd.take();
    m.data_ = reinterpret_cast<double*>(static_cast<char*>(base) + kHeaderBytes);
    return m;
}

MappedMatrix MappedMatrix::load_inram(const std::string& path, double* load_ms) {
    const MatrixHeader h = read_matrix_header(path);

    const auto t0 = std::chrono::steady_clock::now();

    MappedMatrix m;
    try {
        m.ram_.resize(h.rows * h.cols);
    } catch (const std::bad_alloc&) {
        throw std::runtime_error(path + ": out of memory loading " +
                                 std::to_string(h.data_bytes()) +
                                 " bytes in inram mode");
    }

    FdGuard fd;
    fd.fd = ::open(path.c_str(), O_RDONLY);
    if (fd.fd < 0) throw_errno(path, "open", errno);

    char* dst = reinterpret_cast<char*>(m.ram_.data());
    std::uint64_t remaining = h.data_bytes();
    off_t offset = kHeaderBytes;
    while (remaining > 0) {
        const std::size_t want = remaining > (64u << 20) ? (64u << 20)
                                                         : static_cast<std::size_t>(remaining);
        const ssize_t got = ::pread(fd.fd, dst, want, offset);
        if (got <= 0) throw std::runtime_error(path + ": truncated or corrupt (read failed)");
        dst += got;
        offset += got;
        remaining -= static_cast<std::uint64_t>(got);
    }

    if (load_ms) {
        *load_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0).count();
    }

    m.rows_ = h.rows;
    m.cols_ = h.cols;
    m.backing_ = Backing::InRam;
    m.writable_ = true;
    m.path_ = path;
    m.data_ = m.ram_.data();
    return m;
}

MappedMatrix MappedMatrix::from_values(std::uint64_t rows, std::uint64_t cols,
                                       std::vector<double> values) {
    if (values.size() != rows * cols)
        throw std::invalid_argument("from_values: size mismatch");
    MappedMatrix m;
    m.rows_ = rows;
    m.cols_ = cols;
    m.backing_ = Backing::InRam;
    m.writable_ = true;
    m.ram_ = std::move(values);
    m.data_ = m.ram_.data();
    return m;
}

MappedMatrix::MappedMatrix(MappedMatrix&& other) noexcept { *this = std::move(other); }

MappedMatrix& MappedMatrix::operator=(MappedMatrix&& other) noexcept {
    if (this != &other) {
        release();
        rows_ = other.rows_;
        cols_ = other.cols_;
        backing_ = other.backing_;
        writable_ = other.writable_;
        path_ = std::move(other.path_);
        map_base_ = std::exchange(other.map_base_, nullptr);
        map_len_ = std::exchange(other.map_len_, 0);
        fd_ = std::exchange(other.fd_, -1);
        ram_ = std::move(other.ram_);
        data_ = (backing_ == Backing::InRam) ? ram_.data()
                                             : std::exchange(other.data_, nullptr);
        other.data_ = nullptr;
        other.rows_ = other.cols_ = 0;
    }
    return *this;
}

MappedMatrix::~MappedMatrix() { release(); }

void MappedMatrix::release() noexcept {
    if (map_base_) {
        ::munmap(map_base_, map_len_);
        map_base_ = nullptr;
        map_len_ = 0;
    }
    if (fd_ >= 0) {
        ::close(fd_);
        fd_ = -1;
    }
    ram_.clear();
    data_ = nullptr;
}

double MappedMatrix::element(std::uint64_t i, std::uint64_t j) const {
    if (i >= rows_ || j >= cols_)
        throw std::out_of_range("element(" + std::to_string(i) + "," + std::to_string(j) +
                                ") out of range for " + std::to_string(rows_) + "x" +
                                std::to_string(cols_));
    return data_[i * cols_ + j];
}

std::span<const double> MappedMatrix::row(std::uint64_t i) const {
    if (i >= rows_)
        throw std::out_of_range("row(" + std::to_string(i) + ") out of range for " +
                                std::to_string(rows_) + " rows");
    return {data_ + i * cols_, static_cast<std::size_t>(cols_)};
}

double* MappedMatrix::mutable_data() {
    if (!writable_) throw std::logic_error("matrix is read-only");
    return data_;
}

void MappedMatrix::advise(AccessPattern pattern) const {
    if (backing_ != Backing::Mapped || !map_base_) return;
    int advice = POSIX_MADV_NORMAL;
    switch (pattern) {
        case AccessPattern::Sequential: advice = POSIX_MADV_SEQUENTIAL; break;
        case AccessPattern::Random: advice = POSIX_MADV_RANDOM; break;
        case AccessPattern::Normal: advice = POSIX_MADV_NORMAL; break;
    }
    // Hints are advisory by contract; a refusal is not an error.
    (void)::posix_madvise(map_base_, map_len_, advice);
}

std::uint64_t MappedMatrix::chunk_count(const ChunkPlan& plan) const {
    if (plan.chunk_rows < 1) throw std::invalid_argument("chunk_rows must be >= 1");
    return (rows_ + plan.chunk_rows - 1) / plan.chunk_rows;
}

Chunk MappedMatrix::chunk(const ChunkPlan& plan, std::uint64_t index) const {
    const std::uint64_t count = chunk_count(plan);
    if (index >= count)
        throw std::out_of_range("chunk " + std::to_string(index) + " of " +
                                std::to_string(count));
    Chunk c;
    c.row_offset = index * plan.chunk_rows;
    c.rows = (index + 1 == count) ? rows_ - c.row_offset : plan.chunk_rows;
    c.data = data_ + c.row_offset * cols_;
    return c;
}

}  // namespace m3
