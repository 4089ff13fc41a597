#pragma once

// Dense row-major f64 matrix whose backing store is either an OS file
// mapping or a plain RAM buffer, with the same read API in both modes.
// Mapped mode maps the whole file once and never copies; the OS pages data
// in and out on demand, so a matrix far larger than RAM scans fine.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "m3/format.hpp"

namespace m3 {

enum class Backing { InRam, Mapped };
enum class AccessPattern { Sequential, Random, Normal };

struct ChunkPlan {
    std::uint64_t chunk_rows = 65536;

    // 65536 rows unless M3_CHUNK_ROWS overrides it.
    static ChunkPlan defaults();
};

struct Chunk {
    std::uint64_t row_offset = 0;
    std::uint64_t rows = 0;
    const double* data = nullptr;  // row_offset's first element; rows*cols values
};

class MappedMatrix {
public:
    // Creates path with a valid header and an all-zero data region of exactly
    // rows*cols f64, then maps it writable. Disk full, permission denied and
    // mapping failure are reported as distinct errors.
    static MappedMatrix create_mapped(const std::string& path, std::uint64_t rows,
                                      std::uint64_t cols);

    // Maps an existing M3MX file (header validated, size checked). Nothing is
    // read eagerly; pages fault in on first touch.
    static MappedMatrix open_mapped(const std::string& path, bool writable = false);

    // Materializes the data region into RAM with one sequential read so the
    // load cost is measurable apart from compute. load_ms, when given,
    // receives the wall time of that read.
    static MappedMatrix load_inram(const std::string& path, double* load_ms = nullptr);

    // In-RAM matrix over explicit values (values.size() must be rows*cols).
    static MappedMatrix from_values(std::uint64_t rows, std::uint64_t cols,
                                    std::vector<double> values);

    MappedMatrix(MappedMatrix&& other) noexcept;
    MappedMatrix& operator=(MappedMatrix&& other) noexcept;
    MappedMatrix(const MappedMatrix&) = delete;
    MappedMatrix& operator=(const MappedMatrix&) = delete;
    ~MappedMatrix();

    std::uint64_t rows() const { return rows_; }
    std::uint64_t cols() const { return cols_; }
    Backing backing() const { return backing_; }
    bool writable() const { return writable_; }
    const std::string& path() const { return path_; }

    double element(std::uint64_t i, std::uint64_t j) const;
    std::span<const double> row(std::uint64_t i) const;

    const double* data() const { return data_; }
    double* mutable_data();

    // Best-effort access-pattern hint to the OS for the mapped region; never
    // changes observable values, never fails, no-op for InRam.
    void advise(AccessPattern pattern) const;

    std::uint64_t chunk_count(const ChunkPlan& plan) const;
    Chunk chunk(const ChunkPlan& plan, std::uint64_t index) const;

    // Range-for over chunks in ascending row order.
    class ChunkRange;
    ChunkRange chunks(const ChunkPlan& plan) const;

private:
    MappedMatrix() = default;
    void release() noexcept;

    std::uint64_t rows_ = 0;
    std::uint64_t cols_ = 0;
    Backing backing_ = Backing::InRam;
    bool writable_ = false;
    std::string path_;

    double* data_ = nullptr;        // element (0,0); aliases map or ram buffer
    void* map_base_ = nullptr;      // whole-file mapping, Mapped mode only
    std::size_t map_len_ = 0;
    int fd_ = -1;
    std::vector<double> ram_;       // InRam mode storage
};

class MappedMatrix::ChunkRange {
public:
    class iterator {
    public:
        iterator(const MappedMatrix* m, const ChunkPlan* plan, std::uint64_t idx)
            : m_(m), plan_(plan), idx_(idx) {}
        Chunk operator*() const { return m_->chunk(*plan_, idx_); }
        iterator& operator++() { ++idx_; return *this; }
        bool operator!=(const iterator& o) const { return idx_ != o.idx_; }

    private:
        const MappedMatrix* m_;
        const ChunkPlan* plan_;
        std::uint64_t idx_;
    };

    ChunkRange(const MappedMatrix* m, ChunkPlan plan) : m_(m), plan_(plan) {}
    iterator begin() const { return {m_, &plan_, 0}; }
    iterator end() const { return {m_, &plan_, m_->chunk_count(plan_)}; }

private:
    const MappedMatrix* m_;
    ChunkPlan plan_;
};

inline MappedMatrix::ChunkRange MappedMatrix::chunks(const ChunkPlan& plan) const {
    return ChunkRange(this, plan);
}

}  // namespace m3
