#include "m3/generator.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cerrno>
#include <cstdio>
#include <cstring>
#include <exception>
#include <stdexcept>
#include <thread>

#include "m3/format.hpp"
#include "m3/prng.hpp"

namespace m3 {

namespace {

constexpr std::uint64_t kClassSeedSalt = 0xC1A55;

// Rows buffered per pwrite; 1024 x 784 f64 is ~6.4MB per worker.
constexpr std::uint64_t kRowsPerWrite = 1024;

void pwrite_all(int fd, const void* buf, std::size_t len, off_t offset,
                const std::string& path) {
    const char* p = static_cast<const char*>(buf);
    while (len > 0) {
        const ssize_t got = ::pwrite(fd, p, len, offset);
        if (got < 0) {
            if (errno == ENOSPC)
                throw std::runtime_error(path + ": disk full (write)");
            throw std::runtime_error(path + ": write failed: " + std::strerror(errno));
        }
        p += got;
        offset += got;
        len -= static_cast<std::size_t>(got);
    }
}

}  // namespace

std::vector<double> class_means(const GeneratorSpec& spec, std::uint32_t cls) {
    SplitMix64 rng(mix64(spec.seed ^ (kClassSeedSalt + cls)));
    std::vector<double> mu(spec.cols);
    for (auto& v : mu) v = 255.0 * rng.next_uniform();
    return mu;
}

void fill_row(const GeneratorSpec& spec, std::uint64_t i,
              const std::vector<std::vector<double>>& mu, double* out) {
    const std::vector<double>& m = mu[i % spec.num_classes];
    SplitMix64 rng(mix64(spec.seed ^ i));
    for (std::uint64_t j = 0; j < spec.cols; ++j) {
        const double v = m[j] + spec.noise_sigma * rng.next_gaussian();
        out[j] = std::clamp(v, 0.0, 255.0);
    }
}

void generate_dataset(const GeneratorSpec& spec, const std::string& data_path,
                      const std::string& label_path, unsigned threads) {
    if (spec.cols < 1) throw std::invalid_argument("generate_dataset: cols must be >= 1");
    if (spec.num_classes < 1 || spec.num_classes > 256)
        throw std::invalid_argument("generate_dataset: num_classes must be in [1,256]");

    std::vector<std::vector<double>> mu(spec.num_classes);
    for (std::uint32_t c = 0; c < spec.num_classes; ++c) mu[c] = class_means(spec, c);

    MatrixHeader h;
    h.rows = spec.rows;
    h.cols = spec.cols;

    const int fd = ::open(data_path.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
    if (fd < 0) {
        if (errno == EACCES || errno == EPERM)
            throw std::runtime_error(data_path + ": permission denied (open)");
        throw std::runtime_error(data_path + ": cannot create: " + std::strerror(errno));
    }

    try {
        if (int err = ::posix_fallocate(fd, 0, static_cast<off_t>(h.file_bytes())); err != 0) {
            if (err == ENOSPC) throw std::runtime_error(data_path + ": disk full (allocate)");
            throw std::runtime_error(data_path + ": allocate failed: " + std::strerror(err));
        }
        const auto head = encode_matrix_header(h);
        pwrite_all(fd, head.data(), head.size(), 0, data_path);

        if (threads < 1) threads = 1;
        if (spec.rows > 0) {
            const unsigned workers =
                static_cast<unsigned>(std::min<std::uint64_t>(threads, spec.rows));
            std::exception_ptr failure;
            std::atomic<bool> failed{false};
            std::vector<std::thread> pool;
            const std::uint64_t per = (spec.rows + workers - 1) / workers;

            auto work = [&](std::uint64_t begin, std::uint64_t end) {
                try {
                    std::vector<double> buf(
                        static_cast<std::size_t>(std::min(kRowsPerWrite, end - begin)) *
                        spec.cols);
                    for (std::uint64_t r = begin; r < end && !failed.load(); r += kRowsPerWrite) {
                        const std::uint64_t n = std::min(kRowsPerWrite, end - r);
                        for (std::uint64_t i = 0; i < n; ++i)
                            fill_row(spec, r + i, mu, buf.data() + i * spec.cols);
                        pwrite_all(fd, buf.data(), n * spec.cols * sizeof(double),
                                   static_cast<off_t>(kHeaderBytes +
                                                      r * spec.cols * sizeof(double)),
                                   data_path);
                    }
                } catch (...) {
                    if (!failed.exchange(true)) failure = std::current_exception();
                }
            };

            if (workers == 1) {
                work(0, spec.rows);
            } else {
                for (unsigned w = 0; w < workers; ++w) {
                    const std::uint64_t begin = w * per;
                    pool.emplace_back(work, begin, std::min(begin + per, spec.rows));
                }
                for (auto& t : pool) t.join();
            }
            if (failure) std::rethrow_exception(failure);
        }
        ::close(fd);
    } catch (...) {
        ::close(fd);
        std::remove(data_path.c_str());
        throw;
    }

    std::vector<std::uint8_t> labels(spec.rows);
    for (std::uint64_t i = 0; i < spec.rows; ++i)
        labels[i] = static_cast<std::uint8_t>(i % spec.num_classes);
    write_labels(label_path, labels, spec.num_classes);
}

}  // namespace m3
