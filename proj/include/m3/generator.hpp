#pragma once

// Deterministic Infimnist-style dataset generator. Row i depends only on
// (seed, i, cols, num_classes, noise_sigma), so any partitioning of the row
// range produces byte-identical files; label of row i is i mod num_classes.

#include <cstdint>
#include <string>
#include <vector>

namespace m3 {

struct GeneratorSpec {
    std::uint64_t rows = 0;
    std::uint64_t cols = 784;
    std::uint32_t num_classes = 10;
    std::uint64_t seed = 0;
    double noise_sigma = 25.0;
};

// Per-class pixel means: cols uniforms in [0,255) from the stream seeded
// with mix(seed ^ (0xC1A55 + class)).
std::vector<double> class_means(const GeneratorSpec& spec, std::uint32_t cls);

// Pixels of row i: mu_class[j] + sigma * z_ij clamped to [0,255], gaussians
// from the stream seeded with mix(seed ^ i), consumed in ascending j.
void fill_row(const GeneratorSpec& spec, std::uint64_t i,
              const std::vector<std::vector<double>>& mu, double* out);

// Writes the data and label files (valid headers, bit-exact format). Any
// failure removes the partial file. threads parallelizes over disjoint row
// ranges; output is byte-identical for any thread count.
void generate_dataset(const GeneratorSpec& spec, const std::string& data_path,
                      const std::string& label_path, unsigned threads = 1);

}  // namespace m3
