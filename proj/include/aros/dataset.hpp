#pragma once

#include <string>
#include <utility>
#include <vector>

#include "aros/tensor.hpp"

namespace aros::data {

enum class Domain { kSynthetic2d, kImage };

// A labeled sample set. Synthetic data is (n x 2); image data is (n x H x W)
// with values already scaled into [0, 1]. Labels on out-of-distribution sets
// are conventionally zero and unused.
struct Dataset {
    Tensor x;
    std::vector<std::int64_t> y;
    Domain domain = Domain::kSynthetic2d;

    std::int64_t n() const { return x.shape().empty() ? 0 : x.shape()[0]; }
    std::int64_t num_classes() const;
    void validate() const;
};

// Two interleaved half-circle arcs with Gaussian jitter: class 0 on the unit
// upper arc, class 1 on the lower arc shifted to (1, 0.5). n splits evenly;
// an odd count gives class 0 the extra point.
Dataset gen_two_moons(std::int64_t n, double noise, std::uint64_t seed);

// Points on a circle of the given radius with 2-D Gaussian jitter. Serves as
// the synthetic out-of-distribution set; labels are all zero.
Dataset gen_ring(std::int64_t n, double radius, double noise, std::uint64_t seed);

// Stratified split: per-class floor(fraction * n_c) with largest-remainder
// top-up so the first part totals round(fraction * n). Classes with fewer
// than two samples cannot be stratified. Selection is seeded; each part
// keeps samples in their original relative order.
std::pair<Dataset, Dataset> split(const Dataset& d, double fraction, std::uint64_t seed);

// CSV with the exact header "x0,x1,label"; synthetic-domain sets only.
std::string dataset_to_csv(const Dataset& d);
Dataset dataset_from_csv(const std::string& text);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace aros::data
