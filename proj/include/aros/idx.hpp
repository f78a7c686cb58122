#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "aros/tensor.hpp"

namespace aros::data {

// Decoded IDX payload: either an image stack (n x H x W, bytes scaled by
// 1/255 into [0, 1]) or a label vector. Exactly one of the two is filled.
struct IdxData {
    bool is_images = false;
    Tensor images;
    std::vector<std::int64_t> labels;
};

// Big-endian IDX decoder. Accepts magic 0x00000803 (unsigned-byte images,
// 3 dimensions) and 0x00000801 (unsigned-byte labels, 1 dimension); anything
// else is a format error naming the magic it saw.
IdxData parse_idx(const std::vector<std::uint8_t>& bytes);

// Inverse of parse_idx. Image values are mapped back through round(v * 255),
// so parse -> write reproduces the original bytes exactly.
std::vector<std::uint8_t> write_idx(const IdxData& d);

std::vector<std::uint8_t> read_binary_file(const std::string& path);
void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes);

}  // namespace aros::data
