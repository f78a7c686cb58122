#include "aros/idx.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "aros/errors.hpp"

namespace aros::data {

namespace {

constexpr std::uint32_t kMagicImages = 0x00000803;
constexpr std::uint32_t kMagicLabels = 0x00000801;

std::uint32_t read_u32_be(const std::vector<std::uint8_t>& b, std::size_t off) {
    if (off + 4 > b.size()) throw FormatError("idx: truncated header");
    return (static_cast<std::uint32_t>(b[off]) << 24) |
           (static_cast<std::uint32_t>(b[off + 1]) << 16) |
           (static_cast<std::uint32_t>(b[off + 2]) << 8) |
           static_cast<std::uint32_t>(b[off + 3]);
}

void push_u32_be(std::vector<std::uint8_t>& b, std::uint32_t v) {
    b.push_back(static_cast<std::uint8_t>(v >> 24));
    b.push_back(static_cast<std::uint8_t>(v >> 16));
    b.push_back(static_cast<std::uint8_t>(v >> 8));
    b.push_back(static_cast<std::uint8_t>(v));
}

}  // namespace

IdxData parse_idx(const std::vector<std::uint8_t>& bytes) {
    const std::uint32_t magic = read_u32_be(bytes, 0);
    IdxData out;
    if (magic == kMagicLabels) {
        const std::uint32_t n = read_u32_be(bytes, 4);
        if (bytes.size() != 8 + static_cast<std::size_t>(n))
            throw FormatError("idx: label payload is " + std::to_string(bytes.size() - 8) +
                              " bytes, header promises " + std::to_string(n));
        out.labels.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) out.labels.push_back(bytes[8 + i]);
        return out;
    }
    if (magic == kMagicImages) {
        const std::uint32_t n = read_u32_be(bytes, 4);
        const std::uint32_t h = read_u32_be(bytes, 8);
        const std::uint32_t w = read_u32_be(bytes, 12);
        const std::size_t count = static_cast<std::size_t>(n) * h * w;
        if (bytes.size() != 16 + count)
            throw FormatError("idx: image payload is " + std::to_string(bytes.size() - 16) +
                              " bytes, header promises " + std::to_string(count));
        out.is_images = true;
        out.images = Tensor::zeros({static_cast<std::int64_t>(n), static_cast<std::int64_t>(h),
                                    static_cast<std::int64_t>(w)});
        for (std::size_t i = 0; i < count; ++i)
            out.images.data()[i] = static_cast<double>(bytes[16 + i]) / 255.0;
        return out;
    }
    std::ostringstream msg;
    msg << "idx: unsupported magic 0x" << std::hex << magic
        << " (expected 0x803 images or 0x801 labels)";
    throw FormatError(msg.str());
}

std::vector<std::uint8_t> write_idx(const IdxData& d) {
    std::vector<std::uint8_t> out;
    if (d.is_images) {
        if (d.images.rank() != 3) throw ContractError("idx: image tensor must be n x H x W");
        push_u32_be(out, kMagicImages);
        for (std::int64_t dim : d.images.shape())
            push_u32_be(out, static_cast<std::uint32_t>(dim));
        for (std::int64_t i = 0; i < d.images.numel(); ++i) {
            const double v = std::clamp(d.images.data()[i], 0.0, 1.0);
            out.push_back(static_cast<std::uint8_t>(std::lround(v * 255.0)));
        }
    } else {
        push_u32_be(out, kMagicLabels);
        push_u32_be(out, static_cast<std::uint32_t>(d.labels.size()));
        for (std::int64_t v : d.labels) {
            if (v < 0 || v > 255) throw ContractError("idx: label out of byte range");
            out.push_back(static_cast<std::uint8_t>(v));
        }
    }
    return out;
}

std::vector<std::uint8_t> read_binary_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open: " + path);
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

void write_binary_file(const std::string& path, const std::vector<std::uint8_t>& bytes) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot open for writing: " + path);
    out.write(reinterpret_cast<const char*>(bytes.data()),
              static_cast<std::streamsize>(bytes.size()));
    if (!out) throw IoError("write failed: " + path);
}

}  // namespace aros::data
