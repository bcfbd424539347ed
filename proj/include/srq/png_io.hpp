#ifndef SRQ_PNG_IO_HPP
#define SRQ_PNG_IO_HPP

#include "srq/tensor.hpp"

#include <filesystem>

namespace srq {

// 8-bit RGB PNG <-> (H, W, 3) intensities in [0,1]. Lossless round-trip of
// the quantized values; grayscale and RGBA inputs are expanded/stripped.
Tensor read_png(const std::filesystem::path& path);
void write_png(const std::filesystem::path& path, const Tensor& img);

}  // namespace srq

#endif
