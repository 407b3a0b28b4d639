#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cicam/tensor.hpp"

namespace cicam {

// 8-bit RGB raster, row-major, interleaved.
struct ImageU8 {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> rgb;  // size 3*width*height

  std::uint8_t& at(int y, int x, int ch) {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }
  std::uint8_t at(int y, int x, int ch) const {
    return rgb[(static_cast<std::size_t>(y) * width + x) * 3 + ch];
  }
};

void write_png(const std::string& path, const ImageU8& img);
ImageU8 read_png(const std::string& path);

// 3 x H x W doubles in [0,1] <-> quantized 8-bit RGB. Tensor values produced
// by u8_to_tensor are exact multiples of 1/255, so the round trip is lossless.
Tensor u8_to_tensor(const ImageU8& img);
ImageU8 tensor_to_u8(const Tensor& t);

}  // namespace cicam
