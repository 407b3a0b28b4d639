#pragma once

#include <cstdint>
#include <vector>

#include "cicam/box.hpp"
#include "cicam/combiner.hpp"
#include "cicam/tensor.hpp"

namespace cicam {

struct LocalizerConfig {
  double theta = 0.0;    // threshold fraction of max(H), in [0, 1)
  int connectivity = 8;  // 4 or 8
  // The map is always bilinearly upsampled to image size before thresholding.

  void validate() const;
};

// Bilinear upsampling of an [h, w] map to [out_h, out_w] (half-pixel centers).
Tensor upsample_bilinear(const Tensor& map_in, int out_h, int out_w);

struct Component {
  std::vector<int> pixels;  // flat raster indices, ascending
  int size() const { return static_cast<int>(pixels.size()); }
  int min_raster() const { return pixels.front(); }
};

// Maximal connected sets of true pixels, ordered by size descending then by
// smallest raster index.
std::vector<Component> connected_components(const std::vector<std::uint8_t>& mask,
                                            int h, int w, int connectivity);

// Upsample H to image_size, keep pixels with value > theta * max(H), take the
// largest connected component, and return its tight box. Throws
// NoForegroundError when max(H) <= 0 or the mask is empty.
BoundingBox segment_box(const LocalizationMap& h, int image_size,
                        const LocalizerConfig& config);

}  // namespace cicam
