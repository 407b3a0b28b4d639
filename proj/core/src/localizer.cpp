#include "cicam/localizer.hpp"

#include <algorithm>
#include <cmath>

#include "cicam/errors.hpp"

namespace cicam {

void LocalizerConfig::validate() const {
  if (theta < 0.0 || theta >= 1.0) throw ValidationError("theta must be in [0,1)");
  if (connectivity != 4 && connectivity != 8)
    throw ValidationError("connectivity must be 4 or 8");
}

Tensor upsample_bilinear(const Tensor& map_in, int out_h, int out_w) {
  const int h = map_in.dim(0), w = map_in.dim(1);
  Tensor out({out_h, out_w});
  const double sy = static_cast<double>(h) / out_h;
  const double sx = static_cast<double>(w) / out_w;
  for (int y = 0; y < out_h; ++y) {
    double fy = (y + 0.5) * sy - 0.5;
    int y0 = static_cast<int>(std::floor(fy));
    double wy = fy - y0;
    int y0c = std::clamp(y0, 0, h - 1), y1c = std::clamp(y0 + 1, 0, h - 1);
    for (int x = 0; x < out_w; ++x) {
      double fx = (x + 0.5) * sx - 0.5;
      int x0 = static_cast<int>(std::floor(fx));
      double wx = fx - x0;
      int x0c = std::clamp(x0, 0, w - 1), x1c = std::clamp(x0 + 1, 0, w - 1);
      double top = (1.0 - wx) * map_in.at(y0c, x0c) + wx * map_in.at(y0c, x1c);
      double bot = (1.0 - wx) * map_in.at(y1c, x0c) + wx * map_in.at(y1c, x1c);
      out.at(y, x) = (1.0 - wy) * top + wy * bot;
    }
  }
  return out;
}

std::vector<Component> connected_components(const std::vector<std::uint8_t>& mask,
                                            int h, int w, int connectivity) {
  if (connectivity != 4 && connectivity != 8)
    throw ValidationError("connectivity must be 4 or 8");
  std::vector<int> label(mask.size(), -1);
  std::vector<Component> comps;
  std::vector<int> stack;

  const int dx4[] = {1, -1, 0, 0};
  const int dy4[] = {0, 0, 1, -1};
  const int dx8[] = {1, -1, 0, 0, 1, 1, -1, -1};
  const int dy8[] = {0, 0, 1, -1, 1, -1, 1, -1};
  const int* dx = connectivity == 4 ? dx4 : dx8;
  const int* dy = connectivity == 4 ? dy4 : dy8;
  const int nn = connectivity;

  for (int start = 0; start < h * w; ++start) {
    if (!mask[static_cast<std::size_t>(start)] || label[static_cast<std::size_t>(start)] >= 0)
      continue;
    Component comp;
    int id = static_cast<int>(comps.size());
    stack.push_back(start);
    label[static_cast<std::size_t>(start)] = id;
    while (!stack.empty()) {
      int cur = stack.back();
      stack.pop_back();
      comp.pixels.push_back(cur);
      int cy = cur / w, cx = cur % w;
      for (int k = 0; k < nn; ++k) {
        int ny = cy + dy[k], nx = cx + dx[k];
        if (ny < 0 || ny >= h || nx < 0 || nx >= w) continue;
        int ni = ny * w + nx;
        if (!mask[static_cast<std::size_t>(ni)] || label[static_cast<std::size_t>(ni)] >= 0)
          continue;
        label[static_cast<std::size_t>(ni)] = id;
        stack.push_back(ni);
      }
    }
    std::sort(comp.pixels.begin(), comp.pixels.end());
    comps.push_back(std::move(comp));
  }

  std::stable_sort(comps.begin(), comps.end(), [](const Component& a, const Component& b) {
    if (a.size() != b.size()) return a.size() > b.size();
    return a.min_raster() < b.min_raster();
  });
  return comps;
}

BoundingBox segment_box(const LocalizationMap& h, int image_size,
                        const LocalizerConfig& config) {
  config.validate();
  Tensor up = upsample_bilinear(h.h, image_size, image_size);
  double mx = *std::max_element(up.v.begin(), up.v.end());
  if (mx <= 0.0) throw NoForegroundError();

  const double cut = config.theta * mx;
  std::vector<std::uint8_t> mask(up.numel());
  bool any = false;
  for (std::size_t i = 0; i < up.numel(); ++i) {
    mask[i] = up.v[i] > cut ? 1 : 0;
    any = any || mask[i];
  }
  if (!any) throw NoForegroundError();

  auto comps = connected_components(mask, image_size, image_size, config.connectivity);
  const Component& best = comps.front();
  int mn_x = image_size, mn_y = image_size, mx_x = -1, mx_y = -1;
  for (int p : best.pixels) {
    int y = p / image_size, x = p % image_size;
    mn_x = std::min(mn_x, x);
    mn_y = std::min(mn_y, y);
    mx_x = std::max(mx_x, x);
    mx_y = std::max(mx_y, y);
  }
  return {mn_x, mn_y, mx_x + 1, mx_y + 1};
}

}  // namespace cicam
