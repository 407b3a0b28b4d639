#pragma once

namespace cicam {

// Integer pixel box, half-open: pixels (x, y) with x_min <= x < x_max,
// y_min <= y < y_max. Used project-wide for ground truth and predictions.
struct BoundingBox {
  int x_min = 0;
  int y_min = 0;
  int x_max = 0;
  int y_max = 0;

  long long area() const {
    return static_cast<long long>(x_max - x_min) * (y_max - y_min);
  }
  bool valid() const { return x_min < x_max && y_min < y_max; }

  bool operator==(const BoundingBox&) const = default;
};

}  // namespace cicam
