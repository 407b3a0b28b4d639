#include "cicam/layers.hpp"

#include <algorithm>
#include <cstddef>

namespace cicam {

void conv3x3_forward(const double* x, int cin, int h, int w, const double* wgt,
                     const double* bias, int cout, double* y) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int co = 0; co < cout; ++co) {
    double* yp = y + co * plane;
    std::fill(yp, yp + plane, bias[co]);
    for (int ci = 0; ci < cin; ++ci) {
      const double* xp = x + ci * plane;
      const double* wp = wgt + (static_cast<std::size_t>(co) * cin + ci) * 9;
      const double w00 = wp[0], w01 = wp[1], w02 = wp[2];
      const double w10 = wp[3], w11 = wp[4], w12 = wp[5];
      const double w20 = wp[6], w21 = wp[7], w22 = wp[8];
      // Interior: all 9 taps in one pass per row.
      for (int yy = 1; yy < h - 1; ++yy) {
        const double* r0 = xp + static_cast<std::size_t>(yy - 1) * w;
        const double* r1 = r0 + w;
        const double* r2 = r1 + w;
        double* yr = yp + static_cast<std::size_t>(yy) * w;
        for (int xx = 1; xx < w - 1; ++xx)
          yr[xx] += w00 * r0[xx - 1] + w01 * r0[xx] + w02 * r0[xx + 1] +
                    w10 * r1[xx - 1] + w11 * r1[xx] + w12 * r1[xx + 1] +
                    w20 * r2[xx - 1] + w21 * r2[xx] + w22 * r2[xx + 1];
      }
      // Borders: zero padding.
      for (int yy = 0; yy < h; ++yy) {
        for (int xx : {0, w - 1}) {
          double acc = 0.0;
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              int sy = yy + ky - 1, sx = xx + kx - 1;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              acc += wp[ky * 3 + kx] * xp[static_cast<std::size_t>(sy) * w + sx];
            }
          yp[static_cast<std::size_t>(yy) * w + xx] += acc;
        }
      }
      for (int xx = 1; xx < w - 1; ++xx) {
        for (int yy : {0, h - 1}) {
          double acc = 0.0;
          for (int ky = 0; ky < 3; ++ky)
            for (int kx = 0; kx < 3; ++kx) {
              int sy = yy + ky - 1, sx = xx + kx - 1;
              if (sy < 0 || sy >= h || sx < 0 || sx >= w) continue;
              acc += wp[ky * 3 + kx] * xp[static_cast<std::size_t>(sy) * w + sx];
            }
          yp[static_cast<std::size_t>(yy) * w + xx] += acc;
        }
      }
    }
  }
}

void conv3x3_backward(const double* x, const double* wgt, int cin, int cout, int h,
                      int w, const double* dy, double* dx, double* dwgt,
                      double* dbias) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int co = 0; co < cout; ++co) {
    const double* dyp = dy + co * plane;
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += dyp[i];
    dbias[co] += acc;
    for (int ci = 0; ci < cin; ++ci) {
      const double* xp = x + ci * plane;
      double* dxp = dx + ci * plane;
      const double* wp = wgt + (static_cast<std::size_t>(co) * cin + ci) * 9;
      double* dwp = dwgt + (static_cast<std::size_t>(co) * cin + ci) * 9;

      // Weight gradient: one pass, nine accumulators.
      double a00 = 0, a01 = 0, a02 = 0, a10 = 0, a11 = 0, a12 = 0, a20 = 0,
             a21 = 0, a22 = 0;
      for (int yy = 0; yy < h; ++yy) {
        const double* dyr = dyp + static_cast<std::size_t>(yy) * w;
        const double* r0 = yy > 0 ? xp + static_cast<std::size_t>(yy - 1) * w : nullptr;
        const double* r1 = xp + static_cast<std::size_t>(yy) * w;
        const double* r2 = yy < h - 1 ? xp + static_cast<std::size_t>(yy + 1) * w : nullptr;
        if (r0 && r2) {
          for (int xx = 1; xx < w - 1; ++xx) {
            double d = dyr[xx];
            a00 += r0[xx - 1] * d; a01 += r0[xx] * d; a02 += r0[xx + 1] * d;
            a10 += r1[xx - 1] * d; a11 += r1[xx] * d; a12 += r1[xx + 1] * d;
            a20 += r2[xx - 1] * d; a21 += r2[xx] * d; a22 += r2[xx + 1] * d;
          }
        } else {
          for (int xx = 1; xx < w - 1; ++xx) {
            double d = dyr[xx];
            if (r0) { a00 += r0[xx - 1] * d; a01 += r0[xx] * d; a02 += r0[xx + 1] * d; }
            a10 += r1[xx - 1] * d; a11 += r1[xx] * d; a12 += r1[xx + 1] * d;
            if (r2) { a20 += r2[xx - 1] * d; a21 += r2[xx] * d; a22 += r2[xx + 1] * d; }
          }
        }
        for (int xx : {0, w - 1}) {
          double d = dyr[xx];
          if (xx > 0) {
            if (r0) a00 += r0[xx - 1] * d;
            a10 += r1[xx - 1] * d;
            if (r2) a20 += r2[xx - 1] * d;
          }
          if (r0) a01 += r0[xx] * d;
          a11 += r1[xx] * d;
          if (r2) a21 += r2[xx] * d;
          if (xx < w - 1) {
            if (r0) a02 += r0[xx + 1] * d;
            a12 += r1[xx + 1] * d;
            if (r2) a22 += r2[xx + 1] * d;
          }
        }
      }
      dwp[0] += a00; dwp[1] += a01; dwp[2] += a02;
      dwp[3] += a10; dwp[4] += a11; dwp[5] += a12;
      dwp[6] += a20; dwp[7] += a21; dwp[8] += a22;

      // Input gradient: correlation of dy with the flipped kernel.
      const double w00 = wp[0], w01 = wp[1], w02 = wp[2];
      const double w10 = wp[3], w11 = wp[4], w12 = wp[5];
      const double w20 = wp[6], w21 = wp[7], w22 = wp[8];
      for (int sy = 1; sy < h - 1; ++sy) {
        const double* d0 = dyp + static_cast<std::size_t>(sy - 1) * w;
        const double* d1 = d0 + w;
        const double* d2 = d1 + w;
        double* dxr = dxp + static_cast<std::size_t>(sy) * w;
        for (int sx = 1; sx < w - 1; ++sx)
          dxr[sx] += w22 * d0[sx - 1] + w21 * d0[sx] + w20 * d0[sx + 1] +
                     w12 * d1[sx - 1] + w11 * d1[sx] + w10 * d1[sx + 1] +
                     w02 * d2[sx - 1] + w01 * d2[sx] + w00 * d2[sx + 1];
      }
      auto dx_border = [&](int sy, int sx) {
        double acc2 = 0.0;
        for (int ky = 0; ky < 3; ++ky)
          for (int kx = 0; kx < 3; ++kx) {
            int oy = sy - (ky - 1), ox = sx - (kx - 1);
            if (oy < 0 || oy >= h || ox < 0 || ox >= w) continue;
            acc2 += wp[ky * 3 + kx] * dyp[static_cast<std::size_t>(oy) * w + ox];
          }
        dxp[static_cast<std::size_t>(sy) * w + sx] += acc2;
      };
      for (int sy = 0; sy < h; ++sy) {
        dx_border(sy, 0);
        dx_border(sy, w - 1);
      }
      for (int sx = 1; sx < w - 1; ++sx) {
        dx_border(0, sx);
        dx_border(h - 1, sx);
      }
    }
  }
}

void conv1x1_forward(const double* x, int cin, int h, int w, const double* wgt,
                     const double* bias, int cout, double* y) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int co = 0; co < cout; ++co) {
    double* yp = y + co * plane;
    std::fill(yp, yp + plane, bias[co]);
    for (int ci = 0; ci < cin; ++ci) {
      const double* xp = x + ci * plane;
      double wv = wgt[static_cast<std::size_t>(co) * cin + ci];
      for (std::size_t i = 0; i < plane; ++i) yp[i] += wv * xp[i];
    }
  }
}

void conv1x1_backward(const double* x, const double* wgt, int cin, int cout, int h,
                      int w, const double* dy, double* dx, double* dwgt,
                      double* dbias) {
  const std::size_t plane = static_cast<std::size_t>(h) * w;
  for (int co = 0; co < cout; ++co) {
    const double* dyp = dy + co * plane;
    double acc = 0.0;
    for (std::size_t i = 0; i < plane; ++i) acc += dyp[i];
    dbias[co] += acc;
    for (int ci = 0; ci < cin; ++ci) {
      const double* xp = x + ci * plane;
      double* dxp = dx + ci * plane;
      double wv = wgt[static_cast<std::size_t>(co) * cin + ci];
      double wacc = 0.0;
      for (std::size_t i = 0; i < plane; ++i) {
        wacc += xp[i] * dyp[i];
        dxp[i] += wv * dyp[i];
      }
      dwgt[static_cast<std::size_t>(co) * cin + ci] += wacc;
    }
  }
}

void relu_forward(double* x, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (x[i] < 0.0) x[i] = 0.0;
}

void relu_backward(const double* y, double* dy, std::size_t n) {
  for (std::size_t i = 0; i < n; ++i)
    if (y[i] <= 0.0) dy[i] = 0.0;
}

void maxpool2x2_forward(const double* x, int c, int h, int w, double* y, int* argmax) {
  const int oh = h / 2, ow = w / 2;
  for (int ci = 0; ci < c; ++ci) {
    const double* xp = x + static_cast<std::size_t>(ci) * h * w;
    double* yp = y + static_cast<std::size_t>(ci) * oh * ow;
    int* ap = argmax + static_cast<std::size_t>(ci) * oh * ow;
    for (int oy = 0; oy < oh; ++oy)
      for (int ox = 0; ox < ow; ++ox) {
        int base = (2 * oy) * w + 2 * ox;
        int best = base;
        double bv = xp[base];
        const int cand[3] = {base + 1, base + w, base + w + 1};
        for (int k = 0; k < 3; ++k)
          if (xp[cand[k]] > bv) {
            bv = xp[cand[k]];
            best = cand[k];
          }
        yp[oy * ow + ox] = bv;
        ap[oy * ow + ox] = best;
      }
  }
}

void maxpool2x2_backward(const double* dy, const int* argmax, int c, int h, int w,
                         double* dx) {
  const int oh = h / 2, ow = w / 2;
  for (int ci = 0; ci < c; ++ci) {
    const double* dyp = dy + static_cast<std::size_t>(ci) * oh * ow;
    const int* ap = argmax + static_cast<std::size_t>(ci) * oh * ow;
    double* dxp = dx + static_cast<std::size_t>(ci) * h * w;
    for (int i = 0; i < oh * ow; ++i) dxp[ap[i]] += dyp[i];
  }
}

}  // namespace cicam
