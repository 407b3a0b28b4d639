#pragma once

#include <vector>

namespace cicam {

// Channels-first kernels on raw buffers. Backward functions accumulate into
// the gradient buffers; callers zero them at batch start.

// 3x3 convolution, stride 1, zero padding 1. wgt layout [cout][cin][3][3].
void conv3x3_forward(const double* x, int cin, int h, int w, const double* wgt,
                     const double* bias, int cout, double* y);
void conv3x3_backward(const double* x, const double* wgt, int cin, int cout, int h,
                      int w, const double* dy, double* dx, double* dwgt, double* dbias);

// 1x1 convolution. wgt layout [cout][cin].
void conv1x1_forward(const double* x, int cin, int h, int w, const double* wgt,
                     const double* bias, int cout, double* y);
void conv1x1_backward(const double* x, const double* wgt, int cin, int cout, int h,
                      int w, const double* dy, double* dx, double* dwgt, double* dbias);

// In-place ReLU; backward masks on the stored output.
void relu_forward(double* x, std::size_t n);
void relu_backward(const double* y, double* dy, std::size_t n);

// 2x2 max pool, stride 2 (h, w even). argmax stores the flat input index per
// output element for the backward pass. Ties resolve to the first element in
// raster order.
void maxpool2x2_forward(const double* x, int c, int h, int w, double* y, int* argmax);
void maxpool2x2_backward(const double* dy, const int* argmax, int c, int h, int w,
                         double* dx);

}  // namespace cicam
