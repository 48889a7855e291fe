#pragma once

// Single-example layer kernels. All tensors are dense row-major C x H x W.

#include <algorithm>
#include <cstddef>
#include <cstdint>

#include <Eigen/Core>

#include "sggv/common/reduce.hpp"

#include "sggv/nn/architecture.hpp"

namespace sggv::nn::kernels {

// Output columns [lo, hi) whose input column ox * stride - pad + k is in range.
inline void valid_range(int out_len, int in_len, int stride, int pad, int k,
                        int& lo, int& hi) {
  lo = 0;
  while (lo < out_len && lo * stride - pad + k < 0) ++lo;
  hi = out_len;
  while (hi > lo && (hi - 1) * stride - pad + k >= in_len) --hi;
}

// Number of rows and columns of the unrolled (im2col) input of a conv layer.
inline std::size_t col_rows(const TensorShape& is, const Conv& c) {
  return static_cast<std::size_t>(is.channels) * c.kernel_h * c.kernel_w;
}
inline std::size_t col_cols(const TensorShape& os) {
  return static_cast<std::size_t>(os.height) * os.width;
}

// col[(ic, ky, kx)][(oy, ox)] = in[ic][oy*s - p + ky][ox*s - p + kx], zero
// outside the image.
template <typename Real>
void im2col(const Real* in, const TensorShape& is, const Conv& c, const TensorShape& os,
            Real* col) {
  const int ih = is.height, iw = is.width, oh = os.height, ow = os.width;
  const int s = c.stride, p = c.padding;
  const std::size_t cols = col_cols(os);
  for (int ic = 0; ic < is.channels; ++ic) {
    const Real* plane = in + static_cast<std::size_t>(ic) * ih * iw;
    for (int ky = 0; ky < c.kernel_h; ++ky) {
      int ylo, yhi;
      valid_range(oh, ih, s, p, ky, ylo, yhi);
      for (int kx = 0; kx < c.kernel_w; ++kx) {
        int xlo, xhi;
        valid_range(ow, iw, s, p, kx, xlo, xhi);
        Real* row = col + ((static_cast<std::size_t>(ic) * c.kernel_h + ky) * c.kernel_w + kx) *
                              cols;
        std::fill(row, row + cols, Real(0));
        for (int oy = ylo; oy < yhi; ++oy) {
          const Real* irow = plane + static_cast<std::size_t>(oy * s - p + ky) * iw;
          Real* orow = row + static_cast<std::size_t>(oy) * ow;
          if (s == 1) {
            std::copy(irow + xlo - p + kx, irow + xhi - p + kx, orow + xlo);
          } else {
            for (int ox = xlo; ox < xhi; ++ox) orow[ox] = irow[ox * s - p + kx];
          }
        }
      }
    }
  }
}

// Adjoint of im2col: scatters-adds col back into d_in (not cleared here).
template <typename Real>
void col2im(const Real* col, const TensorShape& is, const Conv& c, const TensorShape& os,
            Real* d_in) {
  const int ih = is.height, iw = is.width, oh = os.height, ow = os.width;
  const int s = c.stride, p = c.padding;
  const std::size_t cols = col_cols(os);
  for (int ic = 0; ic < is.channels; ++ic) {
    Real* plane = d_in + static_cast<std::size_t>(ic) * ih * iw;
    for (int ky = 0; ky < c.kernel_h; ++ky) {
      int ylo, yhi;
      valid_range(oh, ih, s, p, ky, ylo, yhi);
      for (int kx = 0; kx < c.kernel_w; ++kx) {
        int xlo, xhi;
        valid_range(ow, iw, s, p, kx, xlo, xhi);
        const Real* row =
            col + ((static_cast<std::size_t>(ic) * c.kernel_h + ky) * c.kernel_w + kx) * cols;
        for (int oy = ylo; oy < yhi; ++oy) {
          Real* irow = plane + static_cast<std::size_t>(oy * s - p + ky) * iw;
          const Real* orow = row + static_cast<std::size_t>(oy) * ow;
          if (s == 1) {
            Real* dst = irow - p + kx;
#pragma omp simd
            for (int ox = xlo; ox < xhi; ++ox) dst[ox] += orow[ox];
          } else {
            for (int ox = xlo; ox < xhi; ++ox) irow[ox * s - p + kx] += orow[ox];
          }
        }
      }
    }
  }
}

template <typename Real>
using RowMatrix = Eigen::Matrix<Real, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <typename Real>
using MatrixMap = Eigen::Map<RowMatrix<Real>>;
template <typename Real>
using ConstMatrixMap = Eigen::Map<const RowMatrix<Real>>;

// `col` is scratch of col_rows x col_cols elements. The layer is one matrix
// product: out (OC x P) = W (OC x R) * col (R x P) plus the bias.
template <typename Real>
void conv_forward(const Real* in, const TensorShape& is, const Conv& c,
                  const Real* weights, const Real* bias, const TensorShape& os,
                  Real* out, Real* col) {
  im2col(in, is, c, os, col);
  const auto rows = static_cast<Eigen::Index>(col_rows(is, c));
  const auto cols = static_cast<Eigen::Index>(col_cols(os));
  const auto oc_n = static_cast<Eigen::Index>(os.channels);
  MatrixMap<Real> o(out, oc_n, cols);
  o.noalias() = ConstMatrixMap<Real>(weights, oc_n, rows) * ConstMatrixMap<Real>(col, rows, cols);
  for (Eigen::Index oc = 0; oc < oc_n; ++oc) o.row(oc).array() += bias[oc];
}

// Accumulates into d_weights / d_bias; adds into d_in (if non-null), which
// the caller zeroes. `col` must still hold the unrolled input written by
// conv_forward; `d_col` is scratch of the same size.
template <typename Real>
void conv_backward(const TensorShape& is, const Conv& c, const Real* weights,
                   const TensorShape& os, const Real* d_out, Real* d_weights, Real* d_bias,
                   Real* d_in, const Real* col, Real* d_col) {
  const auto rows = static_cast<Eigen::Index>(col_rows(is, c));
  const auto cols = static_cast<Eigen::Index>(col_cols(os));
  const auto oc_n = static_cast<Eigen::Index>(os.channels);
  ConstMatrixMap<Real> d(d_out, oc_n, cols);
  for (Eigen::Index oc = 0; oc < oc_n; ++oc)
    d_bias[oc] += lane_sum<Real>(d_out + oc * cols, static_cast<std::size_t>(cols));
  MatrixMap<Real>(d_weights, oc_n, rows).noalias() +=
      d * ConstMatrixMap<Real>(col, rows, cols).transpose();
  if (!d_in) return;
  MatrixMap<Real>(d_col, rows, cols).noalias() =
      ConstMatrixMap<Real>(weights, oc_n, rows).transpose() * d;
  col2im(d_col, is, c, os, d_in);
}

template <typename Real>
void relu_forward(const Real* in, std::size_t n, Real* out) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) out[i] = in[i] > Real(0) ? in[i] : Real(0);
}

// Gradient passes where the forward input was strictly positive.
template <typename Real>
void relu_backward(const Real* in, std::size_t n, const Real* d_out, Real* d_in) {
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) d_in[i] = in[i] > Real(0) ? d_out[i] : Real(0);
}

template <typename Real>
void maxpool_forward(const Real* in, const TensorShape& is, const MaxPool& m,
                     const TensorShape& os, Real* out, std::int32_t* argmax) {
  for (int ch = 0; ch < os.channels; ++ch) {
    const std::size_t ibase = static_cast<std::size_t>(ch) * is.height * is.width;
    for (int oy = 0; oy < os.height; ++oy) {
      for (int ox = 0; ox < os.width; ++ox) {
        std::size_t best = ibase + static_cast<std::size_t>(oy * m.stride) * is.width +
                           ox * m.stride;
        Real best_v = in[best];
        for (int wy = 0; wy < m.window; ++wy) {
          for (int wx = 0; wx < m.window; ++wx) {
            const std::size_t idx = ibase +
                                    static_cast<std::size_t>(oy * m.stride + wy) * is.width +
                                    ox * m.stride + wx;
            if (in[idx] > best_v) {
              best_v = in[idx];
              best = idx;
            }
          }
        }
        const std::size_t o = (static_cast<std::size_t>(ch) * os.height + oy) * os.width + ox;
        out[o] = best_v;
        argmax[o] = static_cast<std::int32_t>(best);
      }
    }
  }
}

// d_in must be zeroed by the caller.
template <typename Real>
void maxpool_backward(const std::int32_t* argmax, std::size_t out_size,
                      const Real* d_out, Real* d_in) {
  for (std::size_t o = 0; o < out_size; ++o) d_in[argmax[o]] += d_out[o];
}

template <typename Real>
void dense_forward(const Real* in, int in_n, const Real* weights, const Real* bias,
                   int out_n, Real* out) {
  for (int o = 0; o < out_n; ++o) {
    const Real* row = weights + static_cast<std::size_t>(o) * in_n;
    out[o] = bias[o] + lane_dot<Real>(row, in, static_cast<std::size_t>(in_n));
  }
}

// Accumulates into d_weights / d_bias; writes d_in (if non-null) which must
// be zeroed by the caller.
template <typename Real>
void dense_backward(const Real* in, int in_n, const Real* weights, int out_n,
                    const Real* d_out, Real* d_weights, Real* d_bias, Real* d_in) {
  for (int o = 0; o < out_n; ++o) {
    const Real g = d_out[o];
    d_bias[o] += g;
    Real* drow = d_weights + static_cast<std::size_t>(o) * in_n;
#pragma omp simd
    for (int i = 0; i < in_n; ++i) drow[i] += g * in[i];
    if (d_in) {
      const Real* row = weights + static_cast<std::size_t>(o) * in_n;
#pragma omp simd
      for (int i = 0; i < in_n; ++i) d_in[i] += row[i] * g;
    }
  }
}

}  // namespace sggv::nn::kernels
