#pragma once

// Data-parallel building blocks. Every separable operation in the library
// (Hermite transforms, lattice synthesis, Mehler quadrature) reduces to
// applying a small dense matrix along one axis of a row-major tensor.

#include <complex>
#include <cstddef>
#include <vector>

namespace ou {

using cplx = std::complex<double>;

/// Row-major dense matrix.
template <typename T>
struct Matrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<T> data;

  Matrix() = default;
  Matrix(std::size_t r, std::size_t c) : rows(r), cols(c), data(r * c) {}

  T& operator()(std::size_t i, std::size_t j) { return data[i * cols + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return data[i * cols + j]; }
};

using RealMatrix = Matrix<double>;
using ComplexMatrix = Matrix<cplx>;

/// Complex tensor, axis 0 slowest.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<cplx> data;

  Tensor() = default;
  explicit Tensor(std::vector<std::size_t> s);

  std::size_t size() const noexcept { return data.size(); }
};

namespace kernels {

/// out[..., p, ...] = sum_q a(p, q) * in[..., q, ...] along `axis`.
Tensor apply_axis(const RealMatrix& a, const Tensor& in, std::size_t axis);
Tensor apply_axis(const ComplexMatrix& a, const Tensor& in, std::size_t axis);

/// Applies mats[k] along axis k for every axis.
template <typename M>
Tensor apply_separable(const std::vector<M>& mats, Tensor t) {
  for (std::size_t k = 0; k < mats.size(); ++k) t = apply_axis(mats[k], t, k);
  return t;
}

}  // namespace kernels

namespace reference {

/// Serial, non-separable equivalent of kernels::apply_separable: sums over the
/// full input index space for every output entry. O(prod(P) * prod(Q)).
template <typename M>
Tensor apply_separable(const std::vector<M>& mats, const Tensor& in) {
  const std::size_t d = mats.size();
  std::vector<std::size_t> out_shape(d);
  for (std::size_t k = 0; k < d; ++k) out_shape[k] = mats[k].rows;
  Tensor out(out_shape);
  std::vector<std::size_t> oi(d), ii(d);
  for (std::size_t o = 0; o < out.size(); ++o) {
    std::size_t rem = o;
    for (std::size_t k = d; k-- > 0;) { oi[k] = rem % out_shape[k]; rem /= out_shape[k]; }
    cplx acc = 0.0;
    for (std::size_t i = 0; i < in.size(); ++i) {
      std::size_t r2 = i;
      for (std::size_t k = d; k-- > 0;) { ii[k] = r2 % in.shape[k]; r2 /= in.shape[k]; }
      cplx f = 1.0;
      for (std::size_t k = 0; k < d; ++k) f *= mats[k](oi[k], ii[k]);
      acc += f * in.data[i];
    }
    out.data[o] = acc;
  }
  return out;
}

}  // namespace reference

}  // namespace ou
