#include "ouspec/kernels.hpp"

#include <functional>
#include <numeric>

#include "ouspec/error.hpp"

namespace ou {

Tensor::Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
  const std::size_t n =
      std::accumulate(shape.begin(), shape.end(), std::size_t{1}, std::multiplies<>());
  data.assign(n, cplx{0.0, 0.0});
}

namespace kernels {

namespace {

template <typename T>
Tensor apply_axis_impl(const Matrix<T>& a, const Tensor& in, std::size_t axis) {
  require(axis < in.shape.size(), ErrorKind::dimension_mismatch, "axis out of range");
  require(a.cols == in.shape[axis], ErrorKind::dimension_mismatch,
          "matrix columns do not match tensor extent");
  std::size_t outer = 1, inner = 1;
  for (std::size_t k = 0; k < axis; ++k) outer *= in.shape[k];
  for (std::size_t k = axis + 1; k < in.shape.size(); ++k) inner *= in.shape[k];

  std::vector<std::size_t> shape = in.shape;
  shape[axis] = a.rows;
  Tensor out(shape);
  const std::size_t q_len = a.cols;
  const std::size_t p_len = a.rows;
  const auto n_outer = static_cast<long long>(outer);
  const auto n_rows = static_cast<long long>(p_len);

#pragma omp parallel for collapse(2) schedule(static)
  for (long long o = 0; o < n_outer; ++o) {
    for (long long p = 0; p < n_rows; ++p) {
      const cplx* src = in.data.data() + static_cast<std::size_t>(o) * q_len * inner;
      cplx* dst = out.data.data() + (static_cast<std::size_t>(o) * p_len + p) * inner;
      const T* row = a.data.data() + static_cast<std::size_t>(p) * q_len;
      for (std::size_t q = 0; q < q_len; ++q) {
        const T coef = row[q];
        const cplx* s = src + q * inner;
        for (std::size_t i = 0; i < inner; ++i) dst[i] += coef * s[i];
      }
    }
  }
  return out;
}

}  // namespace

Tensor apply_axis(const RealMatrix& a, const Tensor& in, std::size_t axis) {
  return apply_axis_impl(a, in, axis);
}

Tensor apply_axis(const ComplexMatrix& a, const Tensor& in, std::size_t axis) {
  return apply_axis_impl(a, in, axis);
}

}  // namespace kernels
}  // namespace ou
