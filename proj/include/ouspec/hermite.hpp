#pragma once

// Normalized Hermite polynomials h_k = (2^k k!)^{-1/2} H_k (physicists' H_k),
// orthonormal in L^2(R, gamma_1) with gamma_1(x) = pi^{-1/2} exp(-x^2).
// This is NOT the probabilists' He_k convention.

#include <cstddef>
#include <span>
#include <vector>

namespace ou {

/// Degrees (alpha_1, ..., alpha_d) of a tensor Hermite mode.
class MultiIndex {
 public:
  MultiIndex() = default;
  explicit MultiIndex(std::vector<int> degrees);

  std::size_t dimension() const noexcept { return degrees_.size(); }
  int order() const noexcept { return order_; }
  int operator[](std::size_t k) const { return degrees_[k]; }
  const std::vector<int>& degrees() const noexcept { return degrees_; }

  friend bool operator==(const MultiIndex&, const MultiIndex&) = default;

 private:
  std::vector<int> degrees_;
  int order_ = 0;
};

/// Total-degree truncation of the tensor basis plus the per-axis node count.
struct BasisSpec {
  int dimension = 1;
  int max_degree = 0;
  int nodes_per_axis = 1;

  /// Throws invalid_parameter unless d >= 1, N >= 0, M >= N+1.
  void validate() const;
  std::size_t mode_count() const;
  std::size_t grid_size() const;

  friend bool operator==(const BasisSpec&, const BasisSpec&) = default;
};

/// Gauss-Hermite rule normalized to the probability measure gamma_1.
struct QuadratureRule1D {
  std::vector<double> nodes;
  std::vector<double> weights;

  std::size_t size() const noexcept { return nodes.size(); }
};

double hermite_eval(int k, double x);

/// Fills out[0..kmax] with h_0(x)..h_kmax(x).
void hermite_eval_all(int kmax, double x, std::span<double> out);

double tensor_hermite_eval(const MultiIndex& alpha, std::span<const double> x);

/// Golub-Welsch nodes, Newton-polished; exact for degree <= 2M-1 against gamma_1.
QuadratureRule1D gauss_hermite_rule(int count);

/// Graded lexicographic: by order, then lexicographically on the degree tuple.
std::vector<MultiIndex> multiindex_enumerate(int dimension, int max_degree);

/// binom(N+d, d).
std::size_t mode_count(int dimension, int max_degree);

}  // namespace ou
