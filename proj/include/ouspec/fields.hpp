#pragma once

#include <complex>
#include <functional>
#include <memory>
#include <span>
#include <vector>

#include "ouspec/hermite.hpp"
#include "ouspec/kernels.hpp"

namespace ou {

/// Hermite coefficients <f, h_alpha>_gamma in multiindex_enumerate order.
struct SpectralField {
  BasisSpec spec;
  std::vector<cplx> coeffs;

  static SpectralField zero(const BasisSpec& spec);
  /// Unit coefficient at alpha.
  static SpectralField mode(const BasisSpec& spec, const MultiIndex& alpha);

  /// sqrt(sum |c|^2), the L^2_gamma norm by Parseval.
  double l2_norm() const;

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(cplx s);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(cplx s, SpectralField a);

/// Values on the tensor Gauss-Hermite grid, row-major with axis 0 slowest.
struct GridField {
  BasisSpec spec;
  std::vector<cplx> values;

  static GridField zero(const BasisSpec& spec);
};

/// Precomputed rule, modes and per-axis analysis/synthesis matrices for one BasisSpec.
/// Instances are immutable and shared through basis_for().
class HermiteBasis {
 public:
  explicit HermiteBasis(const BasisSpec& spec);

  const BasisSpec& spec() const noexcept { return spec_; }
  const QuadratureRule1D& rule() const noexcept { return rule_; }
  const std::vector<MultiIndex>& modes() const noexcept { return modes_; }
  /// Flat index of each mode inside the dense (N+1)^d coefficient tensor.
  const std::vector<std::size_t>& dense_index() const noexcept { return dense_index_; }
  /// (N+1) x M, entries v_m h_k(x_m).
  const RealMatrix& analysis() const noexcept { return analysis_; }
  /// M x (N+1), entries h_k(x_m).
  const RealMatrix& synthesis() const noexcept { return synthesis_; }
  /// First mode index with |alpha| = k (modes of order k are contiguous).
  std::size_t grade_begin(int k) const { return grade_offsets_[k]; }

  /// Coordinates of grid node `flat`.
  std::vector<double> node(std::size_t flat) const;
  /// Product quadrature weight of grid node `flat`.
  double node_weight(std::size_t flat) const;

 private:
  BasisSpec spec_;
  QuadratureRule1D rule_;
  std::vector<MultiIndex> modes_;
  std::vector<std::size_t> dense_index_;
  std::vector<std::size_t> grade_offsets_;
  RealMatrix analysis_;
  RealMatrix synthesis_;
};

/// Cached, thread-safe.
std::shared_ptr<const HermiteBasis> basis_for(const BasisSpec& spec);

SpectralField forward_transform(const GridField& g);
GridField inverse_transform(const SpectralField& f);

GridField from_function(const std::function<cplx(std::span<const double>)>& f,
                        const BasisSpec& spec);

cplx inner_product_gamma(const GridField& u, const GridField& v);

/// Values of f on the tensor lattice points x points x ... (same points on each axis).
Tensor synthesize_on(const SpectralField& f, std::span<const double> points);

/// Values of f on a tensor lattice with per-axis point lists.
Tensor synthesize_on(const SpectralField& f, const std::vector<std::vector<double>>& axes);

/// Point evaluation sum_alpha c_alpha h_alpha(x).
cplx evaluate(const SpectralField& f, std::span<const double> x);

/// Same coefficients embedded in (or truncated to) another basis.
SpectralField rebase(const SpectralField& f, const BasisSpec& target);

/// Scatters coefficients into a dense (N+1)^d tensor (zeros where |alpha| > N).
Tensor to_dense(const SpectralField& f);

}  // namespace ou
