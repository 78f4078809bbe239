#include "ouspec/hermite.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ouspec/error.hpp"

namespace ou {

MultiIndex::MultiIndex(std::vector<int> degrees) : degrees_(std::move(degrees)) {
  for (int a : degrees_) {
    require(a >= 0, ErrorKind::invalid_parameter, "multi-index degrees must be nonnegative");
  }
  order_ = std::accumulate(degrees_.begin(), degrees_.end(), 0);
}

void BasisSpec::validate() const {
  require(dimension >= 1, ErrorKind::invalid_parameter, "dimension must be >= 1");
  require(max_degree >= 0, ErrorKind::invalid_parameter, "max_degree must be >= 0");
  require(nodes_per_axis >= max_degree + 1, ErrorKind::invalid_parameter,
          "nodes_per_axis must be >= max_degree + 1");
}

std::size_t BasisSpec::mode_count() const { return ou::mode_count(dimension, max_degree); }

std::size_t BasisSpec::grid_size() const {
  std::size_t n = 1;
  for (int k = 0; k < dimension; ++k) n *= static_cast<std::size_t>(nodes_per_axis);
  return n;
}

double hermite_eval(int k, double x) {
  require(k >= 0, ErrorKind::invalid_parameter, "hermite degree must be >= 0");
  double prev = 0.0;
  double cur = 1.0;
  for (int j = 0; j < k; ++j) {
    const double next = std::sqrt(2.0 / (j + 1)) * x * cur - std::sqrt(double(j) / (j + 1)) * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

void hermite_eval_all(int kmax, double x, std::span<double> out) {
  out[0] = 1.0;
  if (kmax == 0) return;
  out[1] = std::sqrt(2.0) * x;
  for (int j = 1; j < kmax; ++j) {
    out[j + 1] = std::sqrt(2.0 / (j + 1)) * x * out[j] - std::sqrt(double(j) / (j + 1)) * out[j - 1];
  }
}

double tensor_hermite_eval(const MultiIndex& alpha, std::span<const double> x) {
  require(x.size() == alpha.dimension(), ErrorKind::dimension_mismatch,
          "point dimension does not match multi-index dimension");
  double v = 1.0;
  for (std::size_t k = 0; k < x.size(); ++k) v *= hermite_eval(alpha[k], x[k]);
  return v;
}

namespace {

struct Tail {
  double ratio = 0.0;         // h_m(x) / h_{m-1}(x)
  double log_abs_prev = 0.0;  // log |h_{m-1}(x)|
};

// Three-term recurrence with rescaling; h_k can overflow long before the nodes of large rules do.
Tail scaled_tail(int m, double x) {
  double prev = 0.0, cur = 1.0, log_scale = 0.0;  // cur = h_0 = 1
  for (int k = 0; k < m - 1; ++k) {
    const double next = std::sqrt(2.0 / (k + 1)) * x * cur - std::sqrt(double(k) / (k + 1)) * prev;
    prev = cur;
    cur = next;
    const double a = std::abs(cur);
    if (a > 1e150) {
      prev /= a;
      cur /= a;
      log_scale += std::log(a);
    }
  }
  // cur = h_{m-1}, prev = h_{m-2} (both scaled by e^{-log_scale}).
  const double hm = std::sqrt(2.0 / m) * x * cur - std::sqrt(double(m - 1) / m) * prev;
  return {hm / cur, std::log(std::abs(cur)) + log_scale};
}

}  // namespace

QuadratureRule1D gauss_hermite_rule(int count) {
  require(count >= 1, ErrorKind::invalid_parameter, "quadrature node count must be >= 1");
  const int m = count;
  QuadratureRule1D rule;
  rule.nodes.assign(m, 0.0);
  rule.weights.assign(m, 1.0);
  if (m == 1) return rule;

  // Jacobi matrix of the orthonormal recurrence: x h_k = b_{k+1} h_{k+1} + b_k h_{k-1}, b_k = sqrt(k/2).
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(m);
  Eigen::VectorXd sub(m - 1);
  for (int k = 1; k < m; ++k) sub[k - 1] = std::sqrt(0.5 * k);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver;
  solver.computeFromTridiagonal(diag, sub, Eigen::EigenvaluesOnly);
  std::vector<double> x(solver.eigenvalues().data(), solver.eigenvalues().data() + m);
  std::sort(x.begin(), x.end());

  // Symmetrize, then polish each node with Newton on h_M (h_M' = sqrt(2M) h_{M-1}).
  for (int i = 0; i < m / 2; ++i) {
    double r = 0.5 * (x[m - 1 - i] - x[i]);
    for (int it = 0; it < 8; ++it) {
      const double step = scaled_tail(m, r).ratio / std::sqrt(2.0 * m);
      if (!std::isfinite(step)) break;
      r -= step;
      if (std::abs(step) <= 1e-16 * std::max(1.0, std::abs(r))) break;
    }
    x[i] = -r;
    x[m - 1 - i] = r;
  }
  if (m % 2 == 1) x[m / 2] = 0.0;

  // v = 1 / (M h_{M-1}(x)^2), evaluated in logs so far nodes underflow to 0.
  for (int i = 0; i < m; ++i) {
    rule.nodes[i] = x[i];
    rule.weights[i] = std::exp(-2.0 * scaled_tail(m, x[i]).log_abs_prev - std::log(double(m)));
  }
  return rule;
}

namespace {

void enumerate_grade(int dimension, int remaining, std::vector<int>& prefix,
                     std::vector<MultiIndex>& out) {
  const int slot = static_cast<int>(prefix.size());
  if (slot == dimension - 1) {
    prefix.push_back(remaining);
    out.emplace_back(prefix);
    prefix.pop_back();
    return;
  }
  for (int a = 0; a <= remaining; ++a) {
    prefix.push_back(a);
    enumerate_grade(dimension, remaining - a, prefix, out);
    prefix.pop_back();
  }
}

}  // namespace

std::vector<MultiIndex> multiindex_enumerate(int dimension, int max_degree) {
  require(dimension >= 1, ErrorKind::invalid_parameter, "dimension must be >= 1");
  require(max_degree >= 0, ErrorKind::invalid_parameter, "max_degree must be >= 0");
  std::vector<MultiIndex> out;
  out.reserve(mode_count(dimension, max_degree));
  std::vector<int> prefix;
  for (int grade = 0; grade <= max_degree; ++grade) enumerate_grade(dimension, grade, prefix, out);
  return out;
}

std::size_t mode_count(int dimension, int max_degree) {
  // binom(N+d, d) built incrementally to stay exact.
  std::size_t c = 1;
  for (int k = 1; k <= dimension; ++k) {
    c = c * static_cast<std::size_t>(max_degree + k) / static_cast<std::size_t>(k);
  }
  return c;
}

}  // namespace ou
