#include "ouspec/fields.hpp"

#include <cmath>
#include <map>
#include <mutex>
#include <tuple>

#include "ouspec/error.hpp"

namespace ou {

SpectralField SpectralField::zero(const BasisSpec& spec) {
  spec.validate();
  return SpectralField{spec, std::vector<cplx>(spec.mode_count())};
}

SpectralField SpectralField::mode(const BasisSpec& spec, const MultiIndex& alpha) {
  auto f = zero(spec);
  require(alpha.dimension() == static_cast<std::size_t>(spec.dimension),
          ErrorKind::dimension_mismatch, "multi-index dimension does not match basis");
  require(alpha.order() <= spec.max_degree, ErrorKind::invalid_parameter,
          "mode order exceeds basis truncation");
  const auto& modes = basis_for(spec)->modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    if (modes[i] == alpha) f.coeffs[i] = 1.0;
  }
  return f;
}

double SpectralField::l2_norm() const {
  double s = 0.0;
  for (const auto& c : coeffs) s += std::norm(c);
  return std::sqrt(s);
}

namespace {

void require_same(const BasisSpec& a, const BasisSpec& b) {
  require(a == b, ErrorKind::dimension_mismatch, "fields live on different bases");
}

}  // namespace

SpectralField& SpectralField::operator+=(const SpectralField& o) {
  require_same(spec, o.spec);
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] += o.coeffs[i];
  return *this;
}

SpectralField& SpectralField::operator-=(const SpectralField& o) {
  require_same(spec, o.spec);
  for (std::size_t i = 0; i < coeffs.size(); ++i) coeffs[i] -= o.coeffs[i];
  return *this;
}

SpectralField& SpectralField::operator*=(cplx s) {
  for (auto& c : coeffs) c *= s;
  return *this;
}

SpectralField operator+(SpectralField a, const SpectralField& b) { return a += b; }
SpectralField operator-(SpectralField a, const SpectralField& b) { return a -= b; }
SpectralField operator*(cplx s, SpectralField a) { return a *= s; }

GridField GridField::zero(const BasisSpec& spec) {
  spec.validate();
  return GridField{spec, std::vector<cplx>(spec.grid_size())};
}

HermiteBasis::HermiteBasis(const BasisSpec& spec)
    : spec_(spec),
      rule_(gauss_hermite_rule(spec.nodes_per_axis)),
      modes_(multiindex_enumerate(spec.dimension, spec.max_degree)) {
  spec_.validate();
  const std::size_t n1 = static_cast<std::size_t>(spec.max_degree) + 1;
  const std::size_t m = static_cast<std::size_t>(spec.nodes_per_axis);

  dense_index_.reserve(modes_.size());
  grade_offsets_.assign(spec.max_degree + 2, modes_.size());
  for (std::size_t i = 0; i < modes_.size(); ++i) {
    std::size_t flat = 0;
    for (int a : modes_[i].degrees()) flat = flat * n1 + static_cast<std::size_t>(a);
    dense_index_.push_back(flat);
    const int ord = modes_[i].order();
    if (grade_offsets_[ord] == modes_.size()) grade_offsets_[ord] = i;
  }

  analysis_ = RealMatrix(n1, m);
  synthesis_ = RealMatrix(m, n1);
  std::vector<double> h(n1);
  for (std::size_t j = 0; j < m; ++j) {
    hermite_eval_all(spec.max_degree, rule_.nodes[j], h);
    for (std::size_t k = 0; k < n1; ++k) {
      synthesis_(j, k) = h[k];
      analysis_(k, j) = rule_.weights[j] * h[k];
    }
  }
}

std::vector<double> HermiteBasis::node(std::size_t flat) const {
  const std::size_t m = static_cast<std::size_t>(spec_.nodes_per_axis);
  std::vector<double> x(spec_.dimension);
  for (int k = spec_.dimension; k-- > 0;) {
    x[k] = rule_.nodes[flat % m];
    flat /= m;
  }
  return x;
}

double HermiteBasis::node_weight(std::size_t flat) const {
  const std::size_t m = static_cast<std::size_t>(spec_.nodes_per_axis);
  double w = 1.0;
  for (int k = 0; k < spec_.dimension; ++k) {
    w *= rule_.weights[flat % m];
    flat /= m;
  }
  return w;
}

std::shared_ptr<const HermiteBasis> basis_for(const BasisSpec& spec) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, std::shared_ptr<const HermiteBasis>> cache;
  spec.validate();
  const auto key = std::make_tuple(spec.dimension, spec.max_degree, spec.nodes_per_axis);
  std::lock_guard<std::mutex> lock(mu);
  auto it = cache.find(key);
  if (it != cache.end()) return it->second;
  auto b = std::make_shared<const HermiteBasis>(spec);
  cache.emplace(key, b);
  return b;
}

Tensor to_dense(const SpectralField& f) {
  const auto basis = basis_for(f.spec);
  require(f.coeffs.size() == basis->modes().size(), ErrorKind::dimension_mismatch,
          "coefficient count does not match basis");
  const std::size_t n1 = static_cast<std::size_t>(f.spec.max_degree) + 1;
  Tensor t(std::vector<std::size_t>(f.spec.dimension, n1));
  const auto& idx = basis->dense_index();
  for (std::size_t i = 0; i < idx.size(); ++i) t.data[idx[i]] = f.coeffs[i];
  return t;
}

SpectralField forward_transform(const GridField& g) {
  const auto basis = basis_for(g.spec);
  require(g.values.size() == g.spec.grid_size(), ErrorKind::dimension_mismatch,
          "grid value count does not match basis");
  for (const auto& v : g.values) {
    require(std::isfinite(v.real()) && std::isfinite(v.imag()), ErrorKind::data_error,
            "grid field contains non-finite values");
  }
  Tensor t(std::vector<std::size_t>(g.spec.dimension, g.spec.nodes_per_axis));
  t.data = g.values;
  const std::vector<RealMatrix> mats(g.spec.dimension, basis->analysis());
  const Tensor dense = kernels::apply_separable(mats, std::move(t));

  SpectralField f{g.spec, std::vector<cplx>(basis->modes().size())};
  const auto& idx = basis->dense_index();
  for (std::size_t i = 0; i < idx.size(); ++i) f.coeffs[i] = dense.data[idx[i]];
  return f;
}

GridField inverse_transform(const SpectralField& f) {
  const auto basis = basis_for(f.spec);
  const std::vector<RealMatrix> mats(f.spec.dimension, basis->synthesis());
  Tensor out = kernels::apply_separable(mats, to_dense(f));
  return GridField{f.spec, std::move(out.data)};
}

GridField from_function(const std::function<cplx(std::span<const double>)>& f,
                        const BasisSpec& spec) {
  const auto basis = basis_for(spec);
  GridField g = GridField::zero(spec);
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    const auto x = basis->node(i);
    g.values[i] = f(x);
  }
  return g;
}

cplx inner_product_gamma(const GridField& u, const GridField& v) {
  require_same(u.spec, v.spec);
  const auto basis = basis_for(u.spec);
  cplx acc = 0.0;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    acc += basis->node_weight(i) * u.values[i] * std::conj(v.values[i]);
  }
  return acc;
}

namespace {

RealMatrix hermite_table(int kmax, std::span<const double> points) {
  RealMatrix t(points.size(), static_cast<std::size_t>(kmax) + 1);
  for (std::size_t j = 0; j < points.size(); ++j) {
    hermite_eval_all(kmax, points[j], std::span<double>(&t(j, 0), t.cols));
  }
  return t;
}

}  // namespace

Tensor synthesize_on(const SpectralField& f, std::span<const double> points) {
  const RealMatrix table = hermite_table(f.spec.max_degree, points);
  const std::vector<RealMatrix> mats(f.spec.dimension, table);
  return kernels::apply_separable(mats, to_dense(f));
}

Tensor synthesize_on(const SpectralField& f, const std::vector<std::vector<double>>& axes) {
  require(axes.size() == static_cast<std::size_t>(f.spec.dimension),
          ErrorKind::dimension_mismatch, "lattice dimension does not match field");
  std::vector<RealMatrix> mats;
  mats.reserve(axes.size());
  for (const auto& a : axes) mats.push_back(hermite_table(f.spec.max_degree, a));
  return kernels::apply_separable(mats, to_dense(f));
}

cplx evaluate(const SpectralField& f, std::span<const double> x) {
  require(x.size() == static_cast<std::size_t>(f.spec.dimension), ErrorKind::dimension_mismatch,
          "point dimension does not match field");
  const auto basis = basis_for(f.spec);
  const std::size_t n1 = static_cast<std::size_t>(f.spec.max_degree) + 1;
  std::vector<double> h(x.size() * n1);
  for (std::size_t k = 0; k < x.size(); ++k) {
    hermite_eval_all(f.spec.max_degree, x[k], std::span<double>(h.data() + k * n1, n1));
  }
  cplx acc = 0.0;
  const auto& modes = basis->modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    double p = 1.0;
    for (std::size_t k = 0; k < x.size(); ++k) p *= h[k * n1 + modes[i][k]];
    acc += f.coeffs[i] * p;
  }
  return acc;
}

SpectralField rebase(const SpectralField& f, const BasisSpec& target) {
  require(f.spec.dimension == target.dimension, ErrorKind::dimension_mismatch,
          "cannot rebase across dimensions");
  SpectralField out = SpectralField::zero(target);
  // Graded order makes the smaller basis a prefix of the larger one.
  const std::size_t n = std::min(out.coeffs.size(), f.coeffs.size());
  std::copy_n(f.coeffs.begin(), n, out.coeffs.begin());
  return out;
}

}  // namespace ou
