#include "ouspec/propagator.hpp"

#include <algorithm>
#include <cmath>

#include "ouspec/error.hpp"

namespace ou {

void KernelEvalConfig::validate() const {
  require(t_exclusion > 0.0 && t_exclusion <= 0.25 * M_PI, ErrorKind::invalid_parameter,
          "t_exclusion must lie in (0, pi/4]");
  require(oversample >= 1, ErrorKind::invalid_parameter, "oversample must be >= 1");
}

SpectralField spectral_propagate(const SpectralField& f, double t) {
  const auto basis = basis_for(f.spec);
  SpectralField out = f;
  const auto& modes = basis->modes();
  for (std::size_t i = 0; i < modes.size(); ++i) {
    out.coeffs[i] *= std::polar(1.0, -t * modes[i].order());
  }
  return out;
}

SpectralField heat_propagate(const SpectralField& f, double t) {
  require(t >= 0.0, ErrorKind::invalid_parameter, "heat semigroup needs t >= 0");
  const auto basis = basis_for(f.spec);
  SpectralField out = f;
  const auto& modes = basis->modes();
  for (std::size_t i = 0; i < modes.size(); ++i) out.coeffs[i] *= std::exp(-t * modes[i].order());
  return out;
}

SpectralField eigen_project(const SpectralField& f, int k) {
  require(k >= 0 && k <= f.spec.max_degree, ErrorKind::invalid_parameter,
          "eigenspace index out of range");
  const auto basis = basis_for(f.spec);
  SpectralField out = SpectralField::zero(f.spec);
  const std::size_t lo = basis->grade_begin(k);
  const std::size_t hi = basis->grade_begin(k + 1);
  std::copy(f.coeffs.begin() + lo, f.coeffs.begin() + hi, out.coeffs.begin() + lo);
  return out;
}

SpectralField parity_flip(const SpectralField& f) {
  GridField g = inverse_transform(f);
  const std::size_t m = static_cast<std::size_t>(f.spec.nodes_per_axis);
  const int d = f.spec.dimension;
  GridField r = g;
  for (std::size_t i = 0; i < g.values.size(); ++i) {
    std::size_t rem = i, j = 0, stride = 1;
    for (int k = 0; k < d; ++k) {
      j += (m - 1 - rem % m) * stride;
      rem /= m;
      stride *= m;
    }
    r.values[j] = g.values[i];
  }
  return forward_transform(r);
}

namespace {

struct ReducedTime {
  double t;        // in (0, pi)
  bool conjugate;  // reduced time was negative
};

// Two pi-shifts (M_{i(t+pi)}(x,y) = M_{it}(-x,y) applied twice) bring t into [-pi, pi];
// negative times use M_{it} = conj(M_{-it}) so no branch of sin(t)^{d/2} is ever chosen.
ReducedTime reduce_time(double t, double exclusion) {
  const double k = std::round(t / M_PI);
  const double dist = std::abs(t - k * M_PI);
  require(dist >= exclusion, ErrorKind::singular_time,
          "time lies within the singularity guard around pi*Z");
  const double s = std::remainder(t, 2.0 * M_PI);
  ReducedTime rt{s, false};
  if (s < 0.0) {
    rt.t = -s;
    rt.conjugate = true;
  }
  return rt;
}

cplx kernel_1d_positive(double t, double x, double y) {
  // t in (0, pi): sin t > 0, principal branch.
  const double st = std::sin(t);
  const double ct = std::cos(t) / st;
  const double amp = std::exp(0.5 * (x * x + y * y)) / std::sqrt(2.0 * st);
  const double phase = -0.25 * M_PI + 0.5 * t + 0.5 * (ct * (x * x + y * y) - 2.0 * x * y / st);
  return std::polar(amp, phase);
}

}  // namespace

cplx mehler_kernel_1d(double t, double x, double y, const KernelEvalConfig& cfg) {
  cfg.validate();
  const ReducedTime rt = reduce_time(t, cfg.t_exclusion);
  const cplx v = kernel_1d_positive(rt.t, x, y);
  return rt.conjugate ? std::conj(v) : v;
}

cplx mehler_kernel(double t, std::span<const double> x, std::span<const double> y,
                   const KernelEvalConfig& cfg) {
  require(x.size() == y.size() && !x.empty(), ErrorKind::dimension_mismatch,
          "kernel arguments must share a nonzero dimension");
  cplx v = 1.0;
  for (std::size_t k = 0; k < x.size(); ++k) v *= mehler_kernel_1d(t, x[k], y[k], cfg);
  return v;
}

KernelLattice kernel_lattice_for(const BasisSpec& spec, double t, const KernelEvalConfig& cfg) {
  cfg.validate();
  const ReducedTime rt = reduce_time(t, cfg.t_exclusion);
  const double st = std::abs(std::sin(rt.t));
  const double ct = std::abs(std::cos(rt.t)) / st;
  const auto basis = basis_for(spec);
  const double x_out = basis->rule().nodes.back();
  const double turning = std::sqrt(2.0 * spec.max_degree + 1.0);
  KernelLattice lat;
  lat.half_width = turning + 8.0;
  // Local frequency bound of the integrand: chirp + linear phase + Hermite oscillation.
  const double f_max = ct * lat.half_width + x_out / st + turning;
  const double h = 4.0 * M_PI / (cfg.oversample * f_max);
  int p = static_cast<int>(std::ceil(2.0 * lat.half_width / h)) + 1;
  if (p % 2 == 0) ++p;
  lat.points_per_axis = p;
  return lat;
}

namespace {

std::vector<double> lattice_points(const KernelLattice& lat) {
  std::vector<double> y(lat.points_per_axis);
  const int mid = lat.points_per_axis / 2;
  const double h = 2.0 * lat.half_width / (lat.points_per_axis - 1);
  for (int j = 0; j < lat.points_per_axis; ++j) y[j] = (j - mid) * h;
  return y;
}

// Per-axis factor of M_{it}(x, y) gamma_1(y) dy on the trapezoid lattice.
// gamma_1(y) e^{y^2/2} = pi^{-1/2} e^{-y^2/2} is folded in to avoid overflow.
ComplexMatrix kernel_axis_matrix(const std::vector<double>& x, const std::vector<double>& y,
                                 const ReducedTime& rt) {
  const double h = y.size() > 1 ? y[1] - y[0] : 1.0;
  const double st = std::sin(rt.t);
  const double ct = std::cos(rt.t) / st;
  const double pref = h / std::sqrt(M_PI) / std::sqrt(2.0 * st);
  ComplexMatrix k(x.size(), y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double xi = x[i];
    for (std::size_t j = 0; j < y.size(); ++j) {
      const double yj = y[j];
      const double amp = pref * std::exp(0.5 * xi * xi - 0.5 * yj * yj);
      const double phase =
          -0.25 * M_PI + 0.5 * rt.t + 0.5 * (ct * (xi * xi + yj * yj) - 2.0 * xi * yj / st);
      const cplx v = std::polar(amp, phase);
      k(i, j) = rt.conjugate ? std::conj(v) : v;
    }
  }
  return k;
}

}  // namespace

GridField kernel_propagate(const GridField& g, double t, const KernelEvalConfig& cfg) {
  cfg.validate();
  const ReducedTime rt = reduce_time(t, cfg.t_exclusion);
  const SpectralField f = forward_transform(g);
  const KernelLattice lat = kernel_lattice_for(g.spec, t, cfg);
  const auto y = lattice_points(lat);
  const Tensor gy = synthesize_on(f, y);
  const auto basis = basis_for(g.spec);
  const ComplexMatrix k = kernel_axis_matrix(basis->rule().nodes, y, rt);
  const std::vector<ComplexMatrix> mats(g.spec.dimension, k);
  Tensor out = kernels::apply_separable(mats, gy);
  return GridField{g.spec, std::move(out.data)};
}

Trajectory trajectory(const SpectralField& u0, const TimeGrid& grid) {
  grid.validate();
  Trajectory tr{grid, std::vector<SpectralField>(grid.n)};
#pragma omp parallel for schedule(static)
  for (int j = 0; j < grid.n; ++j) tr.states[j] = spectral_propagate(u0, grid.node(j));
  return tr;
}

namespace reference {

GridField kernel_propagate(const GridField& g, double t, const KernelEvalConfig& cfg) {
  cfg.validate();
  const SpectralField f = forward_transform(g);
  const KernelLattice lat = kernel_lattice_for(g.spec, t, cfg);
  const auto y1 = lattice_points(lat);
  const Tensor gy = synthesize_on(f, y1);
  const auto basis = basis_for(g.spec);
  const int d = g.spec.dimension;
  const double h = y1.size() > 1 ? y1[1] - y1[0] : 1.0;
  const std::size_t p = y1.size();

  GridField out = GridField::zero(g.spec);
  std::vector<double> y(d);
  for (std::size_t o = 0; o < out.values.size(); ++o) {
    const auto x = basis->node(o);
    cplx acc = 0.0;
    for (std::size_t i = 0; i < gy.size(); ++i) {
      std::size_t rem = i;
      double r2 = 0.0;
      for (int k = d; k-- > 0;) {
        y[k] = y1[rem % p];
        rem /= p;
        r2 += y[k] * y[k];
      }
      // M_{it}(x,y) gamma_d(y), with gamma_d(y) = pi^{-d/2} e^{-|y|^2}.
      const double gamma = std::pow(M_PI, -0.5 * d) * std::exp(-r2);
      acc += mehler_kernel(t, x, y, cfg) * gamma * gy.data[i];
    }
    out.values[o] = acc * std::pow(h, d);
  }
  return out;
}

}  // namespace reference

}  // namespace ou
