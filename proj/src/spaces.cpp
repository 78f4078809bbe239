#include "ouspec/spaces.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <mutex>

#include "ouspec/error.hpp"

namespace ou {

namespace {

const QuadratureRule1D& cached_rule(int count) {
  static std::mutex mu;
  static std::map<int, std::unique_ptr<QuadratureRule1D>> cache;
  std::lock_guard<std::mutex> lock(mu);
  auto& slot = cache[count];
  if (!slot) slot = std::make_unique<QuadratureRule1D>(gauss_hermite_rule(count));
  return *slot;
}

constexpr double kExponentTol = 1e-12;

}  // namespace

double weight_power(std::span<const double> x, WeightPower s) {
  double r2 = 0.0;
  for (double v : x) r2 += v * v;
  return std::exp(-0.5 * s.s * r2);
}

double AdmissiblePair::q_conj() const { return std::isinf(q) ? 1.0 : q / (q - 1.0); }
double AdmissiblePair::r_conj() const { return std::isinf(r) ? 1.0 : r / (r - 1.0); }

std::string AdmissiblePair::label() const {
  auto fmt = [](double v) {
    if (std::isinf(v)) return std::string("inf");
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return std::string(buf);
  };
  return fmt(q) + ":" + fmt(r);
}

bool admissible_check(double q, double r, double sigma) {
  if (!(sigma > 0.0) || std::isnan(q) || std::isnan(r)) return false;
  if (q < 2.0 || r < 2.0) return false;
  if (q == 2.0 && std::isinf(r) && sigma == 1.0) return false;
  const double inv_q = std::isinf(q) ? 0.0 : 1.0 / q;
  const double inv_r = std::isinf(r) ? 0.0 : 1.0 / r;
  return std::abs(inv_q + sigma * inv_r - 0.5 * sigma) <= kExponentTol;
}

std::vector<AdmissiblePair> admissible_family(int dimension, int count) {
  require(dimension >= 1, ErrorKind::invalid_parameter, "dimension must be >= 1");
  require(count >= 1, ErrorKind::invalid_parameter, "family size must be >= 1");
  const double sigma = 0.5 * dimension;
  std::vector<AdmissiblePair> out;
  out.push_back({kInf, 2.0, sigma});
  if (count == 1) return out;

  // theta = 1/2 - 1/r = j/n * theta_max, exact rationals where possible.
  // d = 1: theta_max = 1/2 (endpoint r = inf, q = 4 included).
  // d = 2: theta_max = 1/2 is the forbidden (2, inf) endpoint, so it is excluded.
  // d >= 3: theta_max = 1/d (endpoint q = 2 included).
  const int intervals = (dimension == 2) ? count : count - 1;
  for (int j = 1; j < count; ++j) {
    double q = 0.0, r = 0.0;
    if (dimension <= 2) {
      // theta = j / (2 * intervals)
      r = (j == intervals) ? kInf : (2.0 * intervals) / double(intervals - j);
      q = (2.0 * intervals) / (sigma * j);
    } else {
      // theta = j / (d * intervals)
      r = (2.0 * dimension * intervals) / double(dimension * intervals - 2 * j);
      q = (double(dimension) * intervals) / (sigma * j);
    }
    out.push_back({q, r, sigma});
  }
  return out;
}

void TimeGrid::validate() const {
  const double lim = 0.5 * M_PI + 1e-12;
  require(n >= 1, ErrorKind::invalid_parameter, "time grid needs at least one node");
  require(t0 >= -lim && t1 <= lim, ErrorKind::invalid_parameter,
          "time grid must lie within [-pi/2, pi/2]");
  if (n == 1) {
    require(t0 == t1, ErrorKind::invalid_parameter, "single-node time grid needs t0 == t1");
  } else {
    require(t0 < t1, ErrorKind::invalid_parameter, "time grid needs t0 < t1");
  }
}

double TimeGrid::node(int j) const {
  if (n == 1) return t0;
  const double den = n - 1;
  return t0 * ((n - 1 - j) / den) + t1 * (j / den);
}

std::vector<double> TimeGrid::nodes() const {
  std::vector<double> t(n);
  for (int j = 0; j < n; ++j) t[j] = node(j);
  return t;
}

double TimeGrid::step() const { return n == 1 ? 0.0 : (t1 - t0) / (n - 1); }

int TimeGrid::zero_index() const {
  const double tol = 1e-12 * std::max(1.0, t1 - t0);
  for (int j = 0; j < n; ++j) {
    if (std::abs(node(j)) <= tol) return j;
  }
  return -1;
}

std::vector<double> TimeGrid::trapezoid_weights() const {
  std::vector<double> w(n, step());
  if (n == 1) {
    w[0] = 0.0;
    return w;
  }
  w.front() *= 0.5;
  w.back() *= 0.5;
  return w;
}

void Trajectory::validate() const {
  grid.validate();
  require(states.size() == static_cast<std::size_t>(grid.n), ErrorKind::dimension_mismatch,
          "trajectory is not aligned with its time grid");
  for (const auto& s : states) {
    require(s.spec == states.front().spec, ErrorKind::dimension_mismatch,
            "trajectory states live on different bases");
  }
}

namespace {

bool even_integer(double r) { return r >= 2.0 && std::abs(r - 2.0 * std::round(0.5 * r)) <= 1e-12; }

// |u|^r is a polynomial of degree rN: the rescaled Gauss rule with ceil((rN+1)/2) nodes is exact.
double lp_power_exact(const SpectralField& u, int r, double a) {
  const int count = (r * u.spec.max_degree + 2) / 2 + 1;
  const auto& rule = cached_rule(count);
  const double scale = 1.0 / std::sqrt(a);
  std::vector<double> pts(rule.nodes);
  for (auto& x : pts) x *= scale;
  const Tensor vals = synthesize_on(u, pts);

  const int d = u.spec.dimension;
  const std::size_t m = rule.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::size_t rem = i;
    double wgt = 1.0;
    for (int k = 0; k < d; ++k) {
      wgt *= rule.weights[rem % m];
      rem /= m;
    }
    acc += wgt * std::pow(std::norm(vals.data[i]), 0.5 * r);
  }
  return acc * std::pow(a, -0.5 * d);
}

// Half-width beyond which (sum_k h_k(x)^2)^{r/2} e^{-a x^2} has dropped by e^{-46} from its peak.
double tail_half_width(int max_degree, double r, double a) {
  std::vector<double> h(max_degree + 1);
  double best = -std::numeric_limits<double>::infinity();
  double x = 0.0;
  for (; x < 200.0; x += 0.05) {
    hermite_eval_all(max_degree, x, h);
    double e2 = 0.0;
    for (double v : h) e2 += v * v;
    if (!std::isfinite(e2)) break;
    const double phi = 0.5 * r * std::log(e2) - a * x * x;
    best = std::max(best, phi);
    if (phi < best - 46.0) break;
  }
  return x;
}

// Composite trapezoid on [-X, X]^d; |u|^r has kinks near zeros of u, so spectral rules lose their edge.
double lp_power_trapezoid(const SpectralField& u, double r, double a, int oversample) {
  const int d = u.spec.dimension;
  const int nmax = u.spec.max_degree;
  const double X = tail_half_width(nmax, r, a);
  const double density = (d == 1 ? 32.0 : d == 2 ? 6.0 : 3.0) * 0.5 * oversample;
  const double h = std::min(M_PI / std::sqrt(2.0 * nmax + 1.0), 1.0 / std::sqrt(a)) / density;
  const int half = static_cast<int>(std::ceil(X / h));
  std::vector<double> pts(2 * half + 1);
  std::vector<double> gw(pts.size());
  for (int i = -half; i <= half; ++i) {
    const double x = i * h;
    pts[i + half] = x;
    gw[i + half] = h * std::exp(-a * x * x) / std::sqrt(M_PI);
  }
  const Tensor vals = synthesize_on(u, pts);
  const std::size_t m = pts.size();
  double acc = 0.0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::size_t rem = i;
    double wgt = 1.0;
    for (int k = 0; k < d; ++k) {
      wgt *= gw[rem % m];
      rem /= m;
    }
    if (wgt == 0.0) continue;
    acc += wgt * std::pow(std::abs(vals.data[i]), r);
  }
  return acc;
}

}  // namespace

double weighted_lp_norm(const SpectralField& u, double r, WeightPower s, NormOptions opts) {
  require(r >= 1.0 && std::isfinite(r), ErrorKind::invalid_parameter,
          "weighted_lp_norm needs a finite exponent r >= 1");
  const double a = 1.0 + 0.5 * s.s;
  require(a > 0.0, ErrorKind::invalid_parameter, "weight power must exceed -2");
  require(opts.oversample >= 1, ErrorKind::invalid_parameter, "oversample must be >= 1");

  // w^s dgamma_d = pi^{-d/2} e^{-a|x|^2} dx
  const double acc = even_integer(r) ? lp_power_exact(u, static_cast<int>(std::lround(r)), a)
                                     : lp_power_trapezoid(u, r, a, opts.oversample);
  return std::pow(acc, 1.0 / r);
}

double weighted_lp_norm(const GridField& u, double r, WeightPower s, NormOptions opts) {
  return weighted_lp_norm(forward_transform(u), r, s, opts);
}

CheckedNorm weighted_lp_norm_checked(const SpectralField& u, double r, WeightPower s,
                                     NormOptions opts) {
  const double base = weighted_lp_norm(u, r, s, opts);
  const double fine = weighted_lp_norm(u, r, s, NormOptions{2 * opts.oversample});
  const double delta = fine == 0.0 ? std::abs(base) : std::abs(fine - base) / std::abs(fine);
  return {base, delta};
}

SupLattice sup_lattice_for(const BasisSpec& spec) {
  SupLattice l;
  l.half_width = std::sqrt(2.0 * spec.max_degree + 1.0) + 4.0;
  l.points_per_axis = spec.dimension == 1 ? 401 : spec.dimension == 2 ? 161 : 41;
  return l;
}

namespace {

double weighted_modulus(const SpectralField& u, std::span<const double> x) {
  return std::abs(evaluate(u, x)) * weight_power(x, WeightPower{1.0});
}

// Golden-section maximization of g on [lo, hi].
template <typename G>
std::pair<double, double> golden_max(G&& g, double lo, double hi, int iters) {
  const double ratio = 0.5 * (std::sqrt(5.0) - 1.0);
  double a = lo, b = hi;
  double c = b - ratio * (b - a), d = a + ratio * (b - a);
  double gc = g(c), gd = g(d);
  for (int i = 0; i < iters; ++i) {
    if (gc >= gd) {
      b = d; d = c; gd = gc;
      c = b - ratio * (b - a); gc = g(c);
    } else {
      a = c; c = d; gc = gd;
      d = a + ratio * (b - a); gd = g(d);
    }
  }
  return gc >= gd ? std::make_pair(c, gc) : std::make_pair(d, gd);
}

}  // namespace

double weighted_sup_norm(const SpectralField& u) {
  const int d = u.spec.dimension;
  const SupLattice lat = sup_lattice_for(u.spec);
  std::vector<double> pts(lat.points_per_axis);
  const double h = 2.0 * lat.half_width / (lat.points_per_axis - 1);
  const int mid = lat.points_per_axis / 2;
  for (int j = 0; j < lat.points_per_axis; ++j) pts[j] = (j - mid) * h;

  const Tensor vals = synthesize_on(u, pts);
  std::vector<double> wline(pts.size());
  for (std::size_t j = 0; j < pts.size(); ++j) wline[j] = std::exp(-0.5 * pts[j] * pts[j]);

  const std::size_t p = pts.size();
  double best = -1.0;
  std::size_t best_i = 0;
  for (std::size_t i = 0; i < vals.size(); ++i) {
    std::size_t rem = i;
    double w = 1.0;
    for (int k = 0; k < d; ++k) {
      w *= wline[rem % p];
      rem /= p;
    }
    const double v = std::abs(vals.data[i]) * w;
    if (v > best) {
      best = v;
      best_i = i;
    }
  }
  if (best <= 0.0) return 0.0;

  std::vector<double> x(d);
  {
    std::size_t rem = best_i;
    for (int k = d; k-- > 0;) {
      x[k] = pts[rem % p];
      rem /= p;
    }
  }
  // Coordinate-wise polish around the argmax, swept until it stalls (ascent is
  // only linear when the peak is tilted against the axes).
  const int sweeps = d == 1 ? 1 : 200;
  for (int sweep = 0; sweep < sweeps; ++sweep) {
    const double before = best;
    for (int k = 0; k < d; ++k) {
      std::vector<double> y = x;
      auto g = [&](double xk) {
        y[k] = xk;
        return weighted_modulus(u, y);
      };
      auto [xk, val] = golden_max(g, x[k] - h, x[k] + h, 60);
      if (val > best) {
        best = val;
        x[k] = xk;
      }
    }
    if (best - before <= 1e-16 * best) break;
  }
  return best;
}

double weighted_sup_norm(const GridField& u) { return weighted_sup_norm(forward_transform(u)); }

double space_norm(const SpectralField& u, double r, WeightPower s, NormOptions opts) {
  if (std::isinf(r)) return weighted_sup_norm(u);
  return weighted_lp_norm(u, r, s, opts);
}

double mixed_norm(const Trajectory& traj, double q, double r, WeightPower s, NormOptions opts) {
  traj.validate();
  require(q >= 1.0, ErrorKind::invalid_parameter, "time exponent must be >= 1");
  const int n = traj.grid.n;
  std::vector<double> vals(n);
  std::exception_ptr err;
#pragma omp parallel for schedule(dynamic)
  for (int j = 0; j < n; ++j) {
    capture_into(err, [&] { vals[j] = space_norm(traj.states[j], r, s, opts); });
  }
  rethrow_if(err);

  if (std::isinf(q)) return *std::max_element(vals.begin(), vals.end());
  const auto w = traj.grid.trapezoid_weights();
  double acc = 0.0;
  for (int j = 0; j < n; ++j) acc += w[j] * std::pow(vals[j], q);
  return std::pow(acc, 1.0 / q);
}

std::vector<double> s_norm_members(const Trajectory& traj, const std::vector<AdmissiblePair>& family,
                                   NormOptions opts) {
  std::vector<double> out;
  out.reserve(family.size());
  for (const auto& pr : family) {
    const WeightPower s{std::isinf(pr.r) ? 0.0 : pr.r - 2.0};
    out.push_back(mixed_norm(traj, pr.q, pr.r, s, opts));
  }
  return out;
}

double s_norm(const Trajectory& traj, const std::vector<AdmissiblePair>& family, NormOptions opts) {
  require(!family.empty(), ErrorKind::invalid_parameter, "admissible family is empty");
  const auto m = s_norm_members(traj, family, opts);
  return *std::max_element(m.begin(), m.end());
}

double dual_norm_bound(const Trajectory& f, const AdmissiblePair& pair, NormOptions opts) {
  const double qc = pair.q_conj();
  const double rc = pair.r_conj();
  return mixed_norm(f, qc, rc, WeightPower{rc - 2.0}, opts);
}

}  // namespace ou
