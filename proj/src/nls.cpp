#include "ouspec/nls.hpp"

#include <algorithm>
#include <cmath>

#include "ouspec/error.hpp"
#include "ouspec/propagator.hpp"

namespace ou {

Regime classify_regime(int dimension, double p) {
  const double pc = 1.0 + 4.0 / dimension;
  if (std::abs(p - pc) <= 1e-12) return Regime::critical;
  return p < pc ? Regime::subcritical : Regime::supercritical;
}

std::string to_string(Regime r) {
  switch (r) {
    case Regime::subcritical: return "subcritical";
    case Regime::critical: return "critical";
    case Regime::supercritical: return "supercritical";
  }
  return "?";
}

void NLSProblem::validate() const {
  require(p > 1.0, ErrorKind::invalid_parameter, "power p must exceed 1");
  require(mu == 1 || mu == -1, ErrorKind::invalid_parameter, "mu must be +1 or -1");
  basis.validate();
  interval.validate();
  require(interval.zero_index() >= 0, ErrorKind::invalid_parameter, "time grid must contain t = 0");
  require(u0.spec == basis, ErrorKind::dimension_mismatch, "initial data lives on a different basis");
  require(tol > 0.0, ErrorKind::invalid_parameter, "tolerance must be positive");
  require(max_iter >= 1, ErrorKind::invalid_parameter, "max_iter must be >= 1");
  require(delta > 0.0 && delta < 1.0, ErrorKind::invalid_parameter, "delta must lie in (0, 1)");
  require(classify_regime(basis.dimension, p) != Regime::supercritical, ErrorKind::regime,
          "supercritical power p > 1 + 4/d is not supported");
}

GridField nonlinearity(const GridField& u, double p, int mu) {
  require(p > 1.0, ErrorKind::invalid_parameter, "power p must exceed 1");
  require(mu == 1 || mu == -1, ErrorKind::invalid_parameter, "mu must be +1 or -1");
  const auto basis = basis_for(u.spec);
  GridField out = u;
  for (std::size_t i = 0; i < u.values.size(); ++i) {
    const auto x = basis->node(i);
    const double wp = weight_power(x, WeightPower{p});
    const double a = std::abs(u.values[i]);
    out.values[i] = a == 0.0 ? cplx{} : double(mu) * wp * std::pow(a, p - 1.0) * u.values[i];
  }
  return out;
}

SpectralField nonlinearity_projected(const SpectralField& u, double p, int mu) {
  return forward_transform(nonlinearity(inverse_transform(u), p, mu));
}

bool power_lipschitz_check(cplx a, cplx b, double p, double c) {
  const double aa = std::abs(a), ab = std::abs(b);
  const cplx fa = aa == 0.0 ? cplx{} : std::pow(aa, p - 1.0) * a;
  const cplx fb = ab == 0.0 ? cplx{} : std::pow(ab, p - 1.0) * b;
  const double lhs = std::abs(fa - fb);
  const double rhs = c * std::abs(a - b) * (std::pow(aa, p - 1.0) + std::pow(ab, p - 1.0));
  // Rounding slack relative to the magnitudes involved.
  const double slack = 1e-13 * (std::abs(fa) + std::abs(fb));
  return lhs <= rhs + slack;
}

bool power_lipschitz_check(cplx a, cplx b, double p) { return power_lipschitz_check(a, b, p, p); }

Trajectory duhamel_apply(const Trajectory& g) {
  g.validate();
  const int z = g.grid.zero_index();
  require(z >= 0, ErrorKind::invalid_parameter, "Duhamel operator needs a time node at t = 0");
  const auto& spec = g.states.front().spec;
  const auto basis = basis_for(spec);
  const auto& modes = basis->modes();
  const std::size_t nm = modes.size();
  const auto ts = g.grid.nodes();
  const int n = g.grid.n;
  const double h = g.grid.step();

  // Integrating factor: phi_alpha(s) = e^{i|alpha|s} g_alpha(s).
  std::vector<std::vector<cplx>> phi(n, std::vector<cplx>(nm));
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < nm; ++i) {
      phi[j][i] = std::polar(1.0, ts[j] * modes[i].order()) * g.states[j].coeffs[i];
    }
  }
  std::vector<std::vector<cplx>> cum(n, std::vector<cplx>(nm));
  for (int j = z + 1; j < n; ++j) {
    for (std::size_t i = 0; i < nm; ++i) cum[j][i] = cum[j - 1][i] + 0.5 * h * (phi[j - 1][i] + phi[j][i]);
  }
  for (int j = z - 1; j >= 0; --j) {
    for (std::size_t i = 0; i < nm; ++i) cum[j][i] = cum[j + 1][i] - 0.5 * h * (phi[j + 1][i] + phi[j][i]);
  }

  Trajectory out{g.grid, std::vector<SpectralField>(n, SpectralField::zero(spec))};
  const cplx minus_i(0.0, -1.0);
  for (int j = 0; j < n; ++j) {
    for (std::size_t i = 0; i < nm; ++i) {
      out.states[j].coeffs[i] = minus_i * std::polar(1.0, -ts[j] * modes[i].order()) * cum[j][i];
    }
  }
  return out;
}

double s_proxy_norm(const Trajectory& u) {
  double m = 0.0;
  for (const auto& s : u.states) m = std::max(m, s.l2_norm());
  return m;
}

std::vector<double> mass_trace(const Trajectory& sol) {
  std::vector<double> m;
  m.reserve(sol.states.size());
  for (const auto& s : sol.states) m.push_back(s.l2_norm());
  return m;
}

namespace {

Trajectory apply_nonlinearity(const Trajectory& u, double p, int mu) {
  Trajectory out{u.grid, std::vector<SpectralField>(u.states.size())};
  const int n = static_cast<int>(u.states.size());
#pragma omp parallel for schedule(static)
  for (int j = 0; j < n; ++j) out.states[j] = nonlinearity_projected(u.states[j], p, mu);
  return out;
}

Trajectory difference(const Trajectory& a, const Trajectory& b) {
  Trajectory out = a;
  for (std::size_t j = 0; j < a.states.size(); ++j) out.states[j] -= b.states[j];
  return out;
}

Trajectory sum(const Trajectory& a, const Trajectory& b) {
  Trajectory out = a;
  for (std::size_t j = 0; j < a.states.size(); ++j) out.states[j] += b.states[j];
  return out;
}

template <typename Norm>
NLSSolution picard_loop(const NLSProblem& prob, Norm&& norm, std::string norm_name) {
  NLSSolution out;
  PicardReport& rep = out.report;
  rep.norm_name = std::move(norm_name);
  rep.regime = classify_regime(prob.basis.dimension, prob.p);

  const Trajectory free = trajectory(prob.u0, prob.interval);
  Trajectory u = free;
  for (int it = 0; it < prob.max_iter; ++it) {
    Trajectory next = sum(free, duhamel_apply(apply_nonlinearity(u, prob.p, prob.mu)));
    const double res = norm(difference(next, u));
    rep.residuals.push_back(res);
    u = std::move(next);
    if (res <= prob.tol) {
      rep.converged = true;
      break;
    }
  }
  rep.iterations = static_cast<int>(rep.residuals.size());
  for (std::size_t k = 1; k < rep.residuals.size(); ++k) {
    const double prev = rep.residuals[k - 1];
    rep.contraction_ratios.push_back(prev == 0.0 ? 0.0 : rep.residuals[k] / prev);
    if (rep.residuals[k] > prev) rep.monotone = false;
  }
  if (!rep.contraction_ratios.empty()) {
    const std::size_t nr = rep.contraction_ratios.size();
    const std::size_t from = nr / 2;
    rep.tail_ratio = *std::max_element(rep.contraction_ratios.begin() + from, rep.contraction_ratios.end());
  }

  const Trajectory nu = apply_nonlinearity(u, prob.p, prob.mu);
  const Trajectory dnu = duhamel_apply(nu);
  rep.duhamel_residual = s_proxy_norm(difference(difference(u, free), dnu));

  // Reported diagnostics: empirical Duhamel gain and the smallness surrogate.
  const int d = prob.basis.dimension;
  const double q = 4.0 * (prob.p + 1.0) / (d * (prob.p - 1.0));
  const AdmissiblePair pair{q, prob.p + 1.0, 0.5 * d};
  const double nbound = dual_norm_bound(nu, pair);
  rep.duhamel_gain = nbound > 0.0 ? s_proxy_norm(dnu) / nbound : 0.0;
  const double eps = 2.0 * prob.u0.l2_norm();
  const double two_t = prob.interval.t1 - prob.interval.t0;
  const double expo = 1.0 - 1.0 / q - prob.p / q;
  rep.smallness_surrogate = 2.0 * rep.duhamel_gain * std::pow(eps, prob.p - 1.0) * std::pow(two_t, expo);
  rep.family = admissible_family(d, 3);
  rep.s_norm_members = s_norm_members(u, rep.family);

  out.solution = std::move(u);
  return out;
}

}  // namespace

NLSSolution picard_solve(const NLSProblem& prob) {
  prob.validate();
  return picard_loop(prob, [](const Trajectory& t) { return s_proxy_norm(t); }, "Linf_t L2_gamma");
}

LipschitzResult lipschitz_experiment(const NLSProblem& prob, const SpectralField& u0,
                                     const SpectralField& v0) {
  NLSProblem pu = prob;
  pu.u0 = u0;
  NLSProblem pv = prob;
  pv.u0 = v0;
  LipschitzResult res;
  const NLSSolution su = picard_solve(pu);
  const NLSSolution sv = picard_solve(pv);
  res.report_u = su.report;
  res.report_v = sv.report;
  res.converged = su.report.converged && sv.report.converged;
  if (!res.converged) {
    res.ratio = std::nan("");
    return res;
  }
  // u0* - v0* = e^{-itL}(u0 - v0) has constant L^2 norm in time.
  const double den = (u0 - v0).l2_norm();
  if (den == 0.0) {
    res.ratio = 0.0;
    return res;
  }
  res.ratio = s_proxy_norm(difference(su.solution, sv.solution)) / den;
  return res;
}

double linear_smallness_norm(const SpectralField& u1, double p, const TimeGrid& grid) {
  return mixed_norm(trajectory(u1, grid), p + 1.0, p + 1.0, WeightPower{p - 1.0});
}

SmallnessResult find_smallness_interval(const SpectralField& u1, double p, double eta,
                                        const SmallnessOptions& opts) {
  require(eta > 0.0, ErrorKind::invalid_parameter, "eta must be positive");
  require(p > 1.0, ErrorKind::invalid_parameter, "power p must exceed 1");
  require(opts.time_nodes >= 3 && opts.time_nodes % 2 == 1, ErrorKind::invalid_parameter,
          "smallness search needs an odd node count >= 3");
  require(opts.n_max >= 1, ErrorKind::invalid_parameter, "n_max must be >= 1");

  SmallnessResult res;
  auto grid_for = [&](int n) {
    const double half = n == 0 ? 0.5 * M_PI : std::min(1.0 / n, 0.5 * M_PI);
    return TimeGrid::symmetric(half, opts.time_nodes);
  };
  auto eval = [&](int n) {
    const double v = linear_smallness_norm(u1, p, grid_for(n));
    res.tested.emplace_back(n, v);
    return v;
  };
  auto accept = [&](int n, double v) {
    res.n = n;
    res.norm = v;
    res.interval = grid_for(n);
    res.satisfied = true;
    return res;
  };

  const double full = eval(0);
  if (full <= eta) return accept(0, full);

  // Exponential search for a passing n, then bisection for the smallest one.
  int lo = 0;  // known failing
  int hi = 1;
  double vhi = eval(hi);
  while (vhi > eta) {
    lo = hi;
    if (hi >= opts.n_max) {
      res.n = hi;
      res.norm = vhi;
      res.interval = grid_for(hi);
      res.satisfied = false;
      return res;
    }
    hi = std::min(2 * hi, opts.n_max);
    vhi = eval(hi);
  }
  while (hi - lo > 1) {
    const int mid = lo + (hi - lo) / 2;
    const double v = eval(mid);
    if (v <= eta) {
      hi = mid;
      vhi = v;
    } else {
      lo = mid;
    }
  }
  return accept(hi, vhi);
}

NLSSolution critical_solve(const NLSProblem& prob, const CriticalOptions& opts) {
  prob.validate();
  require(classify_regime(prob.basis.dimension, prob.p) == Regime::critical, ErrorKind::regime,
          "critical_solve needs p = 1 + 4/d");
  require(opts.eta > 0.0, ErrorKind::invalid_parameter, "eta must be positive");
  const SpectralField u1 = opts.center.value_or(prob.u0);
  require(u1.spec == prob.basis, ErrorKind::dimension_mismatch, "ball center lives on a different basis");
  require((prob.u0 - u1).l2_norm() <= opts.eta, ErrorKind::precondition,
          "initial data lies outside the ball B(u1, eta)");
  const double small = linear_smallness_norm(u1, prob.p, prob.interval);
  require(small <= opts.eta, ErrorKind::precondition,
          "linear evolution of the center is not eta-small on this interval; "
          "use find_smallness_interval to choose the interval");

  const double p = prob.p;
  const double delta = prob.delta;
  auto s0 = [p, delta](const Trajectory& t) {
    return delta * s_proxy_norm(t) + mixed_norm(t, p + 1.0, p + 1.0, WeightPower{p - 1.0});
  };
  return picard_loop(prob, s0, "S0 (delta Linf_t L2_gamma + L^{p+1}_t L^{p+1}_gamma(w^{p-1}))");
}

}  // namespace ou
