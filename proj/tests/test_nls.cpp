#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "oracles.hpp"
#include "ouspec/error.hpp"
#include "ouspec/nls.hpp"
#include "ouspec/propagator.hpp"

using namespace ou;

namespace {

ErrorKind kind_of(const std::function<void()>& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.kind();
  }
  FAIL("expected an ou::Error");
  return ErrorKind::io;
}

SpectralField mixed_data(const BasisSpec& spec, double norm) {
  SpectralField u = SpectralField::mode(spec, MultiIndex(std::vector<int>(spec.dimension, 0)));
  std::vector<int> one(spec.dimension, 0);
  one[0] = 1;
  u += cplx(0.5, 0.5) * SpectralField::mode(spec, MultiIndex(one));
  return cplx(norm / u.l2_norm()) * u;
}

// The subcritical reference setup: d=1, p=3, ||u0|| = 0.1, T = 0.3, N = 24.
NLSProblem reference_problem(int nodes = 61) {
  NLSProblem prob;
  prob.basis = BasisSpec{1, 24, 32};
  prob.interval = TimeGrid::symmetric(0.3, nodes);
  prob.u0 = mixed_data(prob.basis, 0.1);
  return prob;
}

double traj_diff(const Trajectory& a, const Trajectory& b) {
  double m = 0.0;
  for (std::size_t j = 0; j < a.states.size(); ++j) m = std::max(m, (a.states[j] - b.states[j]).l2_norm());
  return m;
}

// Max over the coarse nodes of the difference to a grid refined by `factor`.
double coarse_fine_diff(const Trajectory& coarse, const Trajectory& fine, int factor) {
  double m = 0.0;
  for (std::size_t j = 0; j < coarse.states.size(); ++j) {
    m = std::max(m, (coarse.states[j] - fine.states[j * factor]).l2_norm());
  }
  return m;
}

double mass_drift(const Trajectory& sol) {
  const auto m = mass_trace(sol);
  const double m0 = m[sol.grid.zero_index()];
  double drift = 0.0;
  for (double v : m) drift = std::max(drift, std::abs(v - m0));
  return drift;
}

}  // namespace

TEST_CASE("regime classification") {
  CHECK(classify_regime(1, 3.0) == Regime::subcritical);
  CHECK(classify_regime(1, 5.0) == Regime::critical);
  CHECK(classify_regime(1, 5.5) == Regime::supercritical);
  CHECK(classify_regime(2, 3.0) == Regime::critical);
  CHECK(classify_regime(2, 2.0) == Regime::subcritical);
  CHECK(classify_regime(3, 1.0 + 4.0 / 3.0) == Regime::critical);
  CHECK(classify_regime(4, 2.5) == Regime::supercritical);
  CHECK(to_string(Regime::critical) == "critical");
}

TEST_CASE("pointwise nonlinearity") {
  const BasisSpec spec{1, 8, 12};
  const GridField one = from_function([](std::span<const double>) { return cplx(1.0); }, spec);
  const auto nodes = basis_for(spec)->rule().nodes;
  const GridField a = nonlinearity(one, 3.0, 1);
  const GridField b = nonlinearity(one, 3.0, -1);
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    const double x = nodes[i];
    CHECK(a.values[i].real() == doctest::Approx(std::exp(-1.5 * x * x)).epsilon(1e-14));
    CHECK(b.values[i].real() == doctest::Approx(-std::exp(-1.5 * x * x)).epsilon(1e-14));
    if (x == 0.0) CHECK(a.values[i] == cplx(1.0));
  }
  // |x|^2 = 2 gives -e^{-3} for mu = -1.
  CHECK(-std::pow(std::exp(-0.5 * 2.0), 3.0) == doctest::Approx(-std::exp(-3.0)));
  CHECK(nonlinearity(GridField::zero(spec), 3.0, 1).values == GridField::zero(spec).values);
  CHECK_THROWS_AS(nonlinearity(one, 1.0, 1), Error);
  CHECK_THROWS_AS(nonlinearity(one, 3.0, 2), Error);

  // Same map written as |uw|^{p-1} uw.
  std::mt19937_64 rng(51);
  const GridField u = inverse_transform(oracle::random_field(spec, rng));
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    const GridField n = nonlinearity(u, p, 1);
    for (std::size_t i = 0; i < nodes.size(); ++i) {
      const double w = std::exp(-0.5 * nodes[i] * nodes[i]);
      const cplx uw = u.values[i] * w;
      const cplx want = std::pow(std::abs(uw), p - 1) * uw;
      CHECK(std::abs(n.values[i] - want) <= 1e-13 * std::abs(want) + 1e-300);
    }
  }
}

TEST_CASE("power map Lipschitz bound with C(p) = p") {
  std::mt19937_64 rng(52);
  std::normal_distribution<double> g;
  std::uniform_real_distribution<double> logscale(-6.0, 3.0);
  for (double p : {1.5, 2.0, 3.0, 5.0}) {
    int bad = 0;
    for (int i = 0; i < 100000; ++i) {
      const double sa = std::pow(10.0, logscale(rng)), sb = std::pow(10.0, logscale(rng));
      const cplx a(sa * g(rng), sa * g(rng));
      const cplx b = i % 4 == 0 ? a + 1e-6 * sa * cplx(g(rng), g(rng)) : cplx(sb * g(rng), sb * g(rng));
      if (!power_lipschitz_check(a, b, p)) ++bad;
    }
    CAPTURE(p);
    CHECK(bad == 0);
    CHECK(power_lipschitz_check(cplx(0.3, 0.4), cplx(0.3, 0.4), p));
    CHECK(power_lipschitz_check(cplx(0.3, -0.4), 0.0, p));
  }
  // A constant below 1 must fail somewhere (the bound is not vacuous).
  CHECK_FALSE(power_lipschitz_check(cplx(1.0), cplx(0.0), 3.0, 0.5));
}

TEST_CASE("Duhamel operator closed forms") {
  const BasisSpec spec{1, 6, 8};
  const TimeGrid grid = TimeGrid::symmetric(0.8, 41);
  const cplx c(0.3, -0.7);
  Trajectory g{grid, std::vector<SpectralField>(grid.n, c * SpectralField::mode(spec, MultiIndex({0})))};
  const Trajectory dg = duhamel_apply(g);
  for (int j = 0; j < grid.n; ++j) {
    CHECK(std::abs(dg.states[j].coeffs[0] - cplx(0.0, -1.0) * grid.node(j) * c) < 1e-15);
  }
  Trajectory zero{grid, std::vector<SpectralField>(grid.n, SpectralField::zero(spec))};
  CHECK(s_proxy_norm(duhamel_apply(zero)) == 0.0);

  // g(s) = e^{-isL} h_1: the integrating factor removes the phase, so trapezoid is exact.
  Trajectory rot{grid, {}};
  for (double s : grid.nodes()) rot.states.push_back(spectral_propagate(SpectralField::mode(spec, MultiIndex({1})), s));
  const Trajectory dr = duhamel_apply(rot);
  for (int j = 0; j < grid.n; ++j) {
    const double t = grid.node(j);
    CHECK(std::abs(dr.states[j].coeffs[1] - cplx(0.0, -t) * std::polar(1.0, -t)) < 1e-14);
  }

  // cos(s) h_1: second-order convergence to -i int_0^t e^{-i(t-s)} cos s ds.
  auto exact = [](double t) {
    // int_0^t e^{is} cos s ds = t/2 + (e^{2it} - 1)/(4i)
    const cplx I(0.0, 1.0);
    return -I * std::polar(1.0, -t) * (t / 2 + (std::exp(2.0 * I * t) - 1.0) / (4.0 * I));
  };
  double err[3];
  int k = 0;
  for (int n : {21, 41, 81}) {
    const TimeGrid tg = TimeGrid::symmetric(0.8, n);
    Trajectory cs{tg, {}};
    for (double s : tg.nodes()) cs.states.push_back(cplx(std::cos(s)) * SpectralField::mode(spec, MultiIndex({1})));
    const Trajectory d = duhamel_apply(cs);
    double e = 0.0;
    for (int j = 0; j < n; ++j) e = std::max(e, std::abs(d.states[j].coeffs[1] - exact(tg.node(j))));
    err[k++] = e;
  }
  CHECK(err[0] / err[1] == doctest::Approx(4.0).epsilon(0.05));
  CHECK(err[1] / err[2] == doctest::Approx(4.0).epsilon(0.05));

  Trajectory nozero{TimeGrid{0.1, 0.5, 5}, std::vector<SpectralField>(5, SpectralField::zero(spec))};
  CHECK(kind_of([&] { duhamel_apply(nozero); }) == ErrorKind::invalid_parameter);
}

TEST_CASE("Picard: zero data is a fixed point") {
  NLSProblem prob = reference_problem();
  prob.u0 = SpectralField::zero(prob.basis);
  const NLSSolution s = picard_solve(prob);
  CHECK(s.report.converged);
  CHECK(s.report.iterations == 1);
  CHECK(s.report.contraction_ratios.empty());
  for (const auto& st : s.solution.states) CHECK(st.l2_norm() == 0.0);
  for (double m : mass_trace(s.solution)) CHECK(m == 0.0);
}

TEST_CASE("Picard: subcritical reference run") {
  const NLSProblem prob = reference_problem();
  const NLSSolution s = picard_solve(prob);
  const PicardReport& r = s.report;
  CHECK(r.converged);
  CHECK(r.regime == Regime::subcritical);
  CHECK(r.residuals.back() <= 1e-8);
  CHECK(r.contraction_ratios.size() == static_cast<std::size_t>(r.iterations - 1));
  for (double q : r.contraction_ratios) CHECK(q < 1.0);
  CHECK(r.tail_ratio < 1.0);
  CHECK(r.monotone);
  // Fixed-point certificate with the single reported rho on the tail.
  const std::size_t from = r.contraction_ratios.size() / 2;
  for (std::size_t k = from; k < r.contraction_ratios.size(); ++k) {
    CHECK(r.residuals[k + 1] <= r.tail_ratio * r.residuals[k] * (1 + 1e-12));
  }
  CHECK(r.duhamel_residual <= 1e-11);
  CHECK(r.duhamel_gain > 0.0);
  CHECK(std::isfinite(r.smallness_surrogate));
  CHECK(r.family.size() == r.s_norm_members.size());
  CHECK(r.s_norm_members.front() == doctest::Approx(s_proxy_norm(s.solution)).epsilon(1e-12));
  CHECK(s.solution.states[prob.interval.zero_index()].coeffs == prob.u0.coeffs);
}

TEST_CASE("Picard: defocusing sign and perturbative scale") {
  NLSProblem plus = reference_problem();
  NLSProblem minus = plus;
  minus.mu = -1;
  const NLSSolution a = picard_solve(plus);
  const NLSSolution b = picard_solve(minus);
  CHECK(b.report.converged);
  const double diff = traj_diff(a.solution, b.solution);
  // Halving the data shrinks the mu-dependence by 2^p.
  plus.u0 = cplx(0.5) * plus.u0;
  minus.u0 = plus.u0;
  const double diff2 = traj_diff(picard_solve(plus).solution, picard_solve(minus).solution);
  CHECK(diff / diff2 == doctest::Approx(8.0).epsilon(0.01));
  CHECK(diff < std::pow(0.1, 3.0));
}

TEST_CASE("Picard: gauge covariance") {
  const NLSProblem prob = reference_problem();
  NLSProblem rot = prob;
  const cplx phase = std::polar(1.0, 0.9);
  rot.u0 = phase * prob.u0;
  const NLSSolution a = picard_solve(prob);
  const NLSSolution b = picard_solve(rot);
  for (std::size_t j = 0; j < a.solution.states.size(); ++j) {
    CHECK((b.solution.states[j] - phase * a.solution.states[j]).l2_norm() < 1e-10);
  }
}

TEST_CASE("Picard: time-step halving and mass drift refinement") {
  const NLSSolution s61 = picard_solve(reference_problem(61));
  const NLSSolution s121 = picard_solve(reference_problem(121));
  const NLSSolution s241 = picard_solve(reference_problem(241));
  const double e1 = coarse_fine_diff(s61.solution, s121.solution, 2);
  const double e2 = coarse_fine_diff(s121.solution, s241.solution, 2);
  CHECK(e1 / e2 == doctest::Approx(4.0).epsilon(0.1));
  // Richardson: the returned solution satisfies its own discrete equation well below C dt^2.
  const double dt = reference_problem(61).interval.step();
  const double C = (e1 - e2) / (0.75 * dt * dt);
  CHECK(s61.report.duhamel_residual <= std::max(1e-12, C * dt * dt));
  const double d1 = mass_drift(s61.solution), d2 = mass_drift(s121.solution), d3 = mass_drift(s241.solution);
  CHECK(d1 / d2 >= 3.0);
  CHECK(d1 / d2 <= 5.0);
  CHECK(d2 / d3 >= 3.0);
  CHECK(d2 / d3 <= 5.0);
}

TEST_CASE("mass of the linear flow is conserved") {
  const NLSProblem prob = reference_problem();
  const auto m = mass_trace(trajectory(prob.u0, prob.interval));
  for (double v : m) CHECK(std::abs(v - prob.u0.l2_norm()) < 1e-12);
}

TEST_CASE("Picard: non-convergence is reported, not thrown") {
  NLSProblem prob = reference_problem();
  prob.u0 = mixed_data(prob.basis, 3.0);
  prob.max_iter = 4;
  const NLSSolution s = picard_solve(prob);
  CHECK_FALSE(s.report.converged);
  CHECK(s.report.iterations == 4);
  CHECK(s.report.contraction_ratios.size() == 3);
}

TEST_CASE("problem validation") {
  NLSProblem prob = reference_problem();
  prob.p = 6.0;
  CHECK(kind_of([&] { picard_solve(prob); }) == ErrorKind::regime);
  prob = reference_problem();
  prob.mu = 0;
  CHECK(kind_of([&] { picard_solve(prob); }) == ErrorKind::invalid_parameter);
  prob = reference_problem();
  prob.interval = TimeGrid::symmetric(0.3, 60);
  CHECK(kind_of([&] { picard_solve(prob); }) == ErrorKind::invalid_parameter);
  prob = reference_problem();
  prob.delta = 1.0;
  CHECK(kind_of([&] { picard_solve(prob); }) == ErrorKind::invalid_parameter);
  prob = reference_problem();
  prob.u0 = mixed_data(BasisSpec{1, 20, 32}, 0.1);
  CHECK(kind_of([&] { picard_solve(prob); }) == ErrorKind::dimension_mismatch);
}

TEST_CASE("Lipschitz experiment") {
  const NLSProblem prob = reference_problem();
  const LipschitzResult same = lipschitz_experiment(prob, prob.u0, prob.u0);
  CHECK(same.ratio == 0.0);
  CHECK(same.converged);

  const SpectralField v0 = prob.u0 + cplx(1e-3) * SpectralField::mode(prob.basis, MultiIndex({2}));
  const LipschitzResult r = lipschitz_experiment(prob, prob.u0, v0);
  CHECK(r.converged);
  CHECK(r.ratio <= 2.5);
  CHECK(r.ratio > 0.5);

  const cplx phase = std::polar(1.0, -2.1);
  const LipschitzResult rp = lipschitz_experiment(prob, phase * prob.u0, phase * v0);
  CHECK(std::abs(rp.ratio - r.ratio) < 1e-10);

  NLSProblem minus = prob;
  minus.mu = -1;
  CHECK(lipschitz_experiment(minus, prob.u0, v0).ratio <= 2.5);
}

TEST_CASE("smallness interval search") {
  SUBCASE("zero data passes on the full interval") {
    const SmallnessResult r = find_smallness_interval(SpectralField::zero(BasisSpec{1, 8, 10}), 5.0, 0.05);
    CHECK(r.satisfied);
    CHECK(r.n == 0);
    CHECK(r.interval.t1 == doctest::Approx(M_PI / 2));
    CHECK(r.tested.size() == 1);
  }
  SUBCASE("unit data in d=2, p=3") {
    std::mt19937_64 rng(53);
    SpectralField u1 = oracle::random_field(BasisSpec{2, 8, 12}, rng);
    u1 = cplx(1.0 / u1.l2_norm()) * u1;
    const SmallnessResult r = find_smallness_interval(u1, 3.0, 0.1, SmallnessOptions{31, 10000});
    REQUIRE(r.satisfied);
    CHECK(r.n > 0);
    CHECK(r.norm <= 0.1);
    CHECK(r.interval.t1 == doctest::Approx(1.0 / r.n));
    auto tested = r.tested;
    std::sort(tested.begin() + 1, tested.end());
    for (std::size_t k = 2; k < tested.size(); ++k) CHECK(tested[k].second <= tested[k - 1].second);
    // Minimality: n - 1 fails.
    if (r.n > 1) CHECK(linear_smallness_norm(u1, 3.0, TimeGrid::symmetric(1.0 / (r.n - 1), 31)) > 0.1);
    // Smaller eta never gives a longer interval.
    const SmallnessResult r2 = find_smallness_interval(u1, 3.0, 0.05, SmallnessOptions{31, 10000});
    CHECK(r2.n >= r.n);
  }
  SUBCASE("decay rate n^{-1/(p+1)}") {
    const BasisSpec spec{1, 12, 16};
    std::mt19937_64 rng(54);
    const SpectralField u1 = oracle::random_field(spec, rng);
    for (double p : {3.0, 5.0}) {
      const double a = linear_smallness_norm(u1, p, TimeGrid::symmetric(1.0 / 400, 61));
      const double b = linear_smallness_norm(u1, p, TimeGrid::symmetric(1.0 / 800, 61));
      CHECK(b / a == doctest::Approx(std::pow(2.0, -1.0 / (p + 1))).epsilon(1e-3));
    }
  }
  SUBCASE("n_max exhausted") {
    SpectralField big = SpectralField::mode(BasisSpec{1, 4, 6}, MultiIndex({0}));
    const SmallnessResult r = find_smallness_interval(cplx(1e6) * big, 5.0, 0.05, SmallnessOptions{31, 64});
    CHECK_FALSE(r.satisfied);
    CHECK(r.n == 64);
  }
  SUBCASE("argument checks") {
    const SpectralField z = SpectralField::zero(BasisSpec{1, 4, 6});
    CHECK_THROWS_AS(find_smallness_interval(z, 5.0, 0.0), Error);
    CHECK_THROWS_AS(find_smallness_interval(z, 5.0, 0.1, SmallnessOptions{30, 10}), Error);
  }
}

TEST_CASE("critical solve") {
  NLSProblem prob;
  prob.p = 5.0;
  prob.basis = BasisSpec{1, 24, 32};
  prob.max_iter = 15;
  SpectralField u0 = cplx(0.8, 0.2) * SpectralField::mode(prob.basis, MultiIndex({0})) +
                     cplx(0.4, -0.3) * SpectralField::mode(prob.basis, MultiIndex({2}));
  prob.u0 = cplx(0.01 / u0.l2_norm()) * u0;
  const SmallnessResult sm = find_smallness_interval(prob.u0, prob.p, 0.05);
  REQUIRE(sm.satisfied);
  prob.interval = sm.interval;
  const NLSSolution s = critical_solve(prob, CriticalOptions{});
  CHECK(s.report.converged);
  CHECK(s.report.iterations <= 15);
  CHECK(s.report.regime == Regime::critical);
  CHECK(s.report.tail_ratio < 1.0);

  // Mass drift refines at second order here as well. Tiny data drift at roundoff,
  // so this uses ||u0|| = 0.3 on a fixed interval with a looser ball.
  auto drift_at = [&](int nodes) {
    NLSProblem q = prob;
    q.u0 = cplx(0.3 / u0.l2_norm()) * u0;
    q.interval = TimeGrid::symmetric(0.4, nodes);
    return mass_drift(critical_solve(q, CriticalOptions{0.5, {}}).solution);
  };
  const double r = drift_at(61) / drift_at(121);
  CHECK(r >= 3.0);
  CHECK(r <= 5.0);

  // Off-centre ball beyond eta.
  CriticalOptions far;
  far.eta = 1e-3;
  far.center = SpectralField::zero(prob.basis);
  CHECK(kind_of([&] { critical_solve(prob, far); }) == ErrorKind::precondition);
  // Large data violates the linear smallness on the full interval.
  NLSProblem big = prob;
  big.u0 = cplx(50.0) * prob.u0;
  CHECK(kind_of([&] { critical_solve(big, CriticalOptions{}); }) == ErrorKind::precondition);
  NLSProblem sub = reference_problem();
  CHECK(kind_of([&] { critical_solve(sub, CriticalOptions{}); }) == ErrorKind::regime);
}
