#pragma once

#include <optional>
#include <string>
#include <vector>

#include "ouspec/fields.hpp"
#include "ouspec/spaces.hpp"

namespace ou {

enum class Regime { subcritical, critical, supercritical };

/// Subcritical iff p < 1 + 4/d, critical iff p == 1 + 4/d (to 1e-12).
Regime classify_regime(int dimension, double p);
std::string to_string(Regime r);

/// i u_t - L u = mu w^p |u|^{p-1} u on a symmetric interval [-T, T].
struct NLSProblem {
  double p = 3.0;
  int mu = 1;
  BasisSpec basis{1, 24, 32};
  TimeGrid interval{-0.3, 0.3, 61};
  SpectralField u0;
  double tol = 1e-12;
  int max_iter = 60;
  /// Weight of the S-proxy inside the critical S^0 norm; 0 < delta < 1.
  double delta = 0.5;

  void validate() const;
};

struct PicardReport {
  /// Norm of u^{(k+1)} - u^{(k)} per iteration.
  std::vector<double> residuals;
  /// residuals[k] / residuals[k-1]; length iterations - 1.
  std::vector<double> contraction_ratios;
  /// Max ratio over the second half of contraction_ratios (0 if there are none).
  double tail_ratio = 0.0;
  /// S-proxy norm of u - u0* - D N(u) for the returned u.
  double duhamel_residual = 0.0;
  bool converged = false;
  bool monotone = true;
  int iterations = 0;
  std::string norm_name;
  Regime regime = Regime::subcritical;

  /// ||D N(u)||_S-proxy / ||N(u)||_{L^{q'} L^{r'}(w^{r'-2})} at (q, r) = (4(p+1)/(d(p-1)), p+1).
  double duhamel_gain = 0.0;
  /// 2 C eps^{p-1} (2T)^{1/q' - p/q} with eps = 2 ||u0||; reported only.
  double smallness_surrogate = 0.0;
  std::vector<AdmissiblePair> family;
  std::vector<double> s_norm_members;
};

struct NLSSolution {
  Trajectory solution;
  PicardReport report;
};

/// Pointwise mu w^p |u|^{p-1} u on the grid.
GridField nonlinearity(const GridField& u, double p, int mu);

/// Pseudo-spectral N(u): synthesize on the grid, apply, project back.
SpectralField nonlinearity_projected(const SpectralField& u, double p, int mu);

/// ||a|^{p-1}a - |b|^{p-1}b| <= c |a-b| (|a|^{p-1} + |b|^{p-1}), c defaults to p.
bool power_lipschitz_check(cplx a, cplx b, double p);
bool power_lipschitz_check(cplx a, cplx b, double p, double c);

/// D g(t) = -i int_0^t e^{-i(t-s)L} g(s) ds, cumulative trapezoid outward from t = 0.
Trajectory duhamel_apply(const Trajectory& g);

/// max_j ||u(t_j)||_{L^2_gamma}.
double s_proxy_norm(const Trajectory& u);

/// Picard iteration u <- u0* + D N(u) with convergence in the S-proxy (L^inf_t L^2_gamma).
NLSSolution picard_solve(const NLSProblem& prob);

/// ||u(t_j)||_{L^2_gamma} per node.
std::vector<double> mass_trace(const Trajectory& sol);

struct LipschitzResult {
  double ratio = 0.0;
  bool converged = false;
  PicardReport report_u;
  PicardReport report_v;
};

/// ||u - v||_S-proxy / ||u0* - v0*||_S-proxy for the two solves (0 for identical data).
LipschitzResult lipschitz_experiment(const NLSProblem& prob, const SpectralField& u0,
                                     const SpectralField& v0);

struct SmallnessOptions {
  int time_nodes = 61;
  int n_max = 10000;
};

struct SmallnessResult {
  /// Largest tested interval meeting the bound; I_0 denotes [-pi/2, pi/2].
  TimeGrid interval;
  int n = 0;
  double norm = 0.0;
  bool satisfied = false;
  /// (n, norm) in the order evaluated.
  std::vector<std::pair<int, double>> tested;
};

/// ||e^{-itL}u1||_{L^{p+1}_t(I; L^{p+1}_gamma(w^{p-1}))} on a symmetric grid.
double linear_smallness_norm(const SpectralField& u1, double p, const TimeGrid& grid);

/// Smallest n with the smallness norm on I_n = [-1/n, 1/n] (I_0 = full) at most eta.
SmallnessResult find_smallness_interval(const SpectralField& u1, double p, double eta,
                                        const SmallnessOptions& opts = {});

struct CriticalOptions {
  double eta = 0.05;
  /// Ball center u1; defaults to u0.
  std::optional<SpectralField> center;
};

/// Picard iteration for p = 1 + 4/d measured in delta ||.||_S-proxy + ||.||_{L^{p+1}L^{p+1}(w^{p-1})}.
NLSSolution critical_solve(const NLSProblem& prob, const CriticalOptions& opts);

}  // namespace ou
