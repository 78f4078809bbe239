#pragma once

#include <limits>
#include <string>
#include <vector>

#include "ouspec/fields.hpp"

namespace ou {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

/// Exponent s applied to w(x) = exp(-|x|^2/2).
struct WeightPower {
  double s = 0.0;
};

/// w(x)^s.
double weight_power(std::span<const double> x, WeightPower s);

/// Exponent pair (q, r) for sigma-admissibility; either exponent may be kInf.
struct AdmissiblePair {
  double q = kInf;
  double r = 2.0;
  double sigma = 0.5;

  /// Hoelder conjugates q', r' (inf -> 1).
  double q_conj() const;
  double r_conj() const;
  /// "q:r" with "inf" for infinite exponents.
  std::string label() const;
};

bool admissible_check(double q, double r, double sigma);
inline bool admissible_check(const AdmissiblePair& p) { return admissible_check(p.q, p.r, p.sigma); }

/// Deterministic sample of the sharp d/2-admissible line, ordered by r; always starts with (inf, 2).
std::vector<AdmissiblePair> admissible_family(int dimension, int count);

/// Uniform nodes t0 .. t1 inclusive. A single node (n == 1, t0 == t1) is allowed.
struct TimeGrid {
  double t0 = 0.0;
  double t1 = 0.0;
  int n = 1;

  void validate() const;
  double node(int j) const;
  std::vector<double> nodes() const;
  double step() const;
  /// Index of the node at t = 0, or -1.
  int zero_index() const;
  /// Composite trapezoid weights.
  std::vector<double> trapezoid_weights() const;

  static TimeGrid symmetric(double half_width, int n) { return TimeGrid{-half_width, half_width, n}; }
};

/// Time-indexed states aligned with a TimeGrid.
struct Trajectory {
  TimeGrid grid;
  std::vector<SpectralField> states;

  void validate() const;
};

struct NormOptions {
  /// Density multiplier of the trapezoid lattice used when r is not an even integer.
  /// Even integer r is integrated exactly and ignores this.
  int oversample = 2;
};

/// (int |u|^r w^s dgamma_d)^{1/r}, 1 <= r < inf, s > -2.
/// Even integer r: Gauss rule for e^{-(1+s/2)|x|^2}, exact for the degree-rN integrand.
/// Other r: composite trapezoid on a box outside which the integrand is below e^{-46} of its peak.
double weighted_lp_norm(const SpectralField& u, double r, WeightPower s, NormOptions opts = {});
/// Grid values are treated as samples of a degree-N field (projected first).
double weighted_lp_norm(const GridField& u, double r, WeightPower s, NormOptions opts = {});

struct CheckedNorm {
  double value = 0.0;
  /// Relative change when the lattice density is doubled (0 for even integer r).
  double refinement_delta = 0.0;
};

/// weighted_lp_norm plus the same quantity with twice the quadrature nodes.
CheckedNorm weighted_lp_norm_checked(const SpectralField& u, double r, WeightPower s,
                                     NormOptions opts = {});

/// Lattice geometry used by weighted_sup_norm.
struct SupLattice {
  double half_width = 0.0;
  int points_per_axis = 0;
};
SupLattice sup_lattice_for(const BasisSpec& spec);

/// sup_x |u(x) w(x)|: lattice maximum refined by local golden-section search.
double weighted_sup_norm(const SpectralField& u);
double weighted_sup_norm(const GridField& u);

/// Space norm used inside mixed norms: r = inf means weighted_sup_norm (s ignored).
double space_norm(const SpectralField& u, double r, WeightPower s, NormOptions opts = {});

/// L^q_t(I; L^r_gamma(w^s)) by composite trapezoid in time; q = inf is the max over nodes.
double mixed_norm(const Trajectory& traj, double q, double r, WeightPower s, NormOptions opts = {});

/// Member norms ||traj||_{L^q L^r(w^{r-2})} for each pair in `family`.
std::vector<double> s_norm_members(const Trajectory& traj, const std::vector<AdmissiblePair>& family,
                                   NormOptions opts = {});
/// Max over the family.
double s_norm(const Trajectory& traj, const std::vector<AdmissiblePair>& family, NormOptions opts = {});

/// ||F||_{L^{q'} L^{r'}(w^{r'-2})}, the computable upper bound for the N-norm.
double dual_norm_bound(const Trajectory& f, const AdmissiblePair& pair, NormOptions opts = {});

}  // namespace ou
