#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ouspec/fields.hpp"
#include "ouspec/spaces.hpp"

namespace ou {

enum class Profile { random_coefficient, gaussian_bump, hermite_mode };

Profile parse_profile(const std::string& name);
std::string to_string(Profile p);

/// Reproducible family of initial data.
///
/// random-coefficient: c_alpha i.i.d. complex Gaussian with variance exp(-|alpha|/8).
/// gaussian-bump: exp(-|x-c|^2 / (2 s^2)) projected on the basis, c ~ U[-1,1]^d, s ~ U[0.5,1.5].
/// hermite-mode: h_(k,0,...,0) for every sample.
struct EnsembleSpec {
  int count = 1;
  std::uint64_t seed = 1;
  Profile profile = Profile::random_coefficient;
  BasisSpec basis{1, 24, 32};
  int mode_order = 0;

  void validate() const;
};

std::vector<SpectralField> generate_ensemble(const EnsembleSpec& ens);

struct EstimateEntry {
  int sample_id = 0;
  std::string label;  // time or pair label
  double quotient = 0.0;
};

struct EstimateReport {
  std::vector<EstimateEntry> entries;
  double max = 0.0;
  int argmax_sample = -1;
  std::string argmax_label;
  /// Relative change of `max` under the refinement run; negative when not computed.
  double refinement_delta = -1.0;
};

/// Max with ties broken by lowest sample id, then first label.
void finalize_report(EstimateReport& rep);

/// (2|sin t|)^{d/2} sup|u(t) w| / ||u0||_{L^1_gamma(w^{-1})}; the sharp constant is 1.
double dispersive_ratio(const SpectralField& u0, double t);
double dispersive_ratio(const GridField& u0, double t);

struct DispersiveScanOptions {
  double t_exclusion = 0.05;
  /// Repeat with nodes_per_axis doubled and report the change of the max.
  bool refine = true;
};

EstimateReport dispersive_scan(const EnsembleSpec& ens, const TimeGrid& t_grid,
                               const DispersiveScanOptions& opts = {});

/// ||e^{-itL}u0||_{L^q_t L^r_gamma(w^{r-2})} / ||u0||_{L^2_gamma} over `grid`.
double strichartz_quotient(const SpectralField& u0, const AdmissiblePair& pair, const TimeGrid& grid);

struct StrichartzScan {
  EstimateReport report;
  std::vector<AdmissiblePair> family;
  std::vector<double> pair_max;
  /// Filled when refinement is requested: maxima with N, M and time nodes doubled.
  std::vector<double> pair_max_refined;
  std::vector<double> pair_delta;
  /// Per-sample refined quotients aligned with report.entries (empty without refinement).
  std::vector<double> refined_quotients;
};

StrichartzScan strichartz_scan(const EnsembleSpec& ens, const std::vector<AdmissiblePair>& family,
                               const TimeGrid& grid, bool refine);

/// G(t) = int_I e^{i(t-s)L} F(s) ds over the grid of F (trapezoid), same grid out.
Trajectory dual_strichartz_operator(const Trajectory& f);

/// ||G||_{L^q L^r(w^{r-2})} / ||F||_{L^{q~'} L^{r~'}(w^{r~'-2})}.
double dual_strichartz_quotient(const Trajectory& f, const AdmissiblePair& pair,
                                const AdmissiblePair& pair2);

}  // namespace ou
