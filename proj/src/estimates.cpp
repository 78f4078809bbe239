#include "ouspec/estimates.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include "ouspec/error.hpp"
#include "ouspec/propagator.hpp"

namespace ou {

Profile parse_profile(const std::string& name) {
  if (name == "random-coefficient") return Profile::random_coefficient;
  if (name == "gaussian-bump") return Profile::gaussian_bump;
  if (name == "hermite-mode") return Profile::hermite_mode;
  fail(ErrorKind::invalid_parameter, "unknown ensemble profile '" + name + "'");
}

std::string to_string(Profile p) {
  switch (p) {
    case Profile::random_coefficient: return "random-coefficient";
    case Profile::gaussian_bump: return "gaussian-bump";
    case Profile::hermite_mode: return "hermite-mode";
  }
  return "?";
}

void EnsembleSpec::validate() const {
  require(count >= 1, ErrorKind::invalid_parameter, "ensemble count must be >= 1");
  basis.validate();
  if (profile == Profile::hermite_mode) {
    require(mode_order >= 0 && mode_order <= basis.max_degree, ErrorKind::invalid_parameter,
            "hermite-mode order must lie in [0, N]");
  }
}

std::vector<SpectralField> generate_ensemble(const EnsembleSpec& ens) {
  ens.validate();
  std::mt19937_64 rng(ens.seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::uniform_real_distribution<double> uni(0.0, 1.0);
  const auto basis = basis_for(ens.basis);
  std::vector<SpectralField> out;
  out.reserve(ens.count);
  for (int s = 0; s < ens.count; ++s) {
    switch (ens.profile) {
      case Profile::random_coefficient: {
        SpectralField f = SpectralField::zero(ens.basis);
        const auto& modes = basis->modes();
        for (std::size_t i = 0; i < modes.size(); ++i) {
          const double sd = std::exp(-modes[i].order() / 16.0) / std::sqrt(2.0);
          const double re = normal(rng);
          const double im = normal(rng);
          f.coeffs[i] = sd * cplx(re, im);
        }
        out.push_back(std::move(f));
        break;
      }
      case Profile::gaussian_bump: {
        std::vector<double> c(ens.basis.dimension);
        for (auto& v : c) v = 2.0 * uni(rng) - 1.0;
        const double width = 0.5 + uni(rng);
        auto bump = [&](std::span<const double> x) {
          double r2 = 0.0;
          for (std::size_t k = 0; k < x.size(); ++k) r2 += (x[k] - c[k]) * (x[k] - c[k]);
          return cplx(std::exp(-0.5 * r2 / (width * width)), 0.0);
        };
        out.push_back(forward_transform(from_function(bump, ens.basis)));
        break;
      }
      case Profile::hermite_mode: {
        std::vector<int> deg(ens.basis.dimension, 0);
        deg[0] = ens.mode_order;
        out.push_back(SpectralField::mode(ens.basis, MultiIndex(deg)));
        break;
      }
    }
  }
  return out;
}

void finalize_report(EstimateReport& rep) {
  rep.max = 0.0;
  rep.argmax_sample = -1;
  rep.argmax_label.clear();
  for (const auto& e : rep.entries) {
    const bool better = rep.argmax_sample < 0 || e.quotient > rep.max ||
                        (e.quotient == rep.max && e.sample_id < rep.argmax_sample);
    if (better) {
      rep.max = e.quotient;
      rep.argmax_sample = e.sample_id;
      rep.argmax_label = e.label;
    }
  }
}

double dispersive_ratio(const SpectralField& u0, double t) {
  require(t != 0.0, ErrorKind::singular_time, "dispersive ratio is singular at t = 0");
  require(std::abs(t) <= 0.5 * M_PI + 1e-12, ErrorKind::invalid_parameter,
          "dispersive ratio needs 0 < |t| <= pi/2");
  const double denom = weighted_lp_norm(u0, 1.0, WeightPower{-1.0});
  require(denom > 0.0, ErrorKind::undefined_ratio, "dispersive ratio of zero data is undefined");
  const double sup = weighted_sup_norm(spectral_propagate(u0, t));
  const int d = u0.spec.dimension;
  return std::pow(2.0 * std::abs(std::sin(t)), 0.5 * d) * sup / denom;
}

double dispersive_ratio(const GridField& u0, double t) {
  return dispersive_ratio(forward_transform(u0), t);
}

namespace {

std::string time_label(double t) {
  std::ostringstream os;
  os.precision(17);
  os << t;
  return os.str();
}

EstimateReport dispersive_pass(const std::vector<SpectralField>& data, const std::vector<double>& ts) {
  const int ns = static_cast<int>(data.size());
  const int nt = static_cast<int>(ts.size());
  EstimateReport rep;
  rep.entries.resize(static_cast<std::size_t>(ns) * nt);
  std::exception_ptr err;
#pragma omp parallel for collapse(2) schedule(dynamic)
  for (int s = 0; s < ns; ++s) {
    for (int j = 0; j < nt; ++j) {
      capture_into(err, [&] {
        auto& e = rep.entries[static_cast<std::size_t>(s) * nt + j];
        e.sample_id = s;
        e.label = time_label(ts[j]);
        e.quotient = dispersive_ratio(data[s], ts[j]);
      });
    }
  }
  rethrow_if(err);
  finalize_report(rep);
  return rep;
}

double relative_change(double base, double fine) {
  const double scale = std::max(std::abs(base), std::abs(fine));
  return scale == 0.0 ? 0.0 : std::abs(fine - base) / scale;
}

}  // namespace

EstimateReport dispersive_scan(const EnsembleSpec& ens, const TimeGrid& t_grid,
                               const DispersiveScanOptions& opts) {
  t_grid.validate();
  const auto ts = t_grid.nodes();
  for (double t : ts) {
    require(std::abs(t) >= opts.t_exclusion, ErrorKind::singular_time,
            "scan time below the singularity guard (|t| < t_exclusion)");
  }
  const auto data = generate_ensemble(ens);
  EstimateReport rep = dispersive_pass(data, ts);
  if (opts.refine) {
    BasisSpec fine = ens.basis;
    fine.nodes_per_axis *= 2;
    std::vector<SpectralField> fdata;
    fdata.reserve(data.size());
    for (const auto& f : data) fdata.push_back(rebase(f, fine));
    const EstimateReport r2 = dispersive_pass(fdata, ts);
    rep.refinement_delta = relative_change(rep.max, r2.max);
  }
  return rep;
}

double strichartz_quotient(const SpectralField& u0, const AdmissiblePair& pair, const TimeGrid& grid) {
  require(admissible_check(pair), ErrorKind::invalid_parameter,
          "pair (" + pair.label() + ") is not sharp sigma-admissible");
  require(std::abs(pair.sigma - 0.5 * u0.spec.dimension) < 1e-12, ErrorKind::invalid_parameter,
          "Strichartz pairs must use sigma = d/2");
  const double n0 = u0.l2_norm();
  require(n0 > 0.0, ErrorKind::undefined_ratio, "Strichartz quotient of zero data is undefined");
  const Trajectory tr = trajectory(u0, grid);
  const WeightPower s{std::isinf(pair.r) ? 0.0 : pair.r - 2.0};
  return mixed_norm(tr, pair.q, pair.r, s) / n0;
}

namespace {

struct StrichartzPass {
  std::vector<double> quotients;  // sample-major, pair-minor
  std::vector<double> pair_max;
};

StrichartzPass strichartz_pass(const std::vector<SpectralField>& data,
                               const std::vector<AdmissiblePair>& family, const TimeGrid& grid) {
  const int ns = static_cast<int>(data.size());
  const int np = static_cast<int>(family.size());
  StrichartzPass out;
  out.quotients.resize(static_cast<std::size_t>(ns) * np);
  std::exception_ptr err;
#pragma omp parallel for collapse(2) schedule(dynamic)
  for (int s = 0; s < ns; ++s) {
    for (int k = 0; k < np; ++k) {
      capture_into(err, [&] {
        out.quotients[static_cast<std::size_t>(s) * np + k] =
            strichartz_quotient(data[s], family[k], grid);
      });
    }
  }
  rethrow_if(err);
  out.pair_max.assign(np, 0.0);
  for (int s = 0; s < ns; ++s) {
    for (int k = 0; k < np; ++k) {
      out.pair_max[k] = std::max(out.pair_max[k], out.quotients[static_cast<std::size_t>(s) * np + k]);
    }
  }
  return out;
}

}  // namespace

StrichartzScan strichartz_scan(const EnsembleSpec& ens, const std::vector<AdmissiblePair>& family,
                               const TimeGrid& grid, bool refine) {
  require(!family.empty(), ErrorKind::invalid_parameter, "admissible family is empty");
  const auto data = generate_ensemble(ens);
  StrichartzScan out;
  out.family = family;
  const StrichartzPass base = strichartz_pass(data, family, grid);
  out.pair_max = base.pair_max;
  const int np = static_cast<int>(family.size());
  for (std::size_t i = 0; i < base.quotients.size(); ++i) {
    out.report.entries.push_back({static_cast<int>(i / np), family[i % np].label(), base.quotients[i]});
  }
  finalize_report(out.report);

  if (refine) {
    BasisSpec fine = ens.basis;
    fine.max_degree *= 2;
    fine.nodes_per_axis *= 2;
    if (fine.max_degree == 0) fine.max_degree = 1;
    TimeGrid fgrid = grid;
    fgrid.n = 2 * grid.n - 1;
    std::vector<SpectralField> fdata;
    for (const auto& f : data) fdata.push_back(rebase(f, fine));
    const StrichartzPass r = strichartz_pass(fdata, family, fgrid);
    out.pair_max_refined = r.pair_max;
    out.refined_quotients = r.quotients;
    out.pair_delta.resize(np);
    for (int k = 0; k < np; ++k) out.pair_delta[k] = relative_change(base.pair_max[k], r.pair_max[k]);
    double fmax = 0.0;
    for (double v : r.pair_max) fmax = std::max(fmax, v);
    out.report.refinement_delta = relative_change(out.report.max, fmax);
  }
  return out;
}

Trajectory dual_strichartz_operator(const Trajectory& f) {
  f.validate();
  const auto& spec = f.states.front().spec;
  const auto basis = basis_for(spec);
  const auto& modes = basis->modes();
  const auto ts = f.grid.nodes();
  const auto wts = f.grid.trapezoid_weights();

  // A_alpha = int e^{-i|alpha|s} F_alpha(s) ds, then G_alpha(t) = e^{i|alpha|t} A_alpha.
  std::vector<cplx> acc(modes.size());
  for (std::size_t l = 0; l < ts.size(); ++l) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      acc[i] += wts[l] * std::polar(1.0, -ts[l] * modes[i].order()) * f.states[l].coeffs[i];
    }
  }
  Trajectory g{f.grid, std::vector<SpectralField>(ts.size(), SpectralField::zero(spec))};
  for (std::size_t j = 0; j < ts.size(); ++j) {
    for (std::size_t i = 0; i < modes.size(); ++i) {
      g.states[j].coeffs[i] = std::polar(1.0, ts[j] * modes[i].order()) * acc[i];
    }
  }
  return g;
}

double dual_strichartz_quotient(const Trajectory& f, const AdmissiblePair& pair,
                                const AdmissiblePair& pair2) {
  require(admissible_check(pair) && admissible_check(pair2), ErrorKind::invalid_parameter,
          "dual Strichartz quotient needs two admissible pairs");
  const double denom = dual_norm_bound(f, pair2);
  require(denom > 0.0, ErrorKind::undefined_ratio, "dual Strichartz quotient of zero forcing is undefined");
  const Trajectory g = dual_strichartz_operator(f);
  const WeightPower s{std::isinf(pair.r) ? 0.0 : pair.r - 2.0};
  return mixed_norm(g, pair.q, pair.r, s) / denom;
}

}  // namespace ou
