#pragma once

#include <span>

#include "ouspec/fields.hpp"
#include "ouspec/spaces.hpp"

namespace ou {

/// Guards for the Mehler-kernel route.
struct KernelEvalConfig {
  /// Times within this distance of pi*Z are rejected; must lie in (0, pi/4].
  double t_exclusion = 0.05;
  /// Density multiplier of the quadrature lattice.
  int oversample = 4;

  void validate() const;
};

/// e^{-itL}: c_alpha -> e^{-i|alpha|t} c_alpha.
SpectralField spectral_propagate(const SpectralField& f, double t);

/// e^{-tL}, t >= 0: c_alpha -> e^{-|alpha|t} c_alpha.
SpectralField heat_propagate(const SpectralField& f, double t);

/// J_k: keeps the coefficients with |alpha| = k.
SpectralField eigen_project(const SpectralField& f, int k);

/// u(x) -> u(-x), computed on the grid (node reversal along every axis).
SpectralField parity_flip(const SpectralField& f);

/// Closed-form Schroedinger kernel M_{it}(x, y) of e^{-itL} against gamma_d(y) dy.
cplx mehler_kernel(double t, std::span<const double> x, std::span<const double> y,
                   const KernelEvalConfig& cfg = {});

/// One-dimensional factor; mehler_kernel is the product over axes.
cplx mehler_kernel_1d(double t, double x, double y, const KernelEvalConfig& cfg = {});

/// e^{-itL} g by quadrature of the Mehler kernel (validation route).
GridField kernel_propagate(const GridField& g, double t, const KernelEvalConfig& cfg = {});

struct KernelLattice {
  double half_width = 0.0;
  int points_per_axis = 0;
};
/// Uniform y-lattice used by kernel_propagate for this basis and time.
KernelLattice kernel_lattice_for(const BasisSpec& spec, double t, const KernelEvalConfig& cfg);

/// e^{-it_j L} u0 at every node of `grid`.
Trajectory trajectory(const SpectralField& u0, const TimeGrid& grid);

namespace reference {

/// Non-separable direct lattice sum of the d-dimensional kernel (test/benchmark only).
GridField kernel_propagate(const GridField& g, double t, const KernelEvalConfig& cfg = {});

}  // namespace reference

}  // namespace ou
