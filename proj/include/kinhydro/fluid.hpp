#pragma once

#include <memory>
#include <vector>

#include "kinhydro/field.hpp"
#include "kinhydro/micromacro.hpp"

namespace kinhydro {

struct FluidState {
    MacroFields m;
    double t = 0;
};

struct NsfOptions {
    double dt = 1e-3;
    /// Keep every n-th step in the trajectory (the final state is always kept).
    int stride = 1;
    bool dealias = true;
};

/// Pseudo-spectral incompressible Navier-Stokes-Fourier with Boussinesq
/// closure rho = -theta. Integrating factor for the diffusion, Heun RK2 for
/// the advection, 2/3-rule dealiasing.
std::vector<FluidState> evolve_nsf(const FluidState& init, double mu, double kappa, double t_end,
                                   const NsfOptions& opt = {});

/// Checks the FluidState invariants; returns the largest violation of
/// (div u, rho + theta, means).
double fluid_invariant_violation(const FluidState& s);

DistributionField kinetic_counterpart(const FluidState& s, std::shared_ptr<const VelocityGrid> v,
                                      const MacroBasis& mb);

/// Centered-difference residual of the NSF system in H^{s-1} at interior
/// samples; entry k belongs to trajectory sample k + 1.
std::vector<double> nsf_residual(const std::vector<FluidState>& traj, double mu, double kappa, double s = 2.0);

}  // namespace kinhydro
