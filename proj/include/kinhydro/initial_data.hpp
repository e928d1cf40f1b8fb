#pragma once

#include <array>
#include <memory>
#include <string>

#include "kinhydro/field.hpp"
#include "kinhydro/micromacro.hpp"

namespace kinhydro {

enum class InitialKind { WellPreparedTaylorGreen, IllPreparedMode, MicroscopicBump, Mixed };

InitialKind parse_initial_kind(const std::string& s);
const char* to_string(InitialKind k);

struct InitialParams {
    double amplitude = 0.1;
    /// theta = -rho = theta_ratio * amplitude * prod cos(x_a) for the Taylor-Green kind.
    double theta_ratio = 0.5;
    /// Wavevector of the ill-prepared and microscopic profiles.
    std::array<int, 3> mode = {1, 0, 0};
};

/// Mean-free fluctuation on the given grids. Throws InvalidArgument when the
/// parameters cannot give mean-free data (e.g. a zero acoustic mode).
DistributionField make_initial_data(InitialKind kind, const InitialParams& params,
                                    std::shared_ptr<const VelocityGrid> v, std::shared_ptr<const SpatialGrid> x,
                                    const MacroBasis& mb);

/// Largest x-averaged collision invariant of f, relative to max |f|.
double mean_free_violation(const DistributionField& f, const MacroBasis& mb);

}  // namespace kinhydro
