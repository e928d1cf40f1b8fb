#pragma once

#include <memory>
#include <string>
#include <vector>

#include "kinhydro/collision.hpp"
#include "kinhydro/config.hpp"
#include "kinhydro/evolve.hpp"
#include "kinhydro/grid.hpp"
#include "kinhydro/spectral.hpp"

namespace kinhydro {

struct FitResult {
    double value = 0;
    double residual = 0;  // rms of the fit in the fitted variable
    int count = 0;
};

/// Least-squares slope of log y against log x.
FitResult fit_loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
/// Rate g of y ~ C e^{-g t} by least squares on log y.
FitResult fit_decay_rate(const std::vector<double>& t, const std::vector<double>& y);
/// First time y drops to half of y[0], log-linear between samples; NaN if never.
double half_life(const std::vector<double>& t, const std::vector<double>& y);
/// Positive angular frequency of the largest Hann-windowed DTFT peak of the
/// mean-removed signal, refined by golden-section search. Uniform samples.
double dominant_frequency(const std::vector<double>& t, const std::vector<cplx>& s);

struct FieldSeries {
    std::vector<double> t;
    std::vector<DistributionField> f;
};

struct Decomposition {
    std::vector<double> t, total, macro, micro;
};
/// Norms of f_eps - f0 - uac split into the Pi range and its complement.
Decomposition decompose_trajectory(const FieldSeries& f_eps, const FieldSeries& f0, const FieldSeries& uac,
                                   const MacroBasis& mb, const NormSpec& norm);

/// Everything a sweep shares across eps values.
struct SweepContext {
    SimConfig cfg;
    std::shared_ptr<const VelocityGrid> v;
    std::shared_ptr<const SpatialGrid> x;
    std::shared_ptr<const CollisionOperator> op;
    HydroCoefficients hc;
    double gap = 0;
    DistributionField f_in;
    SplitParts split;
};
SweepContext make_context(const SimConfig& cfg);

struct SweepRow {
    double epsilon = 0;
    double t0 = 0, t_end = 0;
    int steps = 0, samples = 0;
    double err_gaussian = 0;    // sup_{t >= t0} |f - f0 - u_ac| (gaussian surrogate)
    double err_polynomial = 0;  // same, polynomial surrogate
    double err_macro = 0;       // remainder after removing the measured microscopic layer
    double micro_initial = 0;   // |Pi^perp f(0)|
    double half_life = 0;       // of |Pi^perp f|
    FitResult gamma;            // decay rate of |Pi^perp f| in units of 1/eps^2
    double acoustic_freq = 0;   // measured angular frequency
    double acoustic_pred = 0;   // c |k| / eps
    double conservation_drift = 0;
    double mean_free_drift = 0;
    double min_density = 0;
    int positivity_violations = 0;
    double coupled_mismatch = 0;  // NaN unless coupled mode ran
    double nsf_truncated_at = 0;  // NaN unless the fluid solve broke down
    double wall_seconds = 0;
};

struct SweepReport {
    std::string config_hash;
    std::string initial;
    HydroCoefficients hc;
    double gap = 0;
    double layer_window = 0;
    std::vector<SweepRow> rows;  // eps descending
    FitResult order;             // slope of log E_gaussian vs log eps
    std::vector<double> pair_orders;
    bool monotone = false;
    std::vector<double> half_life_ratios;  // hl(2 eps) / hl(eps)
    std::vector<std::string> notes;
};

/// One eps of the sweep. The trajectory and the reference series are kept
/// when the pointers are non-null.
SweepRow run_single(const SweepContext& ctx, double epsilon, Trajectory* traj = nullptr,
                    FieldSeries* f0 = nullptr, FieldSeries* uac = nullptr);
SweepReport run_limit_sweep(const SimConfig& cfg);
SweepReport run_limit_sweep(const SweepContext& ctx);

/// f0(t) from the NSF solve of the well-prepared part at the given times.
/// Stops early (and sets truncated_at) if the fluid solve breaks down.
FieldSeries limit_reference(const SweepContext& ctx, const std::vector<double>& times, double* truncated_at);

}  // namespace kinhydro
