#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "kinhydro/evolve.hpp"

namespace kinhydro {

/// Run configuration shared by every CLI subcommand. Text form is one
/// `key = value` per line with `#` comments; see README for the key list.
struct SimConfig {
    int dim = 2;
    int n_x = 32;
    int n_v = 24;
    double v_max = 6.0;
    double delta = 0.05;
    double s_sobolev = 2.0;
    double p = 1.0;
    double alpha = 4.0;
    double beta = 3.0;
    std::vector<double> epsilon = {0.4, 0.2, 0.1};
    double t_end = 1.0;
    /// When positive, each run uses t_end = t_end_eps2 * eps^2 instead.
    double t_end_eps2 = 0.0;
    double dt_factor = 0.25;
    Scheme scheme = Scheme::Strang;
    CollisionIntegrator integrator = CollisionIntegrator::Exponential;
    bool conserve_fix = true;
    bool nonlinear = true;
    bool coupled = false;
    int samples = 64;
    std::string output_dir = ".";

    // initial data
    std::string initial = "well-prepared-taylor-green";
    double amplitude = 0.1;
    double theta_ratio = 0.5;
    std::array<int, 3> mode = {1, 0, 0};

    // spectral / fluid
    int galerkin_degree = 8;
    double nsf_dt = 1e-3;
    /// Initial-layer exclusion window in units of eps^2.
    double layer_window = 5.0;

    double run_t_end(double eps) const { return t_end_eps2 > 0 ? t_end_eps2 * eps * eps : t_end; }
    EvolveConfig evolve_config(double eps) const;
    /// Hard errors throw InvalidArgument; soft issues come back as warnings.
    std::vector<std::string> validate() const;
    /// Canonical `key = value` text, every key present, fixed order.
    std::string canonical() const;
    /// FNV-1a of canonical(), hex.
    std::string hash() const;
};

SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);
/// Applies one `key = value` assignment; unknown keys throw InvalidArgument.
void set_config_key(SimConfig& cfg, const std::string& key, const std::string& value);
const std::vector<std::string>& config_keys();

std::uint64_t fnv1a(const std::string& s);

/// Caps the OpenMP pool at KINHYDRO_THREADS when set; returns the cap in effect.
int configure_threads();

}  // namespace kinhydro
