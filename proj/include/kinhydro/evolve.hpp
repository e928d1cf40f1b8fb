#pragma once

#include <limits>
#include <memory>
#include <vector>

#include <Eigen/Dense>

#include "kinhydro/collision.hpp"
#include "kinhydro/field.hpp"

namespace kinhydro {

enum class Scheme { Strang, Lie };

/// Exponential: f <- e^{tau L} f + dt/eps phi1(tau L) Q with tau = dt/eps^2.
/// NuIntegratingFactor: e^{-nu tau} exactly, K f and Q frozen over the step.
enum class CollisionIntegrator { Exponential, NuIntegratingFactor };

struct EvolveConfig {
    double epsilon = 0.2;
    double dt_factor = 0.25;  // dt = dt_factor eps^2
    double t_end = 1.0;
    Scheme scheme = Scheme::Strang;
    CollisionIntegrator integrator = CollisionIntegrator::Exponential;
    bool conserve_fix = true;
    bool nonlinear = true;
    bool coupled = false;
    double delta = 0.05;
    /// Number of stored samples after t = 0; <= 0 stores every step.
    int samples = 64;

    double dt() const { return dt_factor * epsilon * epsilon; }
    int steps() const;
    void validate() const;
};

struct Trajectory {
    std::vector<double> t;
    std::vector<DistributionField> f;
    /// Invariants and entropy of the absolute density F = M + eps f.
    std::vector<Invariants> invariants;
    std::vector<double> entropy;  // NaN where F has negative values
    double min_density = std::numeric_limits<double>::infinity();
    int positivity_violations = 0;  // samples with F < -1e-10
};

DistributionField step_transport(const DistributionField& f, double dt, double epsilon);

/// One collision substep f <- E f + G Q(f, f) as velocity matrices, built once
/// per (dt, eps) and reused.
class CollisionStepper {
public:
    CollisionStepper(std::shared_ptr<const CollisionOperator> op, double dt, double epsilon,
                     CollisionIntegrator integrator = CollisionIntegrator::Exponential,
                     bool conserve_fix = true, bool nonlinear = true);

    DistributionField step(const DistributionField& f) const;
    const Eigen::MatrixXd& E() const { return E_; }
    const Eigen::MatrixXd& G() const { return G_; }
    double dt() const { return dt_; }
    double epsilon() const { return eps_; }

private:
    std::shared_ptr<const CollisionOperator> op_;
    double dt_, eps_;
    bool nonlinear_;
    Eigen::MatrixXd E_, G_;
};

DistributionField step_collision(const DistributionField& f, double dt, double epsilon,
                                 std::shared_ptr<const CollisionOperator> op,
                                 CollisionIntegrator integrator = CollisionIntegrator::Exponential,
                                 bool conserve_fix = true);

Trajectory evolve_boltzmann(const DistributionField& f_in, const EvolveConfig& cfg,
                            std::shared_ptr<const CollisionOperator> op);

/// U^eps(t) f by the same splitting with the nonlinearity switched off.
DistributionField linear_propagate(const DistributionField& f, double t, double epsilon,
                                   std::shared_ptr<const CollisionOperator> op, EvolveConfig base = {});

/// S^eps(t) h = e^{-nu t / eps^2} h(x - v t / eps, v), exactly.
DistributionField s_eps_apply(const DistributionField& h, double t, double epsilon, const Profile& nu);

struct CoupledTrajectory {
    Trajectory h, e;
};
/// Microscopic h driven by B^eps and macroscopic-side e driven by L^eps plus
/// eps^-2 A_delta h; h + e solves the direct problem.
CoupledTrajectory evolve_coupled(const DistributionField& f_in, const EvolveConfig& cfg,
                                 std::shared_ptr<const CollisionOperator> op);

}  // namespace kinhydro
