#include <cmath>
#include <filesystem>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "kinhydro/collision.hpp"
#include "kinhydro/config.hpp"
#include "kinhydro/errors.hpp"
#include "kinhydro/evolve.hpp"
#include "kinhydro/experiments.hpp"
#include "kinhydro/field_io.hpp"
#include "kinhydro/initial_data.hpp"
#include "kinhydro/report.hpp"
#include "kinhydro/spectral.hpp"

using namespace kinhydro;

namespace {

struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

SimConfig load(const std::string& path) {
    SimConfig cfg;
    try {
        cfg = path.empty() ? SimConfig{} : load_config(path);
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    std::vector<std::string> warnings;
    try {
        warnings = cfg.validate();
    } catch (const InvalidArgument& e) {
        throw UsageError(e.what());
    }
    for (const auto& w : warnings) std::cerr << "warning: " << w << "\n";
    return cfg;
}

int transport_coeffs(const SimConfig& cfg) {
    const auto v = std::make_shared<const VelocityGrid>(cfg.dim, cfg.v_max, cfg.n_v);
    const auto op = std::make_shared<const CollisionOperator>(v);
    const GalerkinBasis basis(op, cfg.galerkin_degree);
    const ChapmanEnskog ce = chapman_enskog(basis);
    const ChapmanEnskog cg = chapman_enskog_grid(*op);
    const Eigen::VectorXd& ev = basis.L_eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    int kernel = 0;
    for (int i = 0; i < ev.size(); ++i) kernel += std::abs(ev[i]) < 1e-8 * scale;
    CsvTable t({"config_hash", "mu", "kappa", "c", "gamma", "gap", "kernel_dim", "mu_grid", "kappa_grid",
                "galerkin_size", "raw_asymmetry"});
    t.add({cfg.hash(), fmt17(ce.mu), fmt17(ce.kappa), fmt17(ce.c), fmt17(ce.gamma), fmt17(basis.gap()),
           std::to_string(kernel), fmt17(cg.mu), fmt17(cg.kappa), std::to_string(basis.size()),
           fmt17(basis.raw_asymmetry())});
    const std::string path = output_path(cfg, "transport_coeffs.csv");
    t.write(path);
    std::cout << t.str();
    return 0;
}

int spectrum(const SimConfig& cfg, double xi_max, int samples, const std::vector<double>& dir_in) {
    if (!(xi_max > 0) || samples < 4) throw UsageError("spectrum: need --xi-max > 0 and --samples >= 4");
    const auto v = std::make_shared<const VelocityGrid>(cfg.dim, cfg.v_max, cfg.n_v);
    const auto op = std::make_shared<const CollisionOperator>(v);
    const GalerkinBasis basis(op, cfg.galerkin_degree);
    Eigen::VectorXd dir = Eigen::VectorXd::Zero(cfg.dim);
    if (dir_in.empty()) dir[0] = 1;
    else {
        if (static_cast<int>(dir_in.size()) != cfg.dim) throw UsageError("spectrum: --direction needs dim entries");
        for (int a = 0; a < cfg.dim; ++a) dir[a] = dir_in[a];
    }
    std::vector<double> xi;
    for (int k = 1; k <= samples; ++k) xi.push_back(xi_max * k / samples);
    const BranchSet bs = eigen_branches(dir, xi, basis);
    CsvTable t({"config_hash", "branch", "multiplicity", "xi", "re", "im"});
    for (const auto& b : bs.branches)
        for (std::size_t k = 0; k < b.xi.size(); ++k)
            t.add({cfg.hash(), std::to_string(b.j), std::to_string(b.multiplicity), fmt17(b.xi[k]),
                   fmt17(b.lambda[k].real()), fmt17(b.lambda[k].imag())});
    t.write(output_path(cfg, "spectrum.csv"));
    std::cout << t.str();
    return 0;
}

DistributionField initial_field(const SweepContext& ctx, const std::string& input) {
    if (input.empty()) return ctx.f_in;
    return read_field(input, ctx.f_in);
}

int simulate(const SimConfig& cfg, double eps, const std::string& input) {
    SweepContext ctx = make_context(cfg);
    ctx.f_in = initial_field(ctx, input);
    if (!(eps > 0)) eps = cfg.epsilon.front();
    EvolveConfig ec = cfg.evolve_config(eps);
    const Trajectory tr = evolve_boltzmann(ctx.f_in, ec, ctx.op);
    const NormSpec norm = NormSpec::gaussian(cfg.beta, cfg.s_sobolev);
    trajectory_table(tr, ctx.op->macro(), norm, cfg.hash()).write(output_path(cfg, "trajectory.csv"));
    write_field(output_path(cfg, "final.khf"), tr.f.back());
    std::cout << "steps " << ec.steps() << ", samples " << tr.t.size() << ", positivity violations "
              << tr.positivity_violations << "\n";
    return 0;
}

int sweep(const SimConfig& cfg) {
    const SweepReport rep = run_limit_sweep(cfg);
    const CsvTable t = sweep_table(rep);
    t.write(output_path(cfg, "sweep.csv"));
    write_text(output_path(cfg, "sweep.json"), sweep_json(rep, cfg));
    std::cout << t.str() << "order " << fmt17(rep.order.value) << " (residual " << fmt17(rep.order.residual)
              << ", n = " << rep.order.count << "), monotone " << (rep.monotone ? "yes" : "no") << "\n";
    for (const auto& n : rep.notes) std::cout << "note: " << n << "\n";
    return 0;
}

int decompose(const SimConfig& cfg, double eps) {
    const SweepContext ctx = make_context(cfg);
    if (!(eps > 0)) eps = cfg.epsilon.front();
    Trajectory tr;
    FieldSeries f0, uac;
    run_single(ctx, eps, &tr, &f0, &uac);
    FieldSeries fe{tr.t, tr.f};
    fe.t.resize(f0.t.size());
    fe.f.resize(f0.f.size());
    const Decomposition d =
        decompose_trajectory(fe, f0, uac, ctx.op->macro(), NormSpec::gaussian(cfg.beta, cfg.s_sobolev));
    const CsvTable t = decomposition_table(d, cfg.hash());
    t.write(output_path(cfg, "decomposition.csv"));
    std::cout << t.str();
    return 0;
}

int selftest() {
    int failures = 0;
    auto report = [&](const char* name, bool ok, double value) {
        std::cout << (ok ? "PASS " : "FAIL ") << name << " (" << fmt17(value) << ")\n";
        failures += !ok;
    };
    const auto v = std::make_shared<const VelocityGrid>(2, 6.0, 16);
    const auto x = std::make_shared<const SpatialGrid>(2, 4);
    const auto op = std::make_shared<const CollisionOperator>(v);
    const Eigen::MatrixXd M = op->M().transpose();
    report("Q(M,M) small", op->q_raw(M, M).cwiseAbs().sum() * v->weight() < 1e-3,
           op->q_raw(M, M).cwiseAbs().sum() * v->weight());
    const Eigen::MatrixXd& P = op->macro().pi();
    report("Pi idempotent", (P * P - P).cwiseAbs().maxCoeff() < 1e-12, (P * P - P).cwiseAbs().maxCoeff());
    InitialParams ip;
    const DistributionField f = make_initial_data(InitialKind::Mixed, ip, v, x, op->macro());
    const DistributionField g = step_transport(f, 0.3, 0.5);
    report("transport unitary", std::abs(g.data.norm() - f.data.norm()) < 1e-12 * f.data.norm(),
           std::abs(g.data.norm() - f.data.norm()));
    const auto tmp = std::filesystem::temp_directory_path() / "kinhydro_selftest.khf";
    write_field(tmp.string(), f);
    const DistributionField r = read_field(tmp.string(), f);
    std::filesystem::remove(tmp);
    report("KHF1 round trip", r.data == f.data, (r.data - f.data).cwiseAbs().maxCoeff());
    return failures ? 1 : 0;
}

void write_diagnostic(const std::string& dir, const std::string& what, double t) {
    try {
        std::filesystem::create_directories(dir);
        std::ostringstream os;
        os << "numerical failure: " << what << "\nlast valid time: " << fmt17(t) << "\n";
        write_text((std::filesystem::path(dir) / "diagnostic.txt").string(), os.str());
    } catch (const std::exception&) {
    }
}

}  // namespace

int main(int argc, char** argv) {
    configure_threads();
    CLI::App app{"kinhydro: kinetic to Navier-Stokes-Fourier limit experiments"};
    app.require_subcommand(1);
    std::string cfg_path, input;
    double xi_max = 0.5, eps = 0;
    int samples = 16;
    std::vector<double> direction;

    auto* tc = app.add_subcommand("transport-coeffs", "mu, kappa, c, spectral gap and kernel dimension");
    tc->add_option("-c,--config", cfg_path, "config file");
    auto* sp = app.add_subcommand("spectrum", "hydrodynamic eigenvalue branches");
    sp->add_option("-c,--config", cfg_path, "config file");
    sp->add_option("--xi-max", xi_max, "largest |xi|");
    sp->add_option("--samples", samples, "number of |xi| samples");
    sp->add_option("--direction", direction, "unit direction of xi")->delimiter(',');
    auto* sim = app.add_subcommand("simulate", "one Boltzmann run; trajectory CSV and final field");
    sim->add_option("-c,--config", cfg_path, "config file");
    sim->add_option("--epsilon", eps, "override the first epsilon of the config");
    sim->add_option("--input", input, "initial field (KHF1)");
    auto* sw = app.add_subcommand("sweep", "hydrodynamic-limit sweep over the epsilon list");
    sw->add_option("-c,--config", cfg_path, "config file");
    auto* dc = app.add_subcommand("decompose", "component norms of f - f0 - u_ac for one epsilon");
    dc->add_option("-c,--config", cfg_path, "config file");
    dc->add_option("--epsilon", eps, "override the first epsilon of the config");
    auto* st = app.add_subcommand("selftest", "quick internal consistency checks");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return 2;
    }

    SimConfig cfg;
    try {
        if (st->parsed()) return selftest();
        cfg = load(cfg_path);
        if (tc->parsed()) return transport_coeffs(cfg);
        if (sp->parsed()) return spectrum(cfg, xi_max, samples, direction);
        if (sim->parsed()) return simulate(cfg, eps, input);
        if (sw->parsed()) return sweep(cfg);
        if (dc->parsed()) return decompose(cfg, eps);
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n" << app.help();
        return 2;
    } catch (const NumericalError& e) {
        std::cerr << "numerical failure: " << e.what() << "\n";
        write_diagnostic(cfg.output_dir, e.what(), e.last_valid_time);
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        write_diagnostic(cfg.output_dir, e.what(), std::nan(""));
        return 1;
    }
    return 2;
}
