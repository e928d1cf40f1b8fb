#include "kinhydro/report.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include "json.hpp"
#include "kinhydro/errors.hpp"

namespace kinhydro {

std::string fmt17(double x) {
    if (std::isnan(x)) return "nan";
    if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
    std::ostringstream os;
    os << std::setprecision(17) << x;
    return os.str();
}

void CsvTable::add(std::vector<std::string> row) {
    if (row.size() != header_.size()) throw InvalidArgument("csv: row width differs from header");
    rows_.push_back(std::move(row));
}

std::string CsvTable::str() const {
    std::ostringstream os;
    auto line = [&](const std::vector<std::string>& r) {
        for (std::size_t i = 0; i < r.size(); ++i) os << (i ? "," : "") << r[i];
        os << "\n";
    };
    line(header_);
    for (const auto& r : rows_) line(r);
    return os.str();
}

void CsvTable::write(const std::string& path) const { write_text(path, str()); }

void write_text(const std::string& path, const std::string& text) {
    std::ofstream out(path, std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << text;
    if (!out) throw std::runtime_error("write failed for " + path);
}

std::string output_path(const SimConfig& cfg, const std::string& name) {
    std::filesystem::create_directories(cfg.output_dir);
    return (std::filesystem::path(cfg.output_dir) / name).string();
}

CsvTable sweep_table(const SweepReport& rep) {
    CsvTable t({"config_hash", "initial", "epsilon", "t0", "t_end", "steps", "samples", "err_gaussian",
                "err_polynomial", "err_macro", "micro_initial", "half_life", "gamma", "gamma_residual",
                "gamma_count", "acoustic_freq", "acoustic_pred", "conservation_drift", "mean_free_drift",
                "min_density", "positivity_violations", "coupled_mismatch", "nsf_truncated_at"});
    for (const auto& r : rep.rows)
        t.add({rep.config_hash, rep.initial, fmt17(r.epsilon), fmt17(r.t0), fmt17(r.t_end), std::to_string(r.steps),
               std::to_string(r.samples), fmt17(r.err_gaussian), fmt17(r.err_polynomial), fmt17(r.err_macro),
               fmt17(r.micro_initial), fmt17(r.half_life), fmt17(r.gamma.value), fmt17(r.gamma.residual),
               std::to_string(r.gamma.count), fmt17(r.acoustic_freq), fmt17(r.acoustic_pred),
               fmt17(r.conservation_drift), fmt17(r.mean_free_drift), fmt17(r.min_density),
               std::to_string(r.positivity_violations), fmt17(r.coupled_mismatch), fmt17(r.nsf_truncated_at)});
    return t;
}

namespace {

nlohmann::json num(double x) {
    if (!std::isfinite(x)) return nullptr;
    return x;
}

nlohmann::json fit_json(const FitResult& f) {
    return {{"value", num(f.value)}, {"residual", num(f.residual)}, {"count", f.count}};
}

}  // namespace

std::string sweep_json(const SweepReport& rep, const SimConfig& cfg) {
    using nlohmann::json;
    json j;
    j["config_hash"] = rep.config_hash;
    j["config"] = cfg.canonical();
    j["initial"] = rep.initial;
    j["coefficients"] = {{"mu", rep.hc.mu}, {"kappa", rep.hc.kappa}, {"c", rep.hc.c}, {"gamma", rep.hc.gamma}};
    j["spectral_gap"] = rep.gap;
    j["layer_window_eps2"] = rep.layer_window;
    j["order"] = fit_json(rep.order);
    j["monotone"] = rep.monotone;
    json po = json::array(), hl = json::array();
    for (double x : rep.pair_orders) po.push_back(num(x));
    for (double x : rep.half_life_ratios) hl.push_back(num(x));
    j["pair_orders"] = po;
    j["half_life_ratios"] = hl;
    j["notes"] = rep.notes;
    json rows = json::array();
    for (const auto& r : rep.rows)
        rows.push_back({{"epsilon", r.epsilon},
                        {"t0", r.t0},
                        {"t_end", r.t_end},
                        {"steps", r.steps},
                        {"samples", r.samples},
                        {"err_gaussian", num(r.err_gaussian)},
                        {"err_polynomial", num(r.err_polynomial)},
                        {"err_macro", num(r.err_macro)},
                        {"micro_initial", num(r.micro_initial)},
                        {"half_life", num(r.half_life)},
                        {"gamma", fit_json(r.gamma)},
                        {"acoustic_freq", num(r.acoustic_freq)},
                        {"acoustic_pred", num(r.acoustic_pred)},
                        {"conservation_drift", num(r.conservation_drift)},
                        {"mean_free_drift", num(r.mean_free_drift)},
                        {"min_density", num(r.min_density)},
                        {"positivity_violations", r.positivity_violations},
                        {"coupled_mismatch", num(r.coupled_mismatch)},
                        {"nsf_truncated_at", num(r.nsf_truncated_at)},
                        {"wall_seconds", r.wall_seconds}});
    j["rows"] = rows;
    return j.dump(2) + "\n";
}

CsvTable trajectory_table(const Trajectory& tr, const MacroBasis& mb, const NormSpec& norm,
                          const std::string& config_hash) {
    const int d = mb.dim();
    std::vector<std::string> head = {"config_hash", "t", "mass"};
    for (int a = 0; a < d; ++a) head.push_back("momentum_" + std::to_string(a));
    for (const char* h : {"energy", "entropy", "norm", "micro_norm"}) head.push_back(h);
    CsvTable t(head);
    for (std::size_t k = 0; k < tr.t.size(); ++k) {
        const Invariants& inv = tr.invariants[k];
        std::vector<std::string> row = {config_hash, fmt17(tr.t[k]), fmt17(inv.mass)};
        for (int a = 0; a < d; ++a) row.push_back(fmt17(inv.momentum[a]));
        row.push_back(fmt17(inv.energy));
        row.push_back(fmt17(tr.entropy[k]));
        row.push_back(fmt17(weighted_norm(tr.f[k], norm)));
        row.push_back(fmt17(weighted_norm(tr.f[k] - project_pi(tr.f[k], mb), norm)));
        t.add(std::move(row));
    }
    return t;
}

CsvTable decomposition_table(const Decomposition& d, const std::string& config_hash) {
    CsvTable t({"config_hash", "t", "total", "macro", "micro"});
    for (std::size_t k = 0; k < d.t.size(); ++k)
        t.add({config_hash, fmt17(d.t[k]), fmt17(d.total[k]), fmt17(d.macro[k]), fmt17(d.micro[k])});
    return t;
}

}  // namespace kinhydro
