#pragma once

#include <string>
#include <vector>

#include "kinhydro/config.hpp"
#include "kinhydro/experiments.hpp"

namespace kinhydro {

/// 17 significant digits, "nan"/"inf" spelled out.
std::string fmt17(double x);

/// Minimal CSV table: header plus rows of pre-formatted cells.
class CsvTable {
public:
    explicit CsvTable(std::vector<std::string> header) : header_(std::move(header)) {}
    void add(std::vector<std::string> row);
    std::string str() const;
    void write(const std::string& path) const;
    std::size_t rows() const { return rows_.size(); }

private:
    std::vector<std::string> header_;
    std::vector<std::vector<std::string>> rows_;
};

CsvTable sweep_table(const SweepReport& rep);
/// JSON mirror of the sweep table plus fits, coefficients and timings.
std::string sweep_json(const SweepReport& rep, const SimConfig& cfg);
CsvTable trajectory_table(const Trajectory& tr, const MacroBasis& mb, const NormSpec& norm,
                          const std::string& config_hash);
CsvTable decomposition_table(const Decomposition& d, const std::string& config_hash);

void write_text(const std::string& path, const std::string& text);
/// output_dir/name, creating output_dir when missing.
std::string output_path(const SimConfig& cfg, const std::string& name);

}  // namespace kinhydro
