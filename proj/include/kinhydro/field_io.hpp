#pragma once

#include <string>

#include "kinhydro/errors.hpp"
#include "kinhydro/field.hpp"

namespace kinhydro {

enum class FieldIoErrc { Io = 1, BadMagic = 2, TruncatedPayload = 3, DimensionMismatch = 4 };

class FieldIoError : public std::runtime_error {
public:
    FieldIoError(FieldIoErrc code, const std::string& what) : std::runtime_error(what), code_(code) {}
    FieldIoErrc code() const { return code_; }

private:
    FieldIoErrc code_;
};

/// KHF1: "KHF1", u32 d, n_x, n_v, role (0 absolute, 1 fluctuation), f64 v_max,
/// then f64 samples with the x index outermost. Little-endian throughout.
void write_field(const std::string& path, const DistributionField& f);
DistributionField read_field(const std::string& path);
/// Also rejects files whose grids differ from `like`.
DistributionField read_field(const std::string& path, const DistributionField& like);

}  // namespace kinhydro
