#include "kinhydro/field_io.hpp"

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>
#include <vector>

namespace kinhydro {

namespace {

constexpr char kMagic[4] = {'K', 'H', 'F', '1'};
constexpr std::size_t kHeader = 4 + 4 * 4 + 8;

template <class T>
void put(std::vector<unsigned char>& buf, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    buf.insert(buf.end(), b, b + sizeof(T));
}

template <class T>
T get(const unsigned char* p) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, p, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(b, b + sizeof(T));
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

}  // namespace

void write_field(const std::string& path, const DistributionField& f) {
    std::vector<unsigned char> buf;
    buf.reserve(kHeader + 8 * f.data.size());
    buf.insert(buf.end(), kMagic, kMagic + 4);
    put<std::uint32_t>(buf, f.vgrid().dim());
    put<std::uint32_t>(buf, f.xgrid().n_axis());
    put<std::uint32_t>(buf, f.vgrid().n_axis());
    put<std::uint32_t>(buf, f.role == Role::Fluctuation ? 1 : 0);
    put<double>(buf, f.vgrid().v_max());
    for (int ix = 0; ix < f.nx(); ++ix)
        for (int iv = 0; iv < f.nv(); ++iv) put<double>(buf, f.data(ix, iv));
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw FieldIoError(FieldIoErrc::Io, "write_field: cannot open " + path);
    out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
    if (!out) throw FieldIoError(FieldIoErrc::Io, "write_field: write failed for " + path);
}

DistributionField read_field(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw FieldIoError(FieldIoErrc::Io, "read_field: cannot open " + path);
    const std::vector<unsigned char> buf((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    if (buf.size() < 4 || std::memcmp(buf.data(), kMagic, 4) != 0)
        throw FieldIoError(FieldIoErrc::BadMagic, "read_field: bad magic in " + path);
    if (buf.size() < kHeader) throw FieldIoError(FieldIoErrc::TruncatedPayload, "read_field: truncated header");
    const auto d = get<std::uint32_t>(&buf[4]);
    const auto nx = get<std::uint32_t>(&buf[8]);
    const auto nv = get<std::uint32_t>(&buf[12]);
    const auto role = get<std::uint32_t>(&buf[16]);
    const double vmax = get<double>(&buf[20]);
    if ((d != 2 && d != 3) || nx < 1 || nv < 2 || role > 1 || !(vmax > 0) || nx > 4096 || nv > 4096)
        throw FieldIoError(FieldIoErrc::DimensionMismatch, "read_field: invalid header dimensions");
    std::size_t Nx = 1, Nv = 1;
    for (std::uint32_t a = 0; a < d; ++a) {
        Nx *= nx;
        Nv *= nv;
    }
    const std::size_t need = kHeader + 8 * Nx * Nv;
    if (buf.size() < need) throw FieldIoError(FieldIoErrc::TruncatedPayload, "read_field: truncated payload");
    if (buf.size() > need)
        throw FieldIoError(FieldIoErrc::DimensionMismatch, "read_field: payload larger than header dimensions");
    auto v = std::make_shared<const VelocityGrid>(static_cast<int>(d), vmax, static_cast<int>(nv));
    auto x = std::make_shared<const SpatialGrid>(static_cast<int>(d), static_cast<int>(nx));
    DistributionField f(v, x, role ? Role::Fluctuation : Role::Absolute);
    const unsigned char* p = buf.data() + kHeader;
    for (std::size_t ix = 0; ix < Nx; ++ix)
        for (std::size_t iv = 0; iv < Nv; ++iv, p += 8) f.data(ix, iv) = get<double>(p);
    return f;
}

DistributionField read_field(const std::string& path, const DistributionField& like) {
    DistributionField f = read_field(path);
    if (!f.vgrid().same_as(like.vgrid()) || !f.xgrid().same_as(like.xgrid()))
        throw FieldIoError(FieldIoErrc::DimensionMismatch, "read_field: grids differ from the expected field");
    return DistributionField(like.vgrid_ptr(), like.xgrid_ptr(), f.role).with_data(std::move(f.data));
}

}  // namespace kinhydro
