#include <chb/snapshot.hpp>

#include <chb/error.hpp>

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>

namespace chb {

namespace {

template <class T>
void put(std::ostream& os, T v) {
    unsigned char b[sizeof(T)];
    std::memcpy(b, &v, sizeof(T));
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    os.write(reinterpret_cast<const char*>(b), sizeof(T));
}

template <class T>
T get(std::istream& is) {
    unsigned char b[sizeof(T)];
    if (!is.read(reinterpret_cast<char*>(b), sizeof(T)))
        throw ConfigError("truncated snapshot");
    if constexpr (std::endian::native == std::endian::big)
        for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(b[i], b[sizeof(T) - 1 - i]);
    T v;
    std::memcpy(&v, b, sizeof(T));
    return v;
}

void put_header(std::ostream& os, const Grid2D& g) {
    os.write("CHBF", 4);
    put<std::uint8_t>(os, kSnapshotVersion);
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.nx));
    put<std::uint32_t>(os, static_cast<std::uint32_t>(g.ny));
    put<double>(os, g.lx);
    put<double>(os, g.ly);
}

Grid2D get_header(std::istream& is) {
    char magic[4];
    if (!is.read(magic, 4) || std::memcmp(magic, "CHBF", 4) != 0)
        throw ConfigError("not a CHBF snapshot (bad magic)");
    const auto version = get<std::uint8_t>(is);
    if (version != kSnapshotVersion)
        throw ConfigError("unsupported snapshot version " + std::to_string(version));
    const auto nx = get<std::uint32_t>(is);
    const auto ny = get<std::uint32_t>(is);
    const double lx = get<double>(is), ly = get<double>(is);
    if (nx > (1u << 16) || ny > (1u << 16)) throw ConfigError("snapshot grid too large");
    return Grid2D(static_cast<int>(nx), static_cast<int>(ny), lx, ly);
}

void put_payload(std::ostream& os, const ScalarField& f) {
    for (double v : f.values()) put<double>(os, v);
}

ScalarField get_payload(std::istream& is, const Grid2D& g) {
    ScalarField f(g);
    for (auto& v : f.raw()) v = get<double>(is);
    return f;
}

void check_written(std::ostream& os, const std::string& path) {
    if (!os) throw ConfigError("failed to write snapshot '" + path + "'");
}

}  // namespace

void write_snapshot(std::ostream& os, const ScalarField& f) {
    put_header(os, f.grid());
    put_payload(os, f);
}

void write_snapshot(std::ostream& os, const VectorField& v) {
    put_header(os, v.grid());
    put<std::uint8_t>(os, 2);
    put_payload(os, v.x);
    put_payload(os, v.y);
}

ScalarField read_scalar_snapshot(std::istream& is) {
    const Grid2D g = get_header(is);
    return get_payload(is, g);
}

VectorField read_vector_snapshot(std::istream& is) {
    const Grid2D g = get_header(is);
    const auto n = get<std::uint8_t>(is);
    if (n != 2) throw ConfigError("vector snapshot must have 2 components, found " + std::to_string(n));
    ScalarField x = get_payload(is, g);
    ScalarField y = get_payload(is, g);
    return {std::move(x), std::move(y)};
}

void write_snapshot(const std::string& path, const ScalarField& f) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    write_snapshot(os, f);
    check_written(os, path);
}

void write_snapshot(const std::string& path, const VectorField& v) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ConfigError("cannot open '" + path + "' for writing");
    write_snapshot(os, v);
    check_written(os, path);
}

ScalarField read_scalar_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open snapshot '" + path + "'");
    return read_scalar_snapshot(is);
}

VectorField read_vector_snapshot(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw ConfigError("cannot open snapshot '" + path + "'");
    return read_vector_snapshot(is);
}

}  // namespace chb
