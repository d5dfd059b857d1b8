#pragma once

#include <chb/field.hpp>

#include <iosfwd>
#include <string>

namespace chb {

/// Binary field snapshots: "CHBF", u8 version (1), u32 nx, u32 ny, f64 lx,
/// f64 ly, then the row-major values as little-endian f64. Vector files put a
/// u8 component count (2) after the header, followed by the x then y payload.
inline constexpr unsigned char kSnapshotVersion = 1;

void write_snapshot(std::ostream& os, const ScalarField& f);
void write_snapshot(std::ostream& os, const VectorField& v);
void write_snapshot(const std::string& path, const ScalarField& f);
void write_snapshot(const std::string& path, const VectorField& v);

/// Throw ConfigError on a bad magic, version, size or truncated payload.
ScalarField read_scalar_snapshot(std::istream& is);
VectorField read_vector_snapshot(std::istream& is);
ScalarField read_scalar_snapshot(const std::string& path);
VectorField read_vector_snapshot(const std::string& path);

}  // namespace chb
