#pragma once

#include <cstddef>

namespace chb {

/// Uniform cell-centered grid on the rectangle [0,lx] x [0,ly].
/// Cell (i,j) has center ((i+1/2)hx, (j+1/2)hy); values are stored row-major
/// with i (x) running fastest.
struct Grid2D {
    int nx = 0;
    int ny = 0;
    double lx = 1.0;
    double ly = 1.0;

    Grid2D() = default;
    Grid2D(int nx, int ny, double lx = 1.0, double ly = 1.0);

    double hx() const noexcept { return lx / nx; }
    double hy() const noexcept { return ly / ny; }
    double cell_area() const noexcept { return hx() * hy(); }
    double area() const noexcept { return lx * ly; }
    std::size_t size() const noexcept { return static_cast<std::size_t>(nx) * ny; }
    std::size_t index(int i, int j) const noexcept {
        return static_cast<std::size_t>(j) * nx + i;
    }
    double x(int i) const noexcept { return (i + 0.5) * hx(); }
    double y(int j) const noexcept { return (j + 0.5) * hy(); }

    bool operator==(const Grid2D& o) const noexcept {
        return nx == o.nx && ny == o.ny && lx == o.lx && ly == o.ly;
    }
    bool operator!=(const Grid2D& o) const noexcept { return !(*this == o); }
};

/// Throws ConfigError when the grids differ.
void require_same_grid(const Grid2D& a, const Grid2D& b, const char* where);

}  // namespace chb
