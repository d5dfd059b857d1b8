#pragma once

#include <chb/grid.hpp>

#include <functional>
#include <span>
#include <vector>

namespace chb {

class ScalarField {
public:
    ScalarField() = default;
    explicit ScalarField(const Grid2D& g, double value = 0.0);
    ScalarField(const Grid2D& g, std::vector<double> values);

    /// Samples `f(x, y)` at cell centers.
    static ScalarField from_function(const Grid2D& g,
                                     const std::function<double(double, double)>& f);

    const Grid2D& grid() const noexcept { return grid_; }
    std::size_t size() const noexcept { return values_.size(); }

    double& operator()(int i, int j) noexcept { return values_[grid_.index(i, j)]; }
    double operator()(int i, int j) const noexcept { return values_[grid_.index(i, j)]; }
    double& operator[](std::size_t k) noexcept { return values_[k]; }
    double operator[](std::size_t k) const noexcept { return values_[k]; }

    std::span<double> values() noexcept { return values_; }
    std::span<const double> values() const noexcept { return values_; }
    std::vector<double>& raw() noexcept { return values_; }
    const std::vector<double>& raw() const noexcept { return values_; }

    ScalarField& operator+=(const ScalarField& o);
    ScalarField& operator-=(const ScalarField& o);
    ScalarField& operator*=(double s);
    /// this += s * o
    ScalarField& axpy(double s, const ScalarField& o);

    double sum() const;
    double mean() const { return sum() / static_cast<double>(size()); }
    double max_abs() const;
    double integral() const { return sum() * grid_.cell_area(); }
    bool all_finite() const;

    bool operator==(const ScalarField& o) const {
        return grid_ == o.grid_ && values_ == o.values_;
    }

private:
    Grid2D grid_;
    std::vector<double> values_;
};

ScalarField operator+(ScalarField a, const ScalarField& b);
ScalarField operator-(ScalarField a, const ScalarField& b);
ScalarField operator*(double s, ScalarField a);
/// Pointwise product.
ScalarField hadamard(const ScalarField& a, const ScalarField& b);

/// Euclidean dot product of the value arrays (no cell-area weight).
double dot(const ScalarField& a, const ScalarField& b);
/// Discrete L2 inner product sum(a*b)*hx*hy.
double inner(const ScalarField& a, const ScalarField& b);
double l2_norm(const ScalarField& a);

/// Two co-located cell-centered components.
struct VectorField {
    ScalarField x;
    ScalarField y;

    VectorField() = default;
    explicit VectorField(const Grid2D& g, double vx = 0.0, double vy = 0.0)
        : x(g, vx), y(g, vy) {}
    VectorField(ScalarField xc, ScalarField yc);

    const Grid2D& grid() const noexcept { return x.grid(); }

    VectorField& operator+=(const VectorField& o);
    VectorField& operator-=(const VectorField& o);
    VectorField& operator*=(double s);
    VectorField& axpy(double s, const VectorField& o);

    double max_abs() const;
    bool all_finite() const { return x.all_finite() && y.all_finite(); }
    bool operator==(const VectorField& o) const { return x == o.x && y == o.y; }
};

VectorField operator+(VectorField a, const VectorField& b);
VectorField operator-(VectorField a, const VectorField& b);
VectorField operator*(double s, VectorField a);

double dot(const VectorField& a, const VectorField& b);
double inner(const VectorField& a, const VectorField& b);
double l2_norm(const VectorField& a);

}  // namespace chb
