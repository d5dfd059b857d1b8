#pragma once

#include <chb/brinkman.hpp>
#include <chb/field.hpp>

#include <cmath>
#include <numbers>

namespace chb {

/// Divergence-free velocity vanishing on the boundary of [0,1]^2 with
/// pressure cos(pi x) cos(pi y); returns the matching Brinkman forcing.
struct BrinkmanManufactured {
    double nu = 1.0;
    double eta = 1.0;

    static constexpr double pi = std::numbers::pi;

    static double ux(double x, double y) {
        return pi * std::pow(std::sin(pi * x), 2) * std::sin(2 * pi * y);
    }
    static double uy(double x, double y) { return -ux(y, x); }
    static double lap_ux(double x, double y) {
        return pi * 2 * pi * pi * std::cos(2 * pi * x) * std::sin(2 * pi * y) -
               4 * pi * pi * pi * std::pow(std::sin(pi * x), 2) * std::sin(2 * pi * y);
    }
    static double lap_uy(double x, double y) { return -lap_ux(y, x); }
    static double p(double x, double y) { return std::cos(pi * x) * std::cos(pi * y); }
    static double px(double x, double y) { return -pi * std::sin(pi * x) * std::cos(pi * y); }
    static double py(double x, double y) { return -pi * std::cos(pi * x) * std::sin(pi * y); }

    VectorField forcing(const Grid2D& g) const {
        return {ScalarField::from_function(
                    g, [&](double x, double y) { return -nu * lap_ux(x, y) + eta * ux(x, y) + px(x, y); }),
                ScalarField::from_function(
                    g, [&](double x, double y) { return -nu * lap_uy(x, y) + eta * uy(x, y) + py(x, y); })};
    }
    VectorField velocity(const Grid2D& g) const {
        return {ScalarField::from_function(g, ux), ScalarField::from_function(g, uy)};
    }
    ScalarField pressure(const Grid2D& g) const { return ScalarField::from_function(g, p); }
};

}  // namespace chb
