#include <chb/error.hpp>
#include <chb/field.hpp>

#include <cmath>
#include <string>

namespace chb {

Grid2D::Grid2D(int nx_, int ny_, double lx_, double ly_)
    : nx(nx_), ny(ny_), lx(lx_), ly(ly_) {
    if (nx < 4 || ny < 4) {
        throw ConfigError("grid needs at least 4 cells per axis, got " +
                          std::to_string(nx) + "x" + std::to_string(ny));
    }
    if (!(lx > 0.0) || !(ly > 0.0) || !std::isfinite(lx) || !std::isfinite(ly)) {
        throw ConfigError("grid lengths must be positive and finite");
    }
}

void require_same_grid(const Grid2D& a, const Grid2D& b, const char* where) {
    if (a != b) {
        throw ConfigError(std::string(where) + ": grid mismatch (" + std::to_string(a.nx) +
                          "x" + std::to_string(a.ny) + " vs " + std::to_string(b.nx) + "x" +
                          std::to_string(b.ny) + ")");
    }
}

ScalarField::ScalarField(const Grid2D& g, double value) : grid_(g), values_(g.size(), value) {}

ScalarField::ScalarField(const Grid2D& g, std::vector<double> values)
    : grid_(g), values_(std::move(values)) {
    if (values_.size() != g.size()) {
        throw ConfigError("ScalarField: value count does not match grid");
    }
}

ScalarField ScalarField::from_function(const Grid2D& g,
                                       const std::function<double(double, double)>& f) {
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j) {
        for (int i = 0; i < g.nx; ++i) {
            out(i, j) = f(g.x(i), g.y(j));
        }
    }
    return out;
}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField::+=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += o.values_[k];
    return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField::-=");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] -= o.values_[k];
    return *this;
}

ScalarField& ScalarField::operator*=(double s) {
    for (double& v : values_) v *= s;
    return *this;
}

ScalarField& ScalarField::axpy(double s, const ScalarField& o) {
    require_same_grid(grid_, o.grid_, "ScalarField::axpy");
    for (std::size_t k = 0; k < values_.size(); ++k) values_[k] += s * o.values_[k];
    return *this;
}

double ScalarField::sum() const {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
}

double ScalarField::max_abs() const {
    double m = 0.0;
    for (double v : values_) m = std::max(m, std::abs(v));
    return m;
}

bool ScalarField::all_finite() const {
    for (double v : values_) {
        if (!std::isfinite(v)) return false;
    }
    return true;
}

ScalarField operator+(ScalarField a, const ScalarField& b) { return a += b; }
ScalarField operator-(ScalarField a, const ScalarField& b) { return a -= b; }
ScalarField operator*(double s, ScalarField a) { return a *= s; }

ScalarField hadamard(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "hadamard");
    ScalarField out(a.grid());
    for (std::size_t k = 0; k < a.size(); ++k) out[k] = a[k] * b[k];
    return out;
}

double dot(const ScalarField& a, const ScalarField& b) {
    require_same_grid(a.grid(), b.grid(), "dot");
    double s = 0.0;
    for (std::size_t k = 0; k < a.size(); ++k) s += a[k] * b[k];
    return s;
}

double inner(const ScalarField& a, const ScalarField& b) {
    return dot(a, b) * a.grid().cell_area();
}

double l2_norm(const ScalarField& a) { return std::sqrt(inner(a, a)); }

VectorField::VectorField(ScalarField xc, ScalarField yc) : x(std::move(xc)), y(std::move(yc)) {
    require_same_grid(x.grid(), y.grid(), "VectorField");
}

VectorField& VectorField::operator+=(const VectorField& o) {
    x += o.x;
    y += o.y;
    return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
    x -= o.x;
    y -= o.y;
    return *this;
}

VectorField& VectorField::operator*=(double s) {
    x *= s;
    y *= s;
    return *this;
}

VectorField& VectorField::axpy(double s, const VectorField& o) {
    x.axpy(s, o.x);
    y.axpy(s, o.y);
    return *this;
}

double VectorField::max_abs() const { return std::max(x.max_abs(), y.max_abs()); }

VectorField operator+(VectorField a, const VectorField& b) { return a += b; }
VectorField operator-(VectorField a, const VectorField& b) { return a -= b; }
VectorField operator*(double s, VectorField a) { return a *= s; }

double dot(const VectorField& a, const VectorField& b) { return dot(a.x, b.x) + dot(a.y, b.y); }
double inner(const VectorField& a, const VectorField& b) {
    return inner(a.x, b.x) + inner(a.y, b.y);
}
double l2_norm(const VectorField& a) { return std::sqrt(inner(a, a)); }

}  // namespace chb
