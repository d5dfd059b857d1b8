#include <chb/error.hpp>
#include <chb/operators.hpp>

#include <cmath>

namespace chb {

namespace {

std::size_t xface(const Grid2D& g, int i, int j) {
    return static_cast<std::size_t>(j) * (g.nx - 1) + i;
}
std::size_t yface(const Grid2D& g, int i, int j) {
    return static_cast<std::size_t>(j) * g.nx + i;
}

}  // namespace

FaceField::FaceField(const Grid2D& g, double value)
    : grid(g),
      x(static_cast<std::size_t>(g.nx - 1) * g.ny, value),
      y(static_cast<std::size_t>(g.nx) * (g.ny - 1), value) {}

FaceField& FaceField::operator*=(const FaceField& o) {
    require_same_grid(grid, o.grid, "FaceField::*=");
    for (std::size_t k = 0; k < x.size(); ++k) x[k] *= o.x[k];
    for (std::size_t k = 0; k < y.size(); ++k) y[k] *= o.y[k];
    return *this;
}

FaceField& FaceField::operator+=(const FaceField& o) {
    require_same_grid(grid, o.grid, "FaceField::+=");
    for (std::size_t k = 0; k < x.size(); ++k) x[k] += o.x[k];
    for (std::size_t k = 0; k < y.size(); ++k) y[k] += o.y[k];
    return *this;
}

FaceField& FaceField::operator-=(const FaceField& o) {
    require_same_grid(grid, o.grid, "FaceField::-=");
    for (std::size_t k = 0; k < x.size(); ++k) x[k] -= o.x[k];
    for (std::size_t k = 0; k < y.size(); ++k) y[k] -= o.y[k];
    return *this;
}

FaceField& FaceField::operator*=(double s) {
    for (double& v : x) v *= s;
    for (double& v : y) v *= s;
    return *this;
}

FaceField operator*(FaceField a, const FaceField& b) { return a *= b; }
FaceField operator+(FaceField a, const FaceField& b) { return a += b; }
FaceField operator-(FaceField a, const FaceField& b) { return a -= b; }

FaceField face_average(const ScalarField& f) {
    const Grid2D& g = f.grid();
    FaceField q(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) q.x[xface(g, i, j)] = 0.5 * (f(i, j) + f(i + 1, j));
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) q.y[yface(g, i, j)] = 0.5 * (f(i, j) + f(i, j + 1));
    return q;
}

ScalarField face_average_transpose(const FaceField& q) {
    const Grid2D& g = q.grid;
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double v = 0.5 * q.x[xface(g, i, j)];
            out(i, j) += v;
            out(i + 1, j) += v;
        }
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double v = 0.5 * q.y[yface(g, i, j)];
            out(i, j) += v;
            out(i, j + 1) += v;
        }
    return out;
}

FaceField face_difference(const ScalarField& f) {
    const Grid2D& g = f.grid();
    const double ihx = 1.0 / g.hx();
    const double ihy = 1.0 / g.hy();
    FaceField q(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) q.x[xface(g, i, j)] = (f(i + 1, j) - f(i, j)) * ihx;
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) q.y[yface(g, i, j)] = (f(i, j + 1) - f(i, j)) * ihy;
    return q;
}

ScalarField face_difference_transpose(const FaceField& q) {
    const Grid2D& g = q.grid;
    const double ihx = 1.0 / g.hx();
    const double ihy = 1.0 / g.hy();
    ScalarField out(g);
    for (int j = 0; j < g.ny; ++j)
        for (int i = 0; i + 1 < g.nx; ++i) {
            const double v = q.x[xface(g, i, j)] * ihx;
            out(i + 1, j) += v;
            out(i, j) -= v;
        }
    for (int j = 0; j + 1 < g.ny; ++j)
        for (int i = 0; i < g.nx; ++i) {
            const double v = q.y[yface(g, i, j)] * ihy;
            out(i, j + 1) += v;
            out(i, j) -= v;
        }
    return out;
}

ScalarField flux_divergence(const FaceField& flux) {
    ScalarField out = face_difference_transpose(flux);
    out *= -1.0;
    return out;
}

VectorField gradient(const ScalarField& f) {
    const Grid2D& g = f.grid();
    const int nx = g.nx, ny = g.ny;
    const double s_x = 0.5 / g.hx();
    const double s_y = 0.5 / g.hy();
    VectorField out(g);
    for (int j = 0; j < ny; ++j) {
        const int jm = j > 0 ? j - 1 : 0;
        const int jp = j + 1 < ny ? j + 1 : ny - 1;
        for (int i = 0; i < nx; ++i) {
            const int im = i > 0 ? i - 1 : 0;
            const int ip = i + 1 < nx ? i + 1 : nx - 1;
            out.x(i, j) = (f(ip, j) - f(im, j)) * s_x;
            out.y(i, j) = (f(i, jp) - f(i, jm)) * s_y;
        }
    }
    return out;
}

ScalarField divergence(const VectorField& v) {
    const Grid2D& g = v.grid();
    const int nx = g.nx, ny = g.ny;
    const double s_x = 0.5 / g.hx();
    const double s_y = 0.5 / g.hy();
    ScalarField out(g);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double xp = i + 1 < nx ? v.x(i + 1, j) : -v.x(i, j);
            const double xm = i > 0 ? v.x(i - 1, j) : -v.x(i, j);
            const double yp = j + 1 < ny ? v.y(i, j + 1) : -v.y(i, j);
            const double ym = j > 0 ? v.y(i, j - 1) : -v.y(i, j);
            out(i, j) = (xp - xm) * s_x + (yp - ym) * s_y;
        }
    }
    return out;
}

ScalarField gradient_transpose(const VectorField& v) {
    const Grid2D& g = v.grid();
    const int nx = g.nx, ny = g.ny;
    const double s_x = 0.5 / g.hx();
    const double s_y = 0.5 / g.hy();
    ScalarField out(g);
    // Scatter form of the gradient stencil, kept separate from `divergence`
    // so the identity gradient^T = -divergence is checked rather than assumed.
    for (int j = 0; j < ny; ++j) {
        const int jm = j > 0 ? j - 1 : 0;
        const int jp = j + 1 < ny ? j + 1 : ny - 1;
        for (int i = 0; i < nx; ++i) {
            const int im = i > 0 ? i - 1 : 0;
            const int ip = i + 1 < nx ? i + 1 : nx - 1;
            const double vx = v.x(i, j) * s_x;
            const double vy = v.y(i, j) * s_y;
            out(ip, j) += vx;
            out(im, j) -= vx;
            out(i, jp) += vy;
            out(i, jm) -= vy;
        }
    }
    return out;
}

ScalarField variable_coefficient_laplacian(const ScalarField& c, const ScalarField& f) {
    require_same_grid(c.grid(), f.grid(), "variable_coefficient_laplacian");
    for (std::size_t k = 0; k < c.size(); ++k) {
        if (c[k] < 0.0) {
            throw DomainError("variable_coefficient_laplacian: negative coefficient");
        }
    }
    FaceField flux = face_average(c);
    flux *= face_difference(f);
    return flux_divergence(flux);
}

ScalarField variable_coefficient_laplacian_coefficient_transpose(const ScalarField& f,
                                                                const ScalarField& y) {
    require_same_grid(f.grid(), y.grid(), "variable_coefficient_laplacian_coefficient_transpose");
    // <y, div(avg(c) * diff(f))> = <avg^T(diff(f) * div^T y), c>
    FaceField q = face_difference(y);
    q *= -1.0;
    q *= face_difference(f);
    return face_average_transpose(q);
}

ScalarField dirichlet_laplacian(const ScalarField& f) {
    const Grid2D& g = f.grid();
    const int nx = g.nx, ny = g.ny;
    const double ihx2 = 1.0 / (g.hx() * g.hx());
    const double ihy2 = 1.0 / (g.hy() * g.hy());
    ScalarField out(g);
    for (int j = 0; j < ny; ++j) {
        for (int i = 0; i < nx; ++i) {
            const double c = f(i, j);
            const double xp = i + 1 < nx ? f(i + 1, j) : -c;
            const double xm = i > 0 ? f(i - 1, j) : -c;
            const double yp = j + 1 < ny ? f(i, j + 1) : -c;
            const double ym = j > 0 ? f(i, j - 1) : -c;
            out(i, j) = (xp - 2.0 * c + xm) * ihx2 + (yp - 2.0 * c + ym) * ihy2;
        }
    }
    return out;
}

double dirichlet_gradient_energy(const VectorField& u) {
    return -(inner(u.x, dirichlet_laplacian(u.x)) + inner(u.y, dirichlet_laplacian(u.y)));
}

}  // namespace chb
