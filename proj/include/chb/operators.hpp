#pragma once

#include <chb/field.hpp>

#include <vector>

namespace chb {

/// Values on interior cell faces. `x` holds the (nx-1)*ny faces normal to x
/// (face (i+1/2, j) at index j*(nx-1)+i); `y` holds the nx*(ny-1) faces normal
/// to y (face (i, j+1/2) at index j*nx+i). Boundary faces carry no flux and
/// are not stored.
struct FaceField {
    Grid2D grid;
    std::vector<double> x;
    std::vector<double> y;

    FaceField() = default;
    explicit FaceField(const Grid2D& g, double value = 0.0);

    FaceField& operator*=(const FaceField& o);  // pointwise
    FaceField& operator+=(const FaceField& o);
    FaceField& operator-=(const FaceField& o);
    FaceField& operator*=(double s);
};

FaceField operator*(FaceField a, const FaceField& b);
FaceField operator+(FaceField a, const FaceField& b);
FaceField operator-(FaceField a, const FaceField& b);

/// Arithmetic mean of the two cells adjacent to each interior face.
FaceField face_average(const ScalarField& f);
/// Transpose of face_average.
ScalarField face_average_transpose(const FaceField& q);
/// (f_right - f_left)/h across each interior face.
FaceField face_difference(const ScalarField& f);
/// Transpose of face_difference.
ScalarField face_difference_transpose(const FaceField& q);
/// Conservative divergence of face fluxes with zero flux through the
/// boundary: (F_{i+1/2} - F_{i-1/2})/hx + (G_{j+1/2} - G_{j-1/2})/hy.
/// Equals -face_difference_transpose; the cell sum (times hx*hy) is zero.
ScalarField flux_divergence(const FaceField& flux);

/// Cell-centered gradient: centered differences, boundary cells use the
/// mirror ghost f_{-1} = f_0 (homogeneous Neumann).
VectorField gradient(const ScalarField& f);
/// Exact transpose of `gradient` (equals -divergence).
ScalarField gradient_transpose(const VectorField& v);
/// Cell-centered divergence: centered differences, boundary cells use the
/// odd ghost v_{-1} = -v_0 (no-slip). divergence = -gradient^T, so
/// <gradient f, v> = -<f, divergence v> holds exactly on the grid.
ScalarField divergence(const VectorField& v);

/// div(c grad f) with face-averaged coefficient and zero boundary flux.
/// Throws DomainError if c has a negative entry.
ScalarField variable_coefficient_laplacian(const ScalarField& c, const ScalarField& f);
/// Transpose of c -> variable_coefficient_laplacian(c, f) for fixed f.
ScalarField variable_coefficient_laplacian_coefficient_transpose(const ScalarField& f,
                                                                const ScalarField& y);

/// Five-point Laplacian with homogeneous Dirichlet data on the walls
/// (ghost u_{-1} = -u_0). Symmetric negative definite.
ScalarField dirichlet_laplacian(const ScalarField& f);

/// Frobenius inner product of cell gradients: sum_c |grad f_c|^2 hx hy, with
/// the Dirichlet closure used by the Brinkman operator (= -<u, Lap_D u>).
double dirichlet_gradient_energy(const VectorField& u);

}  // namespace chb
