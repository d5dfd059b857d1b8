#pragma once

#include <chb/field.hpp>

#include <memory>
#include <string>
#include <vector>

namespace chb {

enum class KernelProfile {
    /// A exp(-r^2/(2 sigma^2)) (1-(r/R)^2)^3 for r < R, zero beyond; C^2 at R.
    TruncatedGaussian,
    /// J = A on the whole stencil.
    Constant,
    /// Raw stencil supplied by the caller (test hook, no evenness enforced).
    Tabulated,
};

struct KernelSpec {
    KernelProfile profile = KernelProfile::TruncatedGaussian;
    double sigma = 0.1;
    /// Support radius; non-positive means 4 sigma.
    double radius = 0.0;
    /// Gaussian: J(0) = strength / (2 pi sigma^2). Constant: J = strength.
    double strength = 1.0;
};

std::string to_string(KernelProfile p);
KernelProfile kernel_profile_from_string(const std::string& s);

/// Interaction kernel tabulated on all grid offsets (di, dj) with |di| < nx,
/// |dj| < ny, plus the spectrum of its zero-padded layout. Convolution is the
/// bounded-domain sum (J*f)_i = sum_j J(x_i - y_j) f_j hx hy (nothing outside
/// the rectangle, no periodic wraparound).
///
/// Immutable after construction; `convolve` may be called concurrently.
class Kernel {
public:
    Kernel(const Grid2D& grid, const KernelSpec& spec);

    /// Builds a kernel from an explicit stencil of size (2nx-1)*(2ny-1),
    /// indexed by (di+nx-1) + (dj+ny-1)*(2nx-1).
    static Kernel from_stencil(const Grid2D& grid, std::vector<double> stencil);

    const Grid2D& grid() const noexcept { return grid_; }
    const KernelSpec& spec() const noexcept { return spec_; }

    /// J at grid offset (di, dj).
    double at(int di, int dj) const noexcept {
        return stencil_[static_cast<std::size_t>(dj + grid_.ny - 1) * (2 * grid_.nx - 1) +
                        (di + grid_.nx - 1)];
    }
    const std::vector<double>& stencil() const noexcept { return stencil_; }

    ScalarField convolve(const ScalarField& f) const;

    /// a(x) = J * 1.
    const ScalarField& a() const noexcept { return a_; }

    /// max |J(d) - J(-d)| over the stencil.
    double evenness_defect() const;
    /// sup_x sum_y |J(x-y)| hx hy.
    double sup_abs_integral() const;
    /// sup_x sum_y |grad J(x-y)| hx hy with centered stencil differences.
    double sup_gradient_integral() const;

private:
    Kernel(const Grid2D& grid, const KernelSpec& spec, std::vector<double> stencil);
    void build_spectrum();

    struct Fft;
    Grid2D grid_;
    KernelSpec spec_;
    std::vector<double> stencil_;
    std::shared_ptr<const Fft> fft_;
    ScalarField a_;
};

}  // namespace chb
