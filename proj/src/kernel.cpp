#include <chb/error.hpp>
#include <chb/kernel.hpp>

#include <fftw3.h>

#include <cmath>
#include <complex>
#include <mutex>
#include <numbers>

namespace chb {

namespace {

// FFTW planning is not thread safe; execution with the new-array interface is.
std::mutex& fftw_planner_mutex() {
    static std::mutex m;
    return m;
}

}  // namespace

struct Kernel::Fft {
    int px = 0;
    int py = 0;
    fftw_plan forward = nullptr;
    fftw_plan backward = nullptr;
    std::vector<std::complex<double>> spectrum;

    Fft(int px_, int py_) : px(px_), py(py_) {
        const std::size_t nc = static_cast<std::size_t>(py) * (px / 2 + 1);
        std::vector<double> real(static_cast<std::size_t>(px) * py);
        std::vector<std::complex<double>> cplx(nc);
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        // Row-major FFTW layout: slowest dimension first (y), then x.
        forward = fftw_plan_dft_r2c_2d(py, px, real.data(),
                                       reinterpret_cast<fftw_complex*>(cplx.data()),
                                       FFTW_ESTIMATE | FFTW_UNALIGNED);
        backward = fftw_plan_dft_c2r_2d(py, px, reinterpret_cast<fftw_complex*>(cplx.data()),
                                        real.data(), FFTW_ESTIMATE | FFTW_UNALIGNED);
    }
    ~Fft() {
        std::lock_guard<std::mutex> lock(fftw_planner_mutex());
        fftw_destroy_plan(forward);
        fftw_destroy_plan(backward);
    }
    Fft(const Fft&) = delete;
    Fft& operator=(const Fft&) = delete;

    std::size_t complex_size() const { return static_cast<std::size_t>(py) * (px / 2 + 1); }
};

std::string to_string(KernelProfile p) {
    switch (p) {
        case KernelProfile::TruncatedGaussian: return "gaussian";
        case KernelProfile::Constant: return "constant";
        case KernelProfile::Tabulated: return "tabulated";
    }
    return "unknown";
}

KernelProfile kernel_profile_from_string(const std::string& s) {
    if (s == "gaussian") return KernelProfile::TruncatedGaussian;
    if (s == "constant") return KernelProfile::Constant;
    throw ConfigError("unknown kernel profile '" + s + "' (expected gaussian|constant)");
}

namespace {

std::vector<double> tabulate(const Grid2D& g, const KernelSpec& spec) {
    const int sx = 2 * g.nx - 1;
    const int sy = 2 * g.ny - 1;
    std::vector<double> st(static_cast<std::size_t>(sx) * sy, 0.0);
    const double radius = spec.radius > 0.0 ? spec.radius : 4.0 * spec.sigma;
    for (int dj = -(g.ny - 1); dj <= g.ny - 1; ++dj) {
        for (int di = -(g.nx - 1); di <= g.nx - 1; ++di) {
            const double dx = di * g.hx();
            const double dy = dj * g.hy();
            const double r2 = dx * dx + dy * dy;
            double v = 0.0;
            if (spec.profile == KernelProfile::Constant) {
                v = spec.strength;
            } else {
                const double q = r2 / (radius * radius);
                if (q < 1.0) {
                    const double w = (1.0 - q) * (1.0 - q) * (1.0 - q);
                    v = spec.strength / (2.0 * std::numbers::pi * spec.sigma * spec.sigma) *
                        std::exp(-r2 / (2.0 * spec.sigma * spec.sigma)) * w;
                }
            }
            st[static_cast<std::size_t>(dj + g.ny - 1) * sx + (di + g.nx - 1)] = v;
        }
    }
    return st;
}

}  // namespace

Kernel::Kernel(const Grid2D& grid, const KernelSpec& spec)
    : Kernel(grid, spec, [&] {
          if (spec.profile == KernelProfile::Tabulated) {
              throw ConfigError("Kernel: tabulated profile requires Kernel::from_stencil");
          }
          if (spec.profile == KernelProfile::TruncatedGaussian && !(spec.sigma > 0.0)) {
              throw ConfigError("Kernel: sigma must be positive");
          }
          if (!std::isfinite(spec.strength)) throw ConfigError("Kernel: strength not finite");
          return tabulate(grid, spec);
      }()) {}

Kernel Kernel::from_stencil(const Grid2D& grid, std::vector<double> stencil) {
    if (stencil.size() != static_cast<std::size_t>(2 * grid.nx - 1) * (2 * grid.ny - 1)) {
        throw ConfigError("Kernel::from_stencil: stencil size does not match grid");
    }
    KernelSpec spec;
    spec.profile = KernelProfile::Tabulated;
    return Kernel(grid, spec, std::move(stencil));
}

Kernel::Kernel(const Grid2D& grid, const KernelSpec& spec, std::vector<double> stencil)
    : grid_(grid), spec_(spec), stencil_(std::move(stencil)) {
    build_spectrum();
    a_ = convolve(ScalarField(grid_, 1.0));
}

void Kernel::build_spectrum() {
    const int px = 2 * grid_.nx;
    const int py = 2 * grid_.ny;
    auto fft = std::make_shared<Fft>(px, py);
    std::vector<double> padded(static_cast<std::size_t>(px) * py, 0.0);
    for (int dj = -(grid_.ny - 1); dj <= grid_.ny - 1; ++dj) {
        const int wj = (dj + py) % py;
        for (int di = -(grid_.nx - 1); di <= grid_.nx - 1; ++di) {
            const int wi = (di + px) % px;
            padded[static_cast<std::size_t>(wj) * px + wi] = at(di, dj) * grid_.cell_area();
        }
    }
    fft->spectrum.resize(fft->complex_size());
    fftw_execute_dft_r2c(fft->forward, padded.data(),
                         reinterpret_cast<fftw_complex*>(fft->spectrum.data()));
    fft_ = std::move(fft);
}

ScalarField Kernel::convolve(const ScalarField& f) const {
    require_same_grid(grid_, f.grid(), "Kernel::convolve");
    const int px = fft_->px;
    const int py = fft_->py;
    std::vector<double> padded(static_cast<std::size_t>(px) * py, 0.0);
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i) padded[static_cast<std::size_t>(j) * px + i] = f(i, j);
    std::vector<std::complex<double>> spec(fft_->complex_size());
    fftw_execute_dft_r2c(fft_->forward, padded.data(),
                         reinterpret_cast<fftw_complex*>(spec.data()));
    for (std::size_t k = 0; k < spec.size(); ++k) spec[k] *= fft_->spectrum[k];
    fftw_execute_dft_c2r(fft_->backward, reinterpret_cast<fftw_complex*>(spec.data()),
                         padded.data());
    const double scale = 1.0 / (static_cast<double>(px) * py);
    ScalarField out(grid_);
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i)
            out(i, j) = padded[static_cast<std::size_t>(j) * px + i] * scale;
    return out;
}

double Kernel::evenness_defect() const {
    double d = 0.0;
    for (int dj = -(grid_.ny - 1); dj <= grid_.ny - 1; ++dj)
        for (int di = -(grid_.nx - 1); di <= grid_.nx - 1; ++di)
            d = std::max(d, std::abs(at(di, dj) - at(-di, -dj)));
    return d;
}

double Kernel::sup_abs_integral() const {
    double best = 0.0;
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i) {
            double s = 0.0;
            for (int l = 0; l < grid_.ny; ++l)
                for (int k = 0; k < grid_.nx; ++k) s += std::abs(at(i - k, j - l));
            best = std::max(best, s * grid_.cell_area());
        }
    return best;
}

double Kernel::sup_gradient_integral() const {
    const int mx = grid_.nx - 1;
    const int my = grid_.ny - 1;
    auto grad_norm = [&](int di, int dj) {
        const int ip = std::min(di + 1, mx), im = std::max(di - 1, -mx);
        const int jp = std::min(dj + 1, my), jm = std::max(dj - 1, -my);
        const double gx = (at(ip, dj) - at(im, dj)) / ((ip - im) * grid_.hx());
        const double gy = (at(di, jp) - at(di, jm)) / ((jp - jm) * grid_.hy());
        return std::hypot(gx, gy);
    };
    double best = 0.0;
    for (int j = 0; j < grid_.ny; ++j)
        for (int i = 0; i < grid_.nx; ++i) {
            double s = 0.0;
            for (int l = 0; l < grid_.ny; ++l)
                for (int k = 0; k < grid_.nx; ++k) s += grad_norm(i - k, j - l);
            best = std::max(best, s * grid_.cell_area());
        }
    return best;
}

}  // namespace chb
