#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "isospec/framework.hpp"

namespace isospec {

/// Interior nodes of the unit square: (x_i, y_j) = (i h, j h), i, j = 1..n,
/// h = 1/(n+1), flattened row-major to length n^2. Boundary values are
/// implicitly zero for Dirichlet fields.
struct RectGrid {
    int n = 0;

    double h() const { return 1.0 / (n + 1); }
    int size() const { return n * n; }
    int flat(int i, int j) const { return (i - 1) * n + (j - 1); }  // i, j in 1..n
    double x(int i) const { return i * h(); }
    double y(int j) const { return j * h(); }
};

enum class OmegaKind { constant, re_power, im_power };

/// Harmonic weight omega sampled on the grid: 1, Re z^p, or Im z^p.
struct HarmonicWeight {
    OmegaKind kind = OmegaKind::constant;
    int degree = 1;
    RealVector values;
};

struct PointZero {
    Complex z;
    int multiplicity = 1;
};

struct ZeroSet {
    std::vector<PointZero> zeros;
};

enum class KernelSource { explicit_field, poisson_logF };

/// Kernel g on interior nodes with its Laplacian samples. For the
/// poisson_logF source, laplacian_values = -ln|F| (Delta g = -ln|F|).
struct KernelG {
    RealVector values;
    RealVector laplacian_values;
    KernelSource source = KernelSource::poisson_logF;
};

struct Admissibility2D {
    bool admissible = false;
    double quad_delta_g_omega = 0.0;  // h^2 sum (Delta g) conj(omega)
    double quad_lnF_omega = 0.0;      // h^2 sum ln|F| conj(omega)
    double smallest_singular = 0.0;   // of I + L*K*
};

namespace laplace2d {

/// n^2 x n^2 five-point discrete -Laplacian with Dirichlet elimination.
/// Symmetric positive definite; eigenvalues are
/// (4/h^2)(sin^2(m pi h/2) + sin^2(k pi h/2)).
inline DenseMatrix assemble_dirichlet_fd(const RectGrid& grid) {
    if (grid.n < 2) throw ShapeError("assemble_dirichlet_fd: n < 2");
    const int n = grid.n;
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    DenseMatrix a = DenseMatrix::Zero(grid.size(), grid.size());
    for (int i = 1; i <= n; ++i) {
        for (int j = 1; j <= n; ++j) {
            const int p = grid.flat(i, j);
            a(p, p) = 4.0 * inv_h2;
            if (i > 1) a(p, grid.flat(i - 1, j)) = -inv_h2;
            if (i < n) a(p, grid.flat(i + 1, j)) = -inv_h2;
            if (j > 1) a(p, grid.flat(i, j - 1)) = -inv_h2;
            if (j < n) a(p, grid.flat(i, j + 1)) = -inv_h2;
        }
    }
    return a;
}

/// Closed-form spectrum of the discrete Dirichlet Laplacian, ascending.
inline std::vector<double> dirichlet_closed_spectrum(const RectGrid& grid) {
    const double h = grid.h();
    std::vector<double> one_d(grid.n);
    for (int m = 1; m <= grid.n; ++m) {
        const double s = std::sin(m * std::numbers::pi * h / 2.0);
        one_d[m - 1] = (4.0 / (h * h)) * s * s;
    }
    std::vector<double> spec;
    spec.reserve(grid.size());
    for (double a : one_d)
        for (double b : one_d) spec.push_back(a + b);
    std::sort(spec.begin(), spec.end());
    return spec;
}

inline HarmonicWeight harmonic_weight(const RectGrid& grid, OmegaKind kind, int degree = 1) {
    if (kind != OmegaKind::constant && degree < 1)
        throw ShapeError("harmonic_weight: degree must be >= 1");
    HarmonicWeight w;
    w.kind = kind;
    w.degree = degree;
    w.values.resize(grid.size());
    for (int i = 1; i <= grid.n; ++i) {
        for (int j = 1; j <= grid.n; ++j) {
            const Complex z(grid.x(i), grid.y(j));
            double v = 1.0;
            if (kind == OmegaKind::re_power) v = std::pow(z, degree).real();
            if (kind == OmegaKind::im_power) v = std::pow(z, degree).imag();
            w.values(grid.flat(i, j)) = v;
        }
    }
    return w;
}

/// Max five-point Laplacian magnitude of omega over strictly interior nodes
/// (all four neighbors interior). The harmonicity contract is a C h^2 bound,
/// not exact zero.
inline double harmonic_defect(const RectGrid& grid, const HarmonicWeight& w) {
    const double inv_h2 = 1.0 / (grid.h() * grid.h());
    double worst = 0.0;
    for (int i = 2; i < grid.n; ++i) {
        for (int j = 2; j < grid.n; ++j) {
            const double lap =
                (w.values(grid.flat(i - 1, j)) + w.values(grid.flat(i + 1, j)) +
                 w.values(grid.flat(i, j - 1)) + w.values(grid.flat(i, j + 1)) -
                 4.0 * w.values(grid.flat(i, j))) *
                inv_h2;
            worst = std::max(worst, std::abs(lap));
        }
    }
    return worst;
}

/// Every zero must sit at distance >= 4h from the boundary and >= h/4 from
/// every grid node (no regularization of the log singularity).
inline void validate_zeros(const RectGrid& grid, const ZeroSet& zeros) {
    const double h = grid.h();
    for (const auto& pz : zeros.zeros) {
        const double bx = std::min(pz.z.real(), 1.0 - pz.z.real());
        const double by = std::min(pz.z.imag(), 1.0 - pz.z.imag());
        if (std::min(bx, by) < 4.0 * h)
            throw AdmissibilityError("zero too close to the boundary", std::min(bx, by));
        const double gx = std::round(pz.z.real() / h) * h;
        const double gy = std::round(pz.z.imag() / h) * h;
        const double d = std::hypot(pz.z.real() - gx, pz.z.imag() - gy);
        if (d < h / 4.0)
            throw AdmissibilityError("zero within h/4 of a grid node", d);
        if (pz.multiplicity < 1)
            throw ShapeError("zero multiplicity must be positive");
    }
}

/// ln|F| = sum_k m_k ln|z - z_k| for the monic F(z) = prod (z - z_k)^{m_k}.
inline RealVector eval_log_abs_F(const RectGrid& grid, const ZeroSet& zeros) {
    validate_zeros(grid, zeros);
    RealVector field = RealVector::Zero(grid.size());
    for (int i = 1; i <= grid.n; ++i) {
        for (int j = 1; j <= grid.n; ++j) {
            const Complex z(grid.x(i), grid.y(j));
            double v = 0.0;
            for (const auto& pz : zeros.zeros) v += pz.multiplicity * std::log(std::abs(z - pz.z));
            field(grid.flat(i, j)) = v;
        }
    }
    return field;
}

/// Kernel from the Dirichlet problem -Delta g = ln|F|, g = 0 on the boundary.
inline KernelG solve_poisson_logF(const RectGrid& grid, const ZeroSet& zeros,
                                  const Tolerances& tol = default_tolerances()) {
    const RealVector lnf = eval_log_abs_F(grid, zeros);
    const DenseMatrix a = assemble_dirichlet_fd(grid);
    const DenseMatrix g = numcore::solve(a, lnf.cast<Complex>(), tol);
    KernelG kernel;
    kernel.values = g.real();
    kernel.laplacian_values = -lnf;  // Delta g = -ln|F|
    kernel.source = KernelSource::poisson_logF;
    return kernel;
}

/// Built-in explicit kernel: a smooth sine bump with its discrete Laplacian.
inline KernelG explicit_kernel(const RectGrid& grid, double amplitude = 1.0) {
    KernelG kernel;
    kernel.values.resize(grid.size());
    for (int i = 1; i <= grid.n; ++i)
        for (int j = 1; j <= grid.n; ++j)
            kernel.values(grid.flat(i, j)) =
                amplitude * std::sin(std::numbers::pi * grid.x(i)) *
                std::sin(std::numbers::pi * grid.y(j));
    const DenseMatrix a = assemble_dirichlet_fd(grid);
    kernel.laplacian_values = -(a * kernel.values.cast<Complex>()).real();
    kernel.source = KernelSource::explicit_field;
    return kernel;
}

/// Rank-one K f = omega <f, g>: column omega times the g-quadrature row.
inline DenseMatrix build_k_2d(const RectGrid& grid, const HarmonicWeight& omega,
                              const KernelG& kernel) {
    if (omega.values.size() != grid.size() || kernel.values.size() != grid.size())
        throw ShapeError("build_k_2d: field sizes do not match the grid");
    const double h2 = grid.h() * grid.h();
    DenseMatrix k(grid.size(), grid.size());
    for (int i = 0; i < grid.size(); ++i)
        for (int j = 0; j < grid.size(); ++j)
            k(i, j) = omega.values(i) * h2 * kernel.values(j);
    return k;
}

/// Quadrature scalars under both conventions in the admissibility
/// condition, plus the authoritative density_check verdict on the
/// assembled model.
inline Admissibility2D admissibility_2d(const RectGrid& grid, const HarmonicWeight& omega,
                                        const KernelG& kernel,
                                        const Tolerances& tol = default_tolerances()) {
    const double h2 = grid.h() * grid.h();
    Admissibility2D adm;
    adm.quad_delta_g_omega = h2 * kernel.laplacian_values.dot(omega.values);
    adm.quad_lnF_omega = -adm.quad_delta_g_omega;
    const DenseMatrix a = assemble_dirichlet_fd(grid);
    RestrictionModel model;
    model.l_inv = numcore::inverse(a, tol);
    model.k = build_k_2d(grid, omega, kernel);
    model.weight = h2;
    const DensityResult dres = framework::density_check(model, tol);
    adm.admissible = dres.dense;
    adm.smallest_singular = dres.smallest_singular;
    return adm;
}

/// Restriction model of the singular perturbation: l_inv = inverse(A_D),
/// k rank one from (omega, g), weight h^2.
inline RestrictionModel build_laplace_model(const RectGrid& grid, const HarmonicWeight& omega,
                                            const KernelG& kernel,
                                            const Tolerances& tol = default_tolerances()) {
    const DenseMatrix a = assemble_dirichlet_fd(grid);
    RestrictionModel model;
    model.l_inv = numcore::inverse(a, tol);
    model.k = build_k_2d(grid, omega, kernel);
    model.weight = grid.h() * grid.h();
    model.label = "laplace2d";
    const DensityResult dres = framework::density_check(model, tol);
    if (!dres.dense)
        throw AdmissibilityError("laplace2d model fails the density check",
                                 dres.smallest_singular);
    return model;
}

/// The boundary functional of T without the omega column:
/// t(u) = int_dOmega [du/dn ln|F| - u d(ln|F|)/dn] ds, with du/dn by the
/// one-sided stencil (3 u_b - 4 u_1 + u_2)/(2h), u_b = 0 for Dirichlet
/// fields (the u-trace term therefore vanishes on interior-only fields),
/// and the edge integrals by the trapezoid rule over boundary nodes.
struct BoundaryFunctional {
    RealVector coeffs;  // t(u) = coeffs . u over interior dofs
    RealVector omega;   // T = omega * coeffs^T

    DenseMatrix to_matrix() const {
        DenseMatrix t(omega.size(), coeffs.size());
        for (int i = 0; i < omega.size(); ++i)
            for (int j = 0; j < coeffs.size(); ++j) t(i, j) = omega(i) * coeffs(j);
        return t;
    }
};

inline BoundaryFunctional build_boundary_T(const RectGrid& grid, const HarmonicWeight& omega,
                                           const ZeroSet& zeros) {
    validate_zeros(grid, zeros);
    const int n = grid.n;
    const double h = grid.h();
    RealVector coeffs = RealVector::Zero(grid.size());

    auto ln_abs_f = [&](double px, double py) {
        double v = 0.0;
        for (const auto& pz : zeros.zeros)
            v += pz.multiplicity * std::log(std::abs(Complex(px, py) - pz.z));
        return v;
    };

    // du/dn (outward) at a boundary node uses the two interior nodes along
    // the inward normal: (3 u_b - 4 u_1 + u_2)/(2h) with u_b = 0.
    // Corner nodes have boundary inward neighbors and contribute nothing.
    for (int edge = 0; edge < 4; ++edge) {
        const bool x_fixed = edge < 2;
        const double coord = (edge % 2 == 0) ? 0.0 : 1.0;
        for (int s = 1; s <= n; ++s) {
            // Corner nodes (s = 0, n+1) are skipped: their inward neighbors
            // lie on the boundary, so both bracket factors vanish there.
            const double wb = h;
            const double tangent = s * h;
            const double px = x_fixed ? coord : tangent;
            const double py = x_fixed ? tangent : coord;
            int i1, j1, i2, j2;
            if (x_fixed) {
                i1 = (coord == 0.0) ? 1 : n;
                i2 = (coord == 0.0) ? 2 : n - 1;
                j1 = j2 = s;
            } else {
                j1 = (coord == 0.0) ? 1 : n;
                j2 = (coord == 0.0) ? 2 : n - 1;
                i1 = i2 = s;
            }
            const double lnf = ln_abs_f(px, py);
            coeffs(grid.flat(i1, j1)) += wb * lnf * (-4.0 / (2.0 * h));
            coeffs(grid.flat(i2, j2)) += wb * lnf * (1.0 / (2.0 * h));
            // u * d(ln|F|)/dn term: u vanishes on the boundary.
        }
    }
    BoundaryFunctional t;
    t.coeffs = coeffs;
    t.omega = omega.values;
    return t;
}

/// Analytic test field with its Laplacian, for the Green's-identity split.
struct TestField {
    std::function<double(double, double)> u;
    std::function<double(double, double)> lap_u;
};

inline TestField sine_test_field() {
    const double pi = std::numbers::pi;
    return {[pi](double x, double y) { return std::sin(pi * x) * std::sin(pi * y); },
            [pi](double x, double y) {
                return -2.0 * pi * pi * std::sin(pi * x) * std::sin(pi * y);
            }};
}

/// Bilinear interpolation of an interior field at a strictly interior point.
inline double bilinear_interpolate(const RectGrid& grid, const RealVector& field, Complex p) {
    const double h = grid.h();
    const double gx = p.real() / h;
    const double gy = p.imag() / h;
    const int i0 = static_cast<int>(std::floor(gx));
    const int j0 = static_cast<int>(std::floor(gy));
    if (i0 < 1 || i0 + 1 > grid.n || j0 < 1 || j0 + 1 > grid.n)
        throw ShapeError("bilinear_interpolate: point outside the interior stencil");
    const double tx = gx - i0;
    const double ty = gy - j0;
    const double f00 = field(grid.flat(i0, j0));
    const double f10 = field(grid.flat(i0 + 1, j0));
    const double f01 = field(grid.flat(i0, j0 + 1));
    const double f11 = field(grid.flat(i0 + 1, j0 + 1));
    return (1 - tx) * (1 - ty) * f00 + tx * (1 - ty) * f10 + (1 - tx) * ty * f01 +
           tx * ty * f11;
}

/// Discrepancy between the volume integral h^2 sum (Delta u) ln|F| and its
/// point-interaction split 2 pi sum m_k u(z_k) + t(u) from Green's identity
/// (the sign of t follows the outward-normal convention fixed in
/// build_boundary_T).
inline double greens_split_check(const RectGrid& grid, const HarmonicWeight& omega,
                                 const ZeroSet& zeros, const TestField& field) {
    const double h = grid.h();
    const double h2 = h * h;
    RealVector u_samples(grid.size());
    double lhs = 0.0;
    const RealVector lnf = zeros.zeros.empty() ? RealVector::Zero(grid.size())
                                               : eval_log_abs_F(grid, zeros);
    for (int i = 1; i <= grid.n; ++i) {
        for (int j = 1; j <= grid.n; ++j) {
            const int p = grid.flat(i, j);
            u_samples(p) = field.u(grid.x(i), grid.y(j));
            lhs += h2 * field.lap_u(grid.x(i), grid.y(j)) * lnf(p);
        }
    }
    if (zeros.zeros.empty()) return std::abs(lhs);
    const BoundaryFunctional t = build_boundary_T(grid, omega, zeros);
    double point_sum = 0.0;
    for (const auto& pz : zeros.zeros)
        point_sum += pz.multiplicity * bilinear_interpolate(grid, u_samples, pz.z);
    const double rhs = 2.0 * std::numbers::pi * point_sum + t.coeffs.dot(u_samples);
    return std::abs(lhs - rhs);
}

}  // namespace laplace2d
}  // namespace isospec
