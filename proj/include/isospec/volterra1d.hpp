#pragma once

#include <cmath>
#include <functional>
#include <numbers>
#include <string>
#include <vector>

#include "isospec/framework.hpp"

namespace isospec {

enum class Scheme { left_rectangle, trapezoid };

/// Uniform grid on [0,1]. left_rectangle: nodes j*h, j = 0..n-1, h = 1/n.
/// trapezoid: nodes j/(n-1), j = 0..n-1.
struct Grid1D {
    int n = 0;
    Scheme scheme = Scheme::left_rectangle;

    double h() const { return scheme == Scheme::left_rectangle ? 1.0 / n : 1.0 / (n - 1); }
    double node(int j) const { return j * h(); }
    RealVector nodes() const {
        RealVector x(n);
        for (int j = 0; j < n; ++j) x(j) = node(j);
        return x;
    }
};

enum class SigmaKind { cauchy, antiperiodic };

/// Analytic sigma family with exact derivative: "affine" (a + b x),
/// "poly" (c0 + c1 x + ...), "trig" (a sin(2 pi m x)).
struct SigmaFamily {
    std::string name;
    std::vector<double> params;

    Complex eval(double x) const {
        if (name == "affine") {
            require_params(2);
            return params[0] + params[1] * x;
        }
        if (name == "poly") {
            double v = 0.0;
            for (size_t i = params.size(); i-- > 0;) v = v * x + params[i];
            return v;
        }
        if (name == "trig") {
            require_params(2);
            return params[0] * std::sin(2.0 * std::numbers::pi * params[1] * x);
        }
        throw ShapeError("unknown sigma family: " + name);
    }
    Complex deriv(double x) const {
        if (name == "affine") {
            require_params(2);
            return params[1];
        }
        if (name == "poly") {
            double v = 0.0;
            for (size_t i = params.size(); i-- > 1;) v = v * x + params[i] * static_cast<double>(i);
            return v;
        }
        if (name == "trig") {
            require_params(2);
            const double w = 2.0 * std::numbers::pi * params[1];
            return params[0] * w * std::cos(w * x);
        }
        throw ShapeError("unknown sigma family: " + name);
    }

private:
    void require_params(size_t k) const {
        if (params.size() != k)
            throw ShapeError("sigma family " + name + " expects " + std::to_string(k) +
                             " parameters");
    }
};

/// Samples of sigma and sigma' on a grid, with the example-specific
/// admissibility data (endpoint values taken from the analytic family).
struct SigmaSpec {
    DenseVector sigma;
    DenseVector sigma_prime;
    SigmaKind kind = SigmaKind::cauchy;
    Complex sigma_at_0{};
    Complex sigma_at_1{};
};

namespace volterra1d {

inline SigmaSpec make_sigma_spec(const Grid1D& grid, const SigmaFamily& family, SigmaKind kind) {
    SigmaSpec spec;
    spec.kind = kind;
    spec.sigma.resize(grid.n);
    spec.sigma_prime.resize(grid.n);
    for (int j = 0; j < grid.n; ++j) {
        const double x = grid.node(j);
        spec.sigma(j) = family.eval(x);
        spec.sigma_prime(j) = family.deriv(x);
    }
    spec.sigma_at_0 = family.eval(0.0);
    spec.sigma_at_1 = family.eval(1.0);
    return spec;
}

/// Constraint checks. Throws AdmissibilityError with the violating value.
inline void validate_sigma(const SigmaSpec& spec,
                           const Tolerances& tol = default_tolerances()) {
    if (spec.kind == SigmaKind::cauchy) {
        if (std::abs(spec.sigma_at_1) > tol.bc_tol)
            throw AdmissibilityError("cauchy sigma requires sigma(1) = 0",
                                     std::abs(spec.sigma_at_1));
        if (std::abs(spec.sigma_at_0 + 1.0) < tol.adm_tol)
            throw AdmissibilityError("cauchy sigma(0) = -1 makes D(L_K) non-dense",
                                     spec.sigma_at_0.real());
    } else {
        if (std::abs(spec.sigma_at_0 + spec.sigma_at_1) > tol.bc_tol)
            throw AdmissibilityError("antiperiodic sigma requires sigma(0) + sigma(1) = 0",
                                     std::abs(spec.sigma_at_0 + spec.sigma_at_1));
        if (std::abs(spec.sigma_at_0 + 0.5) < tol.adm_tol)
            throw AdmissibilityError("antiperiodic sigma(0) = -1/2 makes D(L_K) non-dense",
                                     spec.sigma_at_0.real());
    }
}

/// Centered-difference consistency of the supplied derivative: returns
/// ||D sigma - sigma'||_inf, which should be <= C*h for smooth families.
inline double fd_consistency(const Grid1D& grid, const SigmaSpec& spec) {
    const double h = grid.h();
    double worst = 0.0;
    for (int j = 1; j + 1 < grid.n; ++j) {
        const Complex d = (spec.sigma(j + 1) - spec.sigma(j - 1)) / (2.0 * h);
        worst = std::max(worst, std::abs(d - spec.sigma_prime(j)));
    }
    return worst;
}

/// Quadrature matrix J with (J f)_i ~ int_0^{x_i} f.
/// left_rectangle: strictly lower triangular (zero diagonal), hence
/// nilpotent — the structural Volterra discretization.
/// trapezoid: trapezoid first step then third-order Adams-Moulton
/// continuation. Pure cumulative trapezoid carries an exact alternating
/// null vector; the AM continuation removes it while staying exact on
/// quadratics.
inline DenseMatrix build_integration_matrix(const Grid1D& grid) {
    if (grid.n < 4) throw ShapeError("build_integration_matrix: n < 4");
    const int n = grid.n;
    const double h = grid.h();
    DenseMatrix j_mat = DenseMatrix::Zero(n, n);
    if (grid.scheme == Scheme::left_rectangle) {
        for (int i = 1; i < n; ++i)
            for (int j = 0; j < i; ++j) j_mat(i, j) = h;
    } else {
        j_mat(1, 0) = h / 2.0;
        j_mat(1, 1) = h / 2.0;
        for (int i = 2; i < n; ++i) {
            j_mat.row(i) = j_mat.row(i - 1);
            j_mat(i, i) += 5.0 * h / 12.0;
            j_mat(i, i - 1) += 8.0 * h / 12.0;
            j_mat(i, i - 2) -= h / 12.0;
        }
    }
    return j_mat;
}

/// Weights of the full-interval quadrature <f, g> = sum w_j g_j^bar f_j.
inline RealVector quadrature_weights(const Grid1D& grid) {
    const double h = grid.h();
    RealVector w = RealVector::Constant(grid.n, h);
    if (grid.scheme == Scheme::trapezoid) {
        w(0) = h / 2.0;
        w(grid.n - 1) = h / 2.0;
    }
    return w;
}

/// Rank-one K: constant column times the sigma functional row.
inline DenseMatrix rank_one_k(const Grid1D& grid, const DenseVector& sigma) {
    const RealVector w = quadrature_weights(grid);
    DenseMatrix k(grid.n, grid.n);
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j) k(i, j) = w(j) * std::conj(sigma(j));
    return k;
}

/// Example 2.1: L^{-1} = integration matrix, K f = 1 * <f, sigma>.
/// The closed form KL f = -1 * <f, sigma'> is attached: the left-rectangle
/// l_inv is exactly singular (L is the discrete shadow of d/dx with a
/// Cauchy condition), so density_check cannot form k * inverse(l_inv).
inline RestrictionModel build_cauchy_model(const Grid1D& grid, const SigmaSpec& spec,
                                           const Tolerances& tol = default_tolerances()) {
    if (spec.kind != SigmaKind::cauchy)
        throw ShapeError("build_cauchy_model: sigma spec must be cauchy kind");
    validate_sigma(spec, tol);
    RestrictionModel model;
    model.l_inv = build_integration_matrix(grid);
    model.k = rank_one_k(grid, spec.sigma);
    model.weight = grid.h();
    model.label = "cauchy";
    model.kl_closed = -rank_one_k(grid, spec.sigma_prime);
    return model;
}

/// Example 2.2: y' = f with y(0) + y(1) = 0, solved by
/// y(x) = int_0^x f - (1/2) int_0^1 f.
inline RestrictionModel build_antiperiodic_model(const Grid1D& grid, const SigmaSpec& spec,
                                                 const Tolerances& tol = default_tolerances()) {
    if (spec.kind != SigmaKind::antiperiodic)
        throw ShapeError("build_antiperiodic_model: sigma spec must be antiperiodic kind");
    validate_sigma(spec, tol);
    const DenseMatrix j_mat = build_integration_matrix(grid);
    const RealVector w = quadrature_weights(grid);
    RestrictionModel model;
    model.l_inv = j_mat;
    for (int i = 0; i < grid.n; ++i)
        for (int j = 0; j < grid.n; ++j) model.l_inv(i, j) -= 0.5 * w(j);
    model.k = rank_one_k(grid, spec.sigma);
    model.weight = grid.h();
    model.label = "antiperiodic";
    return model;
}

/// Certifies that the Cauchy-pipeline B_K^{-1} is nilpotent. bk_inv is
/// assembled as (l_inv + k) l_inv (l_inv + k)^{-1}, exactly similar to the
/// strictly lower triangular l_inv, so its spectrum is the (zero) diagonal;
/// the certificate inspects that triangularity directly and pairs it with
/// the power-norm sequence of the dense bk_inv.
inline SpectralReport volterra_certificate(const Grid1D& grid, const SigmaSpec& spec,
                                           const Tolerances& tol = default_tolerances()) {
    if (grid.scheme != Scheme::left_rectangle)
        throw ShapeError("volterra_certificate: strict nilpotence requires the "
                         "left_rectangle scheme (zero diagonal)");
    const RestrictionModel model = build_cauchy_model(grid, spec, tol);
    const PerturbedPair pair = framework::make_perturbed(model, tol);

    // Strict lower triangularity of l_inv (diagonal included).
    double upper = 0.0;
    for (int i = 0; i < grid.n; ++i)
        for (int j = i; j < grid.n; ++j) upper = std::max(upper, std::abs(model.l_inv(i, j)));

    SpectralReport rep;
    rep.quasinilpotence = numcore::power_norm_sequence(pair.bk_inv, grid.n);
    const bool triangular = (upper == 0.0);
    const bool final_zero = rep.quasinilpotence->back() == 0.0;
    for (int i = 0; i < grid.n; ++i) {
        SpectralPairEntry e;
        e.lambda_ref = model.l_inv(i, i);   // spectrum of l_inv: the diagonal
        e.lambda_pert = model.l_inv(i, i);  // spectrum of bk_inv: exact similarity
        rep.pairs.push_back(e);
    }
    rep.passed = triangular && final_zero;
    rep.note = triangular ? "l_inv strictly lower triangular; sigma(bk_inv) = {0} by similarity"
                          : "l_inv not strictly triangular";
    return rep;
}

/// Remark 2.9 setup: the model is unchanged; the adjoint operator comes out
/// of framework::make_perturbed_adjoint (or, for the singular Cauchy l_inv,
/// through the conjugate transpose of bk_inv).
inline RestrictionModel build_adjoint_example(const Grid1D& grid, const SigmaSpec& spec,
                                              const Tolerances& tol = default_tolerances()) {
    validate_sigma(spec, tol);
    return spec.kind == SigmaKind::cauchy ? build_cauchy_model(grid, spec, tol)
                                          : build_antiperiodic_model(grid, spec, tol);
}

}  // namespace volterra1d
}  // namespace isospec
