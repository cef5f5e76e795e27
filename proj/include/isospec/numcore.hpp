#pragma once

#include <Eigen/Dense>
#include <Eigen/Eigenvalues>

#include <algorithm>
#include <complex>
#include <cstdint>
#include <limits>
#include <numeric>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "isospec/tolerances.hpp"

namespace isospec {

using Complex     = std::complex<double>;
using DenseMatrix = Eigen::MatrixXcd;
using DenseVector = Eigen::VectorXcd;
using RealVector  = Eigen::VectorXd;
using RealMatrix  = Eigen::MatrixXd;

struct ShapeError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct SingularMatrixError : std::runtime_error {
    int pivot_index;
    explicit SingularMatrixError(int idx)
        : std::runtime_error("singular matrix: pivot " + std::to_string(idx) +
                             " below pivot_tol"),
          pivot_index(idx) {}
};

struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

namespace numcore {

inline bool all_finite(const DenseMatrix& a) {
    return a.allFinite();
}

inline void require_finite(const DenseMatrix& a, const char* what) {
    if (!all_finite(a)) throw NonFiniteError(std::string("non-finite entries in ") + what);
}

/// Operator 2-norm by power iteration on A^H A. Deterministic seeded start
/// vector: a fixed-pattern start (e.g. all ones) can lie exactly in the
/// kernel of a structured A, which would report 0 for a nonzero matrix.
/// A pseudo-random dense start is in the kernel only with probability ~0;
/// if it still happens, retry with fresh seeds before giving up.
inline double norm2(const DenseMatrix& a, int max_iter = 300, double rel_tol = 1e-13) {
    if (a.size() == 0) return 0.0;
    const double fro = a.norm();
    if (fro == 0.0) return 0.0;
    for (std::uint64_t seed = 0x5eed2u; seed < 0x5eed2u + 3u; ++seed) {
        std::mt19937_64 rng(seed);
        std::normal_distribution<double> nd;
        DenseVector v(a.cols());
        for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(nd(rng), nd(rng));
        v /= v.norm();
        double s = 0.0;
        bool dead_start = false;
        for (int it = 0; it < max_iter; ++it) {
            DenseVector w = a * v;
            const double nw = w.norm();
            if (nw == 0.0) { dead_start = true; break; }
            v = a.adjoint() * w;
            const double nv = v.norm();
            const double s_new = nv / nw;  // Rayleigh estimate of sigma_max
            v /= nv;
            if (it > 2 && std::abs(s_new - s) <= rel_tol * s_new) { s = s_new; break; }
            s = s_new;
        }
        if (!dead_start) return s;
    }
    return 0.0;
}

inline DenseMatrix mat_mul(const DenseMatrix& a, const DenseMatrix& b) {
    if (a.cols() != b.rows())
        throw ShapeError("mat_mul: shape mismatch " + std::to_string(a.rows()) + "x" +
                         std::to_string(a.cols()) + " * " + std::to_string(b.rows()) + "x" +
                         std::to_string(b.cols()));
    return a * b;
}

/// LU solve with explicit pivot check. Throws SingularMatrixError with the
/// index of the first offending pivot.
inline DenseMatrix solve(const DenseMatrix& a, const DenseMatrix& rhs,
                         const Tolerances& tol = default_tolerances()) {
    if (a.rows() != a.cols()) throw ShapeError("solve: matrix not square");
    if (a.rows() != rhs.rows()) throw ShapeError("solve: rhs row mismatch");
    require_finite(a, "solve lhs");
    require_finite(rhs, "solve rhs");
    Eigen::PartialPivLU<DenseMatrix> lu(a);
    const double scale = a.cwiseAbs().maxCoeff();
    const auto& u_diag = lu.matrixLU().diagonal();
    for (int i = 0; i < u_diag.size(); ++i) {
        if (std::abs(u_diag(i)) < tol.pivot_tol * scale) throw SingularMatrixError(i);
    }
    return lu.solve(rhs);
}

inline DenseMatrix inverse(const DenseMatrix& a,
                           const Tolerances& tol = default_tolerances()) {
    return solve(a, DenseMatrix::Identity(a.rows(), a.cols()), tol);
}

inline bool is_numerically_invertible(const DenseMatrix& a,
                                      const Tolerances& tol = default_tolerances()) {
    if (a.rows() != a.cols() || a.size() == 0) return false;
    Eigen::PartialPivLU<DenseMatrix> lu(a);
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return false;
    const auto& u_diag = lu.matrixLU().diagonal();
    for (int i = 0; i < u_diag.size(); ++i)
        if (std::abs(u_diag(i)) < tol.pivot_tol * scale) return false;
    return true;
}

struct EigenDecomposition {
    std::vector<Complex> values;   // canonical order: lexicographic by (Re, Im)
    DenseMatrix vectors;           // k-th column pairs with values[k]
    std::vector<double> residuals; // ||A v - lambda v||_2 per pair
    double matrix_norm = 0.0;      // ||A||_2 estimate used for the residual contract

    double max_residual() const {
        return residuals.empty() ? 0.0
                                 : *std::max_element(residuals.begin(), residuals.end());
    }
    bool residuals_ok(const Tolerances& tol = default_tolerances()) const {
        return max_residual() <= tol.eig_tol * std::max(matrix_norm, 1e-300);
    }
};

namespace detail {

inline bool canonical_less(const Complex& a, const Complex& b) {
    if (a.real() != b.real()) return a.real() < b.real();
    return a.imag() < b.imag();
}

/// Phase-normalize: rotate so the largest-magnitude entry is real positive.
inline void normalize_column(DenseMatrix& vecs, int k) {
    auto col = vecs.col(k);
    const double nrm = col.norm();
    if (nrm > 0) col /= nrm;
    int imax = 0;
    double amax = 0.0;
    for (int i = 0; i < col.size(); ++i) {
        const double m = std::abs(col(i));
        if (m > amax) { amax = m; imax = i; }
    }
    if (amax > 0) {
        const Complex phase = col(imax) / amax;
        col /= phase;
    }
}

enum class Triangular { none, upper, lower };

inline Triangular exact_triangularity(const DenseMatrix& a) {
    const int n = static_cast<int>(a.rows());
    bool upper = true, lower = true;
    for (int i = 0; i < n && (upper || lower); ++i)
        for (int j = 0; j < n; ++j) {
            if (a(i, j) != Complex(0.0)) {
                if (i > j) upper = false;
                if (i < j) lower = false;
            }
        }
    if (upper) return Triangular::upper;
    if (lower) return Triangular::lower;
    return Triangular::none;
}

/// Eigenvector of a triangular matrix for the eigenvalue at diagonal
/// position k, by the classic back-substitution with guarded pivots.
/// Defective eigenvalues yield best-effort vectors flagged by residual.
inline DenseVector triangular_eigvec(const DenseMatrix& a, int k, Triangular tri) {
    const int n = static_cast<int>(a.rows());
    const Complex lam = a(k, k);
    const double guard = 1e-300 + std::numeric_limits<double>::epsilon() *
                                      a.cwiseAbs().maxCoeff();
    DenseVector v = DenseVector::Zero(n);
    v(k) = 1.0;
    if (tri == Triangular::upper) {
        for (int i = k - 1; i >= 0; --i) {
            Complex s = 0.0;
            for (int j = i + 1; j <= k; ++j) s += a(i, j) * v(j);
            Complex d = a(i, i) - lam;
            if (std::abs(d) < guard) d = guard;
            v(i) = -s / d;
        }
    } else {
        for (int i = k + 1; i < n; ++i) {
            Complex s = 0.0;
            for (int j = k; j < i; ++j) s += a(i, j) * v(j);
            Complex d = a(i, i) - lam;
            if (std::abs(d) < guard) d = guard;
            v(i) = -s / d;
        }
    }
    return v;
}

}  // namespace detail

/// General (non-Hermitian) eigendecomposition. Exactly triangular inputs
/// take a structural path: the spectrum is the diagonal (exact — dense QR
/// iteration scatters nilpotent spectra like eps^(1/n)) and eigenvectors
/// come from back-substitution. Otherwise dispatches to the real Schur
/// path when the input has no imaginary part. Eigenpairs are sorted in
/// canonical order and phase-normalized so reports are stable across runs.
inline EigenDecomposition eig_general(const DenseMatrix& a) {
    if (a.rows() != a.cols()) throw ShapeError("eig_general: matrix not square");
    require_finite(a, "eig_general input");
    const int n = static_cast<int>(a.rows());
    EigenDecomposition dec;
    DenseVector vals(n);
    DenseMatrix vecs(n, n);

    const detail::Triangular tri = detail::exact_triangularity(a);
    if (tri != detail::Triangular::none) {
        vals = a.diagonal();
        for (int k = 0; k < n; ++k) vecs.col(k) = detail::triangular_eigvec(a, k, tri);
    }
    const bool real_input = (a.imag().cwiseAbs().maxCoeff() == 0.0);
    if (tri != detail::Triangular::none) {
        // handled above
    } else if (real_input) {
        Eigen::EigenSolver<RealMatrix> es(a.real(), true);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eig_general: real QR iteration did not converge");
        vals = es.eigenvalues();
        vecs = es.eigenvectors();
    } else {
        Eigen::ComplexEigenSolver<DenseMatrix> es(a, true);
        if (es.info() != Eigen::Success)
            throw std::runtime_error("eig_general: QR iteration did not converge");
        vals = es.eigenvalues();
        vecs = es.eigenvectors();
    }

    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int i, int j) {
        return detail::canonical_less(vals(i), vals(j));
    });

    dec.values.resize(n);
    dec.vectors.resize(n, n);
    dec.residuals.resize(n);
    for (int k = 0; k < n; ++k) {
        dec.values[k] = vals(order[k]);
        dec.vectors.col(k) = vecs.col(order[k]);
        detail::normalize_column(dec.vectors, k);
    }
    dec.matrix_norm = norm2(a);
    for (int k = 0; k < n; ++k) {
        dec.residuals[k] = (a * dec.vectors.col(k) - dec.values[k] * dec.vectors.col(k)).norm();
    }
    return dec;
}

/// r_n = ||A^n||_2^{1/n}, n = 1..n_max. Each r_n upper-bounds the spectral
/// radius. Rescales internally when powers overflow.
inline std::vector<double> power_norm_sequence(const DenseMatrix& a, int n_max) {
    if (a.rows() != a.cols()) throw ShapeError("power_norm_sequence: matrix not square");
    if (n_max < 1) throw ShapeError("power_norm_sequence: n_max must be >= 1");
    require_finite(a, "power_norm_sequence input");
    std::vector<double> seq;
    seq.reserve(n_max);
    const double a_norm = norm2(a);
    if (a_norm == 0.0) {
        seq.assign(n_max, 0.0);
        return seq;
    }
    // Work with A / ||A|| and rescale back: r_n(A) = ||A|| * r_n(A/||A||).
    const DenseMatrix s = a / a_norm;
    DenseMatrix p = s;
    for (int n = 1; n <= n_max; ++n) {
        const double nn = norm2(p);
        seq.push_back(a_norm * std::pow(nn, 1.0 / n));
        if (nn == 0.0) {
            // Nilpotent (or underflowed): all further powers are zero.
            for (int m = n + 1; m <= n_max; ++m) seq.push_back(0.0);
            break;
        }
        if (n < n_max) p = p * s;
    }
    return seq;
}

/// sigma_max / sigma_min via eigenvalues of A^H A. Returns +inf when the
/// smallest singular value falls below pivot_tol * sigma_max.
inline double condition_number_2(const DenseMatrix& a,
                                 const Tolerances& tol = default_tolerances()) {
    if (a.rows() != a.cols()) throw ShapeError("condition_number_2: matrix not square");
    require_finite(a, "condition_number_2 input");
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(a.adjoint() * a);
    if (es.info() != Eigen::Success)
        throw std::runtime_error("condition_number_2: eigensolver failed");
    const auto& ev = es.eigenvalues();
    const double smax = std::sqrt(std::max(0.0, ev(ev.size() - 1)));
    const double smin = std::sqrt(std::max(0.0, ev(0)));
    if (smin < tol.pivot_tol * smax) return std::numeric_limits<double>::infinity();
    return smax / smin;
}

/// Smallest singular value by inverse power iteration on A^H A through an LU
/// factorization. The Gram-matrix eigenvalue route has absolute error of
/// order eps * ||A||^2, which cannot resolve sigma_min near machine zero;
/// inverse iteration with triangular solves keeps the error relative.
inline double smallest_singular_value(const DenseMatrix& a, int max_iter = 200,
                                      double rel_tol = 1e-12) {
    if (a.size() == 0) return 0.0;
    if (a.rows() != a.cols()) {
        // Rectangular fallback: Jacobi SVD is accurate and cheap at the sizes
        // this library handles.
        Eigen::JacobiSVD<DenseMatrix> svd(a);
        return svd.singularValues()(svd.singularValues().size() - 1);
    }
    require_finite(a, "smallest_singular_value input");
    Eigen::PartialPivLU<DenseMatrix> lu(a);
    const double scale = a.cwiseAbs().maxCoeff();
    if (scale == 0.0) return 0.0;
    const auto& u_diag = lu.matrixLU().diagonal();
    for (Eigen::Index i = 0; i < u_diag.size(); ++i) {
        if (u_diag(i) == Complex(0.0)) return 0.0;  // exactly singular
    }
    std::mt19937_64 rng(0x51937u);
    std::normal_distribution<double> nd;
    DenseVector v(a.cols());
    for (Eigen::Index i = 0; i < v.size(); ++i) v(i) = Complex(nd(rng), nd(rng));
    v /= v.norm();
    double inv_s2 = 0.0;  // converges to 1 / sigma_min^2
    for (int it = 0; it < max_iter; ++it) {
        // One step of power iteration on (A^H A)^{-1} = A^{-1} A^{-H}.
        const DenseVector y = lu.adjoint().solve(v);
        DenseVector z = lu.solve(y);
        const double nz = z.norm();
        if (!std::isfinite(nz)) return 0.0;  // overflow: sigma_min below ~1e-154
        if (nz == 0.0) break;
        const double est = nz;  // Rayleigh-style estimate of 1/sigma_min^2
        z /= nz;
        if (it > 2 && std::abs(est - inv_s2) <= rel_tol * est) { inv_s2 = est; break; }
        inv_s2 = est;
        v = z;
    }
    if (inv_s2 == 0.0) return 0.0;
    return 1.0 / std::sqrt(inv_s2);
}

}  // namespace numcore
}  // namespace isospec
