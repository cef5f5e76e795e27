#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "isospec/numcore.hpp"

namespace isospec {

/// Raised when an input fails one of the admissibility gates (boundary
/// conditions, density of the perturbed domain, zero placement).
struct AdmissibilityError : std::runtime_error {
    double violating_value;
    AdmissibilityError(const std::string& msg, double value)
        : std::runtime_error(msg + " (value " + std::to_string(value) + ")"),
          violating_value(value) {}
};

/// A correct restriction in discrete form: the pair (L^{-1}, K) plus the
/// scalar quadrature weight of the grid. The weight is a scalar multiple of
/// the identity, so the discrete adjoint is the plain conjugate transpose.
struct RestrictionModel {
    DenseMatrix l_inv;   // discretization of L^{-1}
    DenseMatrix k;       // discretization of K, same shape
    double weight = 1.0; // quadrature weight h of the discrete inner product
    std::string label;

    // Closed-form discretization of the bounded closure of K*L, for models
    // whose l_inv is exactly singular (the Cauchy/Volterra pipeline, where
    // L is the discrete shadow of an unbounded operator). When present,
    // density_check uses it instead of k * inverse(l_inv).
    std::optional<DenseMatrix> kl_closed;

    int dim() const { return static_cast<int>(l_inv.rows()); }
};

/// B_K = (I + KL) L_K together with every companion operator the checks need.
/// has_forward is false when l_inv is exactly singular: then only the inverse
/// family (lk_inv, lk, bk_inv) exists, assembled without inverting l_inv.
struct PerturbedPair {
    DenseMatrix bk;           // B_K          (empty when !has_forward)
    DenseMatrix bk_inv;       // B_K^{-1}
    DenseMatrix lk;           // L_K          = inverse(l_inv + k)
    DenseMatrix lk_inv;       // L_K^{-1}     = l_inv + k
    DenseMatrix kl;           // closure of K L  (empty when !has_forward)
    DenseMatrix reference_l;  // L = inverse(l_inv)  (empty when !has_forward)
    bool has_forward = true;
};

struct SpectralPairEntry {
    Complex lambda_ref{};
    Complex lambda_pert{};
    double abs_diff = 0.0;
    double vec_residual = 0.0;
};

struct SpectralReport {
    std::vector<SpectralPairEntry> pairs;  // sorted by canonical order of lambda_ref
    double max_abs_diff = 0.0;
    double riesz_condition = 0.0;
    std::optional<std::vector<double>> quasinilpotence;
    bool passed = false;
    std::string note;
};

struct DensityResult {
    bool dense = false;
    double smallest_singular = 0.0;  // of I + L*K*
};

struct IdentityResidual {
    std::string name;
    double max_residual = 0.0;
};

namespace framework {

/// L_K^{-1} = L^{-1} + K.
inline DenseMatrix make_lk_inv(const RestrictionModel& model) {
    if (model.l_inv.rows() != model.k.rows() || model.l_inv.cols() != model.k.cols())
        throw ShapeError("make_lk_inv: l_inv and k shapes differ");
    return model.l_inv + model.k;
}

/// Density of D(L_K): smallest singular value of I + L*K*. Since
/// L*K* = (KL)^H, the matrix is (I + KL)^H; KL comes from k * inverse(l_inv)
/// or, when l_inv is singular, from the model's closed form.
inline DensityResult density_check(const RestrictionModel& model,
                                   const Tolerances& tol = default_tolerances()) {
    const int n = model.dim();
    DenseMatrix kl;
    if (numcore::is_numerically_invertible(model.l_inv, tol)) {
        kl = model.k * numcore::inverse(model.l_inv, tol);
    } else if (model.kl_closed) {
        kl = *model.kl_closed;
    } else {
        throw SingularMatrixError(0);
    }
    const DenseMatrix m = DenseMatrix::Identity(n, n) + kl.adjoint();
    DensityResult res;
    res.smallest_singular = numcore::smallest_singular_value(m);
    res.dense = res.smallest_singular >= tol.density_tol * numcore::norm2(m);
    return res;
}

/// Assemble B_K = (I + KL) L_K from the model. B_K^{-1} is produced by two
/// routes, (l_inv + k) inverse(I + KL) and the inversion-free similarity
/// (l_inv + k) l_inv inverse(l_inv + k); requiring agreement catches
/// assembly sign errors. When l_inv is exactly singular only the second
/// route runs and the pair carries no forward operators.
inline PerturbedPair make_perturbed(const RestrictionModel& model,
                                    const Tolerances& tol = default_tolerances()) {
    PerturbedPair pair;
    pair.lk_inv = make_lk_inv(model);
    if (model.k.cwiseAbs().maxCoeff() == 0.0 &&
        !numcore::is_numerically_invertible(model.l_inv, tol)) {
        // K = 0 degenerates to B_K = L. With a singular l_inv (nilpotent
        // reference) only the inverse family exists; return it unperturbed
        // instead of failing the L_K correctness gate.
        pair.has_forward = false;
        pair.lk = DenseMatrix();
        pair.bk_inv = model.l_inv;
        return pair;
    }
    if (!numcore::is_numerically_invertible(pair.lk_inv, tol))
        throw SingularMatrixError(0);  // L_K not correct
    pair.lk = numcore::inverse(pair.lk_inv, tol);
    const int n = model.dim();
    const DenseMatrix eye = DenseMatrix::Identity(n, n);

    if (numcore::is_numerically_invertible(model.l_inv, tol)) {
        pair.has_forward = true;
        pair.reference_l = numcore::inverse(model.l_inv, tol);
        pair.kl = model.k * pair.reference_l;
        pair.bk = (eye + pair.kl) * pair.lk;
        pair.bk_inv = pair.lk_inv * numcore::inverse(eye + pair.kl, tol);
    } else {
        pair.has_forward = false;
        pair.bk_inv = pair.lk_inv * model.l_inv * pair.lk;
    }
    return pair;
}

/// B_K^* = L_K^* (I + L* K*), Everything adjoint is a plain conjugate
/// transpose because the grid weight is scalar.
inline PerturbedPair make_perturbed_adjoint(const RestrictionModel& model,
                                            const Tolerances& tol = default_tolerances()) {
    PerturbedPair fwd = make_perturbed(model, tol);
    if (!fwd.has_forward)
        throw SingularMatrixError(0);  // adjoint forward operator needs invertible l_inv
    const int n = model.dim();
    const DenseMatrix eye = DenseMatrix::Identity(n, n);
    PerturbedPair adj;
    adj.has_forward = true;
    adj.lk_inv = fwd.lk_inv.adjoint();
    adj.lk = fwd.lk.adjoint();
    adj.kl = fwd.kl.adjoint();                       // L* K* = (KL)^H
    adj.reference_l = fwd.reference_l.adjoint();
    adj.bk = fwd.lk.adjoint() * (eye + adj.kl);      // L_K^* (I + L* K*)
    adj.bk_inv = numcore::inverse(eye + adj.kl, tol) * adj.lk_inv;
    return adj;
}

/// Evaluates the resolvent identities as exact matrix equations and reports
/// the max entrywise residual of each, scaled by the magnitude of its
/// left-hand side.
inline std::vector<IdentityResidual> identity_suite(const RestrictionModel& model,
                                                    const Tolerances& tol = default_tolerances()) {
    const PerturbedPair p = make_perturbed(model, tol);
    if (!p.has_forward)
        throw SingularMatrixError(0);
    const int n = model.dim();
    const DenseMatrix eye = DenseMatrix::Identity(n, n);
    const DenseMatrix kl_k = model.k * p.lk;  // K L_K

    auto rel = [](const DenseMatrix& lhs, const DenseMatrix& rhs) {
        const double scale = std::max(lhs.cwiseAbs().maxCoeff(), 1e-300);
        return (lhs - rhs).cwiseAbs().maxCoeff() / scale;
    };

    std::vector<IdentityResidual> out;
    // (2.2): (L_K^*)^{-1} = (L^*)^{-1} (I + L* K*)
    out.push_back({"lk_star_inv_eq_lstar_inv_times_I_plus_LsKs",
                   rel(p.lk_inv.adjoint(), model.l_inv.adjoint() * (eye + p.kl.adjoint()))});
    // (2.3): (L^*)^{-1} = (L_K^*)^{-1} (I - L_K^* K*)
    out.push_back({"lstar_inv_eq_lkstar_inv_times_I_minus_LksKs",
                   rel(model.l_inv.adjoint(), p.lk_inv.adjoint() * (eye - kl_k.adjoint()))});
    // (I - L_K^* K*)^{-1} = I + L* K*
    out.push_back({"inv_I_minus_LksKs_eq_I_plus_LsKs",
                   rel(eye, (eye - kl_k.adjoint()) * (eye + p.kl.adjoint()))});
    // (I - KL_K)^{-1} = I + KL
    out.push_back({"inv_I_minus_KLk_eq_I_plus_KL",
                   rel(eye, (eye - kl_k) * (eye + p.kl))});
    // Corollary: B_K^* = L_K^* (I + L* K*)
    out.push_back({"bk_star_eq_lk_star_times_I_plus_LsKs",
                   rel(p.bk.adjoint(), p.lk.adjoint() * (eye + p.kl.adjoint()))});
    return out;
}

/// Greedy nearest matching of the nonzero spectra of a and b in canonical
/// order. Eigenvalues of modulus <= zero_tol * ||.|| are exempt, mirroring
/// the sigma(RS) \ {0} = sigma(SR) \ {0} rule.
inline SpectralReport spectra_match(const DenseMatrix& a, const DenseMatrix& b,
                                    double match_tol,
                                    const Tolerances& tol = default_tolerances()) {
    if (a.rows() != a.cols() || b.rows() != b.cols())
        throw ShapeError("spectra_match: inputs must be square");
    const auto da = numcore::eig_general(a);
    const auto db = numcore::eig_general(b);

    auto nonzero = [&](const numcore::EigenDecomposition& d) {
        std::vector<Complex> v;
        const double cut = tol.zero_tol * std::max(d.matrix_norm, 1e-300);
        for (const auto& lam : d.values)
            if (std::abs(lam) > cut) v.push_back(lam);
        return v;
    };
    std::vector<Complex> la = nonzero(da), lb = nonzero(db);

    SpectralReport rep;
    std::vector<bool> used(lb.size(), false);
    for (const auto& lam : la) {
        int best = -1;
        double best_d = std::numeric_limits<double>::infinity();
        for (size_t j = 0; j < lb.size(); ++j) {
            if (used[j]) continue;
            const double d = std::abs(lam - lb[j]);
            if (d < best_d) { best_d = d; best = static_cast<int>(j); }
        }
        SpectralPairEntry e;
        e.lambda_ref = lam;
        if (best >= 0) {
            used[best] = true;
            e.lambda_pert = lb[best];
            e.abs_diff = best_d;
        } else {
            e.abs_diff = std::numeric_limits<double>::infinity();
        }
        rep.pairs.push_back(e);
    }
    rep.max_abs_diff = 0.0;
    for (const auto& e : rep.pairs) rep.max_abs_diff = std::max(rep.max_abs_diff, e.abs_diff);
    const bool all_matched =
        la.size() == lb.size() && std::all_of(used.begin(), used.end(), [](bool u) { return u; });
    rep.passed = all_matched && rep.max_abs_diff <= match_tol;
    if (la.size() != lb.size()) rep.note = "nonzero spectrum cardinality mismatch";
    return rep;
}

/// For the leading eigenpairs (lambda_k, v_k) of the reference L, checks
/// that u_k = (I + KL) v_k is an eigenvector of B_K for the same eigenvalue.
inline SpectralReport eigvec_transfer_check(const PerturbedPair& pair, int modes,
                                            const Tolerances& tol = default_tolerances()) {
    if (!pair.has_forward) throw SingularMatrixError(0);
    const int n = static_cast<int>(pair.bk.rows());
    SpectralReport rep;
    if (modes > n) {
        modes = n;
        rep.note = "modes clamped to dimension";
    }
    const auto dl = numcore::eig_general(pair.reference_l);
    const double bk_norm = numcore::norm2(pair.bk);
    const DenseMatrix transfer = DenseMatrix::Identity(n, n) + pair.kl;
    rep.passed = true;
    for (int k = 0; k < modes; ++k) {
        const DenseVector v = dl.vectors.col(k);
        const Complex lam = dl.values[k];
        const DenseVector u = transfer * v;
        const double res = (pair.bk * u - lam * u).norm() / u.norm();
        SpectralPairEntry e;
        e.lambda_ref = lam;
        e.lambda_pert = lam;
        e.abs_diff = 0.0;
        e.vec_residual = res;
        rep.pairs.push_back(e);
        rep.max_abs_diff = std::max(rep.max_abs_diff, res);
        if (res > tol.transfer_tol * bk_norm) rep.passed = false;
    }
    return rep;
}

struct RieszDetails {
    double condition = 0.0;     // +inf sentinel for defective decompositions
    double smallest_singular = 0.0;
    bool defective = false;
};

/// Condition number of the column-normalized eigenvector matrix of B_K.
/// Exactly repeated eigenvalues leave the basis of each eigenspace free;
/// that gauge is fixed by orthonormalizing within eigenvalue clusters. A
/// cluster whose orthonormalized columns stop being eigenvectors marks a
/// defective matrix and yields the +inf sentinel.
inline RieszDetails riesz_details(const PerturbedPair& pair,
                                  const Tolerances& tol = default_tolerances()) {
    if (!pair.has_forward) throw SingularMatrixError(0);
    const auto dec = numcore::eig_general(pair.bk);
    const int n = static_cast<int>(pair.bk.rows());
    DenseMatrix v = dec.vectors;  // columns already unit norm
    double scale = 0.0;
    for (const auto& lam : dec.values) scale = std::max(scale, std::abs(lam));
    const double cluster_tol = 1e-8 * std::max(scale, 1e-300);
    const double defect_tol = 1e-6 * std::max(dec.matrix_norm, 1e-300);

    RieszDetails out;
    int i = 0;
    while (i < n) {
        int j = i + 1;
        while (j < n && std::abs(dec.values[j] - dec.values[j - 1]) <= cluster_tol) ++j;
        if (j - i > 1) {
            Eigen::HouseholderQR<DenseMatrix> qr(v.middleCols(i, j - i));
            DenseMatrix q = qr.householderQ() * DenseMatrix::Identity(n, j - i);
            for (int c = 0; c < j - i; ++c) {
                const double res = (pair.bk * q.col(c) - dec.values[i + c] * q.col(c)).norm();
                if (res > defect_tol) out.defective = true;
            }
            if (!out.defective) v.middleCols(i, j - i) = q;
        }
        i = j;
    }
    if (out.defective) {
        out.condition = std::numeric_limits<double>::infinity();
        return out;
    }
    Eigen::SelfAdjointEigenSolver<DenseMatrix> es(v.adjoint() * v);
    const double smax = std::sqrt(std::max(0.0, es.eigenvalues()(n - 1)));
    const double smin = std::sqrt(std::max(0.0, es.eigenvalues()(0)));
    out.smallest_singular = smin;
    if (smin < tol.pivot_tol * smax) {
        out.defective = true;
        out.condition = std::numeric_limits<double>::infinity();
    } else {
        out.condition = smax / smin;
    }
    return out;
}

inline double riesz_diagnostic(const PerturbedPair& pair,
                               const Tolerances& tol = default_tolerances()) {
    return riesz_details(pair, tol).condition;
}

struct QuasinilpotenceReport {
    std::vector<double> power_norms;  // r_n = ||bk_inv^n||^{1/n}
    double spectral_radius = 0.0;     // from eig_general(bk_inv)
};

inline QuasinilpotenceReport quasinilpotence_report(const PerturbedPair& pair, int n_max) {
    QuasinilpotenceReport rep;
    rep.power_norms = numcore::power_norm_sequence(pair.bk_inv, n_max);
    const auto dec = numcore::eig_general(pair.bk_inv);
    for (const auto& lam : dec.values)
        rep.spectral_radius = std::max(rep.spectral_radius, std::abs(lam));
    return rep;
}

}  // namespace framework
}  // namespace isospec
