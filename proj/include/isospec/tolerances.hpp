#pragma once

namespace isospec {

/// Central tolerance configuration. All values are relative unless noted.
/// Every check in the library and in the test suites cites these names.
struct Tolerances {
    double eig_tol      = 1e-10;  // eigenpair residual bound, relative to ||A||_2
    double pivot_tol    = 1e-13;  // LU pivot cutoff, relative to ||A||
    double match_tol    = 1e-8;   // default eigenvalue matching tolerance
    double density_tol  = 1e-10;  // smallest singular value cutoff for I + L*K*
    double zero_tol     = 1e-10;  // eigenvalues below zero_tol*scale count as zero
    double transfer_tol = 1e-8;   // eigenvector transfer residual, relative to ||B_K||
    double bc_tol       = 1e-12;  // sigma boundary-constraint tolerance
    double adm_tol      = 1e-6;   // sigma admissibility margin (distance from critical value)
    int    eig_sweep_cap = 100;   // QR iteration cap, multiplied by n
};

inline const Tolerances& default_tolerances() {
    static const Tolerances tol{};
    return tol;
}

}  // namespace isospec
