#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "isospec/experiments.hpp"
#include "isospec/framework.hpp"

using namespace isospec;

namespace {

RestrictionModel zero_k_model(const DenseMatrix& l_inv) {
    RestrictionModel m;
    m.l_inv = l_inv;
    m.k = DenseMatrix::Zero(l_inv.rows(), l_inv.cols());
    m.weight = 1.0;
    m.label = "zero_k";
    return m;
}

}  // namespace

TEST_CASE("make_lk_inv: K = 0 returns l_inv; rank-one on identity adds the dyad") {
    const DenseMatrix l_inv = DenseMatrix::Identity(4, 4) * Complex(2.0, 1.0);
    CHECK((framework::make_lk_inv(zero_k_model(l_inv)) - l_inv).cwiseAbs().maxCoeff() == 0.0);

    RestrictionModel m;
    m.l_inv = DenseMatrix::Identity(3, 3);
    m.k = DenseMatrix::Zero(3, 3);
    m.k(0, 1) = 1.0;  // e1 e2^H
    const DenseMatrix lk_inv = framework::make_lk_inv(m);
    DenseMatrix expect = DenseMatrix::Identity(3, 3);
    expect(0, 1) = 1.0;
    CHECK((lk_inv - expect).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("make_lk_inv: shape mismatch throws") {
    RestrictionModel m;
    m.l_inv = DenseMatrix::Identity(3, 3);
    m.k = DenseMatrix::Zero(2, 2);
    CHECK_THROWS_AS(framework::make_lk_inv(m), ShapeError);
}

TEST_CASE("density_check: K = 0 is dense with diagnostic 1") {
    const auto res = framework::density_check(zero_k_model(DenseMatrix::Identity(5, 5)));
    CHECK(res.dense);
    CHECK(std::abs(res.smallest_singular - 1.0) <= 1e-12);
}

TEST_CASE("density_check: small rank-one K is dense by Neumann dominance") {
    for (std::uint64_t seed : {1, 2, 3, 4, 5}) {
        const auto model = experiments::random_admissible_model(20, seed);
        CHECK(framework::density_check(model).dense);
    }
}

TEST_CASE("make_perturbed: K = 0 gives B_K = L exactly") {
    DenseMatrix l_inv(3, 3);
    l_inv << Complex(2, 0), Complex(0, 1), 0.0,
             0.0, Complex(1, 0), 0.5,
             0.0, 0.0, Complex(0, -2);
    const auto pair = framework::make_perturbed(zero_k_model(l_inv));
    CHECK(pair.has_forward);
    CHECK((pair.bk - pair.reference_l).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("make_perturbed: diag(1, 1/2) with rank-one K keeps eigenvalues {1, 2}") {
    RestrictionModel m;
    m.l_inv = DenseMatrix::Zero(2, 2);
    m.l_inv(0, 0) = 1.0;
    m.l_inv(1, 1) = 0.5;
    m.k = DenseMatrix::Zero(2, 2);
    m.k(0, 1) = 0.1;  // 0.1 e1 e2^H
    const auto pair = framework::make_perturbed(m);
    const auto dec = numcore::eig_general(pair.bk);
    // Cross-check oracle: the 2x2 characteristic polynomial of bk directly.
    const Complex tr = pair.bk(0, 0) + pair.bk(1, 1);
    const Complex det = pair.bk(0, 0) * pair.bk(1, 1) - pair.bk(0, 1) * pair.bk(1, 0);
    CHECK(std::abs(tr - Complex(3.0)) <= 1e-12);
    CHECK(std::abs(det - Complex(2.0)) <= 1e-12);
    CHECK(std::abs(dec.values[0] - Complex(1.0)) <= 1e-10);
    CHECK(std::abs(dec.values[1] - Complex(2.0)) <= 1e-10);
}

TEST_CASE("make_perturbed: PerturbedPair invariants on a random admissible model") {
    const auto model = experiments::random_admissible_model(30, 42);
    const auto pair = framework::make_perturbed(model);
    const int n = model.dim();
    const DenseMatrix eye = DenseMatrix::Identity(n, n);

    const double kappa = numcore::condition_number_2(pair.bk);
    CHECK(numcore::norm2(pair.bk_inv * pair.bk - eye) <= 1e-9 * kappa);

    const DenseMatrix forward = (eye + pair.kl) * pair.lk;
    CHECK((pair.bk - forward).cwiseAbs().maxCoeff() <= 1e-10 * numcore::norm2(pair.bk));

    const DenseMatrix similar = pair.lk_inv * pair.reference_l * pair.lk;
    CHECK(numcore::norm2(pair.bk - similar) <= 1e-9 * numcore::norm2(pair.bk));

    // Inverse consistency: formula route equals inverse(bk).
    CHECK(numcore::norm2(pair.bk_inv - numcore::inverse(pair.bk)) <=
          1e-9 * numcore::norm2(pair.bk_inv) * kappa);
}

TEST_CASE("make_perturbed: singular lk_inv is rejected as not correct") {
    RestrictionModel m;
    m.l_inv = DenseMatrix::Identity(2, 2);
    m.k = -DenseMatrix::Identity(2, 2);  // l_inv + k = 0
    CHECK_THROWS_AS(framework::make_perturbed(m), SingularMatrixError);
}

TEST_CASE("make_perturbed_adjoint: K = 0 gives B_K* = L*") {
    DenseMatrix l_inv(2, 2);
    l_inv << Complex(1, 1), 0.3, 0.0, Complex(2, -1);
    const auto model = zero_k_model(l_inv);
    const auto adj = framework::make_perturbed_adjoint(model);
    const auto fwd = framework::make_perturbed(model);
    CHECK((adj.bk - fwd.reference_l.adjoint()).cwiseAbs().maxCoeff() <= 1e-12);
}

TEST_CASE("make_perturbed_adjoint: coherence and conjugate spectrum") {
    const auto model = experiments::random_admissible_model(25, 7);
    const auto fwd = framework::make_perturbed(model);
    const auto adj = framework::make_perturbed_adjoint(model);
    CHECK(numcore::norm2(adj.bk - fwd.bk.adjoint()) <= 1e-9 * numcore::norm2(fwd.bk));

    // sigma(B_K*) = conjugates of sigma(B_K) as multisets.
    const auto rep = framework::spectra_match(adj.bk, DenseMatrix(fwd.bk.adjoint()),
                                              1e-9 * numcore::norm2(fwd.bk));
    CHECK(rep.passed);
}

TEST_CASE("identity_suite: K = 0 residuals vanish to round-off") {
    const auto model = zero_k_model(DenseMatrix::Identity(6, 6) * Complex(1.0, 0.5));
    for (const auto& id : framework::identity_suite(model)) {
        INFO(id.name);
        CHECK(id.max_residual <= 1e-13);
    }
}

TEST_CASE("identity_suite: random admissible n = 50 residuals <= 1e-9") {
    const auto model = experiments::random_admissible_model(50, 11);
    for (const auto& id : framework::identity_suite(model)) {
        INFO(id.name);
        CHECK(id.max_residual <= 1e-9);
    }
}

TEST_CASE("spectra_match: equal inputs and the nonzero-spectrum rule") {
    DenseMatrix a = DenseMatrix::Zero(3, 3);
    a.diagonal() << 1.0, 2.0, 0.0;
    DenseMatrix b = DenseMatrix::Zero(3, 3);
    b.diagonal() << 2.0, 1.0, 0.0;

    const auto same = framework::spectra_match(a, a, 1e-12);
    CHECK(same.passed);
    CHECK(same.max_abs_diff == 0.0);

    const auto rep = framework::spectra_match(a, b, 1e-12);
    CHECK(rep.passed);               // zeros exempt, {1,2} matches {2,1}
    CHECK(rep.pairs.size() == 2);    // the zero eigenvalue is not reported
}

TEST_CASE("spectra_match: sigma(RS) \\ {0} = sigma(SR) \\ {0} for rectangular factors") {
    std::mt19937_64 rng(99);
    std::normal_distribution<double> nd;
    const int n = 7, m = 4;
    DenseMatrix r(n, m), s(m, n);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < m; ++j) {
            r(i, j) = Complex(nd(rng), nd(rng));
            s(j, i) = Complex(nd(rng), nd(rng));
        }
    const DenseMatrix rs = r * s;  // n x n
    const DenseMatrix sr = s * r;  // m x m, same nonzero spectrum
    // Compare within the common m x m frame by padding sr with zeros.
    DenseMatrix sr_pad = DenseMatrix::Zero(n, n);
    sr_pad.topLeftCorner(m, m) = sr;
    const auto rep = framework::spectra_match(rs, sr_pad, 1e-9 * numcore::norm2(rs));
    CHECK(rep.passed);
}

TEST_CASE("eigvec_transfer_check: K = 0 reduces to the reference residual") {
    const auto model = zero_k_model(DenseMatrix(
        DenseMatrix::Identity(5, 5) + 0.1 * DenseMatrix::Ones(5, 5)));
    const auto pair = framework::make_perturbed(model);
    const auto rep = framework::eigvec_transfer_check(pair, 5);
    CHECK(rep.passed);
    for (const auto& e : rep.pairs) CHECK(e.vec_residual <= 1e-10 * numcore::norm2(pair.bk));
}

TEST_CASE("eigvec_transfer_check: random admissible model, 10 modes") {
    const auto model = experiments::random_admissible_model(40, 21);
    const auto pair = framework::make_perturbed(model);
    const auto rep = framework::eigvec_transfer_check(pair, 10);
    CHECK(rep.passed);
    for (const auto& e : rep.pairs) CHECK(e.vec_residual <= 1e-8 * numcore::norm2(pair.bk));
}

TEST_CASE("eigvec_transfer_check: modes beyond dimension are clamped with a note") {
    const auto model = experiments::random_admissible_model(6, 5);
    const auto pair = framework::make_perturbed(model);
    const auto rep = framework::eigvec_transfer_check(pair, 100);
    CHECK(rep.pairs.size() == 6);
    CHECK(!rep.note.empty());
}

TEST_CASE("transfer property: every eigenpair of L transfers through I + KL") {
    const auto model = experiments::random_admissible_model(35, 33);
    const auto pair = framework::make_perturbed(model);
    const auto rep = framework::eigvec_transfer_check(pair, 35);
    CHECK(rep.passed);
}

TEST_CASE("riesz_diagnostic: normal B_K is near 1; Jordan block is the sentinel") {
    DenseMatrix l_inv = DenseMatrix::Zero(4, 4);
    l_inv.diagonal() << Complex(1, 0), Complex(0.5, 0.1), Complex(0.25, -0.3), Complex(2, 1);
    const auto normal_pair = framework::make_perturbed(zero_k_model(l_inv));
    CHECK(framework::riesz_diagnostic(normal_pair) <= 1.0 + 1e-6);

    DenseMatrix jordan(2, 2);
    jordan << 2.0, 1.0, 0.0, 2.0;  // defective: one eigenvector for lambda = 2
    const auto defective_pair = framework::make_perturbed(zero_k_model(numcore::inverse(jordan)));
    CHECK(std::isinf(framework::riesz_diagnostic(defective_pair)));
}

TEST_CASE("quasinilpotence_report: strictly triangular bk_inv and scalar case") {
    // K = 0, l_inv = diag(1/2): the sequence is constant 1/2.
    DenseMatrix half = DenseMatrix::Identity(3, 3) * 0.5;
    const auto pair = framework::make_perturbed(zero_k_model(half));
    const auto rep = framework::quasinilpotence_report(pair, 6);
    for (double r : rep.power_norms) CHECK(std::abs(r - 0.5) <= 1e-10);
    CHECK(std::abs(rep.spectral_radius - 0.5) <= 1e-10);

    // Strictly lower-triangular inverse: r_n = 0 for n >= dimension.
    PerturbedPair nil;
    nil.bk_inv = DenseMatrix::Zero(5, 5);
    for (int i = 1; i < 5; ++i) nil.bk_inv(i, i - 1) = 1.0;
    const auto nrep = framework::quasinilpotence_report(nil, 8);
    CHECK(nrep.power_norms[4] == 0.0);
    CHECK(nrep.power_norms[7] == 0.0);
}

TEST_CASE("isospectrality property across random admissible models") {
    for (std::uint64_t seed : {101, 102, 103}) {
        const auto model = experiments::random_admissible_model(20, seed);
        const auto pair = framework::make_perturbed(model);
        const double tol = 1e-8 * numcore::norm2(pair.reference_l);
        CHECK(framework::spectra_match(pair.bk, pair.reference_l, tol).passed);
    }
}
