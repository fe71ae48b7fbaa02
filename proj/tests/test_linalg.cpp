#include "helpers.hpp"

#include "mpsens/linalg.hpp"

#include <gtest/gtest.h>

#include <Eigen/Eigenvalues>

#include <algorithm>

using namespace mpsens;
using namespace testing_helpers;

TEST(Linalg, MatmulMatchesTripleLoop) {
    CounterRng    rng(11);
    ComplexMatrix a = random_matrix(5, 7, rng), b = random_matrix(7, 3, rng);
    ComplexMatrix ref = ComplexMatrix::Zero(5, 3);
    for(Index i = 0; i < 5; ++i)
        for(Index j = 0; j < 3; ++j)
            for(Index l = 0; l < 7; ++l) ref(i, j) += a(i, l) * b(l, j);
    EXPECT_LT((linalg::matmul(a, b) - ref).cwiseAbs().maxCoeff(), 1e-13);
    EXPECT_THROW((void)linalg::matmul(a, a), DimensionError);
}

TEST(Linalg, SvdFactorsAndOrdering) {
    CounterRng rng(12);
    for(auto [r, c] : {std::pair<Index, Index>{6, 4}, {4, 9}, {30, 20}}) {
        const ComplexMatrix m   = random_matrix(r, c, rng);
        linalg::Config      cfg;
        cfg.verify_svd      = true;
        const auto res      = linalg::svd(m, cfg);
        EXPECT_LT(linalg::relative_frobenius_error(res.reconstruct(), m), 1e-12);
        EXPECT_LT(linalg::unitarity_defect(res.u), 1e-12);
        EXPECT_LT(linalg::unitarity_defect(res.v), 1e-12);
        for(Index i = 1; i < res.s.size(); ++i) EXPECT_GE(res.s(i - 1), res.s(i));
        EXPECT_GE(res.s.minCoeff(), 0.0);
    }
}

TEST(Linalg, SvdSingularValuesMatchHermitianEigenvalues) {
    CounterRng                                     rng(13);
    const ComplexMatrix                            m = random_matrix(8, 5, rng);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(m.adjoint() * m);
    std::vector<double>                            ev(es.eigenvalues().data(), es.eigenvalues().data() + 5);
    std::sort(ev.rbegin(), ev.rend());
    const auto s = linalg::svd(m).s;
    for(Index i = 0; i < 5; ++i) EXPECT_NEAR(s(i) * s(i), ev[static_cast<std::size_t>(i)], 1e-10);
}

TEST(Linalg, QrUnitaryIsUnitaryWithPositiveR) {
    CounterRng          rng(14);
    const ComplexMatrix g = random_matrix(6, 6, rng);
    const ComplexMatrix q = linalg::qr_unitary(g);
    EXPECT_LT(linalg::unitarity_defect(q), 1e-12);
    const ComplexMatrix r = q.adjoint() * g;
    for(Index i = 0; i < 6; ++i) {
        EXPECT_NEAR(r(i, i).imag(), 0.0, 1e-12);
        EXPECT_GT(r(i, i).real(), 0.0);
        for(Index j = 0; j < i; ++j) EXPECT_LT(std::abs(r(i, j)), 1e-12);
    }
    EXPECT_THROW((void)linalg::qr_unitary(ComplexMatrix::Zero(3, 3)), NumericalError);
}

TEST(Linalg, EigOfHermitianMatchesSelfAdjointSolver) {
    CounterRng          rng(15);
    const ComplexMatrix a = random_matrix(7, 7, rng);
    const ComplexMatrix h = a + a.adjoint();
    auto                res = linalg::eig_general(h, true);
    std::vector<double> got;
    for(Index i = 0; i < res.values.size(); ++i) got.push_back(res.values(i).real());
    std::sort(got.begin(), got.end());
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(h);
    for(Index i = 0; i < 7; ++i) EXPECT_NEAR(got[static_cast<std::size_t>(i)], es.eigenvalues()(i), 1e-10);
    const ComplexMatrix &v = *res.vectors;
    EXPECT_LT((h * v - v * res.values.asDiagonal()).cwiseAbs().maxCoeff(), 1e-10);
}

TEST(Linalg, EigOfCompanionMatrixGivesCubicRoots) {
    // x^3 - 6x^2 + 11x - 6 = (x-1)(x-2)(x-3)
    ComplexMatrix c = ComplexMatrix::Zero(3, 3);
    c(0, 0) = 6;
    c(0, 1) = -11;
    c(0, 2) = 6;
    c(1, 0) = 1;
    c(2, 1) = 1;
    auto                res = linalg::eig_general(c, false);
    std::vector<double> got;
    for(Index i = 0; i < 3; ++i) {
        EXPECT_NEAR(res.values(i).imag(), 0.0, 1e-10);
        got.push_back(res.values(i).real());
    }
    std::sort(got.begin(), got.end());
    EXPECT_NEAR(got[0], 1.0, 1e-10);
    EXPECT_NEAR(got[1], 2.0, 1e-10);
    EXPECT_NEAR(got[2], 3.0, 1e-10);
}

TEST(Linalg, EigLargeMatchesKnownSpectrum) {
    // n > 16 takes the LAPACK path; S diag(lambda) S^-1 has a known spectrum
    CounterRng          rng(17);
    const Index         n = 40;
    ComplexVector       lam(n);
    for(Index i = 0; i < n; ++i) lam(i) = std::polar(0.1 + 0.02 * static_cast<double>(i), 0.3 * static_cast<double>(i));
    const ComplexMatrix s = random_matrix(n, n, rng) + 4.0 * ComplexMatrix::Identity(n, n);
    const ComplexMatrix m = s * lam.asDiagonal() * s.inverse();
    const auto          res = linalg::eig_general(m, true);
    ASSERT_EQ(res.values.size(), n);
    for(Index i = 0; i < n; ++i) EXPECT_LT((res.values.array() - lam(i)).abs().minCoeff(), 1e-9) << i;
    const ComplexMatrix &v = *res.vectors;
    EXPECT_LT((m * v - v * res.values.asDiagonal()).cwiseAbs().maxCoeff(), 1e-9);
    Eigen::ComplexEigenSolver<ComplexMatrix> ref(m, false);
    for(Index i = 0; i < n; ++i) EXPECT_LT((res.values.array() - ref.eigenvalues()(i)).abs().minCoeff(), 1e-9);
}

TEST(Linalg, EigRespectsDenseCap) {
    linalg::Config cfg;
    cfg.dense_cap = 4;
    EXPECT_THROW((void)linalg::eig_general(ComplexMatrix::Identity(5, 5), false, cfg), BudgetExceeded);
}

TEST(Linalg, KronMatchesBlockwiseConstruction) {
    CounterRng          rng(16);
    const ComplexMatrix a = random_matrix(2, 3, rng), b = random_matrix(4, 2, rng);
    ComplexMatrix       ref(8, 6);
    for(Index i = 0; i < 2; ++i)
        for(Index j = 0; j < 3; ++j) ref.block(i * 4, j * 2, 4, 2) = a(i, j) * b;
    EXPECT_LT((linalg::kron(a, b) - ref).cwiseAbs().maxCoeff(), 1e-15);
    linalg::Config cfg;
    cfg.kron_cap = 7;
    EXPECT_THROW((void)linalg::kron(a, b, cfg), BudgetExceeded);
}

TEST(Linalg, RequireFiniteRejectsNan) {
    ComplexMatrix m = ComplexMatrix::Identity(2, 2);
    EXPECT_NO_THROW(linalg::require_finite(m, "m"));
    m(1, 0) = cplx(std::nan(""), 0);
    EXPECT_THROW(linalg::require_finite(m, "m"), NumericalError);
}
