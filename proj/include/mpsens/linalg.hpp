#pragma once

#include <Eigen/Dense>

#include <complex>
#include <optional>
#include <stdexcept>
#include <string>

namespace mpsens {

using cplx          = std::complex<double>;
using Index         = Eigen::Index;
using ComplexMatrix = Eigen::MatrixXcd;
using ComplexVector = Eigen::VectorXcd;
using RealMatrix    = Eigen::MatrixXd;
using RealVector    = Eigen::VectorXd;

/// Base class for all numerical failures raised by the library.
class NumericalError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

class DimensionError : public std::invalid_argument {
  public:
    using std::invalid_argument::invalid_argument;
};

class ConvergenceError : public NumericalError {
  public:
    using NumericalError::NumericalError;
};

/// Raised when a dense object would exceed its configured size cap, or a
/// contraction would exceed its work budget.
class BudgetExceeded : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

namespace linalg {

    /// Tolerances and size caps. Passed explicitly; there is no global state.
    struct Config {
        double reconstruction_tol = 1e-10; // relative Frobenius, svd
        double unitarity_tol      = 1e-12; // qr_unitary, Haar sampling
        double rank_tol           = 1e-13; // relative |R_ii| below which qr_unitary declares rank deficiency
        Index  dense_cap          = 4096;  // largest matrix dimension handed to the dense eigensolver
        Index  kron_cap           = 4096;  // largest row/column count produced by kron
        bool   verify_svd         = false; // re-multiply the factors and check reconstruction_tol
    };

    struct SvdResult {
        ComplexMatrix u; // rows x n, orthonormal columns
        RealVector    s; // n = min(rows, cols), descending, non-negative
        ComplexMatrix v; // cols x n, orthonormal columns; m = u * diag(s) * v^dagger

        [[nodiscard]] ComplexMatrix reconstruct() const;
    };

    struct EigResult {
        ComplexVector                values;
        std::optional<ComplexMatrix> vectors; // right eigenvectors as columns
    };

    /// Throws NumericalError if any entry is NaN or infinite.
    void require_finite(const ComplexMatrix &m, const std::string &what);

    [[nodiscard]] ComplexMatrix matmul(const ComplexMatrix &a, const ComplexMatrix &b);

    [[nodiscard]] SvdResult svd(const ComplexMatrix &m, const Config &cfg = {});

    /// Q factor of a QR decomposition with the phases of diag(R) absorbed, so
    /// that R has a positive diagonal. Applied to a Ginibre matrix this yields a
    /// Haar-distributed unitary.
    [[nodiscard]] ComplexMatrix qr_unitary(const ComplexMatrix &m, const Config &cfg = {});

    [[nodiscard]] EigResult eig_general(const ComplexMatrix &m, bool want_vectors, const Config &cfg = {});

    /// Kronecker product with row-major pairing:
    ///   kron(a, b)(i * b.rows() + k, j * b.cols() + l) = a(i, j) * b(k, l).
    /// Every vectorised two-leg object in this library uses the same pairing,
    /// i.e. the first factor's index is the slow (most significant) one.
    [[nodiscard]] ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b, const Config &cfg = {});

    [[nodiscard]] double relative_frobenius_error(const ComplexMatrix &approx, const ComplexMatrix &exact);

    /// max |(U^dagger U - I)_{ij}|
    [[nodiscard]] double unitarity_defect(const ComplexMatrix &u);

} // namespace linalg
} // namespace mpsens
