#include "mpsens/linalg.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>
#include <Eigen/SVD>

#include <lapacke.h>

#include <mutex>

extern "C" void openblas_set_num_threads(int);

namespace mpsens::linalg {

namespace {

// Eigen's complex Schur is O(10x) slower than zgeev beyond a few hundred rows.
constexpr Index lapack_eig_threshold = 16;

EigResult eig_lapack(const ComplexMatrix &m, bool want_vectors) {
    // Parallelism lives in the sweep workers; a threaded BLAS underneath would oversubscribe.
    static std::once_flag once;
    std::call_once(once, [] { openblas_set_num_threads(1); });
    const auto    n = static_cast<lapack_int>(m.rows());
    ComplexMatrix a = m;
    ComplexVector w(m.rows());
    ComplexMatrix vr(want_vectors ? m.rows() : 1, want_vectors ? m.rows() : 1);
    const lapack_int info = LAPACKE_zgeev(LAPACK_COL_MAJOR, 'N', want_vectors ? 'V' : 'N', n, reinterpret_cast<lapack_complex_double *>(a.data()), n,
                                          reinterpret_cast<lapack_complex_double *>(w.data()), nullptr, 1,
                                          reinterpret_cast<lapack_complex_double *>(vr.data()), want_vectors ? n : 1);
    if(info != 0) throw ConvergenceError(fmt::format("eig_general: zgeev returned {} for {}x{} matrix", info, m.rows(), m.cols()));
    EigResult res;
    res.values = std::move(w);
    if(want_vectors) res.vectors = std::move(vr);
    return res;
}

} // namespace

void require_finite(const ComplexMatrix &m, const std::string &what) {
    if(!m.allFinite()) throw NumericalError(fmt::format("{}: non-finite entry in {}x{} matrix", what, m.rows(), m.cols()));
}

ComplexMatrix SvdResult::reconstruct() const { return u * s.cast<cplx>().asDiagonal() * v.adjoint(); }

ComplexMatrix matmul(const ComplexMatrix &a, const ComplexMatrix &b) {
    if(a.cols() != b.rows())
        throw DimensionError(fmt::format("matmul: inner dimensions differ ({}x{} * {}x{})", a.rows(), a.cols(), b.rows(), b.cols()));
    return a * b;
}

SvdResult svd(const ComplexMatrix &m, const Config &cfg) {
    if(m.size() == 0) throw DimensionError("svd: empty matrix");
    require_finite(m, "svd");
    SvdResult res;
    if(std::min(m.rows(), m.cols()) <= 16) {
        Eigen::JacobiSVD<ComplexMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if(solver.info() != Eigen::Success)
            throw ConvergenceError(fmt::format("svd: no convergence for {}x{} matrix", m.rows(), m.cols()));
        res = {solver.matrixU(), solver.singularValues(), solver.matrixV()};
    } else {
        Eigen::BDCSVD<ComplexMatrix> solver(m, Eigen::ComputeThinU | Eigen::ComputeThinV);
        if(solver.info() != Eigen::Success)
            throw ConvergenceError(fmt::format("svd: no convergence for {}x{} matrix", m.rows(), m.cols()));
        res = {solver.matrixU(), solver.singularValues(), solver.matrixV()};
    }
    if(!res.u.allFinite() || !res.v.allFinite() || !res.s.allFinite())
        throw ConvergenceError(fmt::format("svd: non-finite factors for {}x{} matrix", m.rows(), m.cols()));
    if(cfg.verify_svd) {
        const double err = relative_frobenius_error(res.reconstruct(), m);
        if(err > cfg.reconstruction_tol)
            throw ConvergenceError(fmt::format("svd: reconstruction error {:.3e} for {}x{} matrix", err, m.rows(), m.cols()));
    }
    return res;
}

ComplexMatrix qr_unitary(const ComplexMatrix &m, const Config &cfg) {
    if(m.rows() != m.cols() || m.size() == 0)
        throw DimensionError(fmt::format("qr_unitary: expected a non-empty square matrix, got {}x{}", m.rows(), m.cols()));
    require_finite(m, "qr_unitary");
    Eigen::HouseholderQR<ComplexMatrix> qr(m);
    const Index   n = m.rows();
    ComplexMatrix q = qr.householderQ() * ComplexMatrix::Identity(n, n);
    const auto   &r = qr.matrixQR();
    const double  scale = std::max(m.cwiseAbs().maxCoeff(), 1.0);
    for(Index j = 0; j < n; ++j) {
        const cplx   rjj = r(j, j);
        const double mag = std::abs(rjj);
        if(mag <= cfg.rank_tol * scale)
            throw NumericalError(fmt::format("qr_unitary: input is rank deficient (|R_{0}{0}| = {1:.3e})", j, mag));
        q.col(j) *= rjj / mag;
    }
    return q;
}

EigResult eig_general(const ComplexMatrix &m, bool want_vectors, const Config &cfg) {
    if(m.rows() != m.cols()) throw DimensionError(fmt::format("eig_general: matrix is not square ({}x{})", m.rows(), m.cols()));
    if(m.rows() > cfg.dense_cap)
        throw BudgetExceeded(fmt::format("eig_general: dimension {} exceeds the dense cap {}", m.rows(), cfg.dense_cap));
    require_finite(m, "eig_general");
    EigResult res;
    if(m.rows() == 0) return res;
    if(m.rows() > lapack_eig_threshold) {
        res = eig_lapack(m, want_vectors);
        if(res.vectors && !res.vectors->allFinite()) throw ConvergenceError("eig_general: eigenvectors are not finite");
        return res;
    }
    Eigen::ComplexEigenSolver<ComplexMatrix> solver(m, want_vectors);
    if(solver.info() != Eigen::Success)
        throw ConvergenceError(fmt::format("eig_general: no convergence for {}x{} matrix", m.rows(), m.cols()));
    res.values = solver.eigenvalues();
    if(want_vectors) {
        ComplexMatrix vecs = solver.eigenvectors();
        // Defective input can produce non-finite columns from the triangular back-substitution.
        for(Index j = 0; j < vecs.cols(); ++j) {
            if(!vecs.col(j).allFinite()) throw ConvergenceError(fmt::format("eig_general: eigenvector {} is not finite", j));
        }
        res.vectors = std::move(vecs);
    }
    return res;
}

ComplexMatrix kron(const ComplexMatrix &a, const ComplexMatrix &b, const Config &cfg) {
    const Index rows = a.rows() * b.rows();
    const Index cols = a.cols() * b.cols();
    if(rows > cfg.kron_cap || cols > cfg.kron_cap)
        throw BudgetExceeded(fmt::format("kron: output {}x{} exceeds the cap {}", rows, cols, cfg.kron_cap));
    ComplexMatrix out(rows, cols);
    for(Index i = 0; i < a.rows(); ++i)
        for(Index j = 0; j < a.cols(); ++j) out.block(i * b.rows(), j * b.cols(), b.rows(), b.cols()) = a(i, j) * b;
    return out;
}

double relative_frobenius_error(const ComplexMatrix &approx, const ComplexMatrix &exact) {
    const double denom = exact.norm();
    const double diff  = (approx - exact).norm();
    return denom > 0 ? diff / denom : diff;
}

double unitarity_defect(const ComplexMatrix &u) {
    const ComplexMatrix g = u.adjoint() * u - ComplexMatrix::Identity(u.cols(), u.cols());
    return g.cwiseAbs().maxCoeff();
}

} // namespace mpsens::linalg
