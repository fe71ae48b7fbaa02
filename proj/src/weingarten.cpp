#include "mpsens/weingarten.hpp"

#include <fmt/format.h>

#include <Eigen/Eigenvalues>
#include <Eigen/QR>

#include <cmath>

namespace mpsens {

RealMatrix permutation_gram(int k, double dim) {
    const auto perms = all_permutations(k);
    const auto n     = static_cast<Index>(perms.size());
    RealMatrix g(n, n);
    for(Index i = 0; i < n; ++i)
        for(Index j = 0; j < n; ++j)
            g(i, j) = std::pow(dim, (perms[static_cast<std::size_t>(i)].inverse() * perms[static_cast<std::size_t>(j)]).cycle_count());
    return g;
}

double WeingartenMatrix::wg(const Permutation &s) const { return w(0, static_cast<Index>(permutation_index(s))); }

WeingartenMatrix weingarten_matrix(int k, double dim) {
    if(k < 1) throw std::invalid_argument("weingarten_matrix: k must be positive");
    if(dim < k) throw std::invalid_argument(fmt::format("weingarten_matrix: D = {} < k = {}, the Gram matrix is singular", dim, k));
    WeingartenMatrix out;
    out.k     = k;
    out.dim   = dim;
    out.perms = all_permutations(k);
    out.w     = permutation_gram(k, dim).inverse();
    return out;
}

namespace {

    RealMatrix gram_inverse(int k, double dim) {
        const RealMatrix g = permutation_gram(k, dim);
        if(dim >= k) return g.inverse();
        // Below the invertibility regime the Weingarten function is the pseudo-inverse.
        return g.completeOrthogonalDecomposition().pseudoInverse();
    }

    RealVector leading_left(const RealMatrix &m) {
        Eigen::EigenSolver<RealMatrix> es(m.transpose());
        Index                          best = 0;
        for(Index i = 1; i < es.eigenvalues().size(); ++i)
            if(std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(best))) best = i;
        if(std::abs(es.eigenvalues()(best).imag()) > 1e-10) throw NumericalError("leading eigenvalue of the averaged transfer matrix is complex");
        return es.eigenvectors().col(best).real();
    }

    RealVector leading_right(const RealMatrix &m, double &value) {
        Eigen::EigenSolver<RealMatrix> es(m);
        Index                          best = 0;
        for(Index i = 1; i < es.eigenvalues().size(); ++i)
            if(std::abs(es.eigenvalues()(i)) > std::abs(es.eigenvalues()(best))) best = i;
        value = es.eigenvalues()(best).real();
        return es.eigenvectors().col(best).real();
    }

    Index capped_pow(Index d, Index e, Index cap) {
        Index v = 1;
        for(Index i = 0; i < e && v < cap; ++i) v *= d;
        return std::min(v, cap);
    }

} // namespace

RealMatrix averaged_coefficients(int k, Index d, double chi_right, const Permutation &alpha) {
    if(alpha.size() != k) throw std::invalid_argument("averaged_coefficients: permutation size differs from k");
    const auto       perms = all_permutations(k);
    const RealMatrix w     = gram_inverse(k, static_cast<double>(d) * chi_right);
    const Permutation ainv = alpha.inverse();
    RealMatrix        m    = w;
    for(Index j = 0; j < m.cols(); ++j)
        m.col(j) *= std::pow(static_cast<double>(d), (ainv * perms[static_cast<std::size_t>(j)]).cycle_count());
    return m;
}

ShiftedReplicaTM averaged_replica_tm(int k, Index d, double chi) {
    if(static_cast<double>(d) * chi < k)
        throw std::invalid_argument(fmt::format("averaged_replica_tm: d * chi = {} < k = {}", static_cast<double>(d) * chi, k));
    const RealMatrix g = permutation_gram(k, chi);
    ShiftedReplicaTM out;
    out.k        = k;
    out.d        = d;
    out.chi      = chi;
    out.identity = averaged_coefficients(k, d, chi, Permutation::identity(k)) * g;
    out.cyclic   = averaged_coefficients(k, d, chi, Permutation::cycle(k)) * g;
    return out;
}

double rmps_averaged_Ik(int k, Index d, double chi, Index r) {
    if(k < 2) throw std::invalid_argument("rmps_averaged_Ik: k must be at least 2");
    if(r < 0) throw std::invalid_argument("rmps_averaged_Ik: r must be non-negative");
    const auto tm = averaged_replica_tm(k, d, chi);
    const auto n  = tm.identity.rows();

    // Right boundary: the identity pairing, an exact fixed point of every RMPS tensor.
    RealVector r_vec = RealVector::Zero(n);
    r_vec(0)         = 1.0; // identity permutation is first in lexicographic order
    RealVector l_vec = leading_left(tm.identity);
    l_vec /= l_vec.dot(r_vec);

    double     lam1  = 0;
    RealVector r1    = leading_right(tm.cyclic, lam1);
    RealVector l1    = leading_left(tm.cyclic);
    if(std::abs(lam1 - 1.0) > 1e-8) throw NumericalError(fmt::format("rmps_averaged_Ik: leading eigenvalue {} differs from 1", lam1));

    RealVector v = r_vec;
    for(Index i = 0; i < r; ++i) v = tm.cyclic * v;
    const double num = l_vec.dot(v);
    const double den = l_vec.dot(r1) * l1.dot(r_vec) / l1.dot(r1);
    if(!(num > 0 && den > 0)) throw NumericalError("rmps_averaged_Ik: non-positive averaged trace");
    return std::log(num / den) / (k - 1);
}

double rmps_finite_averaged_trace(Index n, Index chi, Index d, int k, const std::vector<bool> &in_region) {
    if(static_cast<Index>(in_region.size()) != n) throw DimensionError("rmps_finite_averaged_trace: region mask has the wrong length");
    const Permutation e = Permutation::identity(k), c = Permutation::cycle(k);
    const auto        nperm = static_cast<Index>(all_permutations(k).size());
    RealVector        y     = RealVector::Ones(nperm); // right boundary: every pairing of a 1-dim bond is 1
    for(Index i = n - 1; i >= 0; --i) {
        const Index right = capped_pow(d, n - 1 - i, chi);
        const auto &alpha = in_region[static_cast<std::size_t>(i)] ? c : e;
        const RealMatrix m = averaged_coefficients(k, d, static_cast<double>(right), alpha);
        y = (i == n - 1) ? RealVector(m * y) : RealVector(m * permutation_gram(k, static_cast<double>(right)) * y);
    }
    return y.sum();
}

double rmps_finite_averaged_Ik(Index n, Index chi, Index d, int k, Index r) {
    const Index a_end = (n - r) / 2, b_begin = a_end + r;
    if(a_end < 1 || b_begin >= n) throw std::invalid_argument("rmps_finite_averaged_Ik: layout leaves an empty block");
    std::vector<bool> a(static_cast<std::size_t>(n), false), b = a, ab = a;
    for(Index i = 0; i < a_end; ++i) a[static_cast<std::size_t>(i)] = ab[static_cast<std::size_t>(i)] = true;
    for(Index i = b_begin; i < n; ++i) b[static_cast<std::size_t>(i)] = ab[static_cast<std::size_t>(i)] = true;
    const double tab = rmps_finite_averaged_trace(n, chi, d, k, ab);
    const double ta  = rmps_finite_averaged_trace(n, chi, d, k, a);
    const double tb  = rmps_finite_averaged_trace(n, chi, d, k, b);
    return std::log(tab / (ta * tb)) / (k - 1);
}

std::vector<SlopePoint> log_slope(const std::vector<double> &chi, const std::vector<double> &values) {
    if(chi.size() != values.size()) throw std::invalid_argument("log_slope: grids differ in length");
    if(chi.size() < 3) throw std::invalid_argument("log_slope: need at least 3 grid points");
    std::vector<SlopePoint> out;
    for(std::size_t i = 1; i + 1 < chi.size(); ++i) {
        const double dl = std::log(chi[i + 1]) - std::log(chi[i - 1]);
        out.push_back({chi[i], (values[i + 1] - values[i - 1]) / dl});
    }
    return out;
}

std::vector<SlopePoint> ik_slope_scan(int k, Index d, const std::vector<double> &chi_grid, Index r) {
    if(chi_grid.size() < 3) throw std::invalid_argument("ik_slope_scan: need at least 3 grid points");
    std::vector<double> vals;
    for(double chi : chi_grid) vals.push_back(rmps_averaged_Ik(k, d, chi, r));
    return log_slope(chi_grid, vals);
}

} // namespace mpsens
