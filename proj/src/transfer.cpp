#include "mpsens/transfer.hpp"

#include <fmt/format.h>

#include <Eigen/LU>

#include <algorithm>
#include <cmath>

namespace mpsens {

ComplexMatrix transfer_matrix(const SiteTensor &a, const linalg::Config &cfg) {
    const Index rows = a.left_dim() * a.left_dim(), cols = a.right_dim() * a.right_dim();
    if(std::max(rows, cols) > cfg.kron_cap)
        throw BudgetExceeded(fmt::format("transfer_matrix: dimension {} exceeds the cap {}", std::max(rows, cols), cfg.kron_cap));
    ComplexMatrix t = ComplexMatrix::Zero(rows, cols);
    for(Index s = 0; s < a.phys_dim(); ++s) t += linalg::kron(a[s].conjugate(), a[s], cfg);
    return t;
}

ComplexMatrix transfer_matrix_op(const SiteTensor &a, const ComplexMatrix &op, const linalg::Config &cfg) {
    if(op.rows() != a.phys_dim() || op.cols() != a.phys_dim())
        throw DimensionError(fmt::format("transfer_matrix_op: operator is {}x{}, expected {}x{}", op.rows(), op.cols(), a.phys_dim(), a.phys_dim()));
    ComplexMatrix t = ComplexMatrix::Zero(a.left_dim() * a.left_dim(), a.right_dim() * a.right_dim());
    for(Index s = 0; s < a.phys_dim(); ++s)
        for(Index sp = 0; sp < a.phys_dim(); ++sp)
            if(op(s, sp) != cplx(0.0)) t += op(s, sp) * linalg::kron(a[s].conjugate(), a[sp], cfg);
    return t;
}

ComplexVector vec_identity(Index chi) {
    ComplexVector v = ComplexVector::Zero(chi * chi);
    for(Index a = 0; a < chi; ++a) v(a * chi + a) = 1.0;
    return v;
}

TransferSpectrum spectrum(const SiteTensor &a, bool remove_unit, double unit_tol, const linalg::Config &cfg) {
    if(a.left_dim() != a.right_dim()) throw DimensionError("spectrum: tensor must have equal left and right bond dimensions");
    const auto       eig = linalg::eig_general(transfer_matrix(a, cfg), false, cfg);
    TransferSpectrum out;
    out.chi = a.left_dim();
    out.eigenvalues.reserve(static_cast<std::size_t>(eig.values.size()));
    for(Index i = 0; i < eig.values.size(); ++i) {
        const cplx l = eig.values(i);
        if(std::abs(l) > 1.0 - unit_tol) {
            ++out.unit_count;
            if(remove_unit) continue;
        }
        out.eigenvalues.push_back(l);
    }
    out.unit_removed = remove_unit;
    return out;
}

SiteTensor left_canonical_site(const MpsState &state, Index site) {
    auto copy = canonicalize(state, state.size() - 1);
    return copy.site(site);
}

std::vector<double> pooled_moduli(std::span<const TransferSpectrum> spectra, double unit_tol) {
    std::vector<double> out;
    for(const auto &s : spectra)
        for(const auto &l : s.eigenvalues) {
            const double m = std::abs(l);
            if(m > 1.0 - unit_tol) continue;
            out.push_back(m);
        }
    return out;
}

RadialDensity radial_density(std::span<const TransferSpectrum> spectra, Index bins, double unit_tol) {
    if(spectra.empty()) throw std::invalid_argument("radial_density: no spectra");
    if(bins < 1) throw std::invalid_argument("radial_density: need at least one bin");
    const auto    mods = pooled_moduli(spectra, unit_tol);
    RadialDensity out;
    out.edges   = RealVector::LinSpaced(bins + 1, 0.0, 1.0);
    out.density = RealVector::Zero(bins);
    out.count   = static_cast<Index>(mods.size());
    if(mods.empty()) return out;
    for(double m : mods) {
        const Index b = std::min<Index>(static_cast<Index>(m * static_cast<double>(bins)), bins - 1);
        out.density(b) += 1.0;
    }
    out.density /= static_cast<double>(mods.size()) * out.bin_width();
    return out;
}

double small_eig_fraction(std::span<const TransferSpectrum> spectra, double rho, double unit_tol) {
    if(spectra.empty()) throw std::invalid_argument("small_eig_fraction: no spectra");
    if(!(rho > 0.0 && rho <= 1.0)) throw std::invalid_argument("small_eig_fraction: rho must lie in (0, 1]");
    const auto mods = pooled_moduli(spectra, unit_tol);
    if(mods.empty()) return 0.0;
    const auto below = std::count_if(mods.begin(), mods.end(), [rho](double m) { return m < rho; });
    return static_cast<double>(below) / static_cast<double>(mods.size());
}

SpectralGap spectral_gap(const TransferSpectrum &s) {
    std::vector<double> mods;
    for(const auto &l : s.eigenvalues) mods.push_back(std::abs(l));
    std::sort(mods.begin(), mods.end(), std::greater<>());
    if(!s.unit_removed) {
        if(mods.size() < 2) throw std::invalid_argument("spectral_gap: need at least two eigenvalues");
        mods.erase(mods.begin());
    } else if(mods.empty()) {
        throw std::invalid_argument("spectral_gap: spectrum has no non-unit eigenvalue");
    }
    SpectralGap g;
    g.lambda_max = mods.front();
    g.gap        = 1.0 - g.lambda_max;
    g.xi         = g.lambda_max > 0.0 ? -1.0 / std::log(g.lambda_max) : 0.0;
    return g;
}

namespace {

    // Dominant eigenvector of m by power iteration, phase-fixed against `ref`.
    ComplexVector dominant_vector(const ComplexMatrix &m, const ComplexVector &ref, cplx &value) {
        ComplexVector v = ref.normalized();
        for(Index it = 0; it < 200000; ++it) {
            ComplexVector w   = m * v;
            const double  nrm = w.norm();
            if(!(nrm > 0)) throw NumericalError("connected_correlator: transfer matrix annihilates the start vector");
            w /= nrm;
            const cplx ph = ref.dot(w);
            if(std::abs(ph) > 0) w *= std::conj(ph) / std::abs(ph);
            if((w - v).norm() < 1e-14) {
                value = v.dot(m * v) / v.squaredNorm();
                return w;
            }
            v = std::move(w);
        }
        throw ConvergenceError("connected_correlator: power iteration for the fixed point did not converge");
    }

} // namespace

cplx connected_correlator(const MpsState &state, const ComplexMatrix &op, Index r, CorrelatorPaths *paths, const linalg::Config &cfg) {
    if(!state.is_uniform() || state.size() != 1) throw std::invalid_argument("connected_correlator: expected a one-site uniform state");
    if(r < 0) throw std::invalid_argument("connected_correlator: r must be non-negative");
    const SiteTensor   &a  = state.site(0);
    const ComplexMatrix t  = transfer_matrix(a, cfg);
    const ComplexMatrix to = transfer_matrix_op(a, op, cfg);
    const Index         chi = a.left_dim();

    CorrelatorPaths res;

    // Direct path: fixed points by power iteration, then r explicit applications.
    cplx                eta;
    const ComplexVector rho = dominant_vector(t, vec_identity(chi), eta);
    const ComplexMatrix tt  = t.transpose();
    cplx                eta_l;
    ComplexVector       l = dominant_vector(tt, vec_identity(chi), eta_l);
    l /= (l.transpose() * rho).value();
    const cplx    mean = (l.transpose() * to * rho)(0, 0) / eta;
    ComplexVector v    = to * rho / eta;
    for(Index i = 0; i < r; ++i) v = t * v / eta;
    res.direct = (l.transpose() * to * v)(0, 0) / eta - mean * mean;

    // Eigen-expansion path.
    if(t.rows() <= cfg.dense_cap) {
        const auto               eig = linalg::eig_general(t, true, cfg);
        const ComplexMatrix     &rv  = *eig.vectors;
        Eigen::FullPivLU<ComplexMatrix> lu(rv);
        if(lu.isInvertible() && lu.rcond() > 1e-12) {
            const ComplexMatrix lv = lu.inverse(); // rows are left eigenvectors, lv * rv = I
            Index               m1 = 0;
            for(Index i = 1; i < eig.values.size(); ++i)
                if(std::abs(eig.values(i)) > std::abs(eig.values(m1))) m1 = i;
            const cplx          lam1 = eig.values(m1);
            const ComplexVector r1   = rv.col(m1);
            const auto          l1   = lv.row(m1);
            cplx                acc  = 0;
            for(Index m = 0; m < eig.values.size(); ++m) {
                if(m == m1) continue;
                cplx w = 1.0;
                for(Index i = 0; i < r; ++i) w *= eig.values(m) / lam1;
                acc += w * (l1 * to * rv.col(m))(0, 0) *
                       (lv.row(m) * to * r1)(0, 0) / (lam1 * lam1);
            }
            res.eigen           = acc;
            res.eigen_available = true;
        }
    }
    if(paths) *paths = res;
    if(res.eigen_available && std::abs(res.eigen - res.direct) > 1e-8)
        throw NumericalError(fmt::format("connected_correlator: eigen path {} and direct path {} disagree", std::abs(res.eigen),
                                         std::abs(res.direct)));
    return res.direct;
}

RealVector density_difference(const RadialDensity &a, const RadialDensity &b) {
    if(a.edges.size() != b.edges.size() || (a.edges - b.edges).cwiseAbs().maxCoeff() > 1e-12)
        throw std::invalid_argument("density_difference: binning differs");
    return a.density - b.density;
}

} // namespace mpsens
