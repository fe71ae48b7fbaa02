#pragma once

#include "mpsens/mps.hpp"

#include <cstdint>
#include <span>
#include <string>
#include <vector>

namespace mpsens {

/// T = sum_sigma conj(A^sigma) ⊗ A^sigma, dimension chi_l^2 x chi_r^2.
/// Vector index a' * chi + a with a' on the conjugated copy.
[[nodiscard]] ComplexMatrix transfer_matrix(const SiteTensor &a, const linalg::Config &cfg = {});

/// T^O = sum_{sigma sigma'} O_{sigma sigma'} conj(A^sigma) ⊗ A^sigma'.
[[nodiscard]] ComplexMatrix transfer_matrix_op(const SiteTensor &a, const ComplexMatrix &op, const linalg::Config &cfg = {});

/// Vectorised identity on a chi-dimensional bond in the transfer-matrix index order.
[[nodiscard]] ComplexVector vec_identity(Index chi);

struct TransferSpectrum {
    std::vector<cplx> eigenvalues;
    Index             chi  = 0;
    Index             site = 0;
    std::string       family;
    double            p    = 0.0;
    std::uint64_t     seed = 0;
    Index             unit_count   = 0; // eigenvalues with |λ| > 1 - unit_tol before removal
    bool              unit_removed = false;
};

/// Full eigenvalue multiset of T. With remove_unit, eigenvalues with
/// |λ| > 1 - unit_tol are dropped.
[[nodiscard]] TransferSpectrum spectrum(const SiteTensor &a, bool remove_unit = false, double unit_tol = 1e-6,
                                        const linalg::Config &cfg = {});

/// Tensor at `site` after bringing the chain to left-canonical form
/// (orthogonality center on the last site).
[[nodiscard]] SiteTensor left_canonical_site(const MpsState &state, Index site);

struct RadialDensity {
    RealVector edges;   // bins + 1 values over [0, 1]
    RealVector density; // probability density per unit radius
    Index      count = 0;

    [[nodiscard]] double bin_width() const { return edges(1) - edges(0); }
};

/// Histogram of |λ| pooled over all spectra. Unit eigenvalues are dropped
/// unless already removed.
[[nodiscard]] RadialDensity radial_density(std::span<const TransferSpectrum> spectra, Index bins = 100, double unit_tol = 1e-6);

/// Fraction of pooled non-unit eigenvalues with |λ| < rho; 0 if there are none.
[[nodiscard]] double small_eig_fraction(std::span<const TransferSpectrum> spectra, double rho, double unit_tol = 1e-6);

/// Non-unit eigenvalue moduli pooled over all spectra.
[[nodiscard]] std::vector<double> pooled_moduli(std::span<const TransferSpectrum> spectra, double unit_tol = 1e-6);

struct SpectralGap {
    double lambda_max = 0.0; // largest modulus after removing the eigenvalue 1
    double gap        = 1.0;
    double xi         = 0.0; // -1/log|λ_max|, 0 when λ_max = 0
};

[[nodiscard]] SpectralGap spectral_gap(const TransferSpectrum &s);

struct CorrelatorPaths {
    cplx eigen;
    cplx direct;
    bool eigen_available = false;
};

/// Connected two-point function <O_i O_{i+r+1}>_c of a one-site uniform state,
/// evaluated by the transfer-matrix eigen-expansion and by r-fold application.
/// Throws NumericalError if both paths run and disagree by more than 1e-8.
[[nodiscard]] cplx connected_correlator(const MpsState &state, const ComplexMatrix &op, Index r, CorrelatorPaths *paths = nullptr,
                                        const linalg::Config &cfg = {});

/// a - b per bin; throws on different binning.
[[nodiscard]] RealVector density_difference(const RadialDensity &a, const RadialDensity &b);

} // namespace mpsens
