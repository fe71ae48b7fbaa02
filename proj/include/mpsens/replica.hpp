#pragma once

#include "mpsens/mps.hpp"
#include "mpsens/permutation.hpp"

#include <vector>

namespace mpsens {

enum class ReplicaMode { automatic, dense, contraction };

/// k-replicated transfer operator
///   T_alpha = sum_sigma prod_i δ(σ_i, σ'_alpha(i)) ⊗_i A^{σ_i} ⊗ conj(A^{σ'_i}).
/// Vectors have 2k legs ordered (bra_1, ket_1, ..., bra_k, ket_k), the first leg
/// most significant, so k = 1 uses the same index order as transfer_matrix.
/// Ket leg i carries A^{σ_i}; bra leg alpha(i) carries conj(A^{σ_i}).
class ReplicaOperator {
  public:
    ReplicaOperator(const SiteTensor &a, Permutation alpha, ReplicaMode mode = ReplicaMode::automatic, Index dense_cap = 4096);

    [[nodiscard]] int   k() const { return alpha_.size(); }
    [[nodiscard]] Index in_dim() const;  // right bond, chi_r^{2k}
    [[nodiscard]] Index out_dim() const; // left bond, chi_l^{2k}
    [[nodiscard]] const Permutation &alpha() const { return alpha_; }
    [[nodiscard]] bool               is_dense() const { return dense_.has_value(); }

    /// T v (contracts the right bond legs).
    [[nodiscard]] ComplexVector apply(const ComplexVector &v) const;
    /// v^T T as a column vector (contracts the left bond legs).
    [[nodiscard]] ComplexVector apply_left(const ComplexVector &v) const;
    /// Materialised matrix; throws BudgetExceeded above the dense cap.
    [[nodiscard]] ComplexMatrix dense() const;

  private:
    const SiteTensor            *a_;
    Permutation                  alpha_;
    SiteTensor                   at_; // transposed slices for left action
    std::optional<ComplexMatrix> dense_;
    Index                        dense_cap_;
};

/// Contraction-mode action for an arbitrary tensor (used for both sides).
[[nodiscard]] ComplexVector replica_contract(const SiteTensor &a, const Permutation &alpha, const ComplexVector &v);

[[nodiscard]] ComplexVector replica_apply(const SiteTensor &a, const Permutation &alpha, const ComplexVector &v,
                                          ReplicaMode mode = ReplicaMode::contraction);

/// Eigenvalues of the dense T_alpha.
[[nodiscard]] ComplexVector replica_eigvals(const SiteTensor &a, int k, const Permutation &alpha, Index dense_cap = 4096);

/// Vector prod_i m(bra_{alpha(i)}, ket_i) for a chi x chi matrix m(a', a).
[[nodiscard]] ComplexVector replicate_pairing(const ComplexMatrix &m, const Permutation &alpha);

// ---------------------------------------------------------------- finite chains

struct BlockLayout {
    Index n       = 0;
    Index a_begin = 0, a_end = 0; // A = [a_begin, a_end)
    Index b_begin = 0, b_end = 0; // B = [b_begin, b_end)

    [[nodiscard]] Index gap() const { return b_begin - a_end; }
    /// A = [0, (N - r) / 2), B = [(N - r) / 2 + r, N).
    [[nodiscard]] static BlockLayout centered(Index n, Index r);
    void                             validate() const;
};

struct MutualInfo {
    double value = 0.0;
    double tr_ab = 1.0; // Tr rho_{A∪B}^k
    double tr_a  = 1.0;
    double tr_b  = 1.0;
};

/// Tr rho_X^k where X is the set of sites flagged in `in_region` (cyclic
/// permutation there, identity elsewhere), divided by <psi|psi>^k.
[[nodiscard]] double replica_trace(const MpsState &state, const std::vector<bool> &in_region, int k, Index budget = Index{1} << 24);

[[nodiscard]] MutualInfo renyi_mutual_info_finite(const MpsState &state, const BlockLayout &layout, int k,
                                                  Index budget = Index{1} << 24);

// ---------------------------------------------------------------- uniform states

/// Fixed points of a uniform cell: l[j], rho[j] on the bond before site j as
/// chi x chi matrices (a', a), normalised with tr(l^T rho) = 1, and the cell
/// rescaled so the leading transfer eigenvalue is exactly 1.
struct UniformFixedPoints {
    std::vector<SiteTensor>    cell;
    std::vector<ComplexMatrix> l;
    std::vector<ComplexMatrix> rho;
};
[[nodiscard]] UniformFixedPoints uniform_fixed_points(const MpsState &uniform, double tol = 1e-13, Index max_iter = 100000);

struct TiMutualInfoPaths {
    double spectral           = 0.0;
    double trace_ratio        = 0.0;
    bool   spectral_available = false;
};

/// I_k(A:B) for two semi-infinite blocks separated by r sites. The trace-ratio
/// path always runs; the eigen-expansion path runs for one-site cells with
/// chi^{2k} <= dense_cap. Disagreement beyond 1e-8 raises NumericalError.
[[nodiscard]] double renyi_mutual_info_TI(const MpsState &uniform, int k, Index r, TiMutualInfoPaths *paths = nullptr,
                                          Index dense_cap = 4096, Index budget = Index{1} << 24);

/// Trace-ratio I_k for r = 1..r_max (averaged over cell offsets).
[[nodiscard]] std::vector<double> renyi_mutual_info_TI_curve(const MpsState &uniform, int k, Index r_max, Index budget = Index{1} << 24);

/// Eigen-expansion evaluation for a one-site cell.
[[nodiscard]] double renyi_mutual_info_spectral(const SiteTensor &a, int k, Index r, Index dense_cap = 4096);

} // namespace mpsens
