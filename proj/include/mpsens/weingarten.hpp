#pragma once

#include "mpsens/linalg.hpp"
#include "mpsens/permutation.hpp"

#include <vector>

namespace mpsens {

/// Gram matrix G[s][p] = D^{#cycles(s^-1 p)} over all_permutations(k).
[[nodiscard]] RealMatrix permutation_gram(int k, double dim);

/// W[s][p] = Wg(s^-1 p, D), the inverse of the Gram matrix. Requires D >= k.
struct WeingartenMatrix {
    int                      k = 0;
    double                   dim = 0;
    std::vector<Permutation> perms;
    RealMatrix               w;

    /// Wg(s, D) looked up through the identity row.
    [[nodiscard]] double wg(const Permutation &s) const;
};
[[nodiscard]] WeingartenMatrix weingarten_matrix(int k, double dim);

/// Haar-averaged replicated transfer matrix of a random MPS tensor in the
/// permutation basis: E[T_alpha] = sum_{π,ρ} |π><ρ| W[π][ρ] d^{#cycles(α^-1 ρ)},
/// with W built for D = d * chi_right. The shifted k! x k! matrix multiplies by
/// the bond Gram matrix, T~ = W diag(d^{#cycles(α^-1 ρ)}) G_chi, and acts on
/// coefficient vectors over the permutation states of the bond.
struct ShiftedReplicaTM {
    int        k   = 0;
    Index      d   = 0;
    double     chi = 0;
    RealMatrix identity; // alpha = e
    RealMatrix cyclic;   // alpha = C_k
};
[[nodiscard]] ShiftedReplicaTM averaged_replica_tm(int k, Index d, double chi);

/// Unshifted coefficient matrix M_alpha = W diag(d^{#cycles(α^-1 ρ)}) for a
/// unitary of dimension d * chi_right (before contraction with the bond Gram).
[[nodiscard]] RealMatrix averaged_coefficients(int k, Index d, double chi_right, const Permutation &alpha);

/// Annealed I_k of the infinite RMPS from the shifted transfer matrices:
/// (1/(k-1)) log[<L|T~_C^r|R> / ((<L|R_1><L_1|R>) / <L_1|R_1>)].
[[nodiscard]] double rmps_averaged_Ik(int k, Index d, double chi, Index r);

/// Exact E[Tr rho_X^k] for a finite RMPS chain with the bond dimensions used by
/// build_rmps; `in_region` marks the sites of X.
[[nodiscard]] double rmps_finite_averaged_trace(Index n, Index chi, Index d, int k, const std::vector<bool> &in_region);

/// (1/(k-1)) log[E Tr rho_AB^k / (E Tr rho_A^k E Tr rho_B^k)] for the centred layout.
[[nodiscard]] double rmps_finite_averaged_Ik(Index n, Index chi, Index d, int k, Index r);

struct SlopePoint {
    double chi   = 0;
    double slope = 0; // dI_k / d log chi
};

/// Centred finite differences of rmps_averaged_Ik in log chi over a geometric grid.
[[nodiscard]] std::vector<SlopePoint> ik_slope_scan(int k, Index d, const std::vector<double> &chi_grid, Index r);

/// Centred finite differences of arbitrary I(chi) samples in log chi.
[[nodiscard]] std::vector<SlopePoint> log_slope(const std::vector<double> &chi, const std::vector<double> &values);

} // namespace mpsens
