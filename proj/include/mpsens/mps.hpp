#pragma once

#include "mpsens/linalg.hpp"
#include "mpsens/rng.hpp"

#include <limits>
#include <optional>
#include <span>
#include <vector>

namespace mpsens {

/// Rank-3 MPS tensor A^sigma_{ab} stored as d slices of shape (left x right).
///
/// Two flattened views are used throughout:
///   stacked_rows(): rows (sigma, a) -> sigma * left + a, columns b
///   stacked_cols(): rows a, columns (sigma, b) -> sigma * right + b
class SiteTensor {
  public:
    SiteTensor() = default;
    SiteTensor(Index left, Index phys, Index right);
    explicit SiteTensor(std::vector<ComplexMatrix> slices);

    [[nodiscard]] Index left_dim() const { return slices_.empty() ? 0 : slices_.front().rows(); }
    [[nodiscard]] Index right_dim() const { return slices_.empty() ? 0 : slices_.front().cols(); }
    [[nodiscard]] Index phys_dim() const { return static_cast<Index>(slices_.size()); }

    [[nodiscard]] const ComplexMatrix &operator[](Index sigma) const { return slices_[static_cast<std::size_t>(sigma)]; }
    [[nodiscard]] ComplexMatrix       &operator[](Index sigma) { return slices_[static_cast<std::size_t>(sigma)]; }
    [[nodiscard]] std::span<const ComplexMatrix> slices() const { return slices_; }

    [[nodiscard]] ComplexMatrix     stacked_rows() const;
    [[nodiscard]] ComplexMatrix     stacked_cols() const;
    [[nodiscard]] static SiteTensor from_stacked_rows(const ComplexMatrix &m, Index phys);
    [[nodiscard]] static SiteTensor from_stacked_cols(const ComplexMatrix &m, Index phys);

    /// sum_sigma A^dagger A (identity for a left isometry)
    [[nodiscard]] ComplexMatrix left_gram() const;
    /// sum_sigma A A^dagger (identity for a right isometry)
    [[nodiscard]] ComplexMatrix right_gram() const;
    [[nodiscard]] SiteTensor    transposed() const;
    [[nodiscard]] double        norm_squared() const;

  private:
    std::vector<ComplexMatrix> slices_;
};

enum class Isometry { left, right };

/// Deviation of the gram matrix from the nearest diagonal 0/1 projector.
/// Null (zero-padded) bond directions therefore do not count as defects.
[[nodiscard]] double isometry_defect(const SiteTensor &a, Isometry side);

/// Bond truncation rule: keep at most chi_max Schmidt values, additionally zero
/// the smallest ones while their discarded weight stays below `cutoff`, and
/// treat values below zero_tol * s_max as exact zeros. Zeroed directions are
/// kept as explicit zeros so the bond dimension stays min(chi_max, rank bound).
struct TruncationPolicy {
    Index  chi_max  = std::numeric_limits<Index>::max();
    double cutoff   = 0.0;
    double zero_tol = 1e-13;
};

/// SVD split m = u * diag(s) * vh under a truncation policy. The returned
/// factors have min(rows, cols, chi_max) columns/rows; zeroed directions are
/// exact zeros in u, s and vh. With `renormalize` the kept s has unit 2-norm.
struct TruncatedSvd {
    ComplexMatrix u;
    RealVector    s;
    ComplexMatrix vh;
    Index         nonzero          = 0;
    double        discarded_weight = 0.0; // relative to the total weight
};

[[nodiscard]] TruncatedSvd truncated_svd(const ComplexMatrix &m, const TruncationPolicy &policy, bool renormalize);

struct SchmidtCut {
    Index      bond = 0; // between site `bond` and `bond + 1`
    RealVector values;   // descending, sum of squares 1 for a normalized state
    double     discarded_weight = 0.0;
};

class MpsState {
  public:
    MpsState() = default;

    [[nodiscard]] static MpsState product(std::span<const ComplexVector> local_vectors, double tol = 1e-10);
    /// |0...0> on n sites.
    [[nodiscard]] static MpsState zeros(Index n, Index d);
    /// Finite state from explicit tensors. Boundary bonds must be 1.
    [[nodiscard]] static MpsState from_tensors(std::vector<SiteTensor> tensors, std::optional<Index> center = std::nullopt);
    /// Translation-invariant state described by its unit cell.
    [[nodiscard]] static MpsState uniform(std::vector<SiteTensor> cell);

    [[nodiscard]] Index                           size() const { return static_cast<Index>(sites_.size()); }
    [[nodiscard]] Index                           local_dim() const { return d_; }
    [[nodiscard]] bool                            is_uniform() const { return uniform_; }
    [[nodiscard]] std::optional<Index>            ortho_center() const { return center_; }
    [[nodiscard]] const SiteTensor               &site(Index i) const { return sites_.at(static_cast<std::size_t>(i)); }
    [[nodiscard]] std::span<const SiteTensor>     sites() const { return sites_; }
    [[nodiscard]] Index                           bond_dim(Index bond) const;
    [[nodiscard]] Index                           max_bond_dim() const;

    /// Shift the orthogonality center one site at a time with exact SVD steps.
    void move_center(Index target);
    /// Full left sweep followed by a right sweep down to `center`.
    void canonicalize(Index center);

    /// Applies a d^2 x d^2 unitary to sites (site, site + 1); row/column index
    /// of the gate is sigma_site * d + sigma_{site+1}. Requires the center at
    /// `site` or `site + 1` and leaves it on `site + 1`.
    SchmidtCut apply_two_site_gate(const ComplexMatrix &gate, Index site, const TruncationPolicy &policy);

    /// Truncate every bond to `policy`; ends with the center on site 0.
    void truncate(const TruncationPolicy &policy);

    /// Born probabilities of a computational-basis measurement at the center.
    [[nodiscard]] std::vector<double> site_probabilities(Index site) const;
    /// Projective measurement in the computational basis. Requires the center at `site`.
    Index measure_site(Index site, CounterRng &rng);
    /// Deterministic projection onto `outcome` followed by renormalization.
    void project_site(Index site, Index outcome);

    /// Schmidt values across `bond`; requires the center adjacent to the bond.
    [[nodiscard]] SchmidtCut schmidt_values(Index bond) const;

  private:
    void require_finite_chain(const char *op) const;
    void step_right(Index c);
    void step_left(Index c);

    Index                   d_ = 0;
    std::vector<SiteTensor> sites_;
    std::optional<Index>    center_;
    bool                    uniform_ = false;
};

[[nodiscard]] MpsState product_state(Index n, Index d, std::span<const ComplexVector> local_vectors);
[[nodiscard]] MpsState canonicalize(MpsState state, Index center);

/// Renyi entropy in nats from Schmidt values; k = 1 is the von Neumann limit.
[[nodiscard]] double renyi_from_schmidt(const RealVector &s, double k);
[[nodiscard]] double renyi_entropy(const MpsState &state, Index cut, double k);

/// <a|b> for finite states on the same number of sites.
[[nodiscard]] cplx   overlap(const MpsState &a, const MpsState &b);
[[nodiscard]] double norm(const MpsState &state);
[[nodiscard]] double fidelity(const MpsState &a, const MpsState &b);

/// Dense amplitudes with site 0 as the most significant digit. Limited to 2^24 entries.
[[nodiscard]] ComplexVector to_statevector(const MpsState &state);

} // namespace mpsens
