#pragma once

#include "mpsens/circuits.hpp"

#include <vector>

namespace mpsens::oracle {

/// Dense reference wavefunction, site 0 most significant. For tests and
/// cross-checks at N <= ~16 only.
class Statevector {
  public:
    Statevector(Index n, Index d);

    [[nodiscard]] Index                n_sites() const { return n_; }
    [[nodiscard]] Index                local_dim() const { return d_; }
    [[nodiscard]] const ComplexVector &amplitudes() const { return psi_; }
    ComplexVector                     &amplitudes() { return psi_; }

    void                              apply_two_site(const ComplexMatrix &gate, Index site);
    [[nodiscard]] std::vector<double> probabilities(Index site) const;
    Index                             measure(Index site, CounterRng &rng);
    void                              project(Index site, Index outcome);

    /// Reduced density matrix of the listed sites (ascending), row index in
    /// the same most-significant-first order.
    [[nodiscard]] ComplexMatrix reduced_density(const std::vector<Index> &keep) const;

  private:
    Index         n_, d_;
    ComplexVector psi_;
};

/// Brickwork / TI brickwork / monitored trajectory with the same stream
/// consumption order as the MPS generators, without any truncation.
struct OracleTrajectory {
    Statevector        state;
    std::vector<Index> outcomes;
};
[[nodiscard]] OracleTrajectory run_circuit(const CircuitSpec &spec);

/// Tr rho^k of a density matrix through its eigenvalues.
[[nodiscard]] double renyi_trace(const ComplexMatrix &rho, int k);

/// Rényi-k mutual information between site sets a and b.
[[nodiscard]] double mutual_information(const Statevector &psi, const std::vector<Index> &a, const std::vector<Index> &b, int k);

} // namespace mpsens::oracle
