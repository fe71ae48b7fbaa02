#pragma once

#include "mpsens/mps.hpp"
#include "mpsens/rng.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mpsens {

enum class Family { rmps, brickwork_ti, brickwork, monitored };
enum class TruncationMode { per_gate, per_layer };

/// How the translation-invariant brickwork picks its gates.
///   shared_per_layer: a fresh Haar gate every layer, the same on every bond of that layer
///   single_gate:      one Haar gate drawn once and reused everywhere, every layer
///   two_gate_cell:    one gate for even layers and one for odd layers, both drawn once
enum class TiMode { shared_per_layer, single_gate, two_gate_cell };

[[nodiscard]] std::string    to_string(Family f);
[[nodiscard]] std::string    to_string(TruncationMode m);
[[nodiscard]] std::string    to_string(TiMode m);
[[nodiscard]] Family         parse_family(const std::string &s);
[[nodiscard]] TruncationMode parse_truncation_mode(const std::string &s);
[[nodiscard]] TiMode         parse_ti_mode(const std::string &s);

struct CircuitSpec {
    Family               family   = Family::brickwork;
    Index                n_sites  = 8;
    bool                 uniform  = false; // infinite, translation-invariant protocol
    Index                d        = 2;
    Index                chi      = 8;
    double               p        = 0.0;
    std::optional<Index> depth;            // unset: 4 * chi layers
    std::uint64_t        seed        = 0;
    std::uint64_t        realization = 0;
    TruncationMode       truncation  = TruncationMode::per_layer;
    TiMode               ti_mode     = TiMode::shared_per_layer;
    double               cutoff      = 0.0; // discarded-weight cutoff on top of chi

    [[nodiscard]] Index            layers() const { return depth.value_or(4 * chi); }
    [[nodiscard]] TruncationPolicy policy() const { return {chi, cutoff, 1e-13}; }
    /// Throws std::invalid_argument on inconsistent fields.
    void validate() const;
};

/// Haar unitary from a phase-fixed QR of a complex Ginibre matrix.
[[nodiscard]] ComplexMatrix haar_unitary(Index dim, CounterRng &rng);

struct GateRecord {
    Index         layer = 0;
    Index         site  = 0;
    ComplexMatrix gate;
};
using GateLog = std::vector<GateRecord>;

struct MeasurementRecord {
    Index layer   = 0;
    Index site    = 0;
    Index outcome = 0;
};

struct Trajectory {
    MpsState                       state;
    std::vector<MeasurementRecord> measurements;
};

/// Random MPS: bulk tensors are the first chi rows of a dχ x dχ Haar unitary
/// reshaped as A^σ_{ab} = U(a, σχ + b). Right-canonical with center 0 and unit
/// norm by construction. The finite chain uses bond dimensions
/// min(chi, d^(N-1-i)) so the rightmost unitaries are smaller. With `uniform`
/// a single-site unit cell is returned.
[[nodiscard]] MpsState build_rmps(Index n, Index chi, Index d, CounterRng &rng, bool uniform = false);

/// Finite brickwork circuit (TI or not) from |0...0>. Layer l acts on bonds
/// (i, i+1) with i ≡ l (mod 2).
[[nodiscard]] MpsState run_brickwork(const CircuitSpec &spec, RealizationStreams &streams, GateLog *log = nullptr);

/// Brickwork with a per-site Bernoulli(p) computational-basis measurement after
/// every gate layer. With p = 0 the result is bit-identical to run_brickwork.
[[nodiscard]] Trajectory run_monitored(const CircuitSpec &spec, RealizationStreams &streams, GateLog *log = nullptr);

/// Infinite-chain protocols. For rmps a one-site iRMPS cell; for brickwork_ti a
/// two-site cell evolved by alternating-bond updates (truncated to chi) and then
/// gauge-fixed to left-canonical form.
[[nodiscard]] MpsState run_uniform_ti(const CircuitSpec &spec, RealizationStreams &streams, GateLog *log = nullptr);

/// Dispatch on spec.family / spec.uniform. Streams derived from (seed, realization).
[[nodiscard]] Trajectory generate(const CircuitSpec &spec, GateLog *log = nullptr);

/// Left-canonical gauge of a uniform cell with zero-padded null directions kept
/// as exact zeros. Throws ConvergenceError if the fixed point does not converge.
[[nodiscard]] MpsState canonicalize_uniform(const MpsState &cell, double tol = 1e-12, Index max_iter = 200000);

} // namespace mpsens
