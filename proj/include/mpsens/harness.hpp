#pragma once

#include "mpsens/circuits.hpp"
#include "mpsens/fit.hpp"
#include "mpsens/transfer.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mpsens {

inline constexpr int schema_version = 1;

/// Raised for invalid configuration files or flags (exit code 2).
class ConfigError : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Dataset lacks columns (or files) a figure needs. `missing` names them.
class MissingColumnsError : public std::runtime_error {
  public:
    MissingColumnsError(const std::string &what, std::vector<std::string> missing)
        : std::runtime_error(what), missing(std::move(missing)) {}
    std::vector<std::string> missing;
};

struct SweepConfig {
    Family               family  = Family::monitored;
    Index                n_sites = 24;
    bool                 uniform = false;
    Index                d       = 2;
    std::vector<Index>   chi{8};
    std::vector<double>  p{0.0};
    std::vector<Index>   r{1};
    int                  k            = 2;
    Index                realizations = 10;
    std::optional<Index> depth; // unset: 4 * chi
    std::uint64_t        seed    = 1;
    std::string          out     = "out";
    TruncationMode       truncation = TruncationMode::per_layer;
    TiMode               ti_mode    = TiMode::shared_per_layer;
    double               cutoff     = 0.0;
    int                  workers    = 1;
    bool                 minfo      = true;
    bool                 spectra    = true;
    Index                spectrum_window = 1; // central sites pooled per realization
    Index                budget = Index{1} << 24;

    void validate() const; // throws ConfigError
    [[nodiscard]] nlohmann::json to_json() const;
    [[nodiscard]] static SweepConfig from_json(const nlohmann::json &j); // throws ConfigError
    [[nodiscard]] static SweepConfig load(const std::filesystem::path &path);
    /// Stable hash of the canonical JSON form.
    [[nodiscard]] std::uint64_t hash() const;
};

/// Seed of a (N, chi, p) grid point. The family is deliberately not part of
/// the hash so that a p = 0 monitored sweep replays the brickwork sweep.
[[nodiscard]] std::uint64_t point_seed(std::uint64_t master, Index n, Index chi, double p);

struct MinfoRow {
    std::string   family;
    Index         n = 0, chi = 0;
    double        p = 0;
    int           k = 2;
    Index         r = 0;
    std::uint64_t seed = 0;
    Index         realization = 0;
    double        value = 0, tr_ab = 0, tr_a = 0, tr_b = 0;
};

struct SpectrumRow {
    std::string       family;
    Index             chi = 0;
    double            p   = 0;
    std::uint64_t     seed = 0;
    Index             realization = 0;
    Index             site = 0;
    std::vector<cplx> eigenvalues; // unit eigenvalues kept; consumers filter
};

struct SummaryRow {
    std::string family;
    Index       n = 0, chi = 0;
    double      p = 0;
    int         k = 2;
    Index       r = 0;
    Index       count = 0;
    double      mean = 0, sem = 0;
    double      log_of_means = 0; // (1/(k-1)) log(E tr_ab / (E tr_a E tr_b))
};

struct PointError {
    Index       chi = 0;
    double      p   = 0;
    std::string kind; // "budget" or "numerical"
    std::string message;
};

struct EnsembleResult {
    SweepConfig              config;
    std::vector<MinfoRow>    minfo;
    std::vector<SpectrumRow> spectra;
    std::vector<SummaryRow>  summary;
    std::vector<PointError>  errors;
};

/// Runs every (chi, p) x realization task on `config.workers` threads.
/// Results are collected by task index, so output is independent of scheduling.
/// Failing grid points are recorded in `errors`; the remaining points are kept.
[[nodiscard]] EnsembleResult run_sweep(const SweepConfig &config);

/// Writes minfo.csv, spectra.csv, summary.csv and manifest.json to config.out.
void write_dataset(const EnsembleResult &result);

[[nodiscard]] std::vector<SummaryRow> summarize(const std::vector<MinfoRow> &rows);

// Readers for datasets on disk (used by fit / order-param / figure).
[[nodiscard]] std::vector<MinfoRow>    read_minfo_csv(const std::filesystem::path &path);
[[nodiscard]] std::vector<SpectrumRow> read_spectra_csv(const std::filesystem::path &path);

/// MiPoint curves per (family, p) at fixed r from summary rows.
[[nodiscard]] std::map<double, std::vector<MiPoint>> mi_curves(const std::vector<SummaryRow> &summary, Index r);

/// Pooled non-unit moduli per (p, chi).
[[nodiscard]] std::map<std::pair<double, double>, std::vector<double>> pooled_by_point(const std::vector<SpectrumRow> &rows,
                                                                                       double unit_tol = 1e-6);

/// Non-unit moduli per (p, chi), one group per (seed, realization).
[[nodiscard]] std::map<std::pair<double, double>, std::vector<std::vector<double>>> grouped_by_point(const std::vector<SpectrumRow> &rows,
                                                                                                    double unit_tol = 1e-6);

/// "%.17g" formatting used in every CSV.
[[nodiscard]] std::string fmt_double(double v);

/// Cache directory from MPS_ENSEMBLES_CACHE, if set.
[[nodiscard]] std::optional<std::filesystem::path> cache_dir();

} // namespace mpsens
