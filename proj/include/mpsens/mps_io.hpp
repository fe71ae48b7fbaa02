#pragma once

#include "mpsens/circuits.hpp"

#include <json.hpp>

#include <filesystem>
#include <optional>

namespace mpsens {

[[nodiscard]] nlohmann::json circuit_spec_to_json(const CircuitSpec &spec);
/// Missing keys keep their defaults; unknown enum strings throw std::invalid_argument.
[[nodiscard]] CircuitSpec circuit_spec_from_json(const nlohmann::json &j);

/// Binary container: "MPSE", u32 version, u64 N, u64 d, u64 flags (bit 0
/// uniform, bit 1 center present), i64 center, then per site u64 left, u64
/// right followed by d*left*right little-endian (re, im) doubles in
/// (sigma, a, b) row-major order. A JSON sidecar `<path>.json` carries the
/// generating CircuitSpec when given.
void save_mps(const std::filesystem::path &path, const MpsState &state, const std::optional<CircuitSpec> &provenance = std::nullopt);

struct LoadedMps {
    MpsState                   state;
    std::optional<CircuitSpec> provenance;
};
[[nodiscard]] LoadedMps load_mps(const std::filesystem::path &path);

} // namespace mpsens
