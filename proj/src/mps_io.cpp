#include "mpsens/mps_io.hpp"

#include <fmt/format.h>

#include <bit>
#include <cstring>
#include <fstream>

namespace mpsens {

nlohmann::json circuit_spec_to_json(const CircuitSpec &spec) {
    nlohmann::json j;
    j["family"]      = to_string(spec.family);
    j["n_sites"]     = spec.n_sites;
    j["uniform"]     = spec.uniform;
    j["d"]           = spec.d;
    j["chi"]         = spec.chi;
    j["p"]           = spec.p;
    j["depth"]       = spec.layers();
    j["seed"]        = spec.seed;
    j["realization"] = spec.realization;
    j["truncation"]  = to_string(spec.truncation);
    j["ti_mode"]     = to_string(spec.ti_mode);
    j["cutoff"]      = spec.cutoff;
    return j;
}

CircuitSpec circuit_spec_from_json(const nlohmann::json &j) {
    CircuitSpec s;
    if(j.contains("family")) s.family = parse_family(j.at("family").get<std::string>());
    if(j.contains("n_sites")) s.n_sites = j.at("n_sites").get<Index>();
    if(j.contains("uniform")) s.uniform = j.at("uniform").get<bool>();
    if(j.contains("d")) s.d = j.at("d").get<Index>();
    if(j.contains("chi")) s.chi = j.at("chi").get<Index>();
    if(j.contains("p")) s.p = j.at("p").get<double>();
    if(j.contains("depth")) s.depth = j.at("depth").get<Index>();
    if(j.contains("seed")) s.seed = j.at("seed").get<std::uint64_t>();
    if(j.contains("realization")) s.realization = j.at("realization").get<std::uint64_t>();
    if(j.contains("truncation")) s.truncation = parse_truncation_mode(j.at("truncation").get<std::string>());
    if(j.contains("ti_mode")) s.ti_mode = parse_ti_mode(j.at("ti_mode").get<std::string>());
    if(j.contains("cutoff")) s.cutoff = j.at("cutoff").get<double>();
    return s;
}

namespace {

    static_assert(std::endian::native == std::endian::little, "binary MPS container assumes a little-endian host");

    constexpr char          magic[4] = {'M', 'P', 'S', 'E'};
    constexpr std::uint32_t version  = 1;

    template <typename T> void put(std::ostream &os, T v) { os.write(reinterpret_cast<const char *>(&v), sizeof(T)); }

    template <typename T> T get(std::istream &is) {
        T v{};
        is.read(reinterpret_cast<char *>(&v), sizeof(T));
        if(!is) throw std::runtime_error("load_mps: truncated file");
        return v;
    }

} // namespace

void save_mps(const std::filesystem::path &path, const MpsState &state, const std::optional<CircuitSpec> &provenance) {
    std::ofstream os(path, std::ios::binary);
    if(!os) throw std::runtime_error(fmt::format("save_mps: cannot open {}", path.string()));
    os.write(magic, 4);
    put<std::uint32_t>(os, version);
    put<std::uint64_t>(os, static_cast<std::uint64_t>(state.size()));
    put<std::uint64_t>(os, static_cast<std::uint64_t>(state.local_dim()));
    const auto c = state.ortho_center();
    put<std::uint64_t>(os, (state.is_uniform() ? 1U : 0U) | (c ? 2U : 0U));
    put<std::int64_t>(os, c ? static_cast<std::int64_t>(*c) : -1);
    for(const auto &t : state.sites()) {
        put<std::uint64_t>(os, static_cast<std::uint64_t>(t.left_dim()));
        put<std::uint64_t>(os, static_cast<std::uint64_t>(t.right_dim()));
        for(Index s = 0; s < t.phys_dim(); ++s)
            for(Index a = 0; a < t.left_dim(); ++a)
                for(Index b = 0; b < t.right_dim(); ++b) {
                    put<double>(os, t[s](a, b).real());
                    put<double>(os, t[s](a, b).imag());
                }
    }
    if(!os) throw std::runtime_error(fmt::format("save_mps: write failed for {}", path.string()));
    if(provenance) {
        std::ofstream js(path.string() + ".json");
        js << circuit_spec_to_json(*provenance).dump(2) << '\n';
    }
}

LoadedMps load_mps(const std::filesystem::path &path) {
    std::ifstream is(path, std::ios::binary);
    if(!is) throw std::runtime_error(fmt::format("load_mps: cannot open {}", path.string()));
    char m[4];
    is.read(m, 4);
    if(!is || std::memcmp(m, magic, 4) != 0) throw std::runtime_error("load_mps: bad magic bytes");
    if(get<std::uint32_t>(is) != version) throw std::runtime_error("load_mps: unsupported version");
    const auto n      = static_cast<Index>(get<std::uint64_t>(is));
    const auto d      = static_cast<Index>(get<std::uint64_t>(is));
    const auto flags  = get<std::uint64_t>(is);
    const auto center = get<std::int64_t>(is);
    std::vector<SiteTensor> sites;
    for(Index i = 0; i < n; ++i) {
        const auto l = static_cast<Index>(get<std::uint64_t>(is));
        const auto r = static_cast<Index>(get<std::uint64_t>(is));
        SiteTensor t(l, d, r);
        for(Index s = 0; s < d; ++s)
            for(Index a = 0; a < l; ++a)
                for(Index b = 0; b < r; ++b) {
                    const double re = get<double>(is);
                    const double im = get<double>(is);
                    t[s](a, b)      = {re, im};
                }
        sites.push_back(std::move(t));
    }
    LoadedMps out;
    if(flags & 1U)
        out.state = MpsState::uniform(std::move(sites));
    else
        out.state = MpsState::from_tensors(std::move(sites), (flags & 2U) ? std::optional<Index>(center) : std::nullopt);
    const auto sidecar = std::filesystem::path(path.string() + ".json");
    if(std::filesystem::exists(sidecar)) {
        std::ifstream js(sidecar);
        out.provenance = circuit_spec_from_json(nlohmann::json::parse(js));
    }
    return out;
}

} // namespace mpsens
