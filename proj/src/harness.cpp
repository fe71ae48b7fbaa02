#include "mpsens/harness.hpp"

#include "mpsens/mps_io.hpp"
#include "mpsens/replica.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <map>
#include <mutex>
#include <sstream>
#include <thread>

namespace mpsens {

namespace {

    std::uint64_t fnv1a(const std::string &s) {
        std::uint64_t h = 0xcbf29ce484222325ULL;
        for(unsigned char c : s) {
            h ^= c;
            h *= 0x100000001b3ULL;
        }
        return h;
    }

    std::string hex(std::uint64_t v) { return fmt::format("{:016x}", v); }

    template <typename T> std::vector<T> json_list(const nlohmann::json &j, const char *key) {
        const auto &v = j.at(key);
        if(v.is_array()) return v.get<std::vector<T>>();
        return {v.get<T>()};
    }

    std::vector<std::string> split(const std::string &line) {
        std::vector<std::string> out;
        std::stringstream        ss(line);
        std::string              item;
        while(std::getline(ss, item, ',')) out.push_back(item);
        return out;
    }

    std::vector<std::map<std::string, std::string>> read_csv(const std::filesystem::path &path, const std::vector<std::string> &required) {
        std::ifstream is(path);
        std::string   line;
        if(!is || !std::getline(is, line))
            throw MissingColumnsError(fmt::format("{} is missing or empty; needs columns: {}", path.string(), fmt::join(required, ", ")), required);
        const auto          header = split(line);
        std::vector<std::string> missing;
        for(const auto &col : required)
            if(std::find(header.begin(), header.end(), col) == header.end()) missing.push_back(col);
        if(!missing.empty()) throw MissingColumnsError(fmt::format("{} lacks columns: {}", path.string(), fmt::join(missing, ", ")), missing);
        std::vector<std::map<std::string, std::string>> rows;
        while(std::getline(is, line)) {
            if(line.empty()) continue;
            const auto cells = split(line);
            std::map<std::string, std::string> row;
            for(std::size_t i = 0; i < header.size() && i < cells.size(); ++i) row[header[i]] = cells[i];
            rows.push_back(std::move(row));
        }
        return rows;
    }

    struct TaskOutput {
        std::vector<MinfoRow>    minfo;
        std::vector<SpectrumRow> spectra;
        std::optional<PointError> error;
    };

    MpsState obtain_state(const CircuitSpec &spec) {
        const auto dir = cache_dir();
        if(!dir) return generate(spec).state;
        const std::string key  = circuit_spec_to_json(spec).dump();
        const auto        path = *dir / (hex(fnv1a(key)) + ".mps");
        if(std::filesystem::exists(path)) {
            auto loaded = load_mps(path);
            if(loaded.provenance && circuit_spec_to_json(*loaded.provenance).dump() == key) return std::move(loaded.state);
        }
        auto state = generate(spec).state;
        std::filesystem::create_directories(*dir);
        // Write to a private name first so concurrent workers never read a partial file.
        const auto tmp = path.string() + fmt::format(".tmp{}", std::hash<std::thread::id>{}(std::this_thread::get_id()));
        save_mps(tmp, state, spec);
        std::filesystem::rename(tmp, path);
        std::filesystem::rename(tmp + ".json", path.string() + ".json");
        return state;
    }

    std::vector<Index> spectrum_sites(const MpsState &st, Index window) {
        std::vector<Index> sites;
        if(st.is_uniform()) {
            for(Index i = 0; i < st.size(); ++i) sites.push_back(i);
            return sites;
        }
        const Index w     = std::clamp<Index>(window, 1, st.size());
        const Index first = st.size() / 2 - w / 2;
        for(Index i = first; i < first + w; ++i) sites.push_back(i);
        return sites;
    }

    TaskOutput run_task(const SweepConfig &cfg, Index chi, double p, std::uint64_t seed, Index realization) {
        TaskOutput  out;
        CircuitSpec spec;
        spec.family      = cfg.family;
        spec.n_sites     = cfg.n_sites;
        spec.uniform     = cfg.uniform;
        spec.d           = cfg.d;
        spec.chi         = chi;
        spec.p           = p;
        spec.depth       = cfg.depth;
        spec.seed        = seed;
        spec.realization = static_cast<std::uint64_t>(realization);
        spec.truncation  = cfg.truncation;
        spec.ti_mode     = cfg.ti_mode;
        spec.cutoff      = cfg.cutoff;
        const std::string fam = to_string(cfg.family);
        try {
            const MpsState st = obtain_state(spec);
            if(cfg.minfo) {
                if(st.is_uniform()) {
                    const Index r_max = *std::max_element(cfg.r.begin(), cfg.r.end());
                    const auto  curve = renyi_mutual_info_TI_curve(st, cfg.k, r_max, cfg.budget);
                    for(Index r : cfg.r) {
                        const double v = curve[static_cast<std::size_t>(r - 1)];
                        out.minfo.push_back({fam, cfg.n_sites, chi, p, cfg.k, r, seed, realization, v, std::exp((cfg.k - 1) * v), 1.0, 1.0});
                    }
                } else {
                    for(Index r : cfg.r) {
                        const auto mi = renyi_mutual_info_finite(st, BlockLayout::centered(cfg.n_sites, r), cfg.k, cfg.budget);
                        out.minfo.push_back({fam, cfg.n_sites, chi, p, cfg.k, r, seed, realization, mi.value, mi.tr_ab, mi.tr_a, mi.tr_b});
                    }
                }
            }
            if(cfg.spectra) {
                // Circuit states are analysed in left-canonical gauge; RMPS tensors as generated.
                const bool raw   = cfg.family == Family::rmps;
                MpsState   gauge = (raw || st.is_uniform()) ? st : canonicalize(st, st.size() - 1);
                for(Index site : spectrum_sites(gauge, cfg.spectrum_window)) {
                    const auto &t = gauge.site(site);
                    if(t.left_dim() != t.right_dim()) continue;
                    auto s = spectrum(t, false);
                    out.spectra.push_back({fam, chi, p, seed, realization, site, std::move(s.eigenvalues)});
                }
            }
        } catch(const BudgetExceeded &e) {
            out.error = PointError{chi, p, "budget", e.what()};
        } catch(const NumericalError &e) {
            out.error = PointError{chi, p, "numerical", e.what()};
        }
        return out;
    }

} // namespace

std::string fmt_double(double v) { return fmt::format("{:.17g}", v); }

std::optional<std::filesystem::path> cache_dir() {
    const char *env = std::getenv("MPS_ENSEMBLES_CACHE");
    if(env == nullptr || *env == '\0') return std::nullopt;
    return std::filesystem::path(env);
}

std::uint64_t point_seed(std::uint64_t master, Index n, Index chi, double p) {
    std::uint64_t h = mix64(master);
    h               = hash_combine(h, static_cast<std::uint64_t>(n));
    h               = hash_combine(h, static_cast<std::uint64_t>(chi));
    return hash_combine(h, std::bit_cast<std::uint64_t>(p));
}

void SweepConfig::validate() const {
    if(d < 2) throw ConfigError("d must be at least 2");
    if(chi.empty() || p.empty() || r.empty()) throw ConfigError("chi, p and r grids must be non-empty");
    for(Index c : chi)
        if(c < 1) throw ConfigError(fmt::format("chi = {} is not positive", c));
    for(double v : p)
        if(!(v >= 0.0 && v <= 1.0)) throw ConfigError(fmt::format("p = {} is outside [0, 1]", v));
    if(family != Family::monitored && std::any_of(p.begin(), p.end(), [](double v) { return v != 0.0; }))
        throw ConfigError("p > 0 is only meaningful for the monitored family");
    for(Index v : r)
        if(v < 1) throw ConfigError(fmt::format("r = {} is not positive", v));
    if(k < 2 || k > 4) throw ConfigError("k must be 2, 3 or 4");
    if(realizations < 1) throw ConfigError("realizations must be at least 1");
    if(workers < 1) throw ConfigError("workers must be at least 1");
    if(depth && *depth < 0) throw ConfigError("depth must be non-negative");
    if(!(cutoff >= 0.0 && cutoff < 1.0)) throw ConfigError("cutoff must lie in [0, 1)");
    if(spectrum_window < 1) throw ConfigError("spectrum_window must be at least 1");
    if(uniform && family != Family::rmps && family != Family::brickwork_ti) throw ConfigError("uniform sweeps need family rmps or brickwork_ti");
    if(!uniform) {
        const Index r_max = *std::max_element(r.begin(), r.end());
        if(n_sites < r_max + 2) throw ConfigError(fmt::format("n_sites = {} leaves no room for blocks at r = {}", n_sites, r_max));
    }
}

nlohmann::json SweepConfig::to_json() const {
    nlohmann::json j;
    j["family"]       = to_string(family);
    j["n_sites"]      = n_sites;
    j["uniform"]      = uniform;
    j["d"]            = d;
    j["chi"]          = chi;
    j["p"]            = p;
    j["r"]            = r;
    j["k"]            = k;
    j["realizations"] = realizations;
    j["depth"]        = depth ? nlohmann::json(*depth) : nlohmann::json(nullptr);
    j["seed"]         = seed;
    j["out"]          = out;
    j["truncation"]   = to_string(truncation);
    j["ti_mode"]      = to_string(ti_mode);
    j["cutoff"]       = cutoff;
    j["workers"]      = workers;
    j["minfo"]        = minfo;
    j["spectra"]      = spectra;
    j["spectrum_window"] = spectrum_window;
    j["budget"]       = budget;
    return j;
}

SweepConfig SweepConfig::from_json(const nlohmann::json &j) {
    SweepConfig c;
    try {
        if(!j.is_object()) throw ConfigError("config must be a JSON object");
        static const std::vector<std::string> known{"family", "n_sites", "uniform", "d",          "chi",     "p",      "r",
                                                    "k",      "realizations", "depth", "seed", "out", "truncation", "ti_mode",
                                                    "cutoff", "workers", "minfo", "spectra", "spectrum_window", "budget"};
        for(const auto &[key, _] : j.items())
            if(std::find(known.begin(), known.end(), key) == known.end()) throw ConfigError(fmt::format("unknown config key '{}'", key));
        if(j.contains("family")) c.family = parse_family(j["family"].get<std::string>());
        if(j.contains("n_sites")) c.n_sites = j["n_sites"].get<Index>();
        if(j.contains("uniform")) c.uniform = j["uniform"].get<bool>();
        if(j.contains("d")) c.d = j["d"].get<Index>();
        if(j.contains("chi")) c.chi = json_list<Index>(j, "chi");
        if(j.contains("p")) c.p = json_list<double>(j, "p");
        if(j.contains("r")) c.r = json_list<Index>(j, "r");
        if(j.contains("k")) c.k = j["k"].get<int>();
        if(j.contains("realizations")) c.realizations = j["realizations"].get<Index>();
        if(j.contains("depth") && !j["depth"].is_null()) c.depth = j["depth"].get<Index>();
        if(j.contains("seed")) c.seed = j["seed"].get<std::uint64_t>();
        if(j.contains("out")) c.out = j["out"].get<std::string>();
        if(j.contains("truncation")) c.truncation = parse_truncation_mode(j["truncation"].get<std::string>());
        if(j.contains("ti_mode")) c.ti_mode = parse_ti_mode(j["ti_mode"].get<std::string>());
        if(j.contains("cutoff")) c.cutoff = j["cutoff"].get<double>();
        if(j.contains("workers")) c.workers = j["workers"].get<int>();
        if(j.contains("minfo")) c.minfo = j["minfo"].get<bool>();
        if(j.contains("spectra")) c.spectra = j["spectra"].get<bool>();
        if(j.contains("spectrum_window")) c.spectrum_window = j["spectrum_window"].get<Index>();
        if(j.contains("budget")) c.budget = j["budget"].get<Index>();
    } catch(const nlohmann::json::exception &e) {
        throw ConfigError(fmt::format("config: {}", e.what()));
    } catch(const std::invalid_argument &e) {
        throw ConfigError(e.what());
    }
    c.validate();
    return c;
}

SweepConfig SweepConfig::load(const std::filesystem::path &path) {
    std::ifstream is(path);
    if(!is) throw ConfigError(fmt::format("cannot open config {}", path.string()));
    nlohmann::json j;
    try {
        j = nlohmann::json::parse(is);
    } catch(const nlohmann::json::exception &e) {
        throw ConfigError(fmt::format("{}: {}", path.string(), e.what()));
    }
    return from_json(j);
}

std::uint64_t SweepConfig::hash() const {
    auto j = to_json();
    // Worker count and output location do not change the data.
    j.erase("workers");
    j.erase("out");
    return fnv1a(j.dump());
}

std::vector<SummaryRow> summarize(const std::vector<MinfoRow> &rows) {
    std::map<std::tuple<std::string, Index, Index, double, int, Index>, std::vector<const MinfoRow *>> groups;
    std::vector<std::tuple<std::string, Index, Index, double, int, Index>>                               order;
    for(const auto &r : rows) {
        auto key = std::make_tuple(r.family, r.n, r.chi, r.p, r.k, r.r);
        if(!groups.count(key)) order.push_back(key);
        groups[key].push_back(&r);
    }
    std::vector<SummaryRow> out;
    for(const auto &key : order) {
        const auto &g = groups[key];
        SummaryRow  s;
        std::tie(s.family, s.n, s.chi, s.p, s.k, s.r) = key;
        s.count = static_cast<Index>(g.size());
        double sum = 0, sum2 = 0, tab = 0, ta = 0, tb = 0;
        for(const auto *r : g) {
            sum += r->value;
            sum2 += r->value * r->value;
            tab += r->tr_ab;
            ta += r->tr_a;
            tb += r->tr_b;
        }
        const double n = static_cast<double>(g.size());
        s.mean         = sum / n;
        s.sem          = g.size() > 1 ? std::sqrt(std::max(sum2 / n - s.mean * s.mean, 0.0) / (n - 1)) : 0.0;
        s.log_of_means = std::log((tab / n) / ((ta / n) * (tb / n))) / (s.k - 1);
        out.push_back(s);
    }
    return out;
}

EnsembleResult run_sweep(const SweepConfig &config) {
    config.validate();
    struct Task {
        Index         chi;
        double        p;
        std::uint64_t seed;
        Index         realization;
    };
    std::vector<Task> tasks;
    for(Index chi : config.chi)
        for(double p : config.p) {
            const auto seed = point_seed(config.seed, config.uniform ? 0 : config.n_sites, chi, p);
            for(Index i = 0; i < config.realizations; ++i) tasks.push_back({chi, p, seed, i});
        }
    std::vector<TaskOutput> results(tasks.size());
    std::atomic<std::size_t> next{0};
    auto                     worker = [&] {
        for(std::size_t i = next++; i < tasks.size(); i = next++) results[i] = run_task(config, tasks[i].chi, tasks[i].p, tasks[i].seed, tasks[i].realization);
    };
    const int                n_threads = std::min<int>(config.workers, static_cast<int>(tasks.size()));
    std::vector<std::thread> pool;
    for(int t = 1; t < n_threads; ++t) pool.emplace_back(worker);
    worker();
    for(auto &th : pool) th.join();

    EnsembleResult res;
    res.config = config;
    std::map<std::pair<Index, double>, bool> failed;
    for(std::size_t i = 0; i < tasks.size(); ++i)
        if(results[i].error) {
            const auto key = std::make_pair(tasks[i].chi, tasks[i].p);
            if(!failed[key]) res.errors.push_back(*results[i].error);
            failed[key] = true;
        }
    for(std::size_t i = 0; i < tasks.size(); ++i) {
        if(failed.count({tasks[i].chi, tasks[i].p})) continue;
        auto &r = results[i];
        res.minfo.insert(res.minfo.end(), r.minfo.begin(), r.minfo.end());
        std::move(r.spectra.begin(), r.spectra.end(), std::back_inserter(res.spectra));
    }
    res.summary = summarize(res.minfo);
    return res;
}

void write_dataset(const EnsembleResult &result) {
    const std::filesystem::path dir(result.config.out);
    std::filesystem::create_directories(dir);
    {
        std::ofstream os(dir / "minfo.csv");
        os << "family,N,chi,p,k,r,seed,realization,I_k,tr_ab,tr_a,tr_b\n";
        for(const auto &r : result.minfo)
            os << fmt::format("{},{},{},{},{},{},{},{},{},{},{},{}\n", r.family, r.n, r.chi, fmt_double(r.p), r.k, r.r, r.seed, r.realization,
                              fmt_double(r.value), fmt_double(r.tr_ab), fmt_double(r.tr_a), fmt_double(r.tr_b));
    }
    {
        std::ofstream os(dir / "spectra.csv");
        os << "re,im,chi,p,seed,site,realization,family\n";
        for(const auto &s : result.spectra)
            for(const auto &l : s.eigenvalues)
                os << fmt::format("{},{},{},{},{},{},{},{}\n", fmt_double(l.real()), fmt_double(l.imag()), s.chi, fmt_double(s.p), s.seed, s.site,
                                  s.realization, s.family);
    }
    {
        std::ofstream os(dir / "summary.csv");
        os << "family,N,chi,p,k,r,count,mean,sem,log_of_means\n";
        for(const auto &s : result.summary)
            os << fmt::format("{},{},{},{},{},{},{},{},{},{}\n", s.family, s.n, s.chi, fmt_double(s.p), s.k, s.r, s.count, fmt_double(s.mean),
                              fmt_double(s.sem), fmt_double(s.log_of_means));
    }
    nlohmann::json m;
    m["schema_version"] = schema_version;
    m["code_version"]   = "0.1.0";
    m["config"]         = result.config.to_json();
    m["config_hash"]    = hex(result.config.hash());
    m["points"]         = nlohmann::json::array();
    for(Index chi : result.config.chi)
        for(double p : result.config.p)
            m["points"].push_back({{"chi", chi},
                                   {"p", p},
                                   {"seed", point_seed(result.config.seed, result.config.uniform ? 0 : result.config.n_sites, chi, p)},
                                   {"realizations", result.config.realizations}});
    m["errors"] = nlohmann::json::array();
    for(const auto &e : result.errors) m["errors"].push_back({{"chi", e.chi}, {"p", e.p}, {"kind", e.kind}, {"message", e.message}});
    std::ofstream os(dir / "manifest.json");
    os << m.dump(2) << '\n';
}

std::vector<MinfoRow> read_minfo_csv(const std::filesystem::path &path) {
    std::vector<MinfoRow> out;
    for(const auto &row : read_csv(path, {"family", "N", "chi", "p", "k", "r", "seed", "I_k", "tr_ab", "tr_a", "tr_b"})) {
        MinfoRow m;
        m.family      = row.at("family");
        m.n           = std::stoll(row.at("N"));
        m.chi         = std::stoll(row.at("chi"));
        m.p           = std::stod(row.at("p"));
        m.k           = std::stoi(row.at("k"));
        m.r           = std::stoll(row.at("r"));
        m.seed        = std::stoull(row.at("seed"));
        m.realization = row.count("realization") ? std::stoll(row.at("realization")) : 0;
        m.value       = std::stod(row.at("I_k"));
        m.tr_ab       = std::stod(row.at("tr_ab"));
        m.tr_a        = std::stod(row.at("tr_a"));
        m.tr_b        = std::stod(row.at("tr_b"));
        out.push_back(m);
    }
    return out;
}

std::vector<SpectrumRow> read_spectra_csv(const std::filesystem::path &path) {
    std::vector<SpectrumRow> out;
    for(const auto &row : read_csv(path, {"re", "im", "chi", "p", "seed", "site"})) {
        const Index       chi  = std::stoll(row.at("chi"));
        const double      p    = std::stod(row.at("p"));
        const auto        seed = std::stoull(row.at("seed"));
        const Index       site = std::stoll(row.at("site"));
        const Index       real = row.count("realization") ? std::stoll(row.at("realization")) : 0;
        const std::string fam  = row.count("family") ? row.at("family") : "";
        if(out.empty() || out.back().chi != chi || out.back().p != p || out.back().seed != seed || out.back().site != site ||
           out.back().realization != real || out.back().family != fam)
            out.push_back({fam, chi, p, seed, real, site, {}});
        out.back().eigenvalues.emplace_back(std::stod(row.at("re")), std::stod(row.at("im")));
    }
    return out;
}

std::map<double, std::vector<MiPoint>> mi_curves(const std::vector<SummaryRow> &summary, Index r) {
    std::map<double, std::vector<MiPoint>> out;
    for(const auto &s : summary)
        if(s.r == r) out[s.p].push_back({static_cast<double>(s.chi), s.mean, s.sem});
    for(auto &[p, pts] : out) std::sort(pts.begin(), pts.end(), [](const auto &a, const auto &b) { return a.chi < b.chi; });
    return out;
}

std::map<std::pair<double, double>, std::vector<double>> pooled_by_point(const std::vector<SpectrumRow> &rows, double unit_tol) {
    std::map<std::pair<double, double>, std::vector<double>> out;
    for(const auto &s : rows) {
        auto &dst = out[{s.p, static_cast<double>(s.chi)}];
        for(const auto &l : s.eigenvalues)
            if(std::abs(l) <= 1.0 - unit_tol) dst.push_back(std::abs(l));
    }
    return out;
}

std::map<std::pair<double, double>, std::vector<std::vector<double>>> grouped_by_point(const std::vector<SpectrumRow> &rows, double unit_tol) {
    std::map<std::pair<double, double>, std::map<std::pair<std::uint64_t, Index>, std::vector<double>>> tmp;
    for(const auto &s : rows) {
        auto &dst = tmp[{s.p, static_cast<double>(s.chi)}][{s.seed, s.realization}];
        for(const auto &l : s.eigenvalues)
            if(std::abs(l) <= 1.0 - unit_tol) dst.push_back(std::abs(l));
    }
    std::map<std::pair<double, double>, std::vector<std::vector<double>>> out;
    for(auto &[key, by_real] : tmp)
        for(auto &[r, mods] : by_real) out[key].push_back(std::move(mods));
    return out;
}

} // namespace mpsens
