#include "mpsens/figures.hpp"
#include "mpsens/harness.hpp"

#include <gtest/gtest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

using namespace mpsens;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path &p) {
    std::ifstream     is(p, std::ios::binary);
    std::stringstream ss;
    ss << is.rdbuf();
    return ss.str();
}

fs::path scratch(const std::string &name) {
    const auto p = fs::temp_directory_path() / ("mpsens_test_" + name);
    fs::remove_all(p);
    return p;
}

SweepConfig small_config(const std::string &name) {
    SweepConfig c;
    c.family       = Family::monitored;
    c.n_sites      = 10;
    c.chi          = {4, 6};
    c.p            = {0.0, 0.3};
    c.r            = {1, 2};
    c.realizations = 3;
    c.seed         = 42;
    c.out          = scratch(name).string();
    return c;
}

} // namespace

TEST(Harness, ConfigJsonRoundTrip) {
    auto c  = small_config("rt");
    c.depth = 5;
    const auto back = SweepConfig::from_json(c.to_json());
    EXPECT_EQ(back.to_json(), c.to_json());
    EXPECT_EQ(back.hash(), c.hash());
    auto other = c;
    other.workers = 4;
    other.out     = "elsewhere";
    EXPECT_EQ(other.hash(), c.hash());
    other.seed = 43;
    EXPECT_NE(other.hash(), c.hash());
}

TEST(Harness, ConfigValidation) {
    EXPECT_THROW((void)SweepConfig::from_json({{"chi", {-1}}}), ConfigError);
    EXPECT_THROW((void)SweepConfig::from_json({{"realizations", 0}}), ConfigError);
    EXPECT_THROW((void)SweepConfig::from_json({{"family", "brickwork"}, {"p", {0.2}}}), ConfigError);
    EXPECT_THROW((void)SweepConfig::from_json({{"colour", "blue"}}), ConfigError);
    EXPECT_THROW((void)SweepConfig::from_json({{"family", "haar"}}), ConfigError);
    EXPECT_THROW((void)SweepConfig::from_json({{"k", 5}}), ConfigError);
    EXPECT_THROW((void)SweepConfig::from_json({{"chi", "eight"}}), ConfigError);
    EXPECT_THROW((void)SweepConfig::load("/nonexistent/config.json"), ConfigError);
    const auto ok = SweepConfig::from_json({{"family", "rmps"}, {"chi", 8}, {"r", {1, 3}}});
    EXPECT_EQ(ok.chi, std::vector<Index>{8});
}

TEST(Harness, SinglePointWritesOneRowAndManifest) {
    SweepConfig c;
    c.family       = Family::brickwork;
    c.n_sites      = 8;
    c.chi          = {4};
    c.realizations = 1;
    c.spectra      = false;
    c.out          = scratch("single").string();
    const auto res = run_sweep(c);
    write_dataset(res);
    const auto rows = read_minfo_csv(fs::path(c.out) / "minfo.csv");
    ASSERT_EQ(rows.size(), 1U);
    EXPECT_EQ(rows[0].value, res.minfo[0].value);
    const auto m = nlohmann::json::parse(slurp(fs::path(c.out) / "manifest.json"));
    EXPECT_EQ(m["schema_version"], schema_version);
    EXPECT_EQ(m["points"].size(), 1U);
    EXPECT_EQ(m["points"][0]["seed"].get<std::uint64_t>(), point_seed(c.seed, c.n_sites, 4, 0.0));
    EXPECT_TRUE(m.contains("code_version"));
    EXPECT_TRUE(m.contains("config_hash"));
}

TEST(Harness, DeterministicAcrossWorkerCounts) {
    auto a = small_config("det_a"), b = small_config("det_b");
    b.workers = 3;
    write_dataset(run_sweep(a));
    write_dataset(run_sweep(b));
    for(const char *f : {"minfo.csv", "spectra.csv", "summary.csv"}) EXPECT_EQ(slurp(fs::path(a.out) / f), slurp(fs::path(b.out) / f)) << f;
}

TEST(Harness, ZeroRateMonitoredReplaysBrickwork) {
    auto m = small_config("p0_m");
    m.p    = {0.0};
    auto w = m;
    w.family = Family::brickwork;
    w.out    = scratch("p0_w").string();
    const auto rm = run_sweep(m), rw = run_sweep(w);
    ASSERT_EQ(rm.minfo.size(), rw.minfo.size());
    for(std::size_t i = 0; i < rm.minfo.size(); ++i) {
        EXPECT_EQ(rm.minfo[i].value, rw.minfo[i].value);
        EXPECT_EQ(rm.minfo[i].tr_ab, rw.minfo[i].tr_ab);
    }
}

TEST(Harness, CsvRoundTripIsLossless) {
    auto c = small_config("csv");
    const auto res = run_sweep(c);
    write_dataset(res);
    const auto rows = read_minfo_csv(fs::path(c.out) / "minfo.csv");
    ASSERT_EQ(rows.size(), res.minfo.size());
    for(std::size_t i = 0; i < rows.size(); ++i) {
        EXPECT_EQ(rows[i].value, res.minfo[i].value);
        EXPECT_EQ(rows[i].p, res.minfo[i].p);
        EXPECT_EQ(rows[i].seed, res.minfo[i].seed);
    }
    const auto spec = read_spectra_csv(fs::path(c.out) / "spectra.csv");
    ASSERT_EQ(spec.size(), res.spectra.size());
    for(std::size_t i = 0; i < spec.size(); ++i) EXPECT_EQ(spec[i].eigenvalues, res.spectra[i].eigenvalues);
}

TEST(Harness, BudgetFailureKeepsOtherPoints) {
    auto c    = small_config("budget");
    c.chi     = {2, 8};
    c.p       = {0.0};
    c.budget  = 300; // 2^4 fits, 8^4 does not
    c.spectra = false;
    const auto res = run_sweep(c);
    ASSERT_EQ(res.errors.size(), 1U);
    EXPECT_EQ(res.errors[0].kind, "budget");
    EXPECT_EQ(res.errors[0].chi, 8);
    EXPECT_FALSE(res.minfo.empty());
    for(const auto &r : res.minfo) EXPECT_EQ(r.chi, 2);
}

TEST(Harness, CacheReuseGivesIdenticalResults) {
    const auto cache = scratch("cache");
    setenv("MPS_ENSEMBLES_CACHE", cache.c_str(), 1);
    auto       c     = small_config("cache_run");
    const auto first = run_sweep(c);
    std::size_t files = 0;
    for(const auto &e : fs::directory_iterator(cache))
        if(e.path().extension() == ".mps") ++files;
    const auto second = run_sweep(c);
    unsetenv("MPS_ENSEMBLES_CACHE");
    EXPECT_EQ(files, 12U);
    const auto fresh = run_sweep(c);
    ASSERT_EQ(first.minfo.size(), second.minfo.size());
    for(std::size_t i = 0; i < first.minfo.size(); ++i) {
        EXPECT_EQ(first.minfo[i].value, second.minfo[i].value);
        EXPECT_EQ(first.minfo[i].value, fresh.minfo[i].value);
    }
}

TEST(Harness, SummaryStatistics) {
    std::vector<MinfoRow> rows;
    for(double v : {1.0, 2.0, 3.0}) rows.push_back({"x", 8, 4, 0.0, 2, 1, 0, 0, v, 2.0, 1.0, 1.0});
    const auto s = summarize(rows);
    ASSERT_EQ(s.size(), 1U);
    EXPECT_EQ(s[0].count, 3);
    EXPECT_NEAR(s[0].mean, 2.0, 1e-15);
    EXPECT_NEAR(s[0].sem, 1.0 / std::sqrt(3.0), 1e-12);
    EXPECT_NEAR(s[0].log_of_means, std::log(2.0), 1e-15);
}

TEST(Figures, EmptyDatasetListsMissingColumns) {
    const auto dir = scratch("empty_ds");
    fs::create_directories(dir);
    std::ofstream(dir / "spectra.csv").close();
    try {
        (void)emit_figure_data({dir}, Figure::fig2, scratch("empty_out"));
        FAIL() << "expected MissingColumnsError";
    } catch(const MissingColumnsError &e) {
        EXPECT_NE(std::find(e.missing.begin(), e.missing.end(), "re"), e.missing.end());
        EXPECT_NE(std::string(e.what()).find("re"), std::string::npos);
    }
    EXPECT_THROW((void)emit_figure_data({}, Figure::fig3, scratch("empty_out2")), MissingColumnsError);
}

TEST(Figures, RmpsDensityBundle) {
    SweepConfig c;
    c.family       = Family::rmps;
    c.uniform      = true;
    c.chi          = {10, 20};
    c.realizations = 2;
    c.minfo        = false;
    c.out          = scratch("fig2_ds").string();
    write_dataset(run_sweep(c));
    const auto out   = scratch("fig2_out");
    const auto files = emit_figure_data({c.out}, Figure::fig2, out);
    ASSERT_TRUE(fs::exists(out / "fig2_density.csv"));
    ASSERT_TRUE(fs::exists(out / "fig2.svg"));
    EXPECT_EQ(files.size(), 2U);
    std::ifstream is(out / "fig2_density.csv");
    std::string   header, line;
    std::getline(is, header);
    EXPECT_EQ(header, "chi,bin_left,bin_right,density,inv_sqrt_d");
    int n = 0;
    while(std::getline(is, line)) ++n;
    EXPECT_EQ(n, 200);
    EXPECT_NE(slurp(out / "fig2.svg").find("<svg"), std::string::npos);
}

TEST(Figures, AnalyticSlopeBundle) {
    const auto out = scratch("figA1");
    FigureOptions o;
    o.svg = false;
    (void)emit_figure_data({}, Figure::figA1, out, o);
    std::ifstream is(out / "figA1_slopes.csv");
    std::string   line;
    std::getline(is, line);
    EXPECT_EQ(line, "k,chi,slope");
    std::set<int> ks;
    while(std::getline(is, line)) ks.insert(std::stoi(line.substr(0, line.find(','))));
    EXPECT_EQ(ks, (std::set<int>{2, 3, 4}));
}

TEST(Figures, ParseNames) {
    EXPECT_EQ(parse_figure("figB1"), Figure::figB1);
    EXPECT_THROW((void)parse_figure("fig9"), std::invalid_argument);
}
