#include "mpsens/figures.hpp"
#include "mpsens/harness.hpp"
#include "mpsens/oracle/statevector.hpp"

#include <CLI11.hpp>
#include <fmt/format.h>

#include <cmath>
#include <fstream>
#include <iostream>

using namespace mpsens;

namespace {

constexpr int exit_config    = 2;
constexpr int exit_budget    = 3;
constexpr int exit_numerical = 4;

struct Overrides {
    std::string                  config;
    std::optional<std::uint64_t> seed;
    std::optional<std::string>   out;
    std::optional<int>           workers;
    std::optional<std::string>   family;
    std::vector<Index>           chi;
    std::vector<double>          p;
    std::vector<Index>           r;
    std::optional<int>           k;
    std::optional<Index>         depth;
    std::optional<Index>         realizations;
    std::optional<Index>         n_sites;
    bool                         uniform = false;
};

void add_common(CLI::App *cmd, Overrides &o) {
    cmd->add_option("--config", o.config, "JSON sweep configuration");
    cmd->add_option("--seed", o.seed, "master seed");
    cmd->add_option("--out", o.out, "output directory");
    cmd->add_option("--workers", o.workers, "worker threads");
    cmd->add_option("--family", o.family, "rmps | brickwork | brickwork_ti | monitored");
    cmd->add_option("--chi", o.chi, "bond dimension grid")->delimiter(',');
    cmd->add_option("--p", o.p, "measurement probability grid")->delimiter(',');
    cmd->add_option("--r", o.r, "block separation grid")->delimiter(',');
    cmd->add_option("--k", o.k, "Renyi index");
    cmd->add_option("--depth", o.depth, "circuit depth (default 4 chi)");
    cmd->add_option("--realizations", o.realizations, "realizations per grid point");
    cmd->add_option("--n", o.n_sites, "chain length");
    cmd->add_flag("--uniform", o.uniform, "translation-invariant infinite state");
}

SweepConfig build_config(const Overrides &o) {
    nlohmann::json j = nlohmann::json::object();
    if(!o.config.empty()) {
        std::ifstream is(o.config);
        if(!is) throw ConfigError(fmt::format("cannot open config {}", o.config));
        try {
            j = nlohmann::json::parse(is);
        } catch(const nlohmann::json::exception &e) {
            throw ConfigError(fmt::format("{}: {}", o.config, e.what()));
        }
    }
    if(o.seed) j["seed"] = *o.seed;
    if(o.out) j["out"] = *o.out;
    if(o.workers) j["workers"] = *o.workers;
    if(o.family) j["family"] = *o.family;
    if(!o.chi.empty()) j["chi"] = o.chi;
    if(!o.p.empty()) j["p"] = o.p;
    if(!o.r.empty()) j["r"] = o.r;
    if(o.k) j["k"] = *o.k;
    if(o.depth) j["depth"] = *o.depth;
    if(o.realizations) j["realizations"] = *o.realizations;
    if(o.n_sites) j["n_sites"] = *o.n_sites;
    if(o.uniform) j["uniform"] = true;
    return SweepConfig::from_json(j);
}

int report(const EnsembleResult &res) {
    write_dataset(res);
    fmt::print("{} minfo rows, {} spectra -> {}\n", res.minfo.size(), res.spectra.size(), res.config.out);
    int code = 0;
    for(const auto &e : res.errors) {
        fmt::print(stderr, "chi={} p={}: {} ({})\n", e.chi, e.p, e.kind, e.message);
        code = std::max(code, e.kind == "budget" ? exit_budget : exit_numerical);
    }
    return code;
}

int cmd_sweep(const Overrides &o, bool minfo, bool spectra) {
    auto cfg = build_config(o);
    cfg.minfo &= minfo;
    cfg.spectra &= spectra;
    const auto res  = run_sweep(cfg);
    int        code = report(res);
    if(spectra && !res.spectra.empty()) {
        std::vector<TransferSpectrum> all;
        for(const auto &s : res.spectra) {
            TransferSpectrum t;
            t.eigenvalues = s.eigenvalues;
            all.push_back(std::move(t));
        }
        const auto moduli = pooled_moduli(all);
        if(!moduli.empty()) {
            const auto    d = radial_density(all);
            std::ofstream os(std::filesystem::path(cfg.out) / "density.csv");
            os << "bin_left,bin_right,density\n";
            for(Index i = 0; i < d.density.size(); ++i)
                os << fmt::format("{},{},{}\n", fmt_double(d.edges(i)), fmt_double(d.edges(i + 1)), fmt_double(d.density(i)));
            fmt::print("P(|lambda|<0.01) = {:.4g} over {} eigenvalues\n", small_eig_fraction(all, 0.01), moduli.size());
        }
    }
    if(minfo)
        for(const auto &s : res.summary)
            fmt::print("chi={} p={} r={} I_{} = {:.6g} +- {:.2g} (n={})\n", s.chi, s.p, s.r, s.k, s.mean, s.sem, s.count);
    return code;
}

int cmd_fit(const std::string &dataset, Index r, std::vector<double> chi_min) {
    const auto summary = summarize(read_minfo_csv(std::filesystem::path(dataset) / "minfo.csv"));
    const auto curves  = mi_curves(summary, r);
    if(chi_min.empty()) chi_min.push_back(0);
    std::ofstream os(std::filesystem::path(dataset) / "fit.csv");
    os << "p,r,chi_min,estimator,alpha,alpha_err,intercept,residual_norm,points\n";
    for(auto est : {FitEstimator::exp_scaled, FitEstimator::direct})
        for(const auto &row : alpha_vs_p(curves, chi_min, est)) {
            const char *name = est == FitEstimator::exp_scaled ? "exp_scaled" : "direct";
            os << fmt::format("{},{},{},{},{},{},{},{},{}\n", fmt_double(row.p), r, row.chi_min, name, fmt_double(row.fit.alpha),
                              fmt_double(row.fit.alpha_err()), fmt_double(row.fit.intercept), fmt_double(row.fit.residual_norm), row.fit.points);
            fmt::print("p={} chi_min={} {}: alpha = {:.4f} +- {:.4f}\n", row.p, row.chi_min, name, row.fit.alpha, row.fit.alpha_err());
        }
    return 0;
}

int cmd_order_param(const std::string &dataset) {
    const auto    spectra = read_spectra_csv(std::filesystem::path(dataset) / "spectra.csv");
    const auto    scan    = order_parameter_scan(grouped_by_point(spectra), default_rho_grid());
    std::ofstream os(std::filesystem::path(dataset) / "order_param.csv");
    os << "p,chi,value,sigma,pooled,low_confidence,above_floor\n";
    for(const auto &pt : scan.points) {
        os << fmt::format("{},{},{},{},{},{},{}\n", fmt_double(pt.p), pt.chi, fmt_double(pt.ext.value), fmt_double(pt.ext.sigma), pt.ext.pooled,
                          pt.ext.low_confidence ? 1 : 0, pt.above_floor ? 1 : 0);
        fmt::print("p={} chi={}: P(0+) = {:.4g} +- {:.2g}{}{}\n", pt.p, pt.chi, pt.ext.value, pt.ext.sigma, pt.above_floor ? " [above floor]" : "",
                   pt.ext.low_confidence ? " [low confidence]" : "");
    }
    for(const auto &[chi, floor] : scan.noise_floor) {
        const auto it = scan.p_c.find(chi);
        fmt::print("chi={}: noise floor {:.3g}, p_c {}\n", chi, floor, it == scan.p_c.end() ? std::string("not reached") : fmt::format("{}", it->second));
    }
    return 0;
}

int cmd_oracle_check(std::uint64_t seed0, Index n, Index depth, double p, int seeds) {
    double worst = 0;
    for(auto family : {Family::brickwork, Family::monitored, Family::brickwork_ti}) {
        double fam_worst = 0;
        for(int s = 0; s < seeds; ++s) {
            CircuitSpec spec;
            spec.family  = family;
            spec.n_sites = n;
            spec.chi     = Index{1} << ((n + 1) / 2);
            spec.p       = family == Family::monitored ? p : 0.0;
            spec.depth   = depth;
            spec.seed    = seed0 + static_cast<std::uint64_t>(s);
            spec.cutoff  = 0;
            const auto mps = generate(spec);
            const auto ref = oracle::run_circuit(spec);
            ComplexVector a = to_statevector(mps.state);
            const auto   &b = ref.state.amplitudes();
            const cplx    ov = a.dot(b);
            if(std::abs(ov) > 0) a *= ov / std::abs(ov);
            fam_worst = std::max(fam_worst, (a - b).cwiseAbs().maxCoeff());
        }
        fmt::print("{}: max amplitude error {:.3e} over {} seeds\n", to_string(family), fam_worst, seeds);
        worst = std::max(worst, fam_worst);
    }
    return worst <= 1e-10 ? 0 : exit_numerical;
}

} // namespace

int main(int argc, char **argv) {
    CLI::App app{"MPS ensemble transfer spectra and replica mutual information"};
    app.require_subcommand(1);

    Overrides o_sweep, o_spec, o_minfo;
    auto     *sweep = app.add_subcommand("sweep", "run an ensemble sweep (mutual information and spectra)");
    add_common(sweep, o_sweep);
    auto *spec = app.add_subcommand("spectrum", "transfer-matrix spectra only");
    add_common(spec, o_spec);
    auto *minfo = app.add_subcommand("minfo", "Renyi mutual information only");
    add_common(minfo, o_minfo);

    std::string         dataset = ".";
    Index               fit_r   = 1;
    std::vector<double> chi_min;
    auto               *fit = app.add_subcommand("fit", "fit alpha from a dataset's minfo.csv");
    fit->add_option("dataset", dataset, "dataset directory")->required();
    fit->add_option("--r", fit_r, "block separation");
    fit->add_option("--chi-min", chi_min, "chi_min grid")->delimiter(',');

    auto *order = app.add_subcommand("order-param", "extrapolated P(|lambda|<0+) from a dataset's spectra.csv");
    order->add_option("dataset", dataset, "dataset directory")->required();

    std::string                        figure_name;
    std::vector<std::string>           figure_inputs;
    std::string                        figure_out = "figures";
    FigureOptions                      fopts;
    bool                               no_svg = false;
    auto                              *figure = app.add_subcommand("figure", "emit figure-ready CSV and SVG");
    figure->add_option("name", figure_name, "fig2 | fig3 | fig4 | figA1 | figB1 | figC1")->required();
    figure->add_option("datasets", figure_inputs, "dataset directories");
    figure->add_option("--out", figure_out, "output directory");
    figure->add_option("--r", fopts.r, "block separation");
    figure->add_option("--chi-min", fopts.chi_min, "chi_min grid (figB1)")->delimiter(',');
    figure->add_option("--bins", fopts.bins, "radial bins");
    figure->add_flag("--no-svg", no_svg, "skip the SVG rendering");

    std::uint64_t oc_seed = 1;
    Index         oc_n = 8, oc_depth = 8;
    double        oc_p     = 0.3;
    int           oc_seeds = 20;
    auto         *oc       = app.add_subcommand("oracle-check", "compare MPS trajectories with the dense statevector");
    oc->add_option("--seed", oc_seed, "first seed");
    oc->add_option("--n", oc_n, "chain length (<= 12)");
    oc->add_option("--depth", oc_depth, "layers");
    oc->add_option("--p", oc_p, "measurement probability for the monitored family");
    oc->add_option("--seeds", oc_seeds, "number of seeds per family");

    try {
        app.parse(argc, argv);
    } catch(const CLI::ParseError &e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : exit_config;
    }

    try {
        if(*sweep) return cmd_sweep(o_sweep, true, true);
        if(*spec) return cmd_sweep(o_spec, false, true);
        if(*minfo) return cmd_sweep(o_minfo, true, false);
        if(*fit) return cmd_fit(dataset, fit_r, chi_min);
        if(*order) return cmd_order_param(dataset);
        if(*figure) {
            fopts.svg = !no_svg;
            std::vector<std::filesystem::path> inputs(figure_inputs.begin(), figure_inputs.end());
            for(const auto &f : emit_figure_data(inputs, parse_figure(figure_name), figure_out, fopts)) fmt::print("{}\n", f.string());
            return 0;
        }
        if(*oc) {
            if(oc_n < 2 || oc_n > 12) throw ConfigError("oracle-check needs 2 <= n <= 12");
            return cmd_oracle_check(oc_seed, oc_n, oc_depth, oc_p, oc_seeds);
        }
    } catch(const ConfigError &e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return exit_config;
    } catch(const MissingColumnsError &e) {
        fmt::print(stderr, "{}\n", e.what());
        return exit_config;
    } catch(const BudgetExceeded &e) {
        fmt::print(stderr, "budget exceeded: {}\n", e.what());
        return exit_budget;
    } catch(const NumericalError &e) {
        fmt::print(stderr, "numerical failure: {}\n", e.what());
        return exit_numerical;
    } catch(const std::invalid_argument &e) {
        fmt::print(stderr, "config error: {}\n", e.what());
        return exit_config;
    }
    return 0;
}
