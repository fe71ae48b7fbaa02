#include "mpsens/figures.hpp"

#include "mpsens/weingarten.hpp"

#include <fmt/format.h>
#include <fmt/ranges.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <set>

namespace mpsens {

std::string to_string(Figure f) {
    switch(f) {
        case Figure::fig2: return "fig2";
        case Figure::fig3: return "fig3";
        case Figure::fig4: return "fig4";
        case Figure::figA1: return "figA1";
        case Figure::figB1: return "figB1";
        case Figure::figC1: return "figC1";
    }
    return "?";
}

Figure parse_figure(const std::string &s) {
    for(auto f : {Figure::fig2, Figure::fig3, Figure::fig4, Figure::figA1, Figure::figB1, Figure::figC1})
        if(to_string(f) == s) return f;
    throw std::invalid_argument(fmt::format("unknown figure '{}'", s));
}

namespace {

    std::vector<SpectrumRow> load_spectra(const std::vector<std::filesystem::path> &datasets) {
        if(datasets.empty()) throw MissingColumnsError("no dataset given; needs spectra.csv with re, im, chi, p, seed, site", {"re", "im", "chi", "p", "seed", "site"});
        std::vector<SpectrumRow> rows;
        for(const auto &d : datasets) {
            auto part = read_spectra_csv(d / "spectra.csv");
            std::move(part.begin(), part.end(), std::back_inserter(rows));
        }
        if(rows.empty()) throw MissingColumnsError("spectra.csv has no rows", {"re", "im", "chi", "p", "seed", "site"});
        return rows;
    }

    std::vector<SummaryRow> load_summary(const std::vector<std::filesystem::path> &datasets) {
        const std::vector<std::string> cols{"family", "N", "chi", "p", "k", "r", "seed", "I_k", "tr_ab", "tr_a", "tr_b"};
        if(datasets.empty()) throw MissingColumnsError("no dataset given; needs minfo.csv", cols);
        std::vector<MinfoRow> rows;
        for(const auto &d : datasets) {
            auto part = read_minfo_csv(d / "minfo.csv");
            rows.insert(rows.end(), part.begin(), part.end());
        }
        if(rows.empty()) throw MissingColumnsError("minfo.csv has no rows", cols);
        return summarize(rows);
    }

    std::vector<TransferSpectrum> as_spectra(const std::vector<SpectrumRow> &rows) {
        std::vector<TransferSpectrum> out;
        for(const auto &r : rows) {
            TransferSpectrum s;
            s.eigenvalues = r.eigenvalues;
            s.chi         = r.chi;
            s.site        = r.site;
            s.family      = r.family;
            s.p           = r.p;
            s.seed        = r.seed;
            out.push_back(std::move(s));
        }
        return out;
    }

    std::map<Index, RadialDensity> densities_by_chi(const std::vector<SpectrumRow> &rows, Index bins) {
        std::map<Index, std::vector<SpectrumRow>> by_chi;
        for(const auto &r : rows) by_chi[r.chi].push_back(r);
        std::map<Index, RadialDensity> out;
        for(const auto &[chi, group] : by_chi) {
            const auto spectra = as_spectra(group);
            bool       any     = false;
            for(const auto &s : spectra)
                for(const auto &l : s.eigenvalues) any = any || std::abs(l) <= 1.0 - 1e-6;
            if(any) out.emplace(chi, radial_density(spectra, bins));
        }
        return out;
    }

    std::vector<double> centers(const RadialDensity &d) {
        std::vector<double> c;
        for(Index i = 0; i + 1 < d.edges.size(); ++i) c.push_back(0.5 * (d.edges(i) + d.edges(i + 1)));
        return c;
    }

    std::vector<double> to_std(const RealVector &v) { return {v.data(), v.data() + v.size()}; }

} // namespace

void write_svg(const std::filesystem::path &path, const SvgPlot &plot) {
    constexpr double W = 640, H = 420, L = 70, R = 150, T = 40, B = 50;
    double           x0 = std::numeric_limits<double>::infinity(), x1 = -x0, y0 = x0, y1 = -x0;
    auto             tx = [&](double x) { return plot.logx ? std::log10(x) : x; };
    for(const auto &s : plot.series)
        for(std::size_t i = 0; i < s.x.size(); ++i) {
            if(!std::isfinite(s.y[i]) || (plot.logx && s.x[i] <= 0)) continue;
            x0 = std::min(x0, tx(s.x[i]));
            x1 = std::max(x1, tx(s.x[i]));
            y0 = std::min(y0, s.y[i]);
            y1 = std::max(y1, s.y[i]);
        }
    for(double v : plot.vlines) {
        x0 = std::min(x0, tx(v));
        x1 = std::max(x1, tx(v));
    }
    if(!std::isfinite(x0)) x0 = 0, x1 = 1, y0 = 0, y1 = 1;
    if(x1 == x0) x1 = x0 + 1;
    if(y1 == y0) y1 = y0 + 1;
    auto px = [&](double x) { return L + (tx(x) - x0) / (x1 - x0) * (W - L - R); };
    auto py = [&](double y) { return H - B - (y - y0) / (y1 - y0) * (H - T - B); };

    static const char *colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e", "#8c564b", "#e377c2", "#17becf"};
    std::ofstream      os(path);
    os << fmt::format("<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{}\" height=\"{}\" font-family=\"sans-serif\" font-size=\"12\">\n", W, H);
    os << fmt::format("<rect width=\"{}\" height=\"{}\" fill=\"white\"/>\n", W, H);
    os << fmt::format("<text x=\"{}\" y=\"20\" text-anchor=\"middle\" font-size=\"14\">{}</text>\n", (W - R + L) / 2, plot.title);
    os << fmt::format("<rect x=\"{}\" y=\"{}\" width=\"{}\" height=\"{}\" fill=\"none\" stroke=\"black\"/>\n", L, T, W - L - R, H - T - B);
    for(int i = 0; i <= 4; ++i) {
        const double fx = x0 + (x1 - x0) * i / 4, fy = y0 + (y1 - y0) * i / 4;
        const double gx = L + (W - L - R) * i / 4, gy = H - B - (H - T - B) * i / 4;
        os << fmt::format("<text x=\"{:.1f}\" y=\"{}\" text-anchor=\"middle\">{:.3g}</text>\n", gx, H - B + 16, plot.logx ? std::pow(10.0, fx) : fx);
        os << fmt::format("<text x=\"{}\" y=\"{:.1f}\" text-anchor=\"end\">{:.3g}</text>\n", L - 4, gy + 4, fy);
    }
    os << fmt::format("<text x=\"{}\" y=\"{}\" text-anchor=\"middle\">{}</text>\n", (W - R + L) / 2, H - 10, plot.xlabel);
    os << fmt::format("<text x=\"16\" y=\"{}\" text-anchor=\"middle\" transform=\"rotate(-90 16 {})\">{}</text>\n", (H - B + T) / 2, (H - B + T) / 2,
                      plot.ylabel);
    for(double v : plot.vlines)
        os << fmt::format("<line x1=\"{0:.1f}\" x2=\"{0:.1f}\" y1=\"{1}\" y2=\"{2}\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n", px(v), T, H - B);
    for(std::size_t s = 0; s < plot.series.size(); ++s) {
        const auto       &ser = plot.series[s];
        const char       *col = colors[s % std::size(colors)];
        std::string       pts;
        for(std::size_t i = 0; i < ser.x.size(); ++i) {
            if(!std::isfinite(ser.y[i]) || (plot.logx && ser.x[i] <= 0)) continue;
            pts += fmt::format("{:.1f},{:.1f} ", px(ser.x[i]), py(ser.y[i]));
        }
        os << fmt::format("<polyline fill=\"none\" stroke=\"{}\" stroke-width=\"1.5\" points=\"{}\"/>\n", col, pts);
        const double ly = T + 14 + 16 * static_cast<double>(s);
        os << fmt::format("<line x1=\"{0}\" x2=\"{1}\" y1=\"{2}\" y2=\"{2}\" stroke=\"{3}\" stroke-width=\"2\"/>\n", W - R + 10, W - R + 30, ly - 4, col);
        os << fmt::format("<text x=\"{}\" y=\"{}\">{}</text>\n", W - R + 34, ly, ser.label);
    }
    os << "</svg>\n";
}

std::vector<std::filesystem::path> emit_figure_data(const std::vector<std::filesystem::path> &datasets, Figure fig,
                                                    const std::filesystem::path &out, const FigureOptions &opts) {
    std::filesystem::create_directories(out);
    std::vector<std::filesystem::path> written;
    const std::string                  name = to_string(fig);
    auto open = [&](const std::string &suffix) {
        written.push_back(out / (name + suffix));
        return std::ofstream(written.back());
    };
    auto svg = [&](const SvgPlot &plot) {
        if(!opts.svg) return;
        written.push_back(out / (name + ".svg"));
        write_svg(written.back(), plot);
    };

    switch(fig) {
        case Figure::fig2: {
            const auto dens = densities_by_chi(load_spectra(datasets), opts.bins);
            const double ref  = 1.0 / std::sqrt(opts.d);
            auto         os   = open("_density.csv");
            os << "chi,bin_left,bin_right,density,inv_sqrt_d\n";
            SvgPlot plot{"radial spectral density", "|lambda|", "density", {}, {ref}, false};
            for(const auto &[chi, d] : dens) {
                for(Index i = 0; i < d.density.size(); ++i)
                    os << fmt::format("{},{},{},{},{}\n", chi, fmt_double(d.edges(i)), fmt_double(d.edges(i + 1)), fmt_double(d.density(i)), fmt_double(ref));
                plot.series.push_back({fmt::format("chi={}", chi), centers(d), to_std(d.density)});
            }
            svg(plot);
            break;
        }
        case Figure::fig3: {
            const auto curves = mi_curves(load_summary(datasets), opts.r);
            auto       os     = open("_minfo.csv");
            os << "p,r,chi,mean,sem,exp_minus_1\n";
            SvgPlot plot{fmt::format("exp(I) - 1 at r = {}", opts.r), "chi", "log10(exp(I) - 1)", {}, {}, true};
            for(const auto &[p, pts] : curves) {
                SvgSeries ser{fmt::format("p={}", p), {}, {}};
                for(const auto &m : pts) {
                    os << fmt::format("{},{},{},{},{},{}\n", fmt_double(p), opts.r, m.chi, fmt_double(m.mean), fmt_double(m.sem), fmt_double(std::expm1(m.mean)));
                    ser.x.push_back(m.chi);
                    ser.y.push_back(std::log10(std::expm1(m.mean)));
                }
                plot.series.push_back(std::move(ser));
            }
            auto fs = open("_fit.csv");
            fs << "p,estimator,chi_min,alpha,alpha_err,intercept,points,xi_eff_slope\n";
            for(const auto &[p, pts] : curves)
                for(auto est : {FitEstimator::exp_scaled, FitEstimator::direct}) {
                    if(pts.size() < 3) continue;
                    try {
                        const auto f = fit_alpha(pts, pts.front().chi, est);
                        fs << fmt::format("{},{},{},{},{},{},{},{}\n", fmt_double(p), est == FitEstimator::exp_scaled ? "exp_scaled" : "direct",
                                          f.chi_min, fmt_double(f.alpha), fmt_double(f.alpha_err()), fmt_double(f.intercept), f.points,
                                          fmt_double(f.alpha));
                    } catch(const std::invalid_argument &) {
                    }
                }
            svg(plot);
            break;
        }
        case Figure::fig4: {
            const auto spectra = load_spectra(datasets);
            const auto rho     = default_rho_grid();
            const auto scan    = order_parameter_scan(grouped_by_point(spectra), rho);
            auto       os      = open("_cumulative.csv");
            os << "p,chi,rho,P\n";
            auto es = open("_extrapolated.csv");
            es << "p,chi,value,sigma,pooled,low_confidence,above_floor,noise_floor\n";
            SvgPlot plot{"P(|lambda| < rho)", "rho", "P", {}, {}, false};
            for(const auto &pt : scan.points) {
                for(std::size_t i = 0; i < pt.ext.rho.size(); ++i)
                    os << fmt::format("{},{},{},{}\n", fmt_double(pt.p), pt.chi, fmt_double(pt.ext.rho[i]), fmt_double(pt.ext.cumulative[i]));
                es << fmt::format("{},{},{},{},{},{},{},{}\n", fmt_double(pt.p), pt.chi, fmt_double(pt.ext.value), fmt_double(pt.ext.sigma), pt.ext.pooled,
                                  pt.ext.low_confidence ? 1 : 0, pt.above_floor ? 1 : 0, fmt_double(scan.noise_floor.at(pt.chi)));
                plot.series.push_back({fmt::format("p={} chi={}", pt.p, pt.chi), pt.ext.rho, pt.ext.cumulative});
            }
            auto ps = open("_pc.csv");
            ps << "chi,p_c\n";
            for(const auto &[chi, pc] : scan.p_c) ps << fmt::format("{},{}\n", chi, fmt_double(pc));
            svg(plot);
            break;
        }
        case Figure::figA1: {
            auto os = open("_slopes.csv");
            os << "k,chi,slope\n";
            SvgPlot plot{"d I_k / d log chi (RMPS)", "chi", "slope", {}, {}, true};
            for(int k : opts.k) {
                SvgSeries ser{fmt::format("k={}", k), {}, {}};
                for(const auto &sp : ik_slope_scan(k, static_cast<Index>(opts.d), opts.analytic_chi, opts.r)) {
                    os << fmt::format("{},{},{}\n", k, sp.chi, fmt_double(sp.slope));
                    ser.x.push_back(sp.chi);
                    ser.y.push_back(sp.slope);
                }
                plot.series.push_back(std::move(ser));
            }
            svg(plot);
            break;
        }
        case Figure::figB1: {
            const auto curves = mi_curves(load_summary(datasets), opts.r);
            std::vector<double> chi_min = opts.chi_min;
            if(chi_min.empty()) {
                std::set<double> chis;
                for(const auto &[p, pts] : curves)
                    for(const auto &m : pts) chis.insert(m.chi);
                std::vector<double> all(chis.begin(), chis.end());
                for(std::size_t i = 0; i + 3 <= all.size(); ++i) chi_min.push_back(all[i]);
            }
            auto os = open("_alpha.csv");
            os << "p,chi_min,estimator,alpha,alpha_err,points\n";
            std::map<double, SvgSeries> lines;
            for(auto est : {FitEstimator::exp_scaled, FitEstimator::direct}) {
                std::map<double, std::vector<MiPoint>> usable;
                for(const auto &[p, pts] : curves)
                    if(pts.size() >= 3) usable[p] = pts;
                for(const auto &row : alpha_vs_p(usable, chi_min, est)) {
                    os << fmt::format("{},{},{},{},{},{}\n", fmt_double(row.p), row.chi_min, est == FitEstimator::exp_scaled ? "exp_scaled" : "direct",
                                      fmt_double(row.fit.alpha), fmt_double(row.fit.alpha_err()), row.fit.points);
                    if(est == FitEstimator::exp_scaled) {
                        auto &ser = lines[row.chi_min];
                        ser.label = fmt::format("chi_min={}", row.chi_min);
                        ser.x.push_back(row.p);
                        ser.y.push_back(row.fit.alpha);
                    }
                }
            }
            SvgPlot plot{"alpha(p)", "p", "alpha", {}, {}, false};
            for(auto &[c, ser] : lines) plot.series.push_back(std::move(ser));
            svg(plot);
            break;
        }
        case Figure::figC1: {
            const auto rows = load_spectra(datasets);
            std::map<std::string, std::vector<SpectrumRow>> by_family;
            for(const auto &r : rows) by_family[r.family].push_back(r);
            if(!by_family.count("rmps") || by_family.size() < 2)
                throw MissingColumnsError("figC1 needs rmps spectra and at least one other family in the family column", {"family"});
            const auto rmps = densities_by_chi(by_family.at("rmps"), opts.bins);
            auto       os   = open("_difference.csv");
            os << "chi,family,bin_left,bin_right,rmps,other,difference\n";
            SvgPlot plot{"RMPS minus circuit radial density", "|lambda|", "difference", {}, {1.0 / std::sqrt(opts.d)}, false};
            for(const auto &[fam, group] : by_family) {
                if(fam == "rmps") continue;
                for(const auto &[chi, d] : densities_by_chi(group, opts.bins)) {
                    if(!rmps.count(chi)) continue;
                    const auto &a    = rmps.at(chi);
                    const auto  diff = density_difference(a, d);
                    for(Index i = 0; i < diff.size(); ++i)
                        os << fmt::format("{},{},{},{},{},{},{}\n", chi, fam, fmt_double(a.edges(i)), fmt_double(a.edges(i + 1)), fmt_double(a.density(i)),
                                          fmt_double(d.density(i)), fmt_double(diff(i)));
                    plot.series.push_back({fmt::format("{} chi={}", fam, chi), centers(a), to_std(diff)});
                }
            }
            svg(plot);
            break;
        }
    }
    return written;
}

} // namespace mpsens
