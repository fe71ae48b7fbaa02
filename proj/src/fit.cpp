#include "mpsens/fit.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mpsens {

namespace {

    struct LineFit {
        double          a = 0, b = 0;
        Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
        double          residual = 0;
    };

    // y = a + b x with optional per-point standard deviations (0 means unweighted).
    LineFit weighted_line(const std::vector<double> &x, const std::vector<double> &y, const std::vector<double> &sigma) {
        const auto n = static_cast<Index>(x.size());
        bool       weighted = std::all_of(sigma.begin(), sigma.end(), [](double s) { return s > 0; });
        RealMatrix design(n, 2);
        RealVector rhs(n), w(n);
        for(Index i = 0; i < n; ++i) {
            design(i, 0) = 1.0;
            design(i, 1) = x[static_cast<std::size_t>(i)];
            rhs(i)       = y[static_cast<std::size_t>(i)];
            w(i)         = weighted ? 1.0 / (sigma[static_cast<std::size_t>(i)] * sigma[static_cast<std::size_t>(i)]) : 1.0;
        }
        const Eigen::Matrix2d normal = design.transpose() * w.asDiagonal() * design;
        const Eigen::Vector2d coef   = normal.ldlt().solve(design.transpose() * w.asDiagonal() * rhs);
        const RealVector      res    = rhs - design * coef;
        LineFit               f;
        f.a        = coef(0);
        f.b        = coef(1);
        f.residual = res.norm();
        const double chi2 = res.dot(w.asDiagonal() * res);
        const Index  dof  = n - 2;
        // Scale by the reduced chi^2 so the covariance reflects the actual scatter.
        const double scale = dof > 0 ? chi2 / static_cast<double>(dof) : 0.0;
        f.cov              = normal.inverse() * (weighted ? std::max(scale, 1.0) : scale);
        return f;
    }

} // namespace

FitResult fit_alpha(const std::vector<MiPoint> &data, double chi_min, FitEstimator est) {
    std::vector<double> x, y, s;
    for(const auto &pt : data) {
        if(pt.chi < chi_min) continue;
        if(est == FitEstimator::exp_scaled) {
            const double em1 = std::expm1(pt.mean);
            if(!(em1 > 0)) continue;
            x.push_back(std::log(pt.chi));
            y.push_back(std::log(em1));
            s.push_back(pt.sem * std::exp(pt.mean) / em1);
        } else {
            x.push_back(std::log(pt.chi));
            y.push_back(pt.mean);
            s.push_back(pt.sem);
        }
    }
    if(x.size() < 3) throw std::invalid_argument(fmt::format("fit_alpha: {} usable points with chi >= {}, need 3", x.size(), chi_min));
    const auto f = weighted_line(x, y, s);
    FitResult  out;
    out.estimator     = est;
    out.alpha         = f.b;
    out.intercept     = f.a;
    out.covariance    = f.cov;
    out.chi_min       = chi_min;
    out.residual_norm = f.residual;
    out.points        = static_cast<Index>(x.size());
    return out;
}

std::vector<AlphaRow> alpha_vs_p(const std::map<double, std::vector<MiPoint>> &by_p, const std::vector<double> &chi_min_grid, FitEstimator est) {
    if(by_p.empty()) throw std::invalid_argument("alpha_vs_p: empty dataset");
    std::vector<AlphaRow> out;
    for(const auto &[p, pts] : by_p)
        for(double cm : chi_min_grid) out.push_back({p, cm, fit_alpha(pts, cm, est)});
    return out;
}

std::vector<double> default_rho_grid() {
    std::vector<double> g;
    for(int i = 1; i <= 10; ++i) g.push_back(0.005 * i);
    return g;
}

Extrapolation extrapolate_zero(const std::vector<double> &moduli, const std::vector<double> &rho_grid) {
    if(rho_grid.size() < 2) throw std::invalid_argument("extrapolate_zero: need at least two rho values");
    Extrapolation e;
    e.rho    = rho_grid;
    e.pooled = static_cast<Index>(moduli.size());
    if(moduli.empty()) throw std::invalid_argument("extrapolate_zero: no eigenvalues");
    e.low_confidence = e.pooled < 10000;
    std::vector<double> sorted(moduli);
    std::sort(sorted.begin(), sorted.end());
    const double        n = static_cast<double>(sorted.size());
    std::vector<double> sig;
    for(double rho : rho_grid) {
        const auto   below = std::lower_bound(sorted.begin(), sorted.end(), rho) - sorted.begin();
        const double p     = static_cast<double>(below) / n;
        e.cumulative.push_back(p);
        sig.push_back(std::sqrt(std::max(p * (1 - p) / n, 1.0 / (n * n))));
    }
    const auto f = weighted_line(rho_grid, e.cumulative, sig);
    e.value      = f.a;
    e.slope      = f.b;
    e.sigma      = std::sqrt(std::max(f.cov(0, 0), 0.0));
    return e;
}

Extrapolation extrapolate_zero(const std::vector<std::vector<double>> &groups, const std::vector<double> &rho_grid) {
    std::vector<double> all;
    for(const auto &g : groups) all.insert(all.end(), g.begin(), g.end());
    Extrapolation e = extrapolate_zero(all, rho_grid);
    if(groups.size() < 2) return e;
    // counts[g][j]: eigenvalues of group g below rho_j
    const std::size_t                 m = rho_grid.size();
    std::vector<std::vector<double>>  counts(groups.size(), std::vector<double>(m, 0.0));
    std::vector<double>               total(m, 0.0);
    for(std::size_t g = 0; g < groups.size(); ++g)
        for(double x : groups[g])
            for(std::size_t j = 0; j < m; ++j)
                if(x < rho_grid[j]) counts[g][j] += 1;
    for(const auto &c : counts)
        for(std::size_t j = 0; j < m; ++j) total[j] += c[j];
    const double        n = static_cast<double>(all.size());
    std::vector<double> sig;
    for(double p : e.cumulative) sig.push_back(std::sqrt(std::max(p * (1 - p) / n, 1.0 / (n * n))));
    std::vector<double> loo;
    for(std::size_t g = 0; g < groups.size(); ++g) {
        const double rest = n - static_cast<double>(groups[g].size());
        if(rest <= 0) continue;
        std::vector<double> y(m);
        for(std::size_t j = 0; j < m; ++j) y[j] = (total[j] - counts[g][j]) / rest;
        loo.push_back(weighted_line(rho_grid, y, sig).a);
    }
    if(loo.size() < 2) return e;
    const double k    = static_cast<double>(loo.size());
    const double mean = std::accumulate(loo.begin(), loo.end(), 0.0) / k;
    double       ss   = 0;
    for(double v : loo) ss += (v - mean) * (v - mean);
    e.sigma = std::max(e.sigma, std::sqrt((k - 1) / k * ss));
    return e;
}

namespace {

OrderParameterScan finish_scan(OrderParameterScan scan) {
    // Baseline: the smallest p available at each chi.
    std::map<double, const OrderParameterPoint *> base;
    for(const auto &pt : scan.points)
        if(!base.count(pt.chi) || pt.p < base[pt.chi]->p) base[pt.chi] = &pt;
    for(const auto &[chi, b] : base) {
        const double n       = static_cast<double>(b->ext.pooled);
        scan.noise_floor[chi] = 3.0 * std::max({std::abs(b->ext.value), b->ext.sigma, 1.0 / n});
    }
    std::sort(scan.points.begin(), scan.points.end(), [](const auto &a, const auto &b) { return std::tie(a.chi, a.p) < std::tie(b.chi, b.p); });
    for(auto &pt : scan.points) {
        pt.above_floor = pt.ext.value > scan.noise_floor[pt.chi];
        if(pt.above_floor && !scan.p_c.count(pt.chi)) scan.p_c[pt.chi] = pt.p;
    }
    return scan;
}

} // namespace

OrderParameterScan order_parameter_scan(const std::map<std::pair<double, double>, std::vector<double>> &moduli, const std::vector<double> &rho_grid) {
    if(moduli.empty()) throw std::invalid_argument("order_parameter_scan: no spectra");
    OrderParameterScan scan;
    for(const auto &[key, mods] : moduli) scan.points.push_back({key.first, key.second, extrapolate_zero(mods, rho_grid), false});
    return finish_scan(std::move(scan));
}

OrderParameterScan order_parameter_scan(const std::map<std::pair<double, double>, std::vector<std::vector<double>>> &groups,
                                        const std::vector<double> &rho_grid) {
    if(groups.empty()) throw std::invalid_argument("order_parameter_scan: no spectra");
    OrderParameterScan scan;
    for(const auto &[key, g] : groups) scan.points.push_back({key.first, key.second, extrapolate_zero(g, rho_grid), false});
    return finish_scan(std::move(scan));
}

} // namespace mpsens
