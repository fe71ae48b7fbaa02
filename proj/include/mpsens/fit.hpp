#pragma once

#include "mpsens/linalg.hpp"
#include "mpsens/transfer.hpp"

#include <map>
#include <string>
#include <vector>

namespace mpsens {

/// Ensemble-mean mutual information at one bond dimension.
struct MiPoint {
    double chi    = 0;
    double mean   = 0;
    double sem  = 0; // standard error of the mean, 0 for exact data
};

enum class FitEstimator {
    exp_scaled, // slope of log(e^I - 1) against log chi
    direct,     // slope of I against log chi
};

struct FitResult {
    FitEstimator    estimator = FitEstimator::exp_scaled;
    double          alpha     = 0;
    double          intercept = 0;
    Eigen::Matrix2d covariance = Eigen::Matrix2d::Zero(); // (intercept, alpha)
    double          chi_min   = 0;
    double          residual_norm = 0;
    Index           points    = 0;

    [[nodiscard]] double alpha_err() const { return std::sqrt(std::max(covariance(1, 1), 0.0)); }
};

/// Weighted least squares over points with chi >= chi_min. For exp_scaled,
/// points with e^I - 1 <= 0 carry no information on the log scale and are
/// skipped. Throws std::invalid_argument with fewer than 3 usable points.
[[nodiscard]] FitResult fit_alpha(const std::vector<MiPoint> &data, double chi_min, FitEstimator est = FitEstimator::exp_scaled);

struct AlphaRow {
    double    p       = 0;
    double    chi_min = 0;
    FitResult fit;
};

/// alpha(p) for every chi_min; `by_p` maps p to its chi curve.
[[nodiscard]] std::vector<AlphaRow> alpha_vs_p(const std::map<double, std::vector<MiPoint>> &by_p, const std::vector<double> &chi_min_grid,
                                               FitEstimator est = FitEstimator::exp_scaled);

struct Extrapolation {
    std::vector<double> rho;
    std::vector<double> cumulative; // P(|λ| < rho)
    double              value  = 0; // intercept at rho -> 0+
    double              sigma  = 0;
    double              slope  = 0;
    Index               pooled = 0;
    bool                low_confidence = false; // fewer than 1e4 pooled eigenvalues
};

/// Linear fit of P(|λ|<ρ) on the rho grid, extrapolated to ρ -> 0+. Binomial
/// variances weight the points (floored at 1/n^2).
[[nodiscard]] Extrapolation extrapolate_zero(const std::vector<double> &moduli, const std::vector<double> &rho_grid);

/// Same fit on moduli grouped by realization. Eigenvalues of one realization
/// are correlated, so sigma is the larger of the binomial error and a
/// delete-one-group jackknife.
[[nodiscard]] Extrapolation extrapolate_zero(const std::vector<std::vector<double>> &groups, const std::vector<double> &rho_grid);

struct OrderParameterPoint {
    double        p   = 0;
    double        chi = 0;
    Extrapolation ext;
    bool          above_floor = false;
};

struct OrderParameterScan {
    std::vector<OrderParameterPoint> points;
    std::map<double, double>         noise_floor; // per chi
    std::map<double, double>         p_c;         // per chi; absent if no p clears the floor
};

/// `moduli` maps (p, chi) to pooled non-unit eigenvalue moduli. The noise
/// floor at each chi is 3 * max(|P0|, sigma_P0, 1/n) from the p = 0 entry
/// (or the smallest p when p = 0 is absent).
[[nodiscard]] OrderParameterScan order_parameter_scan(const std::map<std::pair<double, double>, std::vector<double>> &moduli,
                                                      const std::vector<double> &rho_grid);
[[nodiscard]] OrderParameterScan order_parameter_scan(const std::map<std::pair<double, double>, std::vector<std::vector<double>>> &groups,
                                                      const std::vector<double> &rho_grid);

[[nodiscard]] std::vector<double> default_rho_grid();

} // namespace mpsens
