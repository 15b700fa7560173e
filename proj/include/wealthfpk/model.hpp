#pragma once

#include <optional>

namespace wealthfpk {

/// Market parameters of the wealth Fokker-Planck model.
/// lambda is the drift strength, sigma the diffusion strength (both 1/time).
/// The Pareto exponent mu = 1 + 2*lambda/sigma is always recomputed from
/// them, never stored, so it cannot drift out of sync.
struct ModelParams {
    double lambda;
    double sigma;

    double mu() const { return 1.0 + 2.0 * lambda / sigma; }
};

/// Throws std::invalid_argument unless lambda > 0 and sigma > 0.
ModelParams make_params(double lambda, double sigma);

/// Location and height of the equilibrium density maximum, plus the
/// moment order above which moments of the equilibrium diverge.
struct EquilibriumStats {
    double mode_location;      // (mu-1)/(mu+1), inside (0,1)
    double mode_value;
    double moment_order_bound; // == mu
};

/// Stationary density: an inverse-Gamma profile on v > 0, identically 0
/// for v <= 0 (continuous at v = 0 from the right).
double equilibrium_pdf(const ModelParams& p, double v);

/// log of equilibrium_pdf; -inf for v <= 0. Evaluated in log space so it
/// stays finite and accurate deep into the boundary layer near v = 0+.
double equilibrium_log_pdf(const ModelParams& p, double v);

EquilibriumStats equilibrium_mode(const ModelParams& p);

/// Moment of order r of the equilibrium, \int |v|^r f_inf dv.
/// Closed forms for r in {0,1,2}; adaptive quadrature otherwise.
/// nullopt means the moment diverges (r >= mu).
std::optional<double> equilibrium_moment(const ModelParams& p, double r);

/// Second moment of the solution on the whole line: solution of
/// dM2/dt = (sigma - 2 lambda) M2 + 2 lambda for unit-mean data.
/// Continuous across the degenerate case sigma == 2 lambda, where it
/// reduces to m2_initial + 2 lambda t.
double second_moment_trajectory(const ModelParams& p, double m2_initial, double t);

/// Mean of the solution: 1 + (m_initial - 1) e^{-lambda t}.
double mean_trajectory(const ModelParams& p, double m_initial, double t);

/// Exponential decay rate of D_{s,2}(f(t), f_inf): r(s) = (s/2)((1-s)sigma + 2 lambda)
/// for 0 < s < mu. nullopt means the theory gives no guarantee (s >= mu).
/// The maximum over s is attained at s = mu/2 with value sigma mu^2 / 8.
std::optional<double> theoretical_decay_rate(const ModelParams& p, double s);

/// Residual of the stationarity relation d/dv(kappa f_inf) + (v-1) f_inf
/// with kappa(v) = sigma/(2 lambda) v^2, evaluated with the analytic
/// derivative of the closed form. Zero up to roundoff for v > 0.
double stationarity_residual(const ModelParams& p, double v);

} // namespace wealthfpk
