#include "wealthfpk/model.hpp"

#include <boost/math/quadrature/exp_sinh.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace wealthfpk {

ModelParams make_params(double lambda, double sigma) {
    if (!(lambda > 0.0) || !std::isfinite(lambda))
        throw std::invalid_argument("ModelParams: lambda must be positive");
    if (!(sigma > 0.0) || !std::isfinite(sigma))
        throw std::invalid_argument("ModelParams: sigma must be positive");
    return ModelParams{lambda, sigma};
}

double equilibrium_log_pdf(const ModelParams& p, double v) {
    if (v <= 0.0)
        return -std::numeric_limits<double>::infinity();
    const double mu = p.mu();
    return mu * std::log(mu - 1.0) - std::lgamma(mu)
         - (mu - 1.0) / v - (1.0 + mu) * std::log(v);
}

double equilibrium_pdf(const ModelParams& p, double v) {
    if (v <= 0.0)
        return 0.0;
    return std::exp(equilibrium_log_pdf(p, v));
}

EquilibriumStats equilibriumStatsImpl(double mu) {
    EquilibriumStats s;
    s.mode_location = (mu - 1.0) / (mu + 1.0);
    s.mode_value = std::exp((mu + 1.0) * std::log(mu + 1.0) - std::lgamma(mu)
                            - std::log(mu - 1.0) - (mu + 1.0));
    s.moment_order_bound = mu;
    return s;
}

EquilibriumStats equilibrium_mode(const ModelParams& p) {
    return equilibriumStatsImpl(p.mu());
}

std::optional<double> equilibrium_moment(const ModelParams& p, double r) {
    const double mu = p.mu();
    if (r >= mu)
        return std::nullopt;
    if (r == 0.0 || r == 1.0)
        return 1.0;
    if (r == 2.0)
        return (mu - 1.0) / (mu - 2.0);

    // Substituting u = (mu-1)/v maps the integral onto a Gamma-type
    // integrand, smooth at 0 and exponentially decaying, which the
    // exp-sinh rule handles on (0, inf) directly:
    //   \int v^r f_inf dv = \int u^{mu-r-1} e^{-u} / Gamma(mu) * (mu-1)^r du
    const double lg = std::lgamma(mu);
    const double scale = r * std::log(mu - 1.0);
    auto integrand = [&](double u) {
        return std::exp((mu - r - 1.0) * std::log(u) - u - lg + scale);
    };
    boost::math::quadrature::exp_sinh<double> integrator;
    double err = 0.0;
    double val = integrator.integrate(integrand, std::sqrt(std::numeric_limits<double>::epsilon()), &err);
    return val;
}

double second_moment_trajectory(const ModelParams& p, double m2_initial, double t) {
    const double a = p.sigma - 2.0 * p.lambda;
    const double at = a * t;
    // expm1(at)/a stays accurate through the removable singularity at a = 0
    double growth;
    if (std::abs(at) < 1e-8)
        growth = t * (1.0 + 0.5 * at);
    else
        growth = std::expm1(at) / a;
    return m2_initial * std::exp(at) + 2.0 * p.lambda * growth;
}

double mean_trajectory(const ModelParams& p, double m_initial, double t) {
    return 1.0 + (m_initial - 1.0) * std::exp(-p.lambda * t);
}

std::optional<double> theoretical_decay_rate(const ModelParams& p, double s) {
    if (!(s > 0.0))
        throw std::invalid_argument("theoretical_decay_rate: s must be positive");
    if (s >= p.mu())
        return std::nullopt;
    return 0.5 * s * ((1.0 - s) * p.sigma + 2.0 * p.lambda);
}

double stationarity_residual(const ModelParams& p, double v) {
    if (v <= 0.0)
        return 0.0;
    const double mu = p.mu();
    const double f = equilibrium_pdf(p, v);
    // f' from the closed form: f' = f * ((mu-1)/v^2 - (1+mu)/v)
    const double fprime = f * ((mu - 1.0) / (v * v) - (1.0 + mu) / v);
    const double kappa_scale = p.sigma / (2.0 * p.lambda);
    const double d_kappa_f = kappa_scale * (2.0 * v * f + v * v * fprime);
    return d_kappa_f + (v - 1.0) * f;
}

} // namespace wealthfpk
