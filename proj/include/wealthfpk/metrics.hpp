#pragma once

#include "wealthfpk/grid.hpp"
#include "wealthfpk/model.hpp"

#include <complex>
#include <functional>
#include <vector>

namespace wealthfpk {
namespace metrics {

/// Frequency window for Fourier-side computation: symmetric log-spaced
/// grid, n_per_side samples on each of +-[xi_min, xi_max].
struct XiWindow {
    double xi_min = 1e-4;
    double xi_max = 1e3;
    std::size_t n_per_side = 4096;
};

/// Sampled Fourier transform fhat(xi) = \int e^{-i xi v} f(v) dv of a
/// piecewise-constant cell-average density. The per-cell integral is done
/// in closed form (sinc factor), so the oscillation is exact, not sampled.
struct CharacteristicFunction {
    std::vector<double> xi;                    // symmetric, ascending
    std::vector<std::complex<double>> values;  // same length as xi
    double mass = 0.0;                         // signed mass of the source

    std::size_t per_side() const { return xi.size() / 2; }
};

CharacteristicFunction characteristic_function(const DensityOnGrid& f, const XiWindow& w = {});

/// Signed cell-wise difference f - g (for transforms of differences and
/// Sobolev seminorms). Not a probability density.
DensityOnGrid density_difference(const DensityOnGrid& f, const DensityOnGrid& g);

struct MetricResult {
    double value = 0.0;
    double s = 0.0;
    double p = 0.0; // infinity() denotes the sup metric d_s
    double quadrature_error_estimate = 0.0;
    bool sup_at_boundary = false; // d_s only: sup attained at the window edge
};

/// Sup metric d_s = sup |phihat - psihat| / |xi|^s over the sampled window.
/// Finite-valued on samples for any s; meaningful when the inputs share
/// moments up to floor(s) (callers assert that).
MetricResult ds_metric(const CharacteristicFunction& phi, const CharacteristicFunction& psi, double s);

/// D_{s,p} = (\int |xi|^{-(ps+1)} |phihat - psihat|^p dxi)^{1/p} by
/// trapezoid quadrature on the log-spaced window, with near-zero and tail
/// truncation estimates folded into quadrature_error_estimate. Requires
/// p >= 1 and s < 2 (with only mass and mean matched, the integrand is not
/// integrable near zero for s >= 2).
MetricResult dsp_metric(const CharacteristicFunction& phi, const CharacteristicFunction& psi,
                        double s, double p);

/// Squared homogeneous Sobolev seminorm \int |xi|^{2r} |hhat|^2 dxi over
/// the window. With r = -(s + 1/2) this is exactly the square of
/// dsp_metric(..., s, 2) (same quadrature). Requires r > -5/2.
MetricResult sobolev_seminorm_sq(const CharacteristicFunction& h, double r);

/// alpha-Hellinger distance between f and the mixture alpha f + (1-alpha) g;
/// alpha = 0 is the plain Hellinger distance.
double hellinger(const DensityOnGrid& f, const DensityOnGrid& g, double alpha = 0.0);

/// Jensen-Shannon entropy of f relative to g at mixing weight
/// alpha in (0,1): \int f log(f / (alpha f + (1-alpha) g)). Always finite;
/// bounded by log(1/alpha) * mass(f).
double jensen_shannon(const DensityOnGrid& f, const DensityOnGrid& g, double alpha);

/// Classical relative Shannon entropy \int f log(f/g). Returns +infinity
/// when f carries mass where g vanishes, which is exactly why it is
/// useless for equilibria supported on a half-line.
double relative_entropy(const DensityOnGrid& f, const DensityOnGrid& g);

struct EntropyProductionJS {
    double production = 0.0;       // (sigma/2) \int_{v>0} v^2 f (d/dv log(f/g))^2
    double boundary_density = 0.0; // density interpolated at v = 0
};

/// Entropy production of the Jensen-Shannon entropy along the flow, with
/// g = alpha f + (1-alpha) f_eq. The decay identity reads
///   H_alpha(t2) - H_alpha(t1) + \int production ds = 0:
/// the boundary density drops out, because mass crossing v = 0 carries its
/// entropy density log(1/alpha) with it (the half-line bookkeeping terms
/// at v = 0 cancel exactly; boundary_density is reported as a diagnostic).
/// Cells at or below the 1e-300 floor contribute zero (0 log 0 convention);
/// log-ratio derivatives are centered, one-sided at the ends of the
/// positive range.
EntropyProductionJS entropy_production_js(const DensityOnGrid& f, const DensityOnGrid& f_eq,
                                          const ModelParams& p, double alpha);

/// Production of the squared alpha-Hellinger distance:
/// (sigma/4) \int_{v>0} v^2 sqrt(f g) (d/dv log(f/g))^2. No boundary term.
double entropy_production_hellinger(const DensityOnGrid& f, const DensityOnGrid& f_eq,
                                    const ModelParams& p, double alpha);

/// Absolutely continuous test function with its derivative and a declared
/// polynomial growth order (used to reject variance that the equilibrium
/// moment bound cannot support).
struct TestFunction {
    std::function<double(double)> phi;
    std::function<double(double)> dphi;
    double growth_order = 1.0;
};

struct ChernoffResult {
    double variance = 0.0; // Var[phi(X)], X ~ equilibrium
    double bound = 0.0;    // E[kappa(X) phi'(X)^2], kappa = sigma/(2 lambda) v^2
};

/// Both sides of the Chernoff inequality Var[phi(X)] <= E[kappa phi'^2]
/// under the closed-form equilibrium, by adaptive quadrature. Equality
/// holds exactly for affine phi. Throws if 2*growth_order >= mu (the
/// variance would not exist).
ChernoffResult chernoff_check(const ModelParams& p, const TestFunction& fn, int max_levels = 12);

/// Expectation of g under the equilibrium density, via the u = (mu-1)/v
/// substitution that turns the integral into a Gamma-weighted one.
double expectation_under_equilibrium(const ModelParams& p, const std::function<double(double)>& g,
                                     int max_levels = 12);

} // namespace metrics
} // namespace wealthfpk
