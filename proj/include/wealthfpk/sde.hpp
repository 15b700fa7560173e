#pragma once

#include "wealthfpk/grid.hpp"
#include "wealthfpk/model.hpp"

#include <cstdint>
#include <vector>

namespace wealthfpk {
namespace sde {

/// Monte Carlo ensemble for dV = -lambda (V - 1) dt + sqrt(sigma) V dW,
/// whose law solves the same Fokker-Planck equation as the PDE solver but
/// shares none of its discretization.
struct EnsembleState {
    std::vector<double> particles;
    double t = 0.0;
    std::uint64_t rng_seed = 0;

    std::size_t n() const { return particles.size(); }
};

/// Initial laws shared by the SDE sampler and the PDE runner.
struct InitialLaw {
    enum class Kind { gaussian, box, two_box_debt, equilibrium, point } kind = Kind::gaussian;
    double mean = 1.0;   // gaussian / point location
    double sd = 0.4;     // gaussian
    double a = 0.5;      // box lower edge
    double b = 1.5;      // box upper edge
    double rho_minus = 0.3;   // two_box_debt: mass on [-1, 0]
    double right_width = 1.0; // two_box_debt: width of the positive box

    static InitialLaw gaussian_law(double mean, double sd);
    static InitialLaw box_law(double a, double b);
    /// Debt box on [-1,0] with mass rho_minus plus a positive box placed so
    /// the total mean is exactly 1.
    static InitialLaw two_box_debt_law(double rho_minus, double right_width = 1.0);
    static InitialLaw equilibrium_law();
    static InitialLaw point_law(double v);

    /// One draw, a pure function of (params, seed, particle index); the
    /// equilibrium case inverts the closed-form CDF.
    double sample(const ModelParams& p, std::uint64_t seed, std::uint64_t index) const;

    /// The same law as a pointwise density, for projecting onto a grid.
    double density(const ModelParams& p, double v) const;
};

/// Euler scheme with the noise amplitude evaluated at the pre-step
/// position. Increments are standardized Binomial(64, 1/2) variables drawn
/// from a counter-based hash of (seed, particle, step): they match the
/// Gaussian moments needed for weak order one, and any particle's whole
/// trajectory is a pure function of (seed, particle index), so runs are
/// bitwise reproducible under any thread count. Requires lambda*dt < 0.1
/// and sigma*dt < 0.1; aborts (with the particle index) if a particle
/// becomes non-finite.
EnsembleState simulate(const ModelParams& p, const InitialLaw& law, std::size_t n,
                       double dt, double t_end, std::uint64_t seed);

/// As simulate(), returning a snapshot at each requested time (ascending;
/// snapshots land on the step grid, times are rounded to it).
std::vector<EnsembleState> simulate_checkpoints(const ModelParams& p, const InitialLaw& law,
                                                std::size_t n, double dt,
                                                const std::vector<double>& times,
                                                std::uint64_t seed);

/// Histogram of the ensemble as cell averages; mass equals the fraction of
/// particles inside [v_min, v_max].
DensityOnGrid empirical_density(const EnsembleState& state, const GridPtr& grid);

struct EnsembleMoments {
    double mean = 0.0;
    double m2 = 0.0;      // second moment over the whole line
    double mean_se = 0.0; // standard errors of the two estimates
    double m2_se = 0.0;
};

EnsembleMoments ensemble_moments(const EnsembleState& state);

} // namespace sde
} // namespace wealthfpk
