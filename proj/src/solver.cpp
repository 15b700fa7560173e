#include "wealthfpk/solver.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace wealthfpk {

namespace {

// Bernoulli function P / (e^P - 1). expm1 saturates to -1 for large
// negative P and overflows to inf for large positive P, which yields the
// correct upwind limits |P| and 0 without explicit branches.
double bernoulli(double p) {
    if (std::abs(p) < 1e-5)
        return 1.0 - 0.5 * p + p * p / 12.0;
    return p / std::expm1(p);
}

} // namespace

FokkerPlanckSolver::FokkerPlanckSolver(GridPtr grid, const SolverConfig& cfg)
    : grid_(std::move(grid)), cfg_(cfg) {
    if (!(cfg_.dt > 0.0))
        throw std::invalid_argument("SolverConfig: dt must be positive");
    if (!(cfg_.theta >= 0.5 && cfg_.theta <= 1.0))
        throw std::invalid_argument("SolverConfig: theta must lie in [0.5, 1]");
    dt_ = cfg_.dt;
    assemble();
    if (cfg_.theta < 1.0) {
        const double lim = positivity_dt_limit();
        if (dt_ > lim)
            throw std::invalid_argument("SolverConfig: dt " + std::to_string(dt_) +
                                        " exceeds the explicit-part CFL limit " + std::to_string(lim) +
                                        " for theta < 1");
    }
}

void FokkerPlanckSolver::assemble() {
    const Grid& g = *grid_;
    const std::size_t n = g.n_cells();
    const double lambda = cfg_.params.lambda;
    const double sigma = cfg_.params.sigma;
    const double mu = cfg_.params.mu();

    coefL_.assign(n + 1, 0.0);
    coefR_.assign(n + 1, 0.0);
    for (std::size_t j = 1; j < n; ++j) {
        const double e = g.edges[j];
        const double cL = g.centers[j - 1];
        const double cR = g.centers[j];
        const double delta = cR - cL;
        const double diff = 0.5 * sigma * e * e / delta;
        if (e == 0.0) {
            // degenerate edge: pure advection with B(0) = -lambda
            coefL_[j] = lambda;
            coefR_[j] = 0.0;
        } else {
            double peclet;
            if (e > 0.0) {
                // exact integral of B/D between centers; zero flux then
                // reproduces the equilibrium ratio f(cR)/f(cL) exactly
                peclet = (1.0 + mu) * std::log(cR / cL) + (mu - 1.0) * (1.0 / cR - 1.0 / cL);
            } else {
                const double b = sigma * e + lambda * (e - 1.0);
                peclet = b * delta / (0.5 * sigma * e * e);
            }
            coefL_[j] = diff * bernoulli(peclet);
            coefR_[j] = diff * bernoulli(-peclet);
        }
    }

    // implicit matrix M = W - theta dt T, with T the flux divergence
    const double th = cfg_.theta * dt_;
    diag_.resize(n);
    lower_.assign(n, 0.0);
    upper_.assign(n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        diag_[i] = g.widths[i] + th * (coefL_[i + 1] + coefR_[i]);
        if (i > 0)
            lower_[i] = -th * coefL_[i];
        if (i + 1 < n)
            upper_[i] = -th * coefR_[i + 1];
    }

    // Thomas prefactorization (matrix is constant in time)
    fac_lower_.assign(n, 0.0);
    fac_diag_.resize(n);
    fac_diag_[0] = diag_[0];
    for (std::size_t i = 1; i < n; ++i) {
        if (!(fac_diag_[i - 1] > 0.0))
            throw std::runtime_error("FokkerPlanckSolver: singular tridiagonal system at row " +
                                     std::to_string(i - 1));
        fac_lower_[i] = lower_[i] / fac_diag_[i - 1];
        fac_diag_[i] = diag_[i] - fac_lower_[i] * upper_[i - 1];
    }
    if (!(fac_diag_[n - 1] > 0.0))
        throw std::runtime_error("FokkerPlanckSolver: singular tridiagonal system at last row");

    rhs_.resize(n);
    flux_.assign(n + 1, 0.0);
}

double FokkerPlanckSolver::positivity_dt_limit() const {
    const Grid& g = *grid_;
    if (cfg_.theta >= 1.0)
        return std::numeric_limits<double>::infinity();
    double lim = std::numeric_limits<double>::infinity();
    for (std::size_t i = 0; i < g.n_cells(); ++i) {
        const double out_rate = coefL_[i + 1] + coefR_[i];
        if (out_rate > 0.0)
            lim = std::min(lim, g.widths[i] / ((1.0 - cfg_.theta) * out_rate));
    }
    return lim;
}

void FokkerPlanckSolver::step_inplace(DensityOnGrid& f) {
    const Grid& g = *grid_;
    const std::size_t n = g.n_cells();
    if (f.grid != grid_ && f.grid->edges != grid_->edges)
        throw std::invalid_argument("step: density grid does not match solver grid");

    const double upwind_old = f.values[g.zero_edge - 1];

    if (cfg_.theta < 1.0) {
        const double ex = (1.0 - cfg_.theta) * dt_;
        for (std::size_t j = 1; j < n; ++j)
            flux_[j] = coefR_[j] * f.values[j] - coefL_[j] * f.values[j - 1];
        for (std::size_t i = 0; i < n; ++i)
            rhs_[i] = g.widths[i] * f.values[i] + ex * (flux_[i + 1] - flux_[i]);
    } else {
        for (std::size_t i = 0; i < n; ++i)
            rhs_[i] = g.widths[i] * f.values[i];
    }

    // forward elimination / back substitution with the cached factors
    rhs_[0] = rhs_[0];
    for (std::size_t i = 1; i < n; ++i)
        rhs_[i] -= fac_lower_[i] * rhs_[i - 1];
    f.values[n - 1] = rhs_[n - 1] / fac_diag_[n - 1];
    for (std::size_t i = n - 1; i-- > 0;)
        f.values[i] = (rhs_[i] - upper_[i] * f.values[i + 1]) / fac_diag_[i];

    for (std::size_t i = 0; i < n; ++i) {
        if (!(f.values[i] >= 0.0) || !std::isfinite(f.values[i]))
            throw std::runtime_error("FokkerPlanckSolver: negative or non-finite cell " +
                                     std::to_string(i) + " after step " + std::to_string(step_ + 1));
    }

    // exact discrete mass transfer through the v = 0 edge during this step
    flux0_integral_ += dt_ * cfg_.params.lambda *
        (cfg_.theta * f.values[g.zero_edge - 1] + (1.0 - cfg_.theta) * upwind_old);

    t_ += dt_;
    ++step_;
}

namespace {

void record_row(ObservableSeries& s, double t, const DensityOnGrid& f,
                const FokkerPlanckSolver& solver, const RecordHook& hook) {
    const Observables o = observables(f);
    const Grid& g = *f.grid;
    double min_f = f.values[0];
    for (double v : f.values)
        min_f = std::min(min_f, v);
    const double near0 = f.values[g.zero_edge - 1] * g.widths[g.zero_edge - 1] +
                         f.values[g.zero_edge] * g.widths[g.zero_edge];
    s.times.push_back(t);
    s.columns[0].push_back(o.mass);
    s.columns[1].push_back(o.mean);
    s.columns[2].push_back(o.m2);
    s.columns[3].push_back(o.rho_minus);
    s.columns[4].push_back(o.rho_plus);
    s.columns[5].push_back(o.m_minus);
    s.columns[6].push_back(o.m_plus);
    s.columns[7].push_back(interpolate_at(f, 0.0));
    s.columns[8].push_back(solver.zero_edge_flux_integral());
    s.columns[9].push_back(min_f);
    s.columns[10].push_back(near0);
    if (hook)
        hook(t, f, s);
}

} // namespace

SolveResult solve(const DensityOnGrid& f0, const SolverConfig& cfg, const RecordHook& hook) {
    SolveResult res;
    res.final = f0;

    // constant step size chosen to land on t_end exactly
    SolverConfig c = cfg;
    long n_steps = 0;
    if (cfg.t_end > 0.0) {
        n_steps = std::max<long>(1, std::lround(cfg.t_end / cfg.dt));
        c.dt = cfg.t_end / static_cast<double>(n_steps);
    }
    FokkerPlanckSolver solver(f0.grid, c);

    for (const char* name : {"mass", "mean", "m2", "rho_minus", "rho_plus",
                             "m_minus", "m_plus", "f0", "flux0_int", "min_f", "mass_near0"})
        res.series.add_column(name);

    const Observables o0 = observables(f0);
    if (std::abs(o0.mass - 1.0) > 1e-6 || std::abs(o0.mean - 1.0) > 1e-6)
        res.series.unnormalized_warning = true;

    record_row(res.series, 0.0, res.final, solver, hook);
    const int every = std::max(1, cfg.record_every);
    for (long k = 1; k <= n_steps; ++k) {
        solver.step_inplace(res.final);
        if (k % every == 0 || k == n_steps)
            record_row(res.series, solver.time(), res.final, solver, hook);
    }
    res.flux0_integral = solver.zero_edge_flux_integral();
    return res;
}

DensityOnGrid step(const DensityOnGrid& f, const SolverConfig& cfg) {
    FokkerPlanckSolver solver(f.grid, cfg);
    DensityOnGrid out = f;
    solver.step_inplace(out);
    return out;
}

DensityOnGrid gibbs_state(const ModelParams& p, const GridPtr& grid) {
    DensityOnGrid f;
    f.grid = grid;
    f.values.resize(grid->n_cells());
    for (std::size_t i = 0; i < grid->n_cells(); ++i)
        f.values[i] = equilibrium_pdf(p, grid->centers[i]);
    const double m = f.mass();
    if (!(m > 0.0))
        throw std::runtime_error("gibbs_state: equilibrium carries no mass on this grid");
    for (auto& v : f.values)
        v /= m;
    return f;
}

BoundaryFluxAudit boundary_flux_audit(const ObservableSeries& s, const ModelParams& p) {
    BoundaryFluxAudit a;
    const auto& mass = s.column("mass");
    const auto& rp = s.column("rho_plus");
    const auto& f0 = s.column("f0");
    const auto& flux = s.column("flux0_int");
    for (double m : mass)
        a.mass_defect_max = std::max(a.mass_defect_max, std::abs(m - mass.front()));
    a.rho_plus_gain = rp.back() - rp.front();
    a.flux_integral_exact = flux.back();
    double integral = 0.0;
    for (std::size_t k = 1; k < s.times.size(); ++k)
        integral += 0.5 * (f0[k] + f0[k - 1]) * (s.times[k] - s.times[k - 1]);
    a.f0_integral = p.lambda * integral;
    a.mismatch_abs = std::abs(a.rho_plus_gain - a.f0_integral);
    return a;
}

} // namespace wealthfpk
