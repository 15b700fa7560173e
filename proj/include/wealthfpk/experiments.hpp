#pragma once

#include "wealthfpk/config.hpp"
#include "wealthfpk/metrics.hpp"
#include "wealthfpk/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wealthfpk {
namespace cli {

/// Compiles a list of monitor names into a per-record hook. Supported
/// names: l1_eq, ds2:<s>, ds:<s>, js:<alpha>, hellinger:<alpha>,
/// hr:<r>, js_production:<alpha>, hell_production:<alpha>. All metric
/// monitors are taken against the projected (and mass-normalized)
/// equilibrium.
RecordHook make_monitor_hook(const std::vector<std::string>& monitors, const ModelParams& params,
                             const GridPtr& grid, const metrics::XiWindow& window = {});

struct LogSlopeFit {
    double slope = 0.0; // decay rate is -slope
    double intercept = 0.0;
    double r2 = 0.0;
    std::size_t n_points = 0;
};

/// Ordinary least squares of log(values) against time on [t_lo, t_hi];
/// nonpositive values are skipped.
LogSlopeFit fit_log_slope(const std::vector<double>& times, const std::vector<double>& values,
                          double t_lo, double t_hi);

/// Per-run invariant checks written into the solve report.
struct InvariantReport {
    double mass_drift_max = 0.0;
    double min_density = 0.0;
    long rho_plus_violations = 0;    // decreases of rho_plus beyond 1e-12
    double m_minus_envelope_excess = 0.0; // max of |m-(t)| / (|m-(0)| e^{-lambda t}) - 1
    bool passed = false;
};

InvariantReport invariant_report(const ObservableSeries& s, const ModelParams& params);

/// The four experiment commands. Each writes CSVs, a machine-readable
/// summary.json and the resolved config into out_dir, and returns 0 iff
/// every requested invariant check passed.
int cmd_equilibrium(const RunConfig& cfg);
int cmd_solve(const RunConfig& cfg);
int cmd_decay(const RunConfig& cfg, std::vector<double> s_list, std::vector<double> alpha_list);
int cmd_crossval(const RunConfig& cfg, std::size_t n_particles);

} // namespace cli
} // namespace wealthfpk
