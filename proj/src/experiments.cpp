#include "wealthfpk/experiments.hpp"

#include "wealthfpk/io.hpp"
#include "wealthfpk/sde.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <memory>
#include <sstream>
#include <stdexcept>

namespace wealthfpk {
namespace cli {

using nlohmann::json;

namespace {

DensityOnGrid normalized_equilibrium(const ModelParams& p, const GridPtr& grid) {
    DensityOnGrid eq = project_equilibrium(p, grid);
    const double m = eq.mass();
    for (auto& v : eq.values)
        v /= m;
    return eq;
}

double monitor_param(const std::string& name) {
    const auto colon = name.find(':');
    if (colon == std::string::npos)
        throw std::invalid_argument("monitor '" + name + "' needs a :<parameter>");
    return std::stod(name.substr(colon + 1));
}

void write_summary(const std::string& out_dir, const json& j) {
    write_file_atomic(out_dir + "/summary.json", j.dump(2) + "\n");
}

void prepare_out_dir(const RunConfig& cfg) {
    std::filesystem::create_directories(cfg.out_dir);
    write_file_atomic(cfg.out_dir + "/config_resolved.toml", serialize_config(cfg));
}

void write_gnuplot(const std::string& out_dir, const std::string& csv,
                   const std::string& ylabel, int column) {
    std::ostringstream s;
    s << "set datafile separator ','\n"
      << "set key autotitle columnhead\n"
      << "set xlabel 't'\n"
      << "set ylabel '" << ylabel << "'\n"
      << "plot '" << csv << "' using 1:" << column << " with lines\n";
    write_file_atomic(out_dir + "/plot.gnuplot", s.str());
}

struct LawMoments {
    double mean = 1.0;
    double m2 = 1.0;
};

LawMoments law_moments(const sde::InitialLaw& law, const ModelParams& p) {
    using Kind = sde::InitialLaw::Kind;
    LawMoments m;
    switch (law.kind) {
    case Kind::gaussian:
        m.mean = law.mean;
        m.m2 = law.mean * law.mean + law.sd * law.sd;
        break;
    case Kind::box:
        m.mean = 0.5 * (law.a + law.b);
        m.m2 = (law.b * law.b * law.b - law.a * law.a * law.a) / (3.0 * (law.b - law.a));
        break;
    case Kind::two_box_debt: {
        const double c = (1.0 + 0.5 * law.rho_minus) / (1.0 - law.rho_minus);
        const double w = law.right_width;
        m.mean = 1.0;
        m.m2 = law.rho_minus * (1.0 / 3.0) +
               (1.0 - law.rho_minus) * (c * c + w * w / 12.0);
        break;
    }
    case Kind::equilibrium: {
        m.mean = 1.0;
        const auto m2 = equilibrium_moment(p, 2.0);
        m.m2 = m2 ? *m2 : std::numeric_limits<double>::infinity();
        break;
    }
    case Kind::point:
        m.mean = law.mean;
        m.m2 = law.mean * law.mean;
        break;
    }
    return m;
}

} // namespace

RecordHook make_monitor_hook(const std::vector<std::string>& monitors, const ModelParams& params,
                             const GridPtr& grid, const metrics::XiWindow& window) {
    if (monitors.empty())
        return nullptr;
    bool needs_cf = false;
    for (const auto& m : monitors)
        if (m.rfind("ds", 0) == 0 || m.rfind("hr:", 0) == 0)
            needs_cf = true;

    auto eq = std::make_shared<DensityOnGrid>(normalized_equilibrium(params, grid));
    auto cf_eq = std::make_shared<metrics::CharacteristicFunction>();
    if (needs_cf)
        *cf_eq = metrics::characteristic_function(*eq, window);
    auto initialized = std::make_shared<bool>(false);
    auto names = monitors;
    auto p = params;
    auto win = window;

    return [=](double, const DensityOnGrid& f, ObservableSeries& s) {
        if (!*initialized) {
            for (const auto& m : names)
                s.add_column(m);
            *initialized = true;
        }
        metrics::CharacteristicFunction cf_f;
        if (needs_cf)
            cf_f = metrics::characteristic_function(f, win);
        const std::size_t base = s.names.size() - names.size();
        for (std::size_t k = 0; k < names.size(); ++k) {
            const std::string& m = names[k];
            double value = 0.0;
            if (m == "l1_eq") {
                value = l1_distance(f, *eq);
            } else if (m.rfind("ds2:", 0) == 0) {
                value = metrics::dsp_metric(cf_f, *cf_eq, monitor_param(m), 2.0).value;
            } else if (m.rfind("ds:", 0) == 0) {
                value = metrics::ds_metric(cf_f, *cf_eq, monitor_param(m)).value;
            } else if (m.rfind("hr:", 0) == 0) {
                value = metrics::sobolev_seminorm_sq(cf_f, monitor_param(m)).value;
            } else if (m.rfind("js:", 0) == 0) {
                value = metrics::jensen_shannon(f, *eq, monitor_param(m));
            } else if (m.rfind("hellinger:", 0) == 0) {
                value = metrics::hellinger(f, *eq, monitor_param(m));
            } else if (m.rfind("js_production:", 0) == 0) {
                value = metrics::entropy_production_js(f, *eq, p, monitor_param(m)).production;
            } else if (m.rfind("hell_production:", 0) == 0) {
                value = metrics::entropy_production_hellinger(f, *eq, p, monitor_param(m));
            } else {
                throw std::invalid_argument("unknown monitor '" + m + "'");
            }
            s.columns[base + k].push_back(value);
        }
    };
}

LogSlopeFit fit_log_slope(const std::vector<double>& times, const std::vector<double>& values,
                          double t_lo, double t_hi) {
    LogSlopeFit fit;
    std::vector<double> x, y;
    for (std::size_t k = 0; k < times.size(); ++k)
        if (times[k] >= t_lo && times[k] <= t_hi && values[k] > 0.0) {
            x.push_back(times[k]);
            y.push_back(std::log(values[k]));
        }
    fit.n_points = x.size();
    if (x.size() < 3)
        return fit;
    const double n = static_cast<double>(x.size());
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    for (std::size_t k = 0; k < x.size(); ++k) {
        sx += x[k];
        sy += y[k];
        sxx += x[k] * x[k];
        sxy += x[k] * y[k];
    }
    const double denom = n * sxx - sx * sx;
    fit.slope = (n * sxy - sx * sy) / denom;
    fit.intercept = (sy - fit.slope * sx) / n;
    double ss_res = 0, ss_tot = 0;
    const double ybar = sy / n;
    for (std::size_t k = 0; k < x.size(); ++k) {
        const double pred = fit.intercept + fit.slope * x[k];
        ss_res += (y[k] - pred) * (y[k] - pred);
        ss_tot += (y[k] - ybar) * (y[k] - ybar);
    }
    fit.r2 = ss_tot > 0.0 ? 1.0 - ss_res / ss_tot : 1.0;
    return fit;
}

InvariantReport invariant_report(const ObservableSeries& s, const ModelParams& params) {
    InvariantReport r;
    const auto& mass = s.column("mass");
    const auto& rho_plus = s.column("rho_plus");
    const auto& m_minus = s.column("m_minus");
    const auto& min_f = s.column("min_f");
    r.min_density = min_f.front();
    for (std::size_t k = 0; k < s.times.size(); ++k) {
        r.mass_drift_max = std::max(r.mass_drift_max, std::abs(mass[k] - mass.front()));
        r.min_density = std::min(r.min_density, min_f[k]);
        if (k > 0 && rho_plus[k] < rho_plus[k - 1] - 1e-12)
            ++r.rho_plus_violations;
    }
    const double m0 = std::abs(m_minus.front());
    if (m0 > 1e-14) {
        for (std::size_t k = 0; k < s.times.size(); ++k) {
            const double envelope = m0 * std::exp(-params.lambda * s.times[k]);
            r.m_minus_envelope_excess =
                std::max(r.m_minus_envelope_excess, std::abs(m_minus[k]) / envelope - 1.0);
        }
    } else {
        for (double m : m_minus)
            r.m_minus_envelope_excess = std::max(r.m_minus_envelope_excess, std::abs(m));
    }
    r.passed = r.mass_drift_max <= 1e-10 && r.min_density >= 0.0 && r.rho_plus_violations == 0 &&
               r.m_minus_envelope_excess <= 1e-3;
    return r;
}

int cmd_equilibrium(const RunConfig& cfg) {
    prepare_out_dir(cfg);
    const GridPtr grid = make_grid(cfg);
    const DensityOnGrid eq = project_equilibrium(cfg.params, grid);
    write_density_csv(cfg.out_dir + "/equilibrium.csv", eq);

    std::ostringstream res;
    res << "v_center,stationarity_residual\n";
    double max_resid = 0.0;
    for (std::size_t i = grid->zero_edge; i < grid->n_cells(); ++i) {
        const double r = stationarity_residual(cfg.params, grid->centers[i]);
        max_resid = std::max(max_resid, std::abs(r));
        res << format_double(grid->centers[i]) << ',' << format_double(r) << '\n';
    }
    write_file_atomic(cfg.out_dir + "/stationarity_residual.csv", res.str());

    const EquilibriumStats stats = equilibrium_mode(cfg.params);
    const auto m2 = equilibrium_moment(cfg.params, 2.0);
    const double mass = eq.mass();
    const Observables o = observables(eq);

    json j;
    j["mu"] = cfg.params.mu();
    j["mode_location"] = stats.mode_location;
    j["mode_value"] = stats.mode_value;
    j["moment_order_bound"] = stats.moment_order_bound;
    j["m0"] = 1.0;
    j["m1"] = 1.0;
    if (m2)
        j["m2"] = *m2;
    else
        j["m2"] = "divergent";
    j["projected_mass"] = mass;
    j["projected_mean"] = o.mean;
    j["truncation_mass_deficit"] = 1.0 - mass;
    j["max_stationarity_residual"] = max_resid;
    const bool ok = max_resid < 1e-6 && std::abs(1.0 - mass) < 1e-3;
    j["passed"] = ok;
    write_summary(cfg.out_dir, j);
    write_gnuplot(cfg.out_dir, "equilibrium.csv", "f", 3);
    return ok ? 0 : 1;
}

int cmd_solve(const RunConfig& cfg) {
    prepare_out_dir(cfg);
    const GridPtr grid = make_grid(cfg);
    const DensityOnGrid f0 = initial_density(cfg, grid);
    const RecordHook hook = make_monitor_hook(cfg.monitors, cfg.params, grid);
    const SolveResult res = solve(f0, cfg.solver, hook);

    write_series_csv(cfg.out_dir + "/series.csv", res.series);
    write_density_csv(cfg.out_dir + "/final_density.csv", res.final);

    const InvariantReport rep = invariant_report(res.series, cfg.params);
    const BoundaryFluxAudit audit = boundary_flux_audit(res.series, cfg.params);

    json j;
    j["unnormalized_warning"] = res.series.unnormalized_warning;
    j["invariants"] = {
        {"mass_drift_max", rep.mass_drift_max},
        {"min_density", rep.min_density},
        {"rho_plus_violations", rep.rho_plus_violations},
        {"m_minus_envelope_excess", rep.m_minus_envelope_excess},
        {"passed", rep.passed},
    };
    j["boundary_flux_audit"] = {
        {"mass_defect_max", audit.mass_defect_max},
        {"rho_plus_gain", audit.rho_plus_gain},
        {"f0_integral", audit.f0_integral},
        {"flux_integral_exact", audit.flux_integral_exact},
        {"mismatch_abs", audit.mismatch_abs},
    };
    j["passed"] = rep.passed;
    write_summary(cfg.out_dir, j);
    write_gnuplot(cfg.out_dir, "series.csv", "mass", 2);
    return rep.passed ? 0 : 1;
}

int cmd_decay(const RunConfig& cfg, std::vector<double> s_list, std::vector<double> alpha_list) {
    prepare_out_dir(cfg);
    if (s_list.empty())
        s_list = {0.75, 1.0, 1.25, 1.5, 1.75};
    if (alpha_list.empty())
        alpha_list = {0.25, 0.5, 0.75};

    const double mu = cfg.params.mu();
    std::vector<std::string> monitors = {"l1_eq"};
    std::vector<double> computable_s;
    std::vector<double> skipped_s;
    for (double s : s_list) {
        if (s > 0.0 && s < 2.0) {
            computable_s.push_back(s);
            monitors.push_back("ds2:" + std::to_string(s));
        } else {
            skipped_s.push_back(s); // not integrable with mean-only matching
        }
    }
    for (double a : alpha_list) {
        monitors.push_back("js:" + std::to_string(a));
        monitors.push_back("hellinger:" + std::to_string(a));
    }

    const GridPtr grid = make_grid(cfg);
    const DensityOnGrid f0 = initial_density(cfg, grid);
    const RecordHook hook = make_monitor_hook(monitors, cfg.params, grid);
    const SolveResult res = solve(f0, cfg.solver, hook);
    write_series_csv(cfg.out_dir + "/series.csv", res.series);

    const double t_lo = cfg.solver.t_end * 0.5;
    const double t_hi = cfg.solver.t_end;

    std::ostringstream table;
    table << "s,rate_measured,rate_theory,ratio,r2,guaranteed\n";
    bool rates_ok = true;
    json rates = json::array();
    for (std::size_t k = 0; k < computable_s.size(); ++k) {
        const double s = computable_s[k];
        const auto& col = res.series.column(monitors[1 + k]);
        const LogSlopeFit fit = fit_log_slope(res.series.times, col, t_lo, t_hi);
        const double measured = -fit.slope;
        const auto theory = theoretical_decay_rate(cfg.params, s);
        const bool guaranteed = theory.has_value();
        const double th = guaranteed ? *theory : 0.0;
        table << format_double(s) << ',' << format_double(measured) << ','
              << (guaranteed ? format_double(th) : "no_guarantee") << ','
              << (guaranteed && th > 0 ? format_double(measured / th) : "") << ','
              << format_double(fit.r2) << ',' << (guaranteed ? "yes" : "no") << '\n';
        json row;
        row["s"] = s;
        row["rate_measured"] = measured;
        row["r2"] = fit.r2;
        if (guaranteed) {
            row["rate_theory"] = th;
            const bool ok = measured >= 0.95 * th && fit.r2 >= 0.99;
            row["passed"] = ok;
            if (s < std::min(mu, 2.0))
                rates_ok = rates_ok && ok;
        }
        rates.push_back(row);
    }
    write_file_atomic(cfg.out_dir + "/decay_rates.csv", table.str());

    // entropy monotonicity of the recorded series
    bool entropy_ok = true;
    json entropy = json::array();
    for (double a : alpha_list) {
        for (const char* prefix : {"js:", "hellinger:"}) {
            const std::string name = prefix + std::to_string(a);
            const auto& col = res.series.column(name);
            double worst = 0.0;
            for (std::size_t k = 1; k < col.size(); ++k)
                worst = std::max(worst, col[k] - col[k - 1]);
            const bool ok = worst <= 1e-10;
            entropy_ok = entropy_ok && ok;
            entropy.push_back({{"monitor", name}, {"max_step_increase", worst}, {"passed", ok}});
        }
    }

    json j;
    j["rates"] = rates;
    j["skipped_s"] = skipped_s;
    j["entropy_monotonicity"] = entropy;
    j["passed"] = rates_ok && entropy_ok;
    write_summary(cfg.out_dir, j);
    write_gnuplot(cfg.out_dir, "series.csv", "metrics", 13);
    return (rates_ok && entropy_ok) ? 0 : 1;
}

int cmd_crossval(const RunConfig& cfg, std::size_t n_particles) {
    prepare_out_dir(cfg);
    if (cfg.initial_family == "custom_csv")
        throw std::invalid_argument("crossval: custom_csv initial data has no sampler");

    const GridPtr grid = make_grid(cfg);
    const DensityOnGrid f0 = initial_density(cfg, grid);

    std::vector<double> checkpoints;
    if (cfg.solver.t_end <= 0.0) {
        checkpoints = {0.0};
    } else {
        for (int k = 1; k <= 5; ++k)
            checkpoints.push_back(cfg.solver.t_end * k / 5.0);
    }

    const double sde_dt = std::min(1e-3, 0.05 / std::max(cfg.params.lambda, cfg.params.sigma));
    const auto snapshots = (cfg.solver.t_end <= 0.0)
        ? std::vector<sde::EnsembleState>{sde::simulate(cfg.params, cfg.initial_law, n_particles,
                                                        sde_dt, 0.0, cfg.seed)}
        : sde::simulate_checkpoints(cfg.params, cfg.initial_law, n_particles, sde_dt, checkpoints,
                                    cfg.seed);

    // PDE densities at the same times
    std::vector<DensityOnGrid> pde(checkpoints.size());
    if (cfg.solver.t_end <= 0.0) {
        pde[0] = f0;
    } else {
        SolverConfig sc = cfg.solver;
        DensityOnGrid f = f0;
        double t = 0.0;
        for (std::size_t k = 0; k < checkpoints.size(); ++k) {
            sc.t_end = checkpoints[k] - t;
            sc.dt = cfg.solver.dt;
            if (sc.t_end > 0.0) {
                const SolveResult r = solve(f, sc, nullptr);
                f = r.final;
            }
            t = checkpoints[k];
            pde[k] = f;
        }
    }

    const LawMoments lm = law_moments(cfg.initial_law, cfg.params);
    std::ostringstream csv;
    csv << "t,l1,sde_mean,mean_theory,mean_se,sde_m2,m2_theory,m2_se\n";
    bool moments_ok = true;
    double l1_max = 0.0;
    json rows = json::array();
    for (std::size_t k = 0; k < checkpoints.size(); ++k) {
        const DensityOnGrid emp = sde::empirical_density(snapshots[k], grid);
        const double l1 = l1_distance(emp, pde[k]);
        l1_max = std::max(l1_max, l1);
        const sde::EnsembleMoments em = sde::ensemble_moments(snapshots[k]);
        const double mean_th = mean_trajectory(cfg.params, lm.mean, checkpoints[k]);
        const double m2_th = second_moment_trajectory(cfg.params, lm.m2, checkpoints[k]);
        const bool mean_ok = std::abs(em.mean - mean_th) <= 4.0 * em.mean_se;
        const bool m2_ok = std::abs(em.m2 - m2_th) <= 4.0 * em.m2_se;
        moments_ok = moments_ok && mean_ok && m2_ok;
        csv << format_double(checkpoints[k]) << ',' << format_double(l1) << ','
            << format_double(em.mean) << ',' << format_double(mean_th) << ','
            << format_double(em.mean_se) << ',' << format_double(em.m2) << ','
            << format_double(m2_th) << ',' << format_double(em.m2_se) << '\n';
        rows.push_back({{"t", checkpoints[k]},
                        {"l1", l1},
                        {"mean_ok", mean_ok},
                        {"m2_ok", m2_ok}});
    }
    write_file_atomic(cfg.out_dir + "/crossval.csv", csv.str());
    write_ensemble_csv(cfg.out_dir + "/ensemble_final.csv", snapshots.back().particles);

    json j;
    j["n_particles"] = n_particles;
    j["sde_dt"] = sde_dt;
    j["l1_max"] = l1_max;
    j["checkpoints"] = rows;
    j["passed"] = moments_ok;
    write_summary(cfg.out_dir, j);
    write_gnuplot(cfg.out_dir, "crossval.csv", "l1", 2);
    return moments_ok ? 0 : 1;
}

} // namespace cli
} // namespace wealthfpk
