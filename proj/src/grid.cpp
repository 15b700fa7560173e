#include "wealthfpk/grid.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace wealthfpk {

namespace {

// 8-node Gauss-Legendre rule on [-1, 1]
const double kGaussX[8] = {
    -0.9602898564975363, -0.7966664774136267, -0.5255324099163290, -0.1834346424956498,
     0.1834346424956498,  0.5255324099163290,  0.7966664774136267,  0.9602898564975363};
const double kGaussW[8] = {
     0.1012285362903763,  0.2223810344533745,  0.3137066458778873,  0.3626837833783620,
     0.3626837833783620,  0.3137066458778873,  0.2223810344533745,  0.1012285362903763};

// log of S(k, rho) = 1 + rho + ... + rho^{k-1}, stable for extreme rho
double log_geom_sum(std::size_t k, double log_rho) {
    if (k == 0)
        return -std::numeric_limits<double>::infinity();
    if (std::abs(log_rho) < 1e-14)
        return std::log(static_cast<double>(k));
    if (log_rho > 0.0)
        return k * log_rho + std::log1p(-std::exp(-static_cast<double>(k) * log_rho))
               - std::log(std::expm1(log_rho));
    return std::log(-std::expm1(static_cast<double>(k) * log_rho))
           - std::log(-std::expm1(log_rho));
}

// Solves rho^{n01} S(n1p)/S(n01) = target for the common ratio rho, i.e.
// the ratio that makes the geometric partition of the positive side put an
// edge exactly at v = 1. Monotone increasing in rho; plain bisection in
// log rho.
double solve_junction_ratio(std::size_t n01, std::size_t n1p, double target) {
    auto h = [&](double log_rho) {
        return n01 * log_rho + log_geom_sum(n1p, log_rho) - log_geom_sum(n01, log_rho)
               - std::log(target);
    };
    double lo = -20.0, hi = 20.0;
    if (h(lo) > 0.0 || h(hi) < 0.0)
        throw std::invalid_argument("build_grid: no admissible stretching for these counts");
    for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
        double mid = 0.5 * (lo + hi);
        (h(mid) <= 0.0 ? lo : hi) = mid;
    }
    return std::exp(0.5 * (lo + hi));
}

double geom_first_width(double total, std::size_t k, double rho) {
    return total / std::exp(log_geom_sum(k, std::log(rho)));
}

} // namespace

double DensityOnGrid::mass() const {
    double m = 0.0;
    for (std::size_t i = 0; i < values.size(); ++i)
        m += values[i] * grid->widths[i];
    return m;
}

GridPtr build_grid(double v_min, double v_max, std::size_t n_cells, double stretch) {
    if (!(v_min < 0.0 && 1.0 < v_max))
        throw std::invalid_argument("build_grid: need v_min < 0 < 1 < v_max");
    if (!(stretch >= 1.0) || !std::isfinite(stretch))
        throw std::invalid_argument("build_grid: stretch must be >= 1");
    if (n_cells < 3)
        throw std::invalid_argument("build_grid: n_cells too small to place edges at 0 and 1");

    const double len = v_max - v_min;
    std::size_t n_neg;
    if (stretch == 1.0) {
        n_neg = static_cast<std::size_t>(std::lround(n_cells * (-v_min) / len));
    } else {
        // graded meshes anchor the finest cell at v = 0 on both sides, so
        // split the cell budget to equalize the first width w0: each side
        // needs ln(1 + L (rho-1)/w0)/ln(rho) cells, monotone in w0
        const double lr = std::log(stretch);
        auto cells_needed = [&](double w0) {
            return (std::log1p(-v_min * (stretch - 1.0) / w0) +
                    std::log1p(v_max * (stretch - 1.0) / w0)) / lr;
        };
        double lo = 1e-12, hi = len;
        for (int it = 0; it < 200; ++it) {
            const double mid = std::sqrt(lo * hi);
            (cells_needed(mid) > static_cast<double>(n_cells) ? lo : hi) = mid;
        }
        const double w0 = std::sqrt(lo * hi);
        n_neg = static_cast<std::size_t>(
            std::lround(std::log1p(-v_min * (stretch - 1.0) / w0) / lr));
    }
    n_neg = std::clamp<std::size_t>(n_neg, 1, n_cells - 2);
    const std::size_t n_pos = n_cells - n_neg;

    auto g = std::make_shared<Grid>();
    g->v_min = v_min;
    g->v_max = v_max;
    g->edges.assign(n_cells + 1, 0.0);
    g->zero_edge = n_neg;

    // negative side: widths grow by `stretch` per cell moving away from 0
    if (stretch == 1.0) {
        const double h = -v_min / n_neg;
        for (std::size_t j = 0; j < n_neg; ++j)
            g->edges[n_neg - j] = -h * static_cast<double>(j);
    } else {
        const double w0 = geom_first_width(-v_min, n_neg, stretch);
        double acc = 0.0, w = w0;
        for (std::size_t j = 1; j <= n_neg; ++j) {
            acc += w;
            g->edges[n_neg - j] = -acc;
            w *= stretch;
        }
    }
    g->edges[0] = v_min;
    g->edges[n_neg] = 0.0;

    // positive side: one geometric progression with an edge forced at 1
    std::size_t n01;
    double rho;
    if (stretch == 1.0) {
        n01 = std::clamp<std::size_t>(
            static_cast<std::size_t>(std::lround(n_pos / v_max)), 1, n_pos - 1);
        rho = 1.0;
    } else {
        // ratio solved from the junction constraint grows with n01; pick the
        // admissible cell split whose ratio is closest to the requested one
        const double target = v_max - 1.0;
        std::size_t lo = 1, hi = n_pos - 1;
        while (hi - lo > 1) {
            std::size_t mid = (lo + hi) / 2;
            double r = solve_junction_ratio(mid, n_pos - mid, target);
            (r < stretch ? lo : hi) = mid;
        }
        const double r_lo = solve_junction_ratio(lo, n_pos - lo, target);
        const double r_hi = solve_junction_ratio(hi, n_pos - hi, target);
        if (r_lo > 1.0 && std::abs(std::log(r_lo / stretch)) <= std::abs(std::log(r_hi / stretch))) {
            n01 = lo;
            rho = r_lo;
        } else {
            n01 = hi;
            rho = r_hi;
        }
        if (!(rho > 1.0))
            throw std::invalid_argument("build_grid: n_cells too small for the requested stretch");
    }
    g->one_edge = n_neg + n01;
    const std::size_t n1p = n_pos - n01;

    if (rho == 1.0) {
        const double h01 = 1.0 / n01;
        for (std::size_t k = 1; k < n01; ++k)
            g->edges[n_neg + k] = h01 * static_cast<double>(k);
        const double h1p = (v_max - 1.0) / n1p;
        for (std::size_t k = 1; k < n1p; ++k)
            g->edges[g->one_edge + k] = 1.0 + h1p * static_cast<double>(k);
    } else {
        const double w0 = geom_first_width(1.0, n01, rho);
        double acc = 0.0, w = w0;
        for (std::size_t k = 1; k < n01; ++k) {
            acc += w;
            g->edges[n_neg + k] = acc;
            w *= rho;
        }
        // continue the progression past 1, rescaled so the last edge is exact
        double w1 = w0 * std::pow(rho, static_cast<double>(n01));
        double total = w1 * std::exp(log_geom_sum(n1p, std::log(rho)));
        const double c = (v_max - 1.0) / total;
        acc = 1.0;
        w = w1 * c;
        for (std::size_t k = 1; k < n1p; ++k) {
            acc += w;
            g->edges[g->one_edge + k] = acc;
            w *= rho;
        }
    }
    g->edges[n_neg + n01] = 1.0;
    g->edges[n_cells] = v_max;

    g->centers.resize(n_cells);
    g->widths.resize(n_cells);
    for (std::size_t i = 0; i < n_cells; ++i) {
        g->widths[i] = g->edges[i + 1] - g->edges[i];
        g->centers[i] = 0.5 * (g->edges[i] + g->edges[i + 1]);
        if (!(g->widths[i] > 0.0))
            throw std::invalid_argument("build_grid: degenerate cell produced; increase n_cells");
    }
    return g;
}

DensityOnGrid project(const std::function<double(double)>& density_fn, const GridPtr& grid) {
    DensityOnGrid f;
    f.grid = grid;
    f.values.resize(grid->n_cells());
    for (std::size_t i = 0; i < grid->n_cells(); ++i) {
        const double c = grid->centers[i], halfw = 0.5 * grid->widths[i];
        double acc = 0.0;
        for (int q = 0; q < 8; ++q) {
            const double y = density_fn(c + halfw * kGaussX[q]);
            if (!(y >= 0.0) || !std::isfinite(y))
                throw std::invalid_argument("project: density function returned a negative or non-finite value");
            acc += kGaussW[q] * y;
        }
        f.values[i] = 0.5 * acc; // cell average; Gauss weights sum to 2
    }
    return f;
}

DensityOnGrid project_box(double a, double b, double height, const GridPtr& grid) {
    if (!(a < b) || !(height >= 0.0))
        throw std::invalid_argument("project_box: need a < b and height >= 0");
    DensityOnGrid f;
    f.grid = grid;
    f.values.assign(grid->n_cells(), 0.0);
    for (std::size_t i = 0; i < grid->n_cells(); ++i) {
        const double lo = std::max(a, grid->edges[i]);
        const double hi = std::min(b, grid->edges[i + 1]);
        if (hi > lo)
            f.values[i] = height * (hi - lo) / grid->widths[i];
    }
    return f;
}

DensityOnGrid project_equilibrium(const ModelParams& p, const GridPtr& grid) {
    return project([&](double v) { return equilibrium_pdf(p, v); }, grid);
}

Observables observables(const DensityOnGrid& f) {
    const Grid& g = *f.grid;
    Observables o;
    for (std::size_t i = 0; i < g.n_cells(); ++i) {
        const double m = f.values[i] * g.widths[i];
        const double c = g.centers[i];
        if (i < g.zero_edge) {
            o.rho_minus += m;
            o.m_minus += c * m;
        } else {
            o.rho_plus += m;
            o.m_plus += c * m;
            o.m2 += c * c * m;
        }
    }
    o.mass = o.rho_minus + o.rho_plus;
    o.mean = o.m_minus + o.m_plus;
    return o;
}

double l1_distance(const DensityOnGrid& f, const DensityOnGrid& g) {
    if (f.grid != g.grid && f.grid->edges != g.grid->edges)
        throw std::invalid_argument("l1_distance: densities live on different grids");
    double acc = 0.0;
    for (std::size_t i = 0; i < f.values.size(); ++i)
        acc += std::abs(f.values[i] - g.values[i]) * f.grid->widths[i];
    return acc;
}

double interpolate_at(const DensityOnGrid& f, double v) {
    const auto& c = f.grid->centers;
    if (v <= c.front())
        return f.values.front();
    if (v >= c.back())
        return f.values.back();
    const auto it = std::upper_bound(c.begin(), c.end(), v);
    const std::size_t i = static_cast<std::size_t>(it - c.begin());
    const double t = (v - c[i - 1]) / (c[i] - c[i - 1]);
    return (1.0 - t) * f.values[i - 1] + t * f.values[i];
}

} // namespace wealthfpk
