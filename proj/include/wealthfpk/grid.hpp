#pragma once

#include "wealthfpk/model.hpp"

#include <functional>
#include <memory>
#include <vector>

namespace wealthfpk {

/// Finite-volume mesh on [v_min, v_max] with cell edges placed exactly at
/// v = 0 and v = 1. Immutable after construction; share via shared_ptr.
struct Grid {
    double v_min = 0.0;
    double v_max = 0.0;
    std::vector<double> edges;   // N+1 strictly increasing, edges[0] = v_min
    std::vector<double> centers; // N
    std::vector<double> widths;  // N, all positive
    std::size_t zero_edge = 0;   // edges[zero_edge] == 0 exactly
    std::size_t one_edge = 0;    // edges[one_edge] == 1 exactly

    std::size_t n_cells() const { return widths.size(); }
};

using GridPtr = std::shared_ptr<const Grid>;

/// Builds the mesh. stretch is the cell-to-cell width growth ratio moving
/// away from v = 0 on each side; stretch = 1 gives (per-segment) uniform
/// cells. Rejects non-ordered bounds (needs v_min < 0 < 1 < v_max) and
/// cell counts too small to place edges at both 0 and 1.
GridPtr build_grid(double v_min, double v_max, std::size_t n_cells, double stretch = 1.0);

/// Cell-averaged nonnegative density on a Grid.
struct DensityOnGrid {
    GridPtr grid;
    std::vector<double> values; // one cell average per cell, >= 0

    double mass() const;
};

/// Splits of probability mass and mean across the v = 0 edge, plus the
/// plain integral observables. m2 is restricted to v > 0.
struct Observables {
    double mass = 0.0;
    double mean = 0.0;
    double m2 = 0.0;        // second moment over positive cells only
    double rho_minus = 0.0;
    double rho_plus = 0.0;
    double m_minus = 0.0;
    double m_plus = 0.0;
};

/// Cell averages of a pointwise density by 8-node Gauss-Legendre quadrature
/// per cell. Rejects functions returning negative or non-finite values at
/// any quadrature node.
DensityOnGrid project(const std::function<double(double)>& density_fn, const GridPtr& grid);

/// Cell averages of the indicator of [a,b] scaled by `height` (exact
/// overlap fractions, no quadrature).
DensityOnGrid project_box(double a, double b, double height, const GridPtr& grid);

/// Cell averages of the equilibrium density (quadrature in log space, so
/// the essential singularity at v = 0+ underflows cleanly to zero).
DensityOnGrid project_equilibrium(const ModelParams& p, const GridPtr& grid);

Observables observables(const DensityOnGrid& f);

/// Discrete L1 distance sum |f_i - g_i| w_i. Throws on grid mismatch.
double l1_distance(const DensityOnGrid& f, const DensityOnGrid& g);

/// Piecewise-linear interpolation of cell values at location v (used for
/// the boundary density f(0,t)); clamps to the nearest cell average
/// outside the range of cell centers.
double interpolate_at(const DensityOnGrid& f, double v);

} // namespace wealthfpk
