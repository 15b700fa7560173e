#pragma once

#include "wealthfpk/model.hpp"
#include "wealthfpk/sde.hpp"
#include "wealthfpk/solver.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace wealthfpk {

/// Fully resolved run description. Parses from (and serializes to) a small
/// TOML-style key-value file: [section] headers, `key = value` lines with
/// numbers, quoted strings, booleans and flat arrays, `#` comments.
/// Unknown sections or keys are errors, reported with their field path.
struct RunConfig {
    ModelParams params{1.0, 1.0};

    double v_min = -10.0;
    double v_max = 40.0;
    std::size_t n_cells = 4000;
    double stretch = 1.0;

    std::string initial_family = "gaussian"; // gaussian|box|two_box_debt|equilibrium|custom_csv
    sde::InitialLaw initial_law;             // resolved for the non-CSV families
    std::string custom_csv_path;

    SolverConfig solver; // params copied from above on resolve

    std::vector<std::string> monitors;
    std::string out_dir = "out";
    std::uint64_t seed = 12345;

    bool operator==(const RunConfig& other) const;
};

RunConfig parse_config(const std::string& text);
RunConfig load_config(const std::string& path);
std::string serialize_config(const RunConfig& cfg);

/// Builds the grid named by the config.
GridPtr make_grid(const RunConfig& cfg);

/// Projects the configured initial condition onto the grid (exact overlap
/// for the box families, Gauss quadrature otherwise, file read for
/// custom_csv). Throws with the file name if a custom CSV is missing.
DensityOnGrid initial_density(const RunConfig& cfg, const GridPtr& grid);

} // namespace wealthfpk
