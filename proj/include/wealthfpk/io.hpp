#pragma once

#include "wealthfpk/grid.hpp"
#include "wealthfpk/series.hpp"

#include <string>
#include <vector>

namespace wealthfpk {

/// Formats a double with 17 significant digits, enough for a bit-exact
/// decimal round trip.
std::string format_double(double x);

/// Writes `content` to `path` atomically (temp file + rename).
void write_file_atomic(const std::string& path, const std::string& content);

/// Density CSV, schema: v_center,width,f
std::string density_to_csv(const DensityOnGrid& f);
void write_density_csv(const std::string& path, const DensityOnGrid& f);

/// Reads a density CSV back onto a freshly reconstructed grid skeleton
/// (centers/widths only; edges are rebuilt from them).
DensityOnGrid read_density_csv(const std::string& path);

/// Series CSV, schema: t,<column names...>
std::string series_to_csv(const ObservableSeries& s);
void write_series_csv(const std::string& path, const ObservableSeries& s);

/// Ensemble snapshot CSV, schema: particle_index,v
void write_ensemble_csv(const std::string& path, const std::vector<double>& particles);

} // namespace wealthfpk
