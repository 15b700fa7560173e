#include "wealthfpk/io.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

namespace wealthfpk {

std::string format_double(double x) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", x);
    return buf;
}

void write_file_atomic(const std::string& path, const std::string& content) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out)
            throw std::runtime_error("cannot open for writing: " + tmp);
        out << content;
        if (!out)
            throw std::runtime_error("write failed: " + tmp);
    }
    if (std::rename(tmp.c_str(), path.c_str()) != 0)
        throw std::runtime_error("rename failed: " + tmp + " -> " + path);
}

std::string density_to_csv(const DensityOnGrid& f) {
    std::ostringstream out;
    out << "v_center,width,f\n";
    for (std::size_t i = 0; i < f.values.size(); ++i)
        out << format_double(f.grid->centers[i]) << ','
            << format_double(f.grid->widths[i]) << ','
            << format_double(f.values[i]) << '\n';
    return out.str();
}

void write_density_csv(const std::string& path, const DensityOnGrid& f) {
    write_file_atomic(path, density_to_csv(f));
}

DensityOnGrid read_density_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in)
        throw std::runtime_error("cannot open density CSV: " + path);
    std::string line;
    if (!std::getline(in, line) || line != "v_center,width,f")
        throw std::runtime_error("bad density CSV header in " + path);

    auto g = std::make_shared<Grid>();
    DensityOnGrid f;
    while (std::getline(in, line)) {
        if (line.empty())
            continue;
        double c, w, v;
        if (std::sscanf(line.c_str(), "%lg,%lg,%lg", &c, &w, &v) != 3)
            throw std::runtime_error("bad density CSV row in " + path + ": " + line);
        g->centers.push_back(c);
        g->widths.push_back(w);
        f.values.push_back(v);
    }
    if (g->centers.empty())
        throw std::runtime_error("empty density CSV: " + path);
    g->edges.resize(g->centers.size() + 1);
    for (std::size_t i = 0; i < g->centers.size(); ++i) {
        g->edges[i] = g->centers[i] - 0.5 * g->widths[i];
        g->edges[i + 1] = g->centers[i] + 0.5 * g->widths[i];
        if (g->centers[i] > 0.0 && (i == 0 || g->centers[i - 1] < 0.0))
            g->zero_edge = i;
        if (g->centers[i] > 1.0 && (i == 0 || g->centers[i - 1] < 1.0))
            g->one_edge = i;
    }
    g->v_min = g->edges.front();
    g->v_max = g->edges.back();
    f.grid = g;
    return f;
}

std::string series_to_csv(const ObservableSeries& s) {
    std::ostringstream out;
    out << 't';
    for (const auto& n : s.names)
        out << ',' << n;
    out << '\n';
    for (std::size_t r = 0; r < s.times.size(); ++r) {
        out << format_double(s.times[r]);
        for (const auto& col : s.columns)
            out << ',' << format_double(col[r]);
        out << '\n';
    }
    return out.str();
}

void write_series_csv(const std::string& path, const ObservableSeries& s) {
    write_file_atomic(path, series_to_csv(s));
}

void write_ensemble_csv(const std::string& path, const std::vector<double>& particles) {
    std::ostringstream out;
    out << "particle_index,v\n";
    for (std::size_t i = 0; i < particles.size(); ++i)
        out << i << ',' << format_double(particles[i]) << '\n';
    write_file_atomic(path, out.str());
}

} // namespace wealthfpk
