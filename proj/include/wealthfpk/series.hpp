#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace wealthfpk {

/// Column-named time series of monitored quantities. The first seven
/// columns are always mass, mean, m2, rho_minus, rho_plus, m_minus,
/// m_plus; experiments append metric/entropy columns after them.
struct ObservableSeries {
    std::vector<double> times;
    std::vector<std::string> names;
    std::vector<std::vector<double>> columns; // one vector per name
    bool unnormalized_warning = false;        // initial data failed the unit-mass/mean check

    std::size_t add_column(const std::string& name) {
        names.push_back(name);
        columns.emplace_back();
        return names.size() - 1;
    }

    const std::vector<double>& column(const std::string& name) const {
        for (std::size_t i = 0; i < names.size(); ++i)
            if (names[i] == name)
                return columns[i];
        throw std::out_of_range("ObservableSeries: no column named " + name);
    }

    bool has_column(const std::string& name) const {
        for (const auto& n : names)
            if (n == name)
                return true;
        return false;
    }
};

} // namespace wealthfpk
