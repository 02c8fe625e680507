#include "rdsnet/dependence.hpp"

#include "rdsnet/error.hpp"
#include "rdsnet/stats.hpp"

#include <algorithm>
#include <cmath>

namespace rdsnet {

ChiSquareResult pearson_chi_square(const ContingencyTable& table, bool yates) {
    const std::size_t r = table.rows(), c = table.cols();
    if (r < 2 || c < 2) throw InputError("contingency table needs at least 2 rows and 2 columns");
    const long long total = table.total();
    if (total < 1) throw InputError("contingency table is empty");
    for (std::size_t i = 0; i < r; ++i)
        if (table.row_total(i) == 0) throw InputError("contingency table row '" + table.row_labels[i] + "' is empty");
    for (std::size_t j = 0; j < c; ++j)
        if (table.col_total(j) == 0) throw InputError("contingency table column '" + table.col_labels[j] + "' is empty");

    ChiSquareResult res;
    res.dof = static_cast<unsigned>((r - 1) * (c - 1));
    res.yates_applied = yates && r == 2 && c == 2;
    res.dropped_dyads = table.dropped_dyads;
    res.dyads = static_cast<std::size_t>(total);
    const double correction = res.yates_applied ? 0.5 : 0.0;

    res.expected.assign(r, std::vector<double>(c, 0.0));
    const double n = static_cast<double>(total);
    for (std::size_t i = 0; i < r; ++i) {
        const double row = static_cast<double>(table.row_total(i));
        for (std::size_t j = 0; j < c; ++j) {
            const double e = row * static_cast<double>(table.col_total(j)) / n;
            res.expected[i][j] = e;
            if (e < 5.0) res.small_expected = true;
            const double dev = std::max(std::abs(static_cast<double>(table.counts[i][j]) - e), correction) - correction;
            res.statistic += dev * dev / e;
        }
    }
    res.p_value = chi_square_sf(res.statistic, res.dof);
    return res;
}

ChiSquareResult test_network_dependence(const RdsDataset& ds, std::string_view variable, bool yates) {
    ContingencyTable full = dyad_table(ds, variable);

    std::vector<std::size_t> rows, cols;
    for (std::size_t i = 0; i < full.rows(); ++i)
        if (full.row_total(i) > 0) rows.push_back(i);
    for (std::size_t j = 0; j < full.cols(); ++j)
        if (full.col_total(j) > 0) cols.push_back(j);
    if (rows.size() < 2 || cols.size() < 2)
        throw InputError("variable '" + std::string(variable) +
                         "' takes fewer than 2 levels among recruiters or recruits of observed dyads");

    ContingencyTable reduced;
    reduced.variable = full.variable;
    reduced.dropped_dyads = full.dropped_dyads;
    for (std::size_t i : rows) {
        reduced.row_labels.push_back(full.row_labels[i]);
        std::vector<long long> row;
        for (std::size_t j : cols) row.push_back(full.counts[i][j]);
        reduced.counts.push_back(std::move(row));
    }
    for (std::size_t j : cols) reduced.col_labels.push_back(full.col_labels[j]);
    return pearson_chi_square(reduced, yates);
}

}  // namespace rdsnet
