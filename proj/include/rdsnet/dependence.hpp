#pragma once

#include "rdsnet/dataset.hpp"
#include "rdsnet/network.hpp"

#include <cstddef>
#include <string_view>
#include <vector>

namespace rdsnet {

struct ChiSquareResult {
    double statistic = 0.0;
    unsigned dof = 0;
    double p_value = 1.0;
    bool yates_applied = false;
    std::vector<std::vector<double>> expected;
    /// Some expected count is below 5; the asymptotic p-value is still reported.
    bool small_expected = false;
    std::size_t dropped_dyads = 0;
    std::size_t dyads = 0;
};

/// Pearson chi-square independence test. The Yates continuity correction is
/// applied only to 2x2 tables, with |O − E| floored at 0.5 before correcting.
/// Throws InputError when a row or column total is zero.
ChiSquareResult pearson_chi_square(const ContingencyTable& table, bool yates = true);

/// dyad_table + pearson_chi_square, after dropping levels absent from every
/// dyad. Throws InputError with fewer than two observed levels on either side.
ChiSquareResult test_network_dependence(const RdsDataset& ds, std::string_view variable, bool yates = true);

}  // namespace rdsnet
