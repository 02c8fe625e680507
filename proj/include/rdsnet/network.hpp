#pragma once

#include "rdsnet/dataset.hpp"
#include "rdsnet/graph.hpp"

#include <cstddef>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace rdsnet {

/// Recruitment forest of a dataset. Node k is record k of the dataset.
struct RecruitmentNetwork {
    std::vector<std::string> ids;
    std::vector<bool> is_seed;
    /// (recruiter, recruit) pairs in recruit order.
    std::vector<std::pair<std::size_t, std::size_t>> edges;
    /// Symmetrized recruitment edges.
    Graph undirected;

    std::size_t size() const noexcept { return ids.size(); }
    /// Observed contact count n_i (undirected neighbours), not the
    /// self-reported degree.
    std::size_t contact_count(std::size_t i) const noexcept { return undirected.degree(i); }
};

RecruitmentNetwork build_network(const RdsDataset& ds);

/// Participant level (rows) by recruiter level (columns) over recruitment dyads.
struct ContingencyTable {
    std::string variable;
    std::vector<std::string> row_labels;
    std::vector<std::string> col_labels;
    std::vector<std::vector<long long>> counts;
    std::size_t dropped_dyads = 0;

    std::size_t rows() const noexcept { return counts.size(); }
    std::size_t cols() const noexcept { return counts.empty() ? 0 : counts.front().size(); }
    long long total() const noexcept;
    long long row_total(std::size_t i) const noexcept;
    long long col_total(std::size_t j) const noexcept;

    static ContingencyTable from_counts(std::vector<std::vector<long long>> counts);
};

/// One entry per recruitment edge whose two endpoints both have `variable`
/// observed. `variable` is the outcome name or a categorical covariate.
/// Throws InputError if the variable is absent or numeric.
ContingencyTable dyad_table(const RdsDataset& ds, std::string_view variable);

}  // namespace rdsnet
