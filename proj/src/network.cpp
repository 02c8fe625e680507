#include "rdsnet/network.hpp"

#include "rdsnet/error.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <optional>

namespace rdsnet {

RecruitmentNetwork build_network(const RdsDataset& ds) {
    RecruitmentNetwork net;
    const std::size_t n = ds.size();
    net.ids.reserve(n);
    net.is_seed.reserve(n);
    net.undirected = Graph(n);
    for (std::size_t i = 0; i < n; ++i) {
        net.ids.push_back(ds[i].id);
        net.is_seed.push_back(ds[i].is_seed());
        if (auto r = ds.recruiter_index(i)) {
            net.edges.emplace_back(*r, i);
            net.undirected.add_edge(*r, i);
        }
    }
    return net;
}

long long ContingencyTable::total() const noexcept {
    long long t = 0;
    for (const auto& row : counts) t = std::accumulate(row.begin(), row.end(), t);
    return t;
}

long long ContingencyTable::row_total(std::size_t i) const noexcept {
    return std::accumulate(counts[i].begin(), counts[i].end(), 0LL);
}

long long ContingencyTable::col_total(std::size_t j) const noexcept {
    long long t = 0;
    for (const auto& row : counts) t += row[j];
    return t;
}

ContingencyTable ContingencyTable::from_counts(std::vector<std::vector<long long>> counts) {
    ContingencyTable t;
    for (std::size_t i = 0; i < counts.size(); ++i) {
        if (counts[i].size() != counts.front().size())
            throw std::invalid_argument("ContingencyTable: ragged counts");
        t.row_labels.push_back(std::to_string(i));
    }
    for (std::size_t j = 0; j < (counts.empty() ? 0 : counts.front().size()); ++j)
        t.col_labels.push_back(std::to_string(j));
    t.counts = std::move(counts);
    return t;
}

ContingencyTable dyad_table(const RdsDataset& ds, std::string_view variable) {
    ContingencyTable table;
    table.variable = std::string(variable);

    // Level index per participant, nullopt when unobserved.
    std::vector<std::optional<std::size_t>> level(ds.size());
    if (variable == ds.outcome_name()) {
        table.row_labels = table.col_labels = {"0", "1"};
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (ds[i].outcome) level[i] = static_cast<std::size_t>(*ds[i].outcome);
    } else {
        auto c = ds.covariate_index(variable);
        if (!c) throw InputError("variable '" + std::string(variable) + "' is not in the dataset");
        const auto& spec = ds.schema()[*c];
        if (spec.kind != CovariateKind::categorical)
            throw InputError("variable '" + std::string(variable) + "' is numeric; a categorical variable is required");
        table.row_labels = table.col_labels = spec.levels;
        for (std::size_t i = 0; i < ds.size(); ++i)
            if (const auto* s = std::get_if<std::string>(&ds[i].covariates[*c]))
                level[i] = static_cast<std::size_t>(
                    std::find(spec.levels.begin(), spec.levels.end(), *s) - spec.levels.begin());
    }

    const std::size_t k = table.row_labels.size();
    table.counts.assign(k, std::vector<long long>(k, 0));
    for (std::size_t i = 0; i < ds.size(); ++i) {
        auto r = ds.recruiter_index(i);
        if (!r) continue;
        if (level[i] && level[*r])
            ++table.counts[*level[i]][*level[*r]];
        else
            ++table.dropped_dyads;
    }
    return table;
}

}  // namespace rdsnet
