#pragma once

#include "rdsnet/dataset.hpp"
#include "rdsnet/dependence.hpp"
#include "rdsnet/estimators.hpp"
#include "rdsnet/regression.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>

namespace rdsnet {

inline constexpr std::string_view kReportSchema = "rdsnet.report/1";
inline constexpr std::string_view kVersion = "0.1.0";

/// 64-bit FNV-1a, rendered as 16 hex digits.
std::string fnv1a64_hex(std::string_view bytes);

struct ModelComparison {
    double delta_dic = 0.0;  // DIC(netlogreg) − DIC(logreg)
    /// "logreg", "netlogreg" or "tie" (|ΔDIC| below the threshold).
    std::string preferred;
};

ModelComparison compare_models(double dic_logreg, double dic_netlogreg, double tie_threshold = 2.0);

nlohmann::json dataset_summary(const RdsDataset& ds, std::size_t rejected_rows);
nlohmann::json to_json(const ContingencyTable& table);
nlohmann::json to_json(const ChiSquareResult& result);
nlohmann::json to_json(const PrevalenceEstimate& estimate);
/// `ids` labels the latent effects; may be empty.
nlohmann::json to_json(const FitResult& fit, const std::vector<std::string>& ids = {});
nlohmann::json to_json(const ModelComparison& comparison);

/// Recruitment forest as a DOT digraph; seeds drawn larger, edges recruiter -> recruit.
std::string to_dot(const RdsDataset& ds);

/// Fixed-precision decimal formatting used by the text reports.
std::string fixed(double value, int digits);

}  // namespace rdsnet
