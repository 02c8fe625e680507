#pragma once

#include "rdsnet/dataset.hpp"
#include "rdsnet/rng.hpp"

#include <cstddef>
#include <span>
#include <string_view>

namespace rdsnet {

enum class Estimator { naive, rds2 };

std::string_view to_string(Estimator e) noexcept;

struct PrevalenceEstimate {
    Estimator estimator = Estimator::naive;
    double theta_hat = 0.0;
    double variance = 0.0;
    double ci_low = 0.0;
    double ci_high = 0.0;
    double level = 0.95;
    std::size_t n_used = 0;
    std::size_t n_positive = 0;
    /// Bootstrap replicates behind the interval; 0 for Wald intervals.
    std::size_t replicates = 0;
};

/// Sample proportion with Wald interval θ̂ ± z·sqrt(θ̂(1−θ̂)/n), clamped to [0, 1].
PrevalenceEstimate naive_prevalence(std::size_t n_positive, std::size_t n, double level = 0.95);

/// Inverse-degree weighted (RDS II) prevalence with the Hájek delta-method
/// variance Σ w_i² (y_i − θ̂)², w_i = δ_i⁻¹ / Σ δ_j⁻¹.
PrevalenceEstimate rds2_prevalence(std::span<const int> outcomes, std::span<const double> degrees,
                                   double level = 0.95);

/// Both estimators over the participants of `ds` with an observed outcome.
PrevalenceEstimate naive_prevalence(const RdsDataset& ds, double level = 0.95);
PrevalenceEstimate rds2_prevalence(const RdsDataset& ds, double level = 0.95);

struct BootstrapOptions {
    double level = 0.95;
    std::size_t replicates = 1000;
    unsigned threads = 1;
};

/// Chain bootstrap of the RDS II estimator. Seeds are resampled with
/// replacement; chains are then regrown breadth first, each drawn participant
/// receiving as many recruits as it had in the sample, every recruit drawn
/// with replacement from the recruits of recruiters sharing the current
/// participant's outcome status. Growth stops at the original sample size
/// (a fresh seed is drawn if every chain dies first). The interval is the
/// percentile interval of the replicate estimates. Replicate r uses
/// rng.substream(r), so results do not depend on `threads`.
PrevalenceEstimate rds2_bootstrap_ci(const RdsDataset& ds, const BootstrapOptions& options, const Rng& rng);

}  // namespace rdsnet
