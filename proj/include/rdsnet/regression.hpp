#pragma once

#include "rdsnet/dataset.hpp"
#include "rdsnet/error.hpp"
#include "rdsnet/graph.hpp"
#include "rdsnet/rng.hpp"
#include "rdsnet/stats.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace rdsnet {

// ---------------------------------------------------------------------------
// Design
// ---------------------------------------------------------------------------

struct DesignMatrix {
    Eigen::MatrixXd x;                 // n × p; column 0 is the intercept
    std::vector<std::string> labels;   // "(Intercept)", "age", "gender:Transvestite", ...
    std::vector<std::size_t> rows;     // dataset record index of each design row
    std::size_t dropped_rows = 0;      // records lacking the outcome or a covariate
    std::map<std::string, std::string> reference_levels;

    std::size_t n() const noexcept { return static_cast<std::size_t>(x.rows()); }
    std::size_t p() const noexcept { return static_cast<std::size_t>(x.cols()); }
};

/// Intercept plus numeric covariates as-is and categorical covariates
/// dummy-coded against their reference level. `reference_levels` overrides the
/// dataset schema. Throws InputError on unknown names/levels, an empty result
/// or a rank-deficient matrix.
DesignMatrix build_design(const RdsDataset& ds, std::span<const std::string> covariates,
                          const std::map<std::string, std::string>& reference_levels = {});

/// Outcomes aligned with the rows of `design`.
std::vector<int> design_response(const RdsDataset& ds, const DesignMatrix& design);

// ---------------------------------------------------------------------------
// Fit results
// ---------------------------------------------------------------------------

enum class Model { logreg, netlogreg };

std::string_view to_string(Model m) noexcept;

struct CoefficientSummary {
    std::string label;
    double estimate = 0.0;  // MLE or posterior mean
    double sd = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    double odds_ratio = 1.0;
    double or_lower = 1.0;
    double or_upper = 1.0;
};

struct ScalarSummary {
    double mean = 0.0;
    double sd = 0.0;
    double lower = 0.0;
    double upper = 0.0;
};

struct LatentSummary {
    double mean = 0.0;
    double sd = 0.0;
};

struct FitDiagnostics {
    bool converged = true;
    std::size_t iterations = 0;            // IRLS steps or MCMC sweeps per chain
    std::vector<double> loglik_trace;      // IRLS only
    std::vector<double> beta_acceptance;   // MCMC only, post burn-in
    double omega_acceptance = 0.0;
    double log_d_acceptance = 0.0;
    std::vector<double> beta_ess;
};

struct FitResult {
    Model model = Model::logreg;
    double level = 0.95;
    std::size_t n = 0;
    std::vector<CoefficientSummary> coefficients;
    std::vector<LatentSummary> latent;      // per design row, NetLogReg only
    std::optional<ScalarSummary> tau;
    std::optional<ScalarSummary> d;
    double log_likelihood = 0.0;           // at the MLE / plug-in
    std::vector<double> deviance_samples;
    double deviance_at_plugin = 0.0;
    double dic = 0.0;
    double p_d = 0.0;
    Eigen::MatrixXd beta_draws;            // draws × p, pooled over chains
    FitDiagnostics diagnostics;
    std::uint64_t seed = 0;
};

struct DicResult {
    double dic = 0.0;
    double p_d = 0.0;
};

/// p_D = mean(deviance) − deviance at the plug-in; DIC = plug-in deviance + 2 p_D.
DicResult compute_dic(std::span<const double> deviance_samples, double deviance_at_plugin);

// ---------------------------------------------------------------------------
// Plain logistic regression
// ---------------------------------------------------------------------------

double logistic_loglik(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& beta);
Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& beta);
/// Observed (= expected, canonical link) information Xᵀ W X.
Eigen::MatrixXd logistic_information(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta);

/// Thrown when some fitted |η_i| exceeds 30 (complete or quasi separation).
class SeparationError : public FitError {
public:
    SeparationError(Eigen::VectorXd beta, std::size_t iteration)
        : FitError("quasi-complete separation detected: fitted linear predictor exceeds 30 in magnitude"),
          beta_(std::move(beta)), iteration_(iteration) {}

    const Eigen::VectorXd& beta() const noexcept { return beta_; }
    std::size_t iteration() const noexcept { return iteration_; }

private:
    Eigen::VectorXd beta_;
    std::size_t iteration_;
};

struct MleOptions {
    std::size_t max_iterations = 100;
    double level = 0.95;
    /// Draws from the normal approximation N(β̂, I⁻¹) used for DIC / p_D.
    std::size_t dic_draws = 4000;
    std::uint64_t seed = 1;
};

/// Newton–Raphson (IRLS) with step halving. Converged when the max-norm of
/// the score is <= 1e-8 or the relative log-likelihood change is <= 1e-10.
FitResult fit_logistic_mle(const DesignMatrix& design, std::span<const int> y, const MleOptions& options = {});
FitResult fit_logistic_mle(const Eigen::MatrixXd& x, std::span<const int> y,
                           const std::vector<std::string>& labels, const MleOptions& options = {});

// ---------------------------------------------------------------------------
// Logistic regression with a CAR network effect
// ---------------------------------------------------------------------------

/// Graph and priors of the latent field ω ~ N(0, (τ (D + d I − A))⁻¹):
/// τ ~ Gamma(shape, rate), log d ~ N(mean, sd) unless d is fixed,
/// β_j ~ N(0, beta_prior_sd²).
struct CarSpec {
    Graph graph;
    double tau_shape = 1.0;
    double tau_rate = 0.01;
    double log_d_mean = 0.0;
    double log_d_sd = 1.0;
    std::optional<double> fixed_d;
    double beta_prior_sd = 10.0;

    void validate() const;
};

/// Q = τ (D + d I − A) with D = diag(n_i). Row sums of Q / τ equal d.
SpdMatrix build_car_precision(const Graph& graph, double tau, double d);

struct McmcOptions {
    std::size_t iterations = 20000;  // sweeps per chain, burn-in included
    std::size_t burnin = 5000;
    std::size_t thin = 1;
    std::size_t chains = 1;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    double level = 0.95;
    std::size_t adapt_interval = 50;
    double target_acceptance = 0.44;
};

struct CarState {
    Eigen::VectorXd beta;
    Eigen::VectorXd omega;
    double tau = 1.0;
    double d = 1.0;
};

/// Metropolis-within-Gibbs sampler for the CAR logistic model.
///
/// One sweep updates every β_j and every ω_i by single-site Gaussian random
/// walk, draws τ from its Gamma full conditional and, unless d is fixed, takes
/// a random-walk step on log d. Step sizes move toward the target acceptance
/// only when adapt() is called.
class NetLogRegSampler {
public:
    NetLogRegSampler(const Eigen::MatrixXd& x, std::span<const int> y, const CarSpec& spec, Rng rng);

    void set_state(const CarState& state);
    const CarState& state() const noexcept { return state_; }

    void sweep();
    /// Robbins–Monro step-size update from acceptance since the previous call.
    void adapt(double target_acceptance = 0.44);
    /// Clears acceptance counters.
    void reset_counters();

    double deviance() const;
    double log_posterior() const;

    double beta_acceptance(std::size_t j) const;
    double omega_acceptance() const;
    double log_d_acceptance() const;

private:
    void update_beta(std::size_t j);
    void update_omega(std::size_t i);
    void update_tau();
    void update_log_d();
    double neighbor_sum(std::size_t i) const;
    double car_quadratic() const;

    const Eigen::MatrixXd& x_;
    std::vector<int> y_;
    const CarSpec& spec_;
    Rng rng_;
    CarState state_;
    Eigen::VectorXd eta_;
    std::vector<double> laplacian_eigenvalues_;

    Eigen::VectorXd beta_step_;
    Eigen::VectorXd omega_step_;
    double log_d_step_ = 0.5;
    std::size_t adapt_batches_ = 0;

    struct Counter {
        std::size_t accepted = 0;
        std::size_t tried = 0;
        std::size_t total_accepted = 0;
        std::size_t total_tried = 0;
    };
    std::vector<Counter> beta_count_;
    std::vector<Counter> omega_count_;
    Counter log_d_count_;
};

/// Runs `options.chains` chains (in parallel up to `options.threads`), each
/// seeded by Rng(options.seed).substream(chain). β starts at the plain MLE
/// (zero on separation), ω = 0, τ = 1, d = 1. DIC uses the posterior means of
/// β and ω as the plug-in. Throws FitError for a constant outcome or a graph
/// that does not match the design rows.
FitResult fit_netlogreg_mcmc(const DesignMatrix& design, std::span<const int> y, const CarSpec& spec,
                             const McmcOptions& options = {});
FitResult fit_netlogreg_mcmc(const Eigen::MatrixXd& x, std::span<const int> y,
                             const std::vector<std::string>& labels, const CarSpec& spec,
                             const McmcOptions& options = {});

/// Effective sample size from the initial positive sequence of autocorrelations.
double effective_sample_size(std::span<const double> chain);

}  // namespace rdsnet
