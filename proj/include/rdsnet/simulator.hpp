#pragma once

#include "rdsnet/dataset.hpp"
#include "rdsnet/graph.hpp"
#include "rdsnet/rng.hpp"

#include <Eigen/Dense>

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

namespace rdsnet {

/// Erdős–Rényi G(N, p) with p = mean_degree / (N − 1); every isolated node
/// is then joined to one uniformly chosen other node.
Graph gen_network(std::size_t n, double mean_degree, Rng& rng);

/// Intercept plus `count` covariates: x1, x3, ... Bernoulli(0.5); x2, x4, ... N(0, 1).
Eigen::MatrixXd gen_covariates(std::size_t n, std::size_t count, Rng& rng);
std::vector<std::string> simulated_covariate_names(std::size_t count);

enum class GmrfMethod {
    automatic,     // Cholesky up to 1500 nodes, perturbation beyond
    cholesky,      // ω = L⁻ᵀ z with Q = L Lᵀ (dense)
    perturbation,  // ω = Q⁻¹ (√τ Bᵀ z₁ + √(τd) z₂), B the edge incidence matrix; CG solve
};

/// One draw of ω ~ N(0, Q⁻¹), Q = τ (D + d I − A).
Eigen::VectorXd sample_car_field(const Graph& graph, double tau, double d, Rng& rng,
                                 GmrfMethod method = GmrfMethod::automatic);

struct TraitDraw {
    std::vector<int> trait;
    Eigen::VectorXd omega;
};

/// y_i ~ Bernoulli(expit(x_iᵀβ + ω_i)) with ω drawn from the CAR field.
TraitDraw gen_trait_car(const Graph& graph, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, double tau,
                        double d, Rng& rng);

/// Same generative model with ω ≡ 0.
TraitDraw gen_trait_independent(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, Rng& rng);

struct PopulationConfig {
    std::size_t size = 1000;
    double mean_degree = 6.0;
    /// Intercept first; covariates = beta.size() − 1.
    Eigen::VectorXd beta = Eigen::VectorXd::Constant(1, -1.0);
    /// Network effect precision; nullopt generates ω ≡ 0.
    std::optional<double> tau = 1.0;
    double d = 1.0;
};

struct SyntheticPopulation {
    Graph graph;
    Eigen::MatrixXd x;
    std::vector<std::string> covariate_names;
    std::vector<int> trait;
    Eigen::VectorXd omega;
    PopulationConfig truth;

    std::size_t size() const noexcept { return graph.size(); }
    double prevalence() const;
};

SyntheticPopulation gen_population(const PopulationConfig& config, Rng& rng);

enum class SeedRule { uniform, degree_proportional };

struct RdsProcessConfig {
    std::size_t seed_count = 10;
    std::size_t coupons = 3;
    std::size_t target = 500;
    SeedRule seed_rule = SeedRule::uniform;
    double acceptance = 1.0;  // probability that a coupon is redeemed
    /// Explicit seed nodes; overrides seed_count and seed_rule when non-empty.
    std::vector<std::size_t> fixed_seeds;
};

struct RdsSample {
    RdsDataset dataset;
    std::vector<std::size_t> population_index;  // per dataset record
    bool extinct = false;                        // stopped before reaching the target
};

/// Without-replacement coupon recruitment in wave (FIFO) order. Each coupon
/// is redeemed with probability `acceptance` by a uniformly chosen unsampled
/// neighbour; with no unsampled neighbour left it is wasted. Records carry
/// the true graph degree as the self-reported degree and use ids "p<node>".
/// Throws InputError if seed_count exceeds the population or the target.
RdsSample run_rds(const SyntheticPopulation& pop, const RdsProcessConfig& config, Rng& rng,
                  const std::string& outcome_name = "outcome");

}  // namespace rdsnet
