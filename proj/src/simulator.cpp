#include "rdsnet/simulator.hpp"

#include "rdsnet/error.hpp"
#include "rdsnet/regression.hpp"
#include "rdsnet/stats.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <numeric>
#include <set>
#include <stdexcept>

namespace rdsnet {

namespace {

constexpr std::size_t kCholeskyLimit = 1500;

// Q v for Q = τ (D + d I − A).
Eigen::VectorXd car_multiply(const Graph& g, double tau, double d, const Eigen::VectorXd& v) {
    Eigen::VectorXd out(v.size());
    for (std::size_t i = 0; i < g.size(); ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        double s = (static_cast<double>(g.degree(i)) + d) * v[ii];
        for (std::size_t j : g.neighbors(i)) s -= v[static_cast<Eigen::Index>(j)];
        out[ii] = tau * s;
    }
    return out;
}

Eigen::VectorXd conjugate_gradient(const Graph& g, double tau, double d, const Eigen::VectorXd& b) {
    Eigen::VectorXd x = Eigen::VectorXd::Zero(b.size());
    Eigen::VectorXd r = b;
    Eigen::VectorXd p = r;
    double rr = r.squaredNorm();
    const double stop = 1e-26 * std::max(1.0, b.squaredNorm());
    for (std::size_t it = 0; it < 10 * g.size() + 100 && rr > stop; ++it) {
        const Eigen::VectorXd qp = car_multiply(g, tau, d, p);
        const double alpha = rr / p.dot(qp);
        x += alpha * p;
        r -= alpha * qp;
        const double rr_new = r.squaredNorm();
        p = r + (rr_new / rr) * p;
        rr = rr_new;
    }
    return x;
}

}  // namespace

Graph gen_network(std::size_t n, double mean_degree, Rng& rng) {
    if (n < 2) throw std::invalid_argument("gen_network: at least 2 nodes required");
    if (!(mean_degree > 0.0) || !std::isfinite(mean_degree))
        throw std::invalid_argument("gen_network: mean degree must be positive");
    Graph g(n);
    const double p = mean_degree / static_cast<double>(n - 1);
    if (p >= 1.0) {
        for (std::size_t i = 0; i < n; ++i)
            for (std::size_t j = i + 1; j < n; ++j) g.add_edge(i, j);
        return g;
    }
    // Batagelj–Brandes geometric skipping over the pairs (v, w), w < v.
    const double log_q = std::log1p(-p);
    long long v = 1, w = -1;
    const auto nn = static_cast<long long>(n);
    while (v < nn) {
        w += 1 + static_cast<long long>(std::floor(std::log(rng.uniform01()) / log_q));
        while (w >= v && v < nn) {
            w -= v;
            ++v;
        }
        if (v < nn) g.add_edge(static_cast<std::size_t>(v), static_cast<std::size_t>(w));
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (g.degree(i) > 0) continue;
        std::size_t j = static_cast<std::size_t>(rng.uniform_index(n - 1));
        if (j >= i) ++j;
        g.add_edge(i, j);
    }
    return g;
}

Eigen::MatrixXd gen_covariates(std::size_t n, std::size_t count, Rng& rng) {
    Eigen::MatrixXd x(static_cast<Eigen::Index>(n), static_cast<Eigen::Index>(count + 1));
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
        x(i, 0) = 1.0;
        for (Eigen::Index k = 1; k < x.cols(); ++k) x(i, k) = (k % 2 == 1) ? (rng.bernoulli(0.5) ? 1.0 : 0.0) : rng.normal();
    }
    return x;
}

std::vector<std::string> simulated_covariate_names(std::size_t count) {
    std::vector<std::string> names;
    for (std::size_t k = 1; k <= count; ++k) names.push_back("x" + std::to_string(k));
    return names;
}

Eigen::VectorXd sample_car_field(const Graph& graph, double tau, double d, Rng& rng, GmrfMethod method) {
    if (!(tau > 0.0) || !(d > 0.0)) throw std::invalid_argument("sample_car_field: tau and d must be positive");
    const std::size_t n = graph.size();
    if (method == GmrfMethod::automatic) method = n <= kCholeskyLimit ? GmrfMethod::cholesky : GmrfMethod::perturbation;

    if (method == GmrfMethod::cholesky) {
        const auto factor = cholesky(build_car_precision(graph, tau, d));
        std::vector<double> z(n);
        for (auto& v : z) v = rng.normal();
        const auto w = factor.solve_upper(z);
        return Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(n));
    }

    Eigen::VectorXd rhs(static_cast<Eigen::Index>(n));
    for (Eigen::Index i = 0; i < rhs.size(); ++i) rhs[i] = std::sqrt(tau * d) * rng.normal();
    const double st = std::sqrt(tau);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j : graph.neighbors(i)) {
            if (j < i) continue;
            const double z = st * rng.normal();
            rhs[static_cast<Eigen::Index>(i)] += z;
            rhs[static_cast<Eigen::Index>(j)] -= z;
        }
    return conjugate_gradient(graph, tau, d, rhs);
}

TraitDraw gen_trait_car(const Graph& graph, const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, double tau,
                        double d, Rng& rng) {
    if (x.rows() != static_cast<Eigen::Index>(graph.size()) || x.cols() != beta.size())
        throw std::invalid_argument("gen_trait_car: dimension mismatch");
    TraitDraw draw;
    draw.omega = sample_car_field(graph, tau, d, rng);
    const Eigen::VectorXd eta = x * beta + draw.omega;
    draw.trait.resize(graph.size());
    for (std::size_t i = 0; i < graph.size(); ++i)
        draw.trait[i] = rng.bernoulli(expit(eta[static_cast<Eigen::Index>(i)])) ? 1 : 0;
    return draw;
}

TraitDraw gen_trait_independent(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta, Rng& rng) {
    if (x.cols() != beta.size()) throw std::invalid_argument("gen_trait_independent: dimension mismatch");
    TraitDraw draw;
    draw.omega = Eigen::VectorXd::Zero(x.rows());
    const Eigen::VectorXd eta = x * beta;
    draw.trait.resize(static_cast<std::size_t>(x.rows()));
    for (Eigen::Index i = 0; i < x.rows(); ++i) draw.trait[static_cast<std::size_t>(i)] = rng.bernoulli(expit(eta[i])) ? 1 : 0;
    return draw;
}

double SyntheticPopulation::prevalence() const {
    if (trait.empty()) return 0.0;
    return static_cast<double>(std::accumulate(trait.begin(), trait.end(), 0)) / static_cast<double>(trait.size());
}

SyntheticPopulation gen_population(const PopulationConfig& config, Rng& rng) {
    if (config.beta.size() < 1) throw std::invalid_argument("gen_population: beta needs an intercept");
    SyntheticPopulation pop;
    pop.truth = config;
    pop.graph = gen_network(config.size, config.mean_degree, rng);
    const auto covariates = static_cast<std::size_t>(config.beta.size() - 1);
    pop.x = gen_covariates(config.size, covariates, rng);
    pop.covariate_names = simulated_covariate_names(covariates);
    TraitDraw draw = config.tau ? gen_trait_car(pop.graph, pop.x, config.beta, *config.tau, config.d, rng)
                                : gen_trait_independent(pop.x, config.beta, rng);
    pop.trait = std::move(draw.trait);
    pop.omega = std::move(draw.omega);
    return pop;
}

RdsSample run_rds(const SyntheticPopulation& pop, const RdsProcessConfig& config, Rng& rng,
                  const std::string& outcome_name) {
    const std::size_t n = pop.size();
    for (std::size_t s : config.fixed_seeds)
        if (s >= n) throw InputError("seed node out of range");
    if (std::set<std::size_t>(config.fixed_seeds.begin(), config.fixed_seeds.end()).size() != config.fixed_seeds.size())
        throw InputError("duplicate seed node");
    const std::size_t seed_count = config.fixed_seeds.empty() ? config.seed_count : config.fixed_seeds.size();
    if (seed_count == 0) throw InputError("at least one seed is required");
    if (seed_count > n) throw InputError("seed count exceeds the population size");
    if (config.target > n) throw InputError("target sample size exceeds the population size");
    if (seed_count > config.target) throw InputError("seed count exceeds the target sample size");
    if (!(config.acceptance >= 0.0 && config.acceptance <= 1.0))
        throw InputError("coupon acceptance probability must lie in [0, 1]");

    std::vector<bool> sampled(n, false);
    std::vector<std::size_t> order;             // population node per sample position
    std::vector<std::size_t> recruiter_of;      // sample position of recruiter, npos for seeds
    constexpr auto kNone = static_cast<std::size_t>(-1);
    order.reserve(config.target);

    // Seeds, without replacement.
    for (std::size_t s = 0; s < seed_count; ++s) {
        std::size_t pick = 0;
        if (!config.fixed_seeds.empty()) {
            pick = config.fixed_seeds[s];
        } else if (config.seed_rule == SeedRule::uniform) {
            std::size_t k = static_cast<std::size_t>(rng.uniform_index(n - s));
            for (pick = 0;; ++pick)
                if (!sampled[pick] && k-- == 0) break;
        } else {
            double total = 0.0;
            for (std::size_t i = 0; i < n; ++i)
                if (!sampled[i]) total += static_cast<double>(pop.graph.degree(i));
            double u = rng.uniform01() * total;
            for (pick = 0; pick < n; ++pick) {
                if (sampled[pick]) continue;
                u -= static_cast<double>(pop.graph.degree(pick));
                if (u <= 0.0) break;
            }
            if (pick == n)
                for (pick = n; pick-- > 0;)
                    if (!sampled[pick]) break;
        }
        sampled[pick] = true;
        order.push_back(pick);
        recruiter_of.push_back(kNone);
    }

    std::deque<std::size_t> queue;
    for (std::size_t k = 0; k < order.size(); ++k) queue.push_back(k);
    std::vector<std::size_t> candidates;
    while (!queue.empty() && order.size() < config.target) {
        const std::size_t pos = queue.front();
        queue.pop_front();
        const std::size_t node = order[pos];
        for (std::size_t c = 0; c < config.coupons && order.size() < config.target; ++c) {
            if (!rng.bernoulli(config.acceptance)) continue;
            candidates.clear();
            for (std::size_t j : pop.graph.neighbors(node))
                if (!sampled[j]) candidates.push_back(j);
            if (candidates.empty()) break;
            const std::size_t recruit = candidates[rng.uniform_index(candidates.size())];
            sampled[recruit] = true;
            order.push_back(recruit);
            recruiter_of.push_back(pos);
            queue.push_back(order.size() - 1);
        }
    }

    std::vector<ParticipantRecord> records;
    records.reserve(order.size());
    std::vector<CovariateSpec> schema;
    for (const auto& name : pop.covariate_names) schema.push_back({name, CovariateKind::numeric, {}, {}});
    for (std::size_t k = 0; k < order.size(); ++k) {
        const std::size_t node = order[k];
        ParticipantRecord r;
        r.id = "p" + std::to_string(node);
        if (recruiter_of[k] != kNone) r.recruiter_id = "p" + std::to_string(order[recruiter_of[k]]);
        r.degree = static_cast<int>(std::max<std::size_t>(1, pop.graph.degree(node)));
        r.outcome = pop.trait[node];
        for (Eigen::Index c = 1; c < pop.x.cols(); ++c)
            r.covariates.emplace_back(pop.x(static_cast<Eigen::Index>(node), c));
        records.push_back(std::move(r));
    }

    RdsSample sample{RdsDataset(std::move(records), outcome_name, std::move(schema)), std::move(order), false};
    sample.extinct = sample.population_index.size() < config.target;
    return sample;
}

}  // namespace rdsnet
