#include "rdsnet/regression.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <stdexcept>
#include <thread>

namespace rdsnet {

namespace {

constexpr double kSeparationEta = 30.0;

ScalarSummary summarize(std::vector<double> draws, double level) {
    ScalarSummary s;
    if (draws.empty()) return s;
    const double n = static_cast<double>(draws.size());
    s.mean = std::accumulate(draws.begin(), draws.end(), 0.0) / n;
    double ss = 0.0;
    for (double v : draws) ss += (v - s.mean) * (v - s.mean);
    s.sd = draws.size() > 1 ? std::sqrt(ss / (n - 1.0)) : 0.0;
    std::sort(draws.begin(), draws.end());
    const double alpha = 1.0 - level;
    s.lower = quantile_sorted(draws, alpha / 2.0);
    s.upper = quantile_sorted(draws, 1.0 - alpha / 2.0);
    return s;
}

CoefficientSummary make_coefficient(std::string label, double estimate, double sd, double lower, double upper) {
    CoefficientSummary c;
    c.label = std::move(label);
    c.estimate = estimate;
    c.sd = sd;
    c.lower = lower;
    c.upper = upper;
    c.odds_ratio = std::exp(estimate);
    c.or_lower = std::exp(lower);
    c.or_upper = std::exp(upper);
    return c;
}

double bernoulli_deviance(std::span<const int> y, const Eigen::VectorXd& eta) {
    double ll = 0.0;
    for (std::size_t i = 0; i < y.size(); ++i) {
        const double e = eta[static_cast<Eigen::Index>(i)];
        ll += y[i] * e - log1p_exp(e);
    }
    return -2.0 * ll;
}

void check_response(std::span<const int> y, std::size_t rows) {
    if (y.size() != rows) throw FitError("response length does not match design rows");
    for (int v : y)
        if (v != 0 && v != 1) throw FitError("response must be binary 0/1");
}

}  // namespace

std::string_view to_string(Model m) noexcept { return m == Model::logreg ? "logreg" : "netlogreg"; }

// ---------------------------------------------------------------------------
// Design
// ---------------------------------------------------------------------------

DesignMatrix build_design(const RdsDataset& ds, std::span<const std::string> covariates,
                          const std::map<std::string, std::string>& reference_levels) {
    struct Column {
        std::size_t covariate;
        std::optional<std::string> level;  // dummy for this level; nullopt = numeric
    };
    DesignMatrix design;
    std::vector<Column> columns;
    std::vector<std::size_t> used;
    design.labels.push_back("(Intercept)");

    for (const auto& [name, ref] : reference_levels)
        if (std::find(covariates.begin(), covariates.end(), name) == covariates.end())
            throw InputError("reference level given for covariate '" + name + "' which is not in the model");

    for (const auto& name : covariates) {
        auto c = ds.covariate_index(name);
        if (!c) throw InputError("unknown covariate '" + name + "'");
        if (std::find(used.begin(), used.end(), *c) != used.end())
            throw InputError("covariate '" + name + "' listed twice");
        used.push_back(*c);
        const auto& spec = ds.schema()[*c];
        auto override_it = reference_levels.find(name);
        if (spec.kind == CovariateKind::numeric) {
            if (override_it != reference_levels.end())
                throw InputError("covariate '" + name + "' is numeric and has no reference level");
            columns.push_back({*c, std::nullopt});
            design.labels.push_back(name);
            continue;
        }
        const std::string ref = override_it != reference_levels.end() ? override_it->second : spec.reference;
        if (std::find(spec.levels.begin(), spec.levels.end(), ref) == spec.levels.end())
            throw InputError("covariate '" + name + "' has no level '" + ref + "'");
        design.reference_levels[name] = ref;
        for (const auto& level : spec.levels) {
            if (level == ref) continue;
            columns.push_back({*c, level});
            design.labels.push_back(name + ":" + level);
        }
    }

    for (std::size_t i = 0; i < ds.size(); ++i) {
        const auto& r = ds[i];
        bool complete = r.outcome.has_value();
        for (std::size_t c : used)
            if (std::holds_alternative<std::monostate>(r.covariates[c])) complete = false;
        if (complete)
            design.rows.push_back(i);
        else
            ++design.dropped_rows;
    }
    if (design.rows.empty()) throw InputError("no participant has the outcome and all covariates observed");

    const auto n = static_cast<Eigen::Index>(design.rows.size());
    const auto p = static_cast<Eigen::Index>(columns.size() + 1);
    design.x.resize(n, p);
    for (Eigen::Index r = 0; r < n; ++r) {
        const auto& rec = ds[design.rows[static_cast<std::size_t>(r)]];
        design.x(r, 0) = 1.0;
        for (std::size_t k = 0; k < columns.size(); ++k) {
            const auto& col = columns[k];
            const auto& v = rec.covariates[col.covariate];
            design.x(r, static_cast<Eigen::Index>(k + 1)) =
                col.level ? (std::get<std::string>(v) == *col.level ? 1.0 : 0.0) : std::get<double>(v);
        }
    }

    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design.x);
    if (qr.rank() < p)
        throw InputError("design matrix is rank deficient (rank " + std::to_string(qr.rank()) + " < " +
                         std::to_string(p) + " columns)");
    return design;
}

std::vector<int> design_response(const RdsDataset& ds, const DesignMatrix& design) {
    std::vector<int> y;
    y.reserve(design.rows.size());
    for (std::size_t i : design.rows) y.push_back(ds[i].outcome.value());
    return y;
}

DicResult compute_dic(std::span<const double> deviance_samples, double deviance_at_plugin) {
    if (deviance_samples.empty()) throw std::invalid_argument("compute_dic: empty deviance sample");
    const double mean = std::accumulate(deviance_samples.begin(), deviance_samples.end(), 0.0) /
                        static_cast<double>(deviance_samples.size());
    DicResult r;
    r.p_d = mean - deviance_at_plugin;
    r.dic = deviance_at_plugin + 2.0 * r.p_d;
    return r;
}

// ---------------------------------------------------------------------------
// Plain logistic regression
// ---------------------------------------------------------------------------

double logistic_loglik(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& beta) {
    return -0.5 * bernoulli_deviance(y, x * beta);
}

Eigen::VectorXd logistic_score(const Eigen::MatrixXd& x, std::span<const int> y, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd resid(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) resid[i] = y[static_cast<std::size_t>(i)] - expit(eta[i]);
    return x.transpose() * resid;
}

Eigen::MatrixXd logistic_information(const Eigen::MatrixXd& x, const Eigen::VectorXd& beta) {
    const Eigen::VectorXd eta = x * beta;
    Eigen::VectorXd w(eta.size());
    for (Eigen::Index i = 0; i < eta.size(); ++i) {
        const double p = expit(eta[i]);
        w[i] = p * (1.0 - p);
    }
    return x.transpose() * w.asDiagonal() * x;
}

FitResult fit_logistic_mle(const DesignMatrix& design, std::span<const int> y, const MleOptions& options) {
    return fit_logistic_mle(design.x, y, design.labels, options);
}

FitResult fit_logistic_mle(const Eigen::MatrixXd& x, std::span<const int> y, const std::vector<std::string>& labels,
                           const MleOptions& options) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto p = static_cast<std::size_t>(x.cols());
    check_response(y, n);
    if (n < p) throw FitError("fewer observations than coefficients");
    if (labels.size() != p) throw std::invalid_argument("fit_logistic_mle: one label per column required");

    FitResult fit;
    fit.model = Model::logreg;
    fit.level = options.level;
    fit.n = n;
    fit.seed = options.seed;

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    double ll = logistic_loglik(x, y, beta);
    fit.diagnostics.loglik_trace.push_back(ll);
    fit.diagnostics.converged = false;

    std::size_t iter = 0;
    for (; iter < options.max_iterations; ++iter) {
        const Eigen::VectorXd score = logistic_score(x, y, beta);
        const Eigen::MatrixXd info = logistic_information(x, beta);
        const Eigen::VectorXd step = info.ldlt().solve(score);
        if (!step.allFinite()) throw FitError("information matrix is singular during IRLS");
        // A vanishing score with a large Newton step means the estimates are
        // drifting to infinity, so keep iterating until separation shows.
        if (score.lpNorm<Eigen::Infinity>() <= 1e-8 && step.lpNorm<Eigen::Infinity>() <= 1e-4) {
            fit.diagnostics.converged = true;
            break;
        }

        double scale = 1.0;
        Eigen::VectorXd candidate = beta + step;
        double ll_new = logistic_loglik(x, y, candidate);
        for (int halvings = 0; !(ll_new >= ll) && halvings < 40; ++halvings) {
            scale *= 0.5;
            candidate = beta + scale * step;
            ll_new = logistic_loglik(x, y, candidate);
        }
        if (!(ll_new >= ll)) throw FitError("IRLS step halving failed to increase the likelihood");

        const double change = std::abs(ll_new - ll) / (std::abs(ll) + 1e-12);
        beta = candidate;
        ll = ll_new;
        fit.diagnostics.loglik_trace.push_back(ll);

        if ((x * beta).cwiseAbs().maxCoeff() > kSeparationEta) throw SeparationError(beta, iter + 1);
        if (change <= 1e-10) {
            fit.diagnostics.converged = true;
            ++iter;
            break;
        }
    }
    fit.diagnostics.iterations = iter;
    if (!fit.diagnostics.converged)
        throw FitError("IRLS did not converge in " + std::to_string(options.max_iterations) + " iterations");

    const Eigen::MatrixXd info = logistic_information(x, beta);
    Eigen::LLT<Eigen::MatrixXd> llt(info);
    if (llt.info() != Eigen::Success) throw FitError("information matrix is not positive definite at the MLE");
    const Eigen::MatrixXd cov = llt.solve(Eigen::MatrixXd::Identity(info.rows(), info.cols()));

    const double z = normal_quantile(0.5 + 0.5 * options.level);
    for (std::size_t j = 0; j < p; ++j) {
        const auto jj = static_cast<Eigen::Index>(j);
        const double sd = std::sqrt(cov(jj, jj));
        fit.coefficients.push_back(make_coefficient(labels[j], beta[jj], sd, beta[jj] - z * sd, beta[jj] + z * sd));
    }
    fit.log_likelihood = ll;
    fit.deviance_at_plugin = -2.0 * ll;

    if (options.dic_draws == 0) {
        fit.p_d = static_cast<double>(p);
        fit.dic = fit.deviance_at_plugin + 2.0 * fit.p_d;
        return fit;
    }

    // Deviance over draws from the normal approximation to the posterior.
    Eigen::LLT<Eigen::MatrixXd> cov_llt(cov);
    const Eigen::MatrixXd l = cov_llt.matrixL();
    Rng rng(options.seed);
    fit.beta_draws.resize(static_cast<Eigen::Index>(options.dic_draws), static_cast<Eigen::Index>(p));
    fit.deviance_samples.reserve(options.dic_draws);
    Eigen::VectorXd zvec(static_cast<Eigen::Index>(p));
    for (std::size_t s = 0; s < options.dic_draws; ++s) {
        for (Eigen::Index j = 0; j < zvec.size(); ++j) zvec[j] = rng.normal();
        const Eigen::VectorXd b = beta + l * zvec;
        fit.beta_draws.row(static_cast<Eigen::Index>(s)) = b.transpose();
        fit.deviance_samples.push_back(bernoulli_deviance(y, x * b));
    }
    const auto dic = compute_dic(fit.deviance_samples, fit.deviance_at_plugin);
    fit.dic = dic.dic;
    fit.p_d = dic.p_d;
    return fit;
}

// ---------------------------------------------------------------------------
// CAR model
// ---------------------------------------------------------------------------

void CarSpec::validate() const {
    if (!(tau_shape > 0.0) || !(tau_rate > 0.0)) throw std::invalid_argument("CarSpec: tau prior must be positive");
    if (!(log_d_sd > 0.0)) throw std::invalid_argument("CarSpec: log d prior sd must be positive");
    if (fixed_d && !(*fixed_d > 0.0)) throw std::invalid_argument("CarSpec: fixed d must be positive");
    if (!(beta_prior_sd > 0.0)) throw std::invalid_argument("CarSpec: beta prior sd must be positive");
}

SpdMatrix build_car_precision(const Graph& graph, double tau, double d) {
    if (!(tau > 0.0) || !(d > 0.0)) throw std::invalid_argument("build_car_precision: tau and d must be positive");
    SpdMatrix q(graph.size());
    for (std::size_t i = 0; i < graph.size(); ++i) {
        q.set(i, i, tau * (static_cast<double>(graph.degree(i)) + d));
        for (std::size_t j : graph.neighbors(i))
            if (j > i) q.set(i, j, -tau);
    }
    return q;
}

NetLogRegSampler::NetLogRegSampler(const Eigen::MatrixXd& x, std::span<const int> y, const CarSpec& spec, Rng rng)
    : x_(x), y_(y.begin(), y.end()), spec_(spec), rng_(rng) {
    spec_.validate();
    const auto n = static_cast<std::size_t>(x.rows());
    check_response(y, n);
    if (spec.graph.size() != n)
        throw FitError("network has " + std::to_string(spec.graph.size()) + " nodes but the design has " +
                       std::to_string(n) + " rows");

    // Spectrum of the graph Laplacian D − A gives log det(D + dI − A) for any d.
    Eigen::MatrixXd lap = Eigen::MatrixXd::Zero(x.rows(), x.rows());
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        lap(ii, ii) = static_cast<double>(spec.graph.degree(i));
        for (std::size_t j : spec.graph.neighbors(i)) lap(ii, static_cast<Eigen::Index>(j)) = -1.0;
    }
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(lap, Eigen::EigenvaluesOnly);
    laplacian_eigenvalues_.resize(n);
    for (std::size_t k = 0; k < n; ++k)
        laplacian_eigenvalues_[k] = std::max(0.0, eig.eigenvalues()[static_cast<Eigen::Index>(k)]);

    CarState init;
    init.beta = Eigen::VectorXd::Zero(x.cols());
    init.omega = Eigen::VectorXd::Zero(x.rows());
    init.tau = 1.0;
    init.d = spec.fixed_d.value_or(1.0);
    set_state(init);

    const double prior_prec = 1.0 / (spec.beta_prior_sd * spec.beta_prior_sd);
    beta_step_.resize(x.cols());
    for (Eigen::Index j = 0; j < x.cols(); ++j)
        beta_step_[j] = 2.4 / std::sqrt(0.25 * x.col(j).squaredNorm() + prior_prec);
    omega_step_.resize(x.rows());
    for (std::size_t i = 0; i < n; ++i)
        omega_step_[static_cast<Eigen::Index>(i)] =
            2.4 / std::sqrt(0.25 + state_.tau * (static_cast<double>(spec.graph.degree(i)) + state_.d));

    beta_count_.assign(static_cast<std::size_t>(x.cols()), {});
    omega_count_.assign(n, {});
}

void NetLogRegSampler::set_state(const CarState& state) {
    if (state.beta.size() != x_.cols() || state.omega.size() != x_.rows())
        throw std::invalid_argument("NetLogRegSampler::set_state: dimension mismatch");
    if (!(state.tau > 0.0) || !(state.d > 0.0))
        throw std::invalid_argument("NetLogRegSampler::set_state: tau and d must be positive");
    state_ = state;
    if (spec_.fixed_d) state_.d = *spec_.fixed_d;
    eta_ = x_ * state_.beta + state_.omega;
}

double NetLogRegSampler::neighbor_sum(std::size_t i) const {
    double s = 0.0;
    for (std::size_t j : spec_.graph.neighbors(i)) s += state_.omega[static_cast<Eigen::Index>(j)];
    return s;
}

double NetLogRegSampler::car_quadratic() const {
    double q = 0.0;
    for (std::size_t i = 0; i < y_.size(); ++i) {
        const double w = state_.omega[static_cast<Eigen::Index>(i)];
        q += (static_cast<double>(spec_.graph.degree(i)) + state_.d) * w * w - w * neighbor_sum(i);
    }
    return q;
}

void NetLogRegSampler::update_beta(std::size_t j) {
    const auto jj = static_cast<Eigen::Index>(j);
    const double current = state_.beta[jj];
    const double proposal = current + beta_step_[jj] * rng_.normal();
    const double delta = proposal - current;
    const auto col = x_.col(jj);

    double log_ratio = 0.0;
    for (Eigen::Index i = 0; i < x_.rows(); ++i) {
        const double xi = col[i];
        if (xi == 0.0) continue;
        const double de = delta * xi;
        log_ratio += y_[static_cast<std::size_t>(i)] * de - (log1p_exp(eta_[i] + de) - log1p_exp(eta_[i]));
    }
    const double prior_var = spec_.beta_prior_sd * spec_.beta_prior_sd;
    log_ratio -= (proposal * proposal - current * current) / (2.0 * prior_var);

    auto& c = beta_count_[j];
    ++c.tried;
    ++c.total_tried;
    if (std::log(rng_.uniform01()) < log_ratio) {
        state_.beta[jj] = proposal;
        eta_ += delta * col;
        ++c.accepted;
        ++c.total_accepted;
    }
}

void NetLogRegSampler::update_omega(std::size_t i) {
    const auto ii = static_cast<Eigen::Index>(i);
    const double current = state_.omega[ii];
    const double proposal = current + omega_step_[ii] * rng_.normal();
    const double delta = proposal - current;
    const double prec = state_.tau * (static_cast<double>(spec_.graph.degree(i)) + state_.d);
    const double s = neighbor_sum(i);

    const double log_ratio = y_[i] * delta - (log1p_exp(eta_[ii] + delta) - log1p_exp(eta_[ii])) -
                             0.5 * prec * (proposal * proposal - current * current) +
                             state_.tau * s * delta;

    auto& c = omega_count_[i];
    ++c.tried;
    ++c.total_tried;
    if (std::log(rng_.uniform01()) < log_ratio) {
        state_.omega[ii] = proposal;
        eta_[ii] += delta;
        ++c.accepted;
        ++c.total_accepted;
    }
}

void NetLogRegSampler::update_tau() {
    const double n = static_cast<double>(y_.size());
    const double shape = spec_.tau_shape + 0.5 * n;
    const double rate = spec_.tau_rate + 0.5 * car_quadratic();
    state_.tau = rng_.gamma(shape, rate);
}

void NetLogRegSampler::update_log_d() {
    const double sum_sq = state_.omega.squaredNorm();
    auto log_target = [&](double log_d) {
        const double d = std::exp(log_d);
        double logdet = 0.0;
        for (double lambda : laplacian_eigenvalues_) logdet += std::log(lambda + d);
        const double z = (log_d - spec_.log_d_mean) / spec_.log_d_sd;
        return 0.5 * logdet - 0.5 * state_.tau * d * sum_sq - 0.5 * z * z;
    };
    const double current = std::log(state_.d);
    const double proposal = current + log_d_step_ * rng_.normal();
    const double log_ratio = log_target(proposal) - log_target(current);

    ++log_d_count_.tried;
    ++log_d_count_.total_tried;
    if (std::log(rng_.uniform01()) < log_ratio) {
        state_.d = std::exp(proposal);
        ++log_d_count_.accepted;
        ++log_d_count_.total_accepted;
    }
}

void NetLogRegSampler::sweep() {
    for (std::size_t j = 0; j < static_cast<std::size_t>(x_.cols()); ++j) update_beta(j);
    for (std::size_t i = 0; i < y_.size(); ++i) update_omega(i);
    update_tau();
    if (!spec_.fixed_d) update_log_d();
}

void NetLogRegSampler::adapt(double target_acceptance) {
    ++adapt_batches_;
    const double gain = 1.0 / std::sqrt(static_cast<double>(adapt_batches_));
    auto tune = [&](Counter& c, double& step) {
        if (c.tried == 0) return;
        const double rate = static_cast<double>(c.accepted) / static_cast<double>(c.tried);
        step *= std::exp(gain * (rate - target_acceptance));
        c.accepted = 0;
        c.tried = 0;
    };
    for (std::size_t j = 0; j < beta_count_.size(); ++j) tune(beta_count_[j], beta_step_[static_cast<Eigen::Index>(j)]);
    for (std::size_t i = 0; i < omega_count_.size(); ++i)
        tune(omega_count_[i], omega_step_[static_cast<Eigen::Index>(i)]);
    tune(log_d_count_, log_d_step_);
}

void NetLogRegSampler::reset_counters() {
    for (auto& c : beta_count_) c = {};
    for (auto& c : omega_count_) c = {};
    log_d_count_ = {};
}

double NetLogRegSampler::deviance() const { return bernoulli_deviance(y_, eta_); }

double NetLogRegSampler::log_posterior() const {
    const double n = static_cast<double>(y_.size());
    double lp = -0.5 * deviance();
    const double prior_var = spec_.beta_prior_sd * spec_.beta_prior_sd;
    lp -= 0.5 * state_.beta.squaredNorm() / prior_var;
    double logdet = n * std::log(state_.tau);
    for (double lambda : laplacian_eigenvalues_) logdet += std::log(lambda + state_.d);
    lp += 0.5 * logdet - 0.5 * state_.tau * car_quadratic();
    lp += (spec_.tau_shape - 1.0) * std::log(state_.tau) - spec_.tau_rate * state_.tau;
    if (!spec_.fixed_d) {
        const double z = (std::log(state_.d) - spec_.log_d_mean) / spec_.log_d_sd;
        lp -= 0.5 * z * z;
    }
    return lp;
}

namespace {

double acceptance(std::size_t accepted, std::size_t tried) {
    return tried == 0 ? 0.0 : static_cast<double>(accepted) / static_cast<double>(tried);
}

}  // namespace

double NetLogRegSampler::beta_acceptance(std::size_t j) const {
    return acceptance(beta_count_[j].total_accepted, beta_count_[j].total_tried);
}

double NetLogRegSampler::omega_acceptance() const {
    std::size_t a = 0, t = 0;
    for (const auto& c : omega_count_) {
        a += c.total_accepted;
        t += c.total_tried;
    }
    return acceptance(a, t);
}

double NetLogRegSampler::log_d_acceptance() const {
    return acceptance(log_d_count_.total_accepted, log_d_count_.total_tried);
}

double effective_sample_size(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 4) return static_cast<double>(n);
    const double mean = std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(n);
    auto autocov = [&](std::size_t lag) {
        double s = 0.0;
        for (std::size_t t = 0; t + lag < n; ++t) s += (chain[t] - mean) * (chain[t + lag] - mean);
        return s / static_cast<double>(n);
    };
    const double c0 = autocov(0);
    if (!(c0 > 0.0)) return static_cast<double>(n);
    // Geyer's initial positive sequence over pairs of lags.
    double sum = 0.0;
    for (std::size_t k = 0; 2 * k + 1 < n; ++k) {
        const double pair = autocov(2 * k) + autocov(2 * k + 1);
        if (pair <= 0.0) break;
        sum += pair;
    }
    const double tau_int = std::max(1.0, (2.0 * sum) / c0 - 1.0);
    return static_cast<double>(n) / tau_int;
}

FitResult fit_netlogreg_mcmc(const DesignMatrix& design, std::span<const int> y, const CarSpec& spec,
                             const McmcOptions& options) {
    return fit_netlogreg_mcmc(design.x, y, design.labels, spec, options);
}

FitResult fit_netlogreg_mcmc(const Eigen::MatrixXd& x, std::span<const int> y, const std::vector<std::string>& labels,
                             const CarSpec& spec, const McmcOptions& options) {
    const auto n = static_cast<std::size_t>(x.rows());
    const auto p = static_cast<std::size_t>(x.cols());
    check_response(y, n);
    if (labels.size() != p) throw std::invalid_argument("fit_netlogreg_mcmc: one label per column required");
    if (spec.graph.size() != n)
        throw FitError("network has " + std::to_string(spec.graph.size()) + " nodes but the design has " +
                       std::to_string(n) + " rows");
    if (options.iterations <= options.burnin) throw std::invalid_argument("MCMC iterations must exceed burn-in");
    if (options.thin == 0 || options.chains == 0 || options.adapt_interval == 0)
        throw std::invalid_argument("MCMC thin, chains and adapt interval must be positive");
    const auto positives = std::count(y.begin(), y.end(), 1);
    if (positives == 0 || static_cast<std::size_t>(positives) == n)
        throw FitError("outcome is constant; the model is not identifiable");

    Eigen::VectorXd beta0 = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(p));
    try {
        MleOptions mle;
        mle.dic_draws = 0;
        const auto init = fit_logistic_mle(x, y, labels, mle);
        for (std::size_t j = 0; j < p; ++j) beta0[static_cast<Eigen::Index>(j)] = init.coefficients[j].estimate;
    } catch (const FitError&) {
        beta0.setZero();
    }

    struct ChainOutput {
        std::vector<double> beta;  // row-major draws × p
        std::vector<double> tau, d, deviance;
        Eigen::VectorXd omega_sum, omega_sumsq;
        std::vector<double> beta_acceptance;
        double omega_acceptance = 0.0;
        double log_d_acceptance = 0.0;
        std::string error;
    };
    std::vector<ChainOutput> outputs(options.chains);
    const Rng master(options.seed);

    auto run_chain = [&](std::size_t c) {
        auto& out = outputs[c];
        try {
            NetLogRegSampler sampler(x, y, spec, master.substream(c));
            CarState init;
            init.beta = beta0;
            init.omega = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            init.tau = 1.0;
            init.d = spec.fixed_d.value_or(1.0);
            sampler.set_state(init);
            if (!std::isfinite(sampler.log_posterior()))
                throw FitError("posterior density is not finite at the initial state");

            for (std::size_t it = 0; it < options.burnin; ++it) {
                sampler.sweep();
                if ((it + 1) % options.adapt_interval == 0) sampler.adapt(options.target_acceptance);
            }
            sampler.reset_counters();

            out.omega_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            out.omega_sumsq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
            for (std::size_t it = options.burnin; it < options.iterations; ++it) {
                sampler.sweep();
                if ((it - options.burnin) % options.thin != 0) continue;
                const auto& s = sampler.state();
                for (Eigen::Index j = 0; j < s.beta.size(); ++j) out.beta.push_back(s.beta[j]);
                out.tau.push_back(s.tau);
                out.d.push_back(s.d);
                out.deviance.push_back(sampler.deviance());
                out.omega_sum += s.omega;
                out.omega_sumsq += s.omega.cwiseProduct(s.omega);
            }
            for (std::size_t j = 0; j < p; ++j) out.beta_acceptance.push_back(sampler.beta_acceptance(j));
            out.omega_acceptance = sampler.omega_acceptance();
            out.log_d_acceptance = sampler.log_d_acceptance();
        } catch (const std::exception& e) {
            out.error = e.what();
        }
    };

    const unsigned threads = std::max(1u, options.threads);
    for (std::size_t start = 0; start < options.chains; start += threads) {
        const std::size_t stop = std::min<std::size_t>(options.chains, start + threads);
        if (stop - start == 1) {
            run_chain(start);
            continue;
        }
        std::vector<std::thread> pool;
        for (std::size_t c = start; c < stop; ++c) pool.emplace_back(run_chain, c);
        for (auto& t : pool) t.join();
    }
    for (const auto& out : outputs)
        if (!out.error.empty()) throw FitError(out.error);

    FitResult fit;
    fit.model = Model::netlogreg;
    fit.level = options.level;
    fit.n = n;
    fit.seed = options.seed;
    fit.diagnostics.iterations = options.iterations;

    std::size_t draws = 0;
    for (const auto& out : outputs) draws += out.tau.size();
    fit.beta_draws.resize(static_cast<Eigen::Index>(draws), static_cast<Eigen::Index>(p));
    std::vector<double> tau_all, d_all;
    Eigen::VectorXd omega_sum = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    Eigen::VectorXd omega_sumsq = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n));
    fit.diagnostics.beta_acceptance.assign(p, 0.0);
    fit.diagnostics.beta_ess.assign(p, 0.0);
    {
        Eigen::Index row = 0;
        for (const auto& out : outputs) {
            const std::size_t m = out.tau.size();
            for (std::size_t s = 0; s < m; ++s, ++row)
                for (std::size_t j = 0; j < p; ++j) fit.beta_draws(row, static_cast<Eigen::Index>(j)) = out.beta[s * p + j];
            tau_all.insert(tau_all.end(), out.tau.begin(), out.tau.end());
            d_all.insert(d_all.end(), out.d.begin(), out.d.end());
            fit.deviance_samples.insert(fit.deviance_samples.end(), out.deviance.begin(), out.deviance.end());
            omega_sum += out.omega_sum;
            omega_sumsq += out.omega_sumsq;
            for (std::size_t j = 0; j < p; ++j) {
                fit.diagnostics.beta_acceptance[j] += out.beta_acceptance[j] / static_cast<double>(options.chains);
                std::vector<double> trace(m);
                for (std::size_t s = 0; s < m; ++s) trace[s] = out.beta[s * p + j];
                fit.diagnostics.beta_ess[j] += effective_sample_size(trace);
            }
            fit.diagnostics.omega_acceptance += out.omega_acceptance / static_cast<double>(options.chains);
            fit.diagnostics.log_d_acceptance += out.log_d_acceptance / static_cast<double>(options.chains);
        }
    }

    Eigen::VectorXd beta_mean(static_cast<Eigen::Index>(p));
    for (std::size_t j = 0; j < p; ++j) {
        const auto col = fit.beta_draws.col(static_cast<Eigen::Index>(j));
        const auto s = summarize(std::vector<double>(col.begin(), col.end()), options.level);
        beta_mean[static_cast<Eigen::Index>(j)] = s.mean;
        fit.coefficients.push_back(make_coefficient(labels[j], s.mean, s.sd, s.lower, s.upper));
    }
    fit.tau = summarize(tau_all, options.level);
    fit.d = summarize(d_all, options.level);

    const double m = static_cast<double>(draws);
    const Eigen::VectorXd omega_mean = omega_sum / m;
    fit.latent.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto ii = static_cast<Eigen::Index>(i);
        const double var = std::max(0.0, omega_sumsq[ii] / m - omega_mean[ii] * omega_mean[ii]);
        fit.latent[i].mean = omega_mean[ii];
        fit.latent[i].sd = std::sqrt(var * m / std::max(1.0, m - 1.0));
    }

    const Eigen::VectorXd eta_bar = x * beta_mean + omega_mean;
    fit.deviance_at_plugin = bernoulli_deviance(y, eta_bar);
    fit.log_likelihood = -0.5 * fit.deviance_at_plugin;
    const auto dic = compute_dic(fit.deviance_samples, fit.deviance_at_plugin);
    fit.dic = dic.dic;
    fit.p_d = dic.p_d;
    return fit;
}

}  // namespace rdsnet
