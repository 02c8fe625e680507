#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rdsnet/error.hpp"
#include "rdsnet/regression.hpp"
#include "rdsnet/simulator.hpp"

#include <cmath>
#include <sstream>

using namespace rdsnet;

namespace {

RdsDataset parse_text(const std::string& text, std::map<std::string, std::string> refs = {}) {
    std::istringstream in(text);
    ParseOptions opts;
    opts.reference_levels = std::move(refs);
    return parse_dataset(in, opts).dataset;
}

struct Grouped {
    Eigen::MatrixXd x;
    std::vector<int> y;
};

// x = 0: 10 of 40 positive; x = 1: 20 of 40 positive.
Grouped grouped_2x2() {
    Grouped g;
    g.x = Eigen::MatrixXd::Ones(80, 2);
    for (int i = 0; i < 80; ++i) {
        g.x(i, 1) = i < 40 ? 0.0 : 1.0;
        g.y.push_back(i < 40 ? (i < 10 ? 1 : 0) : (i < 60 ? 1 : 0));
    }
    return g;
}

Grouped simulated(std::size_t n, const Eigen::VectorXd& beta, std::uint64_t seed) {
    Rng rng(seed);
    Grouped g;
    g.x = gen_covariates(n, static_cast<std::size_t>(beta.size() - 1), rng);
    g.y = gen_trait_independent(g.x, beta, rng).trait;
    return g;
}

std::vector<std::string> labels_for(Eigen::Index p) {
    std::vector<std::string> out{"(Intercept)"};
    for (Eigen::Index j = 1; j < p; ++j) out.push_back("x" + std::to_string(j));
    return out;
}

}  // namespace

TEST_CASE("design: one binary covariate") {
    const auto ds = parse_text("id,recruiter_id,degree,outcome,x\nA,,1,0,0\nB,A,1,1,1\nC,A,1,0,1\nD,B,1,1,0\n");
    const std::vector<std::string> cov{"x"};
    const auto d = build_design(ds, cov);
    CHECK(d.n() == 4);
    CHECK(d.p() == 2);
    CHECK(d.x.col(0).isOnes());
    CHECK(d.labels == std::vector<std::string>{"(Intercept)", "x"});
    CHECK(design_response(ds, d) == std::vector<int>{0, 1, 0, 1});
}

TEST_CASE("design: three-level categorical against a reference") {
    const std::string text =
        "id,recruiter_id,degree,outcome,gender\n"
        "A,,1,0,Male\nB,A,1,1,Transvestite\nC,A,1,0,Others\nD,B,1,1,Male\nE,B,1,0,Others\nF,C,1,1,Transvestite\n";
    const auto ds = parse_text(text);
    const std::vector<std::string> cov{"gender"};
    const auto d = build_design(ds, cov, {{"gender", "Male"}});
    REQUIRE(d.p() == 3);
    CHECK(std::find(d.labels.begin(), d.labels.end(), "gender:Transvestite") != d.labels.end());
    CHECK(std::find(d.labels.begin(), d.labels.end(), "gender:Others") != d.labels.end());
    CHECK(std::find(d.labels.begin(), d.labels.end(), "gender:Male") == d.labels.end());
    CHECK(d.reference_levels.at("gender") == "Male");
    // The Male rows carry zeros in both dummies.
    CHECK(d.x.row(0).tail(2).isZero());
    CHECK(d.x.row(3).tail(2).isZero());

    const auto other = build_design(ds, cov, {{"gender", "Others"}});
    CHECK(std::find(other.labels.begin(), other.labels.end(), "gender:Male") != other.labels.end());
    CHECK_THROWS_AS(build_design(ds, cov, {{"gender", "Female"}}), InputError);
}

TEST_CASE("design: rank deficiency, unknown names and missing rows") {
    const auto ds = parse_text(
        "id,recruiter_id,degree,outcome,a,b,c\n"
        "A,,1,0,1,1,2\nB,A,1,1,2,2,\nC,A,1,0,3,3,1\nD,B,1,,4,4,5\nE,B,1,1,5,5,3\n");
    const std::vector<std::string> dup{"a", "b"};
    CHECK_THROWS_AS(build_design(ds, dup), InputError);
    const std::vector<std::string> unknown{"zzz"};
    CHECK_THROWS_AS(build_design(ds, unknown), InputError);
    const std::vector<std::string> ac{"a", "c"};
    const auto d = build_design(ds, ac);
    CHECK(d.n() == 3);
    CHECK(d.dropped_rows == 2);
    CHECK(d.rows == std::vector<std::size_t>{0, 2, 4});

    const auto none = parse_text("id,recruiter_id,degree,outcome,a\nA,,1,,1\nB,A,1,,2\n");
    const std::vector<std::string> a{"a"};
    CHECK_THROWS_AS(build_design(none, a), InputError);
}

TEST_CASE("mle: intercept only") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(40, 1);
    std::vector<int> y(40, 0);
    for (int i = 0; i < 10; ++i) y[i] = 1;
    const auto fit = fit_logistic_mle(x, y, {"(Intercept)"});
    CHECK(std::abs(fit.coefficients[0].estimate - std::log(0.25 / 0.75)) <= 1e-6);
    CHECK(fit.diagnostics.converged);
    // sd = 1 / sqrt(n p (1 − p))
    CHECK(fit.coefficients[0].sd == doctest::Approx(1.0 / std::sqrt(40 * 0.25 * 0.75)).epsilon(1e-6));
}

TEST_CASE("mle: saturated grouped 2x2 closed form") {
    const auto g = grouped_2x2();
    const auto fit = fit_logistic_mle(g.x, g.y, {"(Intercept)", "x"});
    CHECK(std::abs(fit.coefficients[0].estimate - std::log(1.0 / 3.0)) <= 1e-6);
    CHECK(std::abs(fit.coefficients[1].estimate - std::log(3.0)) <= 1e-6);
    const auto& c = fit.coefficients[1];
    CHECK(c.odds_ratio == doctest::Approx(std::exp(c.estimate)).epsilon(1e-14));
    CHECK(c.or_lower == doctest::Approx(std::exp(c.lower)).epsilon(1e-14));
    CHECK(c.or_upper == doctest::Approx(std::exp(c.upper)).epsilon(1e-14));
    // Wald sd of a log odds ratio: sqrt(1/10 + 1/30 + 1/20 + 1/20)
    CHECK(c.sd == doctest::Approx(std::sqrt(1.0 / 10 + 1.0 / 30 + 1.0 / 20 + 1.0 / 20)).epsilon(1e-6));
    CHECK(c.upper - c.estimate == doctest::Approx(1.959963984540054 * c.sd).epsilon(1e-9));
    CHECK(fit.deviance_at_plugin == doctest::Approx(-2.0 * fit.log_likelihood).epsilon(1e-12));
}

TEST_CASE("mle: separation is reported with partial state") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(20, 2);
    std::vector<int> y(20);
    for (int i = 0; i < 20; ++i) {
        x(i, 1) = i % 2;
        y[i] = i % 2;
    }
    try {
        fit_logistic_mle(x, y, {"(Intercept)", "x"});
        FAIL("expected separation");
    } catch (const SeparationError& e) {
        CHECK(e.beta().size() == 2);
        CHECK(e.iteration() >= 1);
    }
    CHECK_THROWS_AS(fit_logistic_mle(x, y, {"(Intercept)", "x"}), FitError);
}

TEST_CASE("mle: score vanishes and information matches finite differences") {
    Eigen::VectorXd beta(4);
    beta << -0.5, 0.8, -0.4, 0.3;
    const auto g = simulated(400, beta, 17);
    const auto fit = fit_logistic_mle(g.x, g.y, labels_for(4));
    Eigen::VectorXd hat(4);
    for (int j = 0; j < 4; ++j) hat(j) = fit.coefficients[j].estimate;
    CHECK(logistic_score(g.x, g.y, hat).cwiseAbs().maxCoeff() <= 1e-6);

    Rng rng(5);
    Eigen::VectorXd point(4);
    for (int j = 0; j < 4; ++j) point(j) = hat(j) + 0.3 * rng.normal();
    const Eigen::MatrixXd info = logistic_information(g.x, point);
    const Eigen::VectorXd score = logistic_score(g.x, g.y, point);
    const double h = 1e-5;
    for (int j = 0; j < 4; ++j) {
        Eigen::VectorXd up = point, down = point;
        up(j) += h;
        down(j) -= h;
        // The score is the gradient of the log-likelihood.
        const double grad = (logistic_loglik(g.x, g.y, up) - logistic_loglik(g.x, g.y, down)) / (2 * h);
        CHECK(std::abs(grad - score(j)) <= 1e-4 * std::max(1.0, std::abs(score(j))));
        // The information is the negative Hessian.
        const Eigen::VectorXd col = -(logistic_score(g.x, g.y, up) - logistic_score(g.x, g.y, down)) / (2 * h);
        for (int k = 0; k < 4; ++k) CHECK(std::abs(col(k) - info(k, j)) <= 1e-4 * std::abs(info(k, j)));
    }
}

TEST_CASE("mle: log-likelihood never decreases across IRLS steps") {
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        Eigen::VectorXd beta(3);
        beta << -1.0, 1.5, -0.7;
        const auto g = simulated(150, beta, seed);
        const auto fit = fit_logistic_mle(g.x, g.y, labels_for(3));
        const auto& trace = fit.diagnostics.loglik_trace;
        REQUIRE(trace.size() >= 2);
        for (std::size_t i = 1; i < trace.size(); ++i) CHECK(trace[i] >= trace[i - 1]);
    }
}

TEST_CASE("compute_dic examples") {
    const std::vector<double> s{10.0, 12.0};
    const auto r = compute_dic(s, 10.0);
    CHECK(r.p_d == 1.0);
    CHECK(r.dic == 12.0);
    const std::vector<double> flat(5, 7.5);
    const auto f = compute_dic(flat, 7.5);
    CHECK(f.p_d == 0.0);
    CHECK(f.dic == 7.5);
    CHECK_THROWS_AS(compute_dic(std::vector<double>{}, 1.0), std::invalid_argument);
}

TEST_CASE("plain logistic p_D is close to the parameter count") {
    Eigen::VectorXd beta(5);
    beta << -0.3, 0.6, 0.4, -0.5, 0.2;
    const auto g = simulated(500, beta, 99);
    const auto fit = fit_logistic_mle(g.x, g.y, labels_for(5));
    CHECK(fit.p_d >= 2.5);
    CHECK(fit.p_d <= 7.5);
    const auto dic = compute_dic(fit.deviance_samples, fit.deviance_at_plugin);
    CHECK(fit.dic == doctest::Approx(dic.dic));
    CHECK(fit.p_d == doctest::Approx(dic.p_d));
}

TEST_CASE("CAR precision examples") {
    SUBCASE("empty graph") {
        const auto q = build_car_precision(Graph(4), 2.0, 1.0);
        for (std::size_t i = 0; i < 4; ++i)
            for (std::size_t j = 0; j < 4; ++j) CHECK(q(i, j) == (i == j ? 2.0 : 0.0));
    }
    SUBCASE("path of three") {
        const std::vector<std::pair<std::size_t, std::size_t>> e{{0, 1}, {1, 2}};
        const auto q = build_car_precision(Graph::from_edges(3, e), 1.0, 0.5);
        const double want[3][3] = {{1.5, -1, 0}, {-1, 2.5, -1}, {0, -1, 1.5}};
        for (std::size_t i = 0; i < 3; ++i)
            for (std::size_t j = 0; j < 3; ++j) CHECK(q(i, j) == want[i][j]);
    }
    SUBCASE("row sums equal d on random graphs") {
        Rng rng(3);
        for (int trial = 0; trial < 20; ++trial) {
            const auto g = gen_network(30, 3.0, rng);
            const double tau = 0.1 + rng.uniform01() * 5, d = 0.05 + rng.uniform01() * 3;
            const auto q = build_car_precision(g, tau, d);
            for (std::size_t i = 0; i < 30; ++i) {
                double s = 0.0;
                for (std::size_t j = 0; j < 30; ++j) s += q(i, j);
                CHECK(s / tau == doctest::Approx(d).epsilon(1e-12));
            }
            CHECK_NOTHROW(cholesky(q));
        }
    }
    CHECK_THROWS_AS(build_car_precision(Graph(2), 0.0, 1.0), std::invalid_argument);
}

TEST_CASE("CAR draws reproduce the conditional mean and variance") {
    // 6-node graph: a triangle with a tail and a pendant.
    const std::vector<std::pair<std::size_t, std::size_t>> e{{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {1, 5}};
    const auto g = Graph::from_edges(6, e);
    const double tau = 1.0, d = 0.5;
    Rng rng(2718);
    constexpr int draws = 100000;
    std::vector<double> sum_r(6, 0.0), sum_r2(6, 0.0), sum_rs(6, 0.0), sum_s2(6, 0.0);
    for (int k = 0; k < draws; ++k) {
        const auto w = sample_car_field(g, tau, d, rng, GmrfMethod::cholesky);
        for (std::size_t i = 0; i < 6; ++i) {
            double s = 0.0;
            for (std::size_t j : g.neighbors(i)) s += w(j);
            const double r = w(i) - s / (d + g.degree(i));
            sum_r[i] += r;
            sum_r2[i] += r * r;
            sum_rs[i] += r * s;
            sum_s2[i] += s * s;
        }
    }
    for (std::size_t i = 0; i < 6; ++i) {
        const double cond_var = 1.0 / ((g.degree(i) + d) * tau);
        const double mean_r = sum_r[i] / draws;
        const double var_r = sum_r2[i] / draws - mean_r * mean_r;
        INFO("node " << i);
        CHECK(std::abs(mean_r) <= 4.0 * std::sqrt(cond_var / draws));
        CHECK(std::abs(var_r - cond_var) <= 4.0 * cond_var * std::sqrt(2.0 / draws));
        // Residual uncorrelated with the neighbour sum: the slope of ω_i on S_i is 1/(d+n_i).
        const double cov = sum_rs[i] / draws;
        CHECK(std::abs(cov) <= 4.0 * std::sqrt(cond_var * sum_s2[i] / draws / draws));
    }
}

TEST_CASE("netlogreg degenerates to the plain model without a network") {
    Eigen::VectorXd beta(3);
    beta << -0.4, 0.9, -0.6;
    const auto g = simulated(200, beta, 2);
    const auto labels = labels_for(3);
    const auto mle = fit_logistic_mle(g.x, g.y, labels);
    CarSpec spec;
    spec.graph = Graph(200);
    spec.fixed_d = 1e4;
    spec.tau_shape = 1e4;
    spec.tau_rate = 1.0;
    McmcOptions mc;
    mc.iterations = 6000;
    mc.burnin = 1500;
    mc.seed = 4;
    const auto fit = fit_netlogreg_mcmc(g.x, g.y, labels, spec, mc);
    for (int j = 0; j < 3; ++j) {
        INFO("coefficient " << j);
        CHECK(std::abs(fit.coefficients[j].estimate - mle.coefficients[j].estimate) <= 2.0 * fit.coefficients[j].sd);
    }
    CHECK(fit.d->mean == 1e4);
    for (const auto& l : fit.latent) CHECK(std::abs(l.mean) < 0.05);
}

TEST_CASE("netlogreg is deterministic and thread-count independent") {
    Rng rng(6);
    const auto graph = gen_network(80, 3.0, rng);
    const Eigen::MatrixXd x = gen_covariates(80, 1, rng);
    Eigen::VectorXd beta(2);
    beta << -0.2, 1.0;
    const auto y = gen_trait_car(graph, x, beta, 1.0, 1.0, rng).trait;
    CarSpec spec;
    spec.graph = graph;
    McmcOptions mc;
    mc.iterations = 1500;
    mc.burnin = 500;
    mc.chains = 2;
    mc.seed = 77;
    const auto labels = labels_for(2);
    const auto a = fit_netlogreg_mcmc(x, y, labels, spec, mc);
    const auto b = fit_netlogreg_mcmc(x, y, labels, spec, mc);
    mc.threads = 2;
    const auto c = fit_netlogreg_mcmc(x, y, labels, spec, mc);
    CHECK(a.beta_draws == b.beta_draws);
    CHECK(a.beta_draws == c.beta_draws);
    CHECK(a.deviance_samples == c.deviance_samples);
    CHECK(a.dic == c.dic);
    CHECK(a.beta_draws.rows() == 2000);

    CHECK(a.p_d == doctest::Approx(compute_dic(a.deviance_samples, a.deviance_at_plugin).p_d));
    CHECK(a.dic == doctest::Approx(a.deviance_at_plugin + 2.0 * a.p_d));
    for (const auto& coef : a.coefficients) {
        CHECK(coef.or_lower == doctest::Approx(std::exp(coef.lower)));
        CHECK(coef.or_upper == doctest::Approx(std::exp(coef.upper)));
        CHECK(coef.lower <= coef.estimate);
        CHECK(coef.estimate <= coef.upper);
    }
    CHECK(a.latent.size() == 80);
    CHECK(a.diagnostics.beta_acceptance.size() == 2);

    mc.seed = 78;
    const auto other = fit_netlogreg_mcmc(x, y, labels, spec, mc);
    CHECK(other.beta_draws != a.beta_draws);
}

TEST_CASE("netlogreg input errors") {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(5, 1);
    CarSpec spec;
    spec.graph = Graph(5);
    const std::vector<int> constant(5, 1);
    CHECK_THROWS_AS(fit_netlogreg_mcmc(x, constant, {"(Intercept)"}, spec), FitError);
    const std::vector<int> y{0, 1, 0, 1, 1};
    CarSpec wrong;
    wrong.graph = Graph(4);
    CHECK_THROWS_AS(fit_netlogreg_mcmc(x, y, {"(Intercept)"}, wrong), FitError);
    McmcOptions mc;
    mc.iterations = 100;
    mc.burnin = 100;
    CHECK_THROWS_AS(fit_netlogreg_mcmc(x, y, {"(Intercept)"}, spec, mc), std::invalid_argument);
    CarSpec bad;
    bad.graph = Graph(5);
    bad.tau_rate = 0.0;
    CHECK_THROWS_AS(bad.validate(), std::invalid_argument);
}

TEST_CASE("sampler leaves the joint prior invariant") {
    // Draw (β, τ, d, ω, y) from the generative model, start the sampler at the
    // truth and run a few sweeps: the marginal law of τ must stay the prior.
    const std::vector<std::pair<std::size_t, std::size_t>> e{{0, 1}, {1, 2}, {2, 3}, {3, 4}, {4, 0},
                                                             {5, 6}, {6, 7}, {7, 8}, {8, 9}, {2, 7}};
    CarSpec spec;
    spec.graph = Graph::from_edges(10, e);
    spec.tau_shape = 4.0;
    spec.tau_rate = 2.0;
    spec.log_d_mean = 0.0;
    spec.log_d_sd = 0.5;
    spec.beta_prior_sd = 1.0;

    Rng rng(1234);
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(10, 2);
    for (int i = 0; i < 10; ++i) x(i, 1) = rng.normal();

    constexpr int reps = 4000;
    double s1 = 0.0, s2 = 0.0, d1 = 0.0;
    for (int r = 0; r < reps; ++r) {
        CarState truth;
        truth.tau = rng.gamma(spec.tau_shape, spec.tau_rate);
        truth.d = std::exp(spec.log_d_mean + spec.log_d_sd * rng.normal());
        truth.beta = Eigen::VectorXd(2);
        for (int j = 0; j < 2; ++j) truth.beta(j) = spec.beta_prior_sd * rng.normal();
        const auto draw = gen_trait_car(spec.graph, x, truth.beta, truth.tau, truth.d, rng);
        truth.omega = draw.omega;

        NetLogRegSampler sampler(x, draw.trait, spec, rng.substream(r));
        sampler.set_state(truth);
        for (int k = 0; k < 10; ++k) sampler.sweep();
        const double t = sampler.state().tau;
        s1 += t;
        s2 += t * t;
        d1 += std::log(sampler.state().d);
    }
    const double prior_mean = spec.tau_shape / spec.tau_rate;
    const double prior_var = spec.tau_shape / (spec.tau_rate * spec.tau_rate);
    const double prior_m2 = prior_var + prior_mean * prior_mean;
    // Var(τ²) for a gamma: E τ⁴ − (E τ²)², E τ⁴ = a(a+1)(a+2)(a+3)/b⁴.
    const double a = spec.tau_shape, b = spec.tau_rate;
    const double m4 = a * (a + 1) * (a + 2) * (a + 3) / std::pow(b, 4);
    CHECK(std::abs(s1 / reps - prior_mean) <= 4.0 * std::sqrt(prior_var / reps));
    CHECK(std::abs(s2 / reps - prior_m2) <= 4.0 * std::sqrt((m4 - prior_m2 * prior_m2) / reps));
    CHECK(std::abs(d1 / reps - spec.log_d_mean) <= 4.0 * spec.log_d_sd / std::sqrt(double(reps)));
}

TEST_CASE("effective sample size") {
    Rng rng(8);
    std::vector<double> iid(5000), ar(5000);
    double prev = 0.0;
    for (std::size_t i = 0; i < iid.size(); ++i) {
        iid[i] = rng.normal();
        prev = 0.9 * prev + rng.normal();
        ar[i] = prev;
    }
    CHECK(effective_sample_size(iid) > 3500);
    // AR(1) with φ = 0.9: n (1 − φ) / (1 + φ) ≈ 263
    const double ess = effective_sample_size(ar);
    CHECK(ess > 130);
    CHECK(ess < 450);
}
