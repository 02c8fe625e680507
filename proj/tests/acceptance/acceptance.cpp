// Acceptance suite: one PASS/FAIL line per criterion. Pass criterion numbers
// as arguments to run a subset.

#include "fixtures.hpp"
#include "rdsnet/dependence.hpp"
#include "rdsnet/estimators.hpp"
#include "rdsnet/network.hpp"
#include "rdsnet/regression.hpp"
#include "rdsnet/simulator.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <functional>
#include <iostream>
#include <set>
#include <sstream>

using namespace rdsnet;

namespace {

struct Outcome {
    bool pass;
    std::string detail;
};

std::string fmt(const char* format, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, format, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------------------

Outcome hiv_dependence() {
    const auto ds = fixtures::build_forest(fixtures::hiv_shape());
    const auto r = test_network_dependence(ds, "outcome");
    const bool ok = std::abs(r.statistic - 17.48) <= 0.05 && r.p_value < 1e-4;
    return {ok, fmt("Yates chi2 = %.4f (target 17.48 +/- 0.05), p = %.3g (< 1e-4), %zu dyads", r.statistic, r.p_value,
                    r.dyads)};
}

Outcome syphilis_dependence() {
    const auto ds = fixtures::build_forest(fixtures::syphilis_shape());
    const auto table = dyad_table(ds, "outcome");
    const auto r = pearson_chi_square(table, true);
    const bool counts_ok = table.counts == std::vector<std::vector<long long>>{{481, 49}, {70, 19}};
    const bool ok = counts_ok && std::abs(r.p_value - 0.0014) <= 0.0003;
    return {ok, fmt("Yates chi2 = %.4f, p = %.5f (target 0.0014 +/- 0.0003)", r.statistic, r.p_value)};
}

Outcome naive_prevalence_rows() {
    const auto s = naive_prevalence(76, 658, 0.95);
    const auto h = naive_prevalence(49, 621, 0.95);
    const bool ok = std::abs(s.theta_hat - 0.1155) <= 1e-4 && std::abs(s.ci_low - 0.0911) <= 1e-4 &&
                    std::abs(s.ci_high - 0.1399) <= 1e-4 && std::abs(h.theta_hat - 0.0789) <= 2e-4 &&
                    std::abs(h.ci_low - 0.0577) <= 2e-4 && std::abs(h.ci_high - 0.1001) <= 2e-4;
    return {ok, fmt("76/658 -> %.4f (%.4f; %.4f); 49/621 -> %.4f (%.4f; %.4f)", s.theta_hat, s.ci_low, s.ci_high,
                    h.theta_hat, h.ci_low, h.ci_high)};
}

Outcome rds2_degeneracy() {
    Rng rng(20261004);
    double worst_const = 0.0, worst_scale = 0.0;
    std::size_t exact_failures = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t n = 1 + rng.uniform_index(1000);
        const double p = rng.uniform01();
        std::vector<int> y(n);
        std::vector<double> deg(n), flat(n, 1.0 + rng.uniform_index(50)), pow2(n), arbitrary(n);
        const double c = std::exp(3.0 * rng.normal());
        const double c2 = std::ldexp(1.0, static_cast<int>(rng.uniform_index(40)) - 20);
        std::size_t positives = 0;
        for (std::size_t i = 0; i < n; ++i) {
            y[i] = rng.bernoulli(p);
            positives += y[i];
            deg[i] = 1.0 + rng.uniform_index(100);
            pow2[i] = deg[i] * c2;
            arbitrary[i] = deg[i] * c;
        }
        worst_const = std::max(worst_const, std::abs(rds2_prevalence(y, flat).theta_hat -
                                                     naive_prevalence(positives, n).theta_hat));
        const auto base = rds2_prevalence(y, deg);
        const auto s2 = rds2_prevalence(y, pow2);
        if (s2.theta_hat != base.theta_hat || s2.ci_low != base.ci_low || s2.ci_high != base.ci_high) ++exact_failures;
        const auto sc = rds2_prevalence(y, arbitrary);
        worst_scale = std::max({worst_scale, std::abs(sc.theta_hat - base.theta_hat), std::abs(sc.ci_low - base.ci_low),
                                std::abs(sc.ci_high - base.ci_high)});
    }
    const bool ok = worst_const <= 1e-12 && exact_failures == 0 && worst_scale <= 1e-13;
    return {ok, fmt("1000 instances: max |rds2 - naive| = %.2e, power-of-two rescaling mismatches = %zu, "
                    "max drift under arbitrary rescaling = %.2e",
                    worst_const, exact_failures, worst_scale)};
}

Outcome logistic_oracle() {
    Eigen::MatrixXd x = Eigen::MatrixXd::Ones(80, 2);
    std::vector<int> y(80);
    for (int i = 0; i < 80; ++i) {
        x(i, 1) = i < 40 ? 0.0 : 1.0;
        y[i] = i < 40 ? (i < 10) : (i < 60);
    }
    const auto fit = fit_logistic_mle(x, y, {"(Intercept)", "x"});
    const double e0 = std::abs(fit.coefficients[0].estimate - std::log(1.0 / 3.0));
    const double e1 = std::abs(fit.coefficients[1].estimate - std::log(3.0));

    Rng rng(20261005);
    const Eigen::MatrixXd xs = gen_covariates(500, 4, rng);
    Eigen::VectorXd beta(5);
    beta << -0.4, 0.7, -0.5, 0.6, 0.3;
    const auto ys = gen_trait_independent(xs, beta, rng).trait;
    const auto big = fit_logistic_mle(xs, ys, {"(Intercept)", "x1", "x2", "x3", "x4"});
    Eigen::VectorXd hat(5);
    for (int j = 0; j < 5; ++j) hat(j) = big.coefficients[j].estimate;
    const double score = logistic_score(xs, ys, hat).cwiseAbs().maxCoeff();

    Eigen::VectorXd point = hat;
    for (int j = 0; j < 5; ++j) point(j) += 0.25 * rng.normal();
    const Eigen::MatrixXd info = logistic_information(xs, point);
    double worst = 0.0;
    const double h = 1e-4;
    for (int j = 0; j < 5; ++j) {
        Eigen::VectorXd up = point, down = point;
        up(j) += h;
        down(j) -= h;
        // Second differences of the log-likelihood give the Hessian column.
        for (int k = 0; k < 5; ++k) {
            Eigen::VectorXd uu = up, ud = up, du = down, dd = down;
            uu(k) += h;
            ud(k) -= h;
            du(k) += h;
            dd(k) -= h;
            const double second = (logistic_loglik(xs, ys, uu) - logistic_loglik(xs, ys, ud) -
                                   logistic_loglik(xs, ys, du) + logistic_loglik(xs, ys, dd)) /
                                  (4 * h * h);
            worst = std::max(worst, std::abs(-second - info(k, j)) / std::abs(info(k, j)));
        }
    }
    const bool ok = e0 <= 1e-6 && e1 <= 1e-6 && score <= 1e-6 && worst <= 1e-4;
    return {ok, fmt("closed-form error %.1e / %.1e, score max-norm %.1e, Hessian relative error %.1e", e0, e1, score,
                    worst)};
}

Outcome car_consistency() {
    const std::vector<std::pair<std::size_t, std::size_t>> e{{0, 1}, {1, 2}, {0, 2}, {2, 3}, {3, 4}, {1, 5}};
    const auto g = Graph::from_edges(6, e);
    const double tau = 1.0, d = 0.5;
    constexpr int draws = 100000;
    Rng rng(20261006);
    std::vector<Eigen::VectorXd> samples;
    samples.reserve(draws);
    for (int k = 0; k < draws; ++k) samples.push_back(sample_car_field(g, tau, d, rng, GmrfMethod::cholesky));
    bool ok = true;
    double worst_mean = 0.0, worst_var = 0.0;
    for (std::size_t i = 0; i < 6; ++i) {
        const double shrink = 1.0 / (d + g.degree(i));
        const double cond_var = 1.0 / ((g.degree(i) + d) * tau);
        double ws = 0.0, ss = 0.0;
        for (const auto& w : samples) {
            double s = 0.0;
            for (std::size_t j : g.neighbors(i)) s += w(j);
            ws += w(i) * s;
            ss += s * s;
        }
        // Regression of ω_i on its neighbour sum: slope 1/(d + n_i), residual variance 1/((n_i + d) τ).
        const double slope = ws / ss;
        const double slope_se = std::sqrt(cond_var / ss);
        double rss = 0.0;
        for (const auto& w : samples) {
            double s = 0.0;
            for (std::size_t j : g.neighbors(i)) s += w(j);
            const double r = w(i) - slope * s;
            rss += r * r;
        }
        const double var = rss / (draws - 1);
        const double var_se = cond_var * std::sqrt(2.0 / draws);
        const double zm = std::abs(slope - shrink) / slope_se, zv = std::abs(var - cond_var) / var_se;
        worst_mean = std::max(worst_mean, zm);
        worst_var = std::max(worst_var, zv);
        ok = ok && zm <= 4.0 && zv <= 4.0;
    }
    return {ok, fmt("6 nodes, 1e5 draws: worst conditional-mean deviation %.2f se, worst conditional-variance "
                    "deviation %.2f se (limit 4)",
                    worst_mean, worst_var)};
}

// Data from the network model on the symmetrized recruitment forest of an RDS sample.
struct ModelData {
    Eigen::MatrixXd x;
    std::vector<int> y;
    Graph graph;
};

const std::vector<std::string> kLabels{"(Intercept)", "x1", "x2", "x3"};

Eigen::VectorXd recovery_beta() {
    Eigen::VectorXd b(4);
    b << -0.5, 0.8, 0.5, -0.6;
    return b;
}

ModelData model_data(Rng& rng, std::optional<double> tau, const Eigen::VectorXd& beta) {
    for (;;) {
        PopulationConfig pc;
        pc.size = 1500;
        pc.mean_degree = 6.0;
        pc.beta = beta;
        pc.tau = std::nullopt;
        const auto pop = gen_population(pc, rng);
        RdsProcessConfig rc;
        rc.seed_count = 10;
        rc.coupons = 3;
        rc.target = 300;
        const auto sample = run_rds(pop, rc, rng);
        if (sample.dataset.size() < rc.target) continue;
        ModelData out;
        out.graph = build_network(sample.dataset).undirected;
        out.x.resize(300, beta.size());
        for (std::size_t i = 0; i < 300; ++i) out.x.row(static_cast<Eigen::Index>(i)) = pop.x.row(static_cast<Eigen::Index>(sample.population_index[i]));
        out.y = tau ? gen_trait_car(out.graph, out.x, beta, *tau, 1.0, rng).trait
                    : gen_trait_independent(out.x, beta, rng).trait;
        return out;
    }
}

FitResult fit_network(const ModelData& data, std::uint64_t seed) {
    CarSpec spec;
    spec.graph = data.graph;
    McmcOptions mc;
    mc.iterations = 20000;
    mc.burnin = 5000;
    mc.seed = seed;
    return fit_netlogreg_mcmc(data.x, data.y, kLabels, spec, mc);
}

Outcome posterior_recovery() {
    const auto beta = recovery_beta();
    Rng rng(20261007);
    std::vector<int> covered(4, 0), close(4, 0);
    for (int rep = 0; rep < 30; ++rep) {
        const auto data = model_data(rng, 1.0, beta);
        const auto fit = fit_network(data, 1000 + rep);
        for (int j = 0; j < 4; ++j) {
            const auto& c = fit.coefficients[j];
            covered[j] += c.lower <= beta(j) && beta(j) <= c.upper;
            close[j] += std::abs(c.estimate - beta(j)) <= 0.5;
        }
    }
    bool ok = true;
    std::string detail = "coverage / within 0.5 of 30:";
    for (int j = 0; j < 4; ++j) {
        ok = ok && covered[j] >= 27 && close[j] >= 25;
        detail += fmt(" %s %d/%d", kLabels[j].c_str(), covered[j], close[j]);
    }
    return {ok, detail + " (need >= 27 / >= 25)"};
}

Outcome model_selection() {
    const auto beta = recovery_beta();
    Rng rng(20261008);
    int strong = 0, null_ok = 0;
    for (int rep = 0; rep < 20; ++rep) {
        const auto data = model_data(rng, 0.25, beta);
        try {
            const auto lr = fit_logistic_mle(data.x, data.y, kLabels);
            const auto net = fit_network(data, 2000 + rep);
            strong += net.dic < lr.dic;
        } catch (const FitError&) {
        }
    }
    for (int rep = 0; rep < 20; ++rep) {
        const auto data = model_data(rng, std::nullopt, beta);
        try {
            const auto lr = fit_logistic_mle(data.x, data.y, kLabels);
            const auto net = fit_network(data, 3000 + rep);
            const double delta = net.dic - lr.dic;
            null_ok += std::abs(delta) < 2.0 || delta > 0.0;
        } catch (const FitError&) {
        }
    }
    const bool ok = strong >= 15 && null_ok >= 12;
    return {ok, fmt("strong effect: NetLogReg lower DIC in %d/20 (need 15); no effect: tie or LogReg in %d/20 (need 12)",
                    strong, null_ok)};
}

Outcome coverage_claim() {
    Rng rng(20261009);
    constexpr int populations = 5, replicates = 200;
    int naive_hits = 0, boot_hits = 0, total = 0;
    double homophily = 0.0;
    for (int p = 0; p < populations; ++p) {
        PopulationConfig pc;
        pc.size = 5000;
        pc.mean_degree = 6.0;
        pc.beta = Eigen::VectorXd::Constant(1, -1.0);
        pc.tau = 0.5;
        pc.d = 1.0;
        const auto pop = gen_population(pc, rng);
        const double truth = pop.prevalence();
        double same = 0.0, pairs = 0.0, both = 0.0;
        for (std::size_t i = 0; i < pop.size(); ++i)
            for (std::size_t j : pop.graph.neighbors(i)) {
                pairs += 1.0;
                both += pop.trait[i] * pop.trait[j];
                same += pop.trait[i];
            }
        const double m = same / pairs;
        homophily += (both / pairs - m * m) / (m - m * m) / populations;
        for (int r = 0; r < replicates; ++r) {
            RdsProcessConfig rc;
            rc.seed_count = 10;
            rc.coupons = 3;
            rc.target = 500;
            const auto sample = run_rds(pop, rc, rng);
            const auto naive = naive_prevalence(sample.dataset);
            BootstrapOptions bo;
            bo.replicates = 1000;
            const auto boot = rds2_bootstrap_ci(sample.dataset, bo, Rng(rng.next_u64()));
            naive_hits += naive.ci_low <= truth && truth <= naive.ci_high;
            boot_hits += boot.ci_low <= truth && truth <= boot.ci_high;
            ++total;
        }
    }
    const double cn = double(naive_hits) / total, cb = double(boot_hits) / total;
    return {cb >= cn, fmt("%d populations x %d samples: RDS II bootstrap coverage %.3f, naive Wald coverage %.3f "
                          "(mean neighbour trait correlation %.4f)",
                          populations, replicates, cb, cn, homophily)};
}

int run_command(const std::string& args, const std::string& out) {
    const std::string cmd = std::string("\"") + RDSNET_CLI_PATH + "\" " + args + " > \"" + out + "\" 2>&1";
    const int status = std::system(cmd.c_str());
    return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism() {
    const auto dir = fixtures::scratch_dir("acceptance");
    const auto data = (dir / "det.csv").string();
    const auto hiv = (dir / "hiv.csv").string();
    fixtures::write_file(hiv, fixtures::to_csv(fixtures::build_forest(fixtures::hiv_shape())));

    std::vector<std::pair<std::string, std::vector<std::string>>> commands;
    auto sim = [&](const std::string& csv) {
        return "simulate --population 1500 --beta -0.5,0.8,0.5 --tau 0.5 --target 300 --seed 17 --format json "
               "--output \"" + csv + "\"";
    };
    commands.push_back({sim(data), {data, data + ".truth.json"}});
    commands.push_back({"check --input \"" + hiv + "\" --format json", {}});
    commands.push_back({"check --input \"" + data + "\"", {}});
    commands.push_back({"prevalence --input \"" + data + "\" --bootstrap 1000 --seed 3 --format json", {}});
    commands.push_back({"prevalence --input \"" + data + "\" --format csv", {}});
    commands.push_back({"fit --input \"" + data + "\" --covariates x1,x2 --model both --seed 11 --format json", {}});
    commands.push_back({"fit --input \"" + data + "\" --covariates x1,x2 --model both --chains 2 --threads 2 --seed 12", {}});
    commands.push_back({"export-dot --input \"" + data + "\"", {}});

    int identical = 0;
    std::string failures;
    for (std::size_t c = 0; c < commands.size(); ++c) {
        std::vector<std::string> runs[2];
        bool ran = true;
        for (int k = 0; k < 2; ++k) {
            const auto out = (dir / ("out" + std::to_string(c) + "_" + std::to_string(k))).string();
            ran = ran && run_command(commands[c].first, out) == 0;
            runs[k].push_back(fixtures::read_file(out));
            for (const auto& f : commands[c].second) runs[k].push_back(fixtures::read_file(f));
        }
        if (ran && runs[0] == runs[1] && !runs[0][0].empty())
            ++identical;
        else
            failures += " #" + std::to_string(c);
    }
    const bool ok = identical == static_cast<int>(commands.size());
    return {ok, fmt("%d/%zu invocations byte-identical across repeated runs%s", identical, commands.size(),
                    failures.empty() ? "" : (" (differs:" + failures + ")").c_str())};
}

Outcome null_calibration() {
    Rng rng(20261011);
    int rejections = 0;
    constexpr int datasets = 500;
    for (int k = 0; k < datasets; ++k) {
        PopulationConfig pc;
        pc.size = 2000;
        pc.mean_degree = 6.0;
        pc.beta = Eigen::VectorXd::Constant(1, -0.5);
        pc.tau = std::nullopt;
        const auto pop = gen_population(pc, rng);
        RdsProcessConfig rc;
        rc.seed_count = 10;
        rc.target = 400;
        const auto sample = run_rds(pop, rc, rng);
        rejections += test_network_dependence(sample.dataset, "outcome").p_value < 0.05;
    }
    const double rate = double(rejections) / datasets;
    return {std::abs(rate - 0.05) <= 0.025, fmt("rejection rate %.3f over %d independent-trait datasets (target 0.05 +/- 0.025)", rate, datasets)};
}

struct Criterion {
    int id;
    std::string name;
    double budget_seconds;
    std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
    const std::vector<Criterion> criteria{
        {1, "dependence test, HIV table", 1.0, hiv_dependence},
        {2, "dependence test, syphilis table", 1.0, syphilis_dependence},
        {3, "naive prevalence rows", 1.0, naive_prevalence_rows},
        {4, "RDS II degeneracy and scale invariance", 5.0, rds2_degeneracy},
        {5, "logistic MLE oracle", 5.0, logistic_oracle},
        {6, "CAR conditional consistency", 30.0, car_consistency},
        {7, "posterior recovery", 1200.0, posterior_recovery},
        {8, "model selection direction", 1800.0, model_selection},
        {9, "coverage of RDS II bootstrap vs naive", 1200.0, coverage_claim},
        {10, "CLI determinism", 600.0, determinism},
        {11, "null calibration of the dependence test", 300.0, null_calibration},
    };
    std::set<int> only;
    for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));

    int failed = 0;
    for (const auto& c : criteria) {
        if (!only.empty() && !only.count(c.id)) continue;
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double t = seconds_since(t0);
        const bool in_time = t <= c.budget_seconds;
        const bool pass = o.pass && in_time;
        failed += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << "  AC" << c.id << "  " << c.name << ": " << o.detail
                  << fmt(" [%.2f s, budget %.0f s%s]", t, c.budget_seconds, in_time ? "" : ", over budget") << std::endl;
    }
    return failed == 0 ? 0 : 1;
}
