#include "rdsnet/cli.hpp"

#include "rdsnet/dataset.hpp"
#include "rdsnet/dependence.hpp"
#include "rdsnet/error.hpp"
#include "rdsnet/estimators.hpp"
#include "rdsnet/network.hpp"
#include "rdsnet/regression.hpp"
#include "rdsnet/report.hpp"
#include "rdsnet/simulator.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

namespace rdsnet::cli {

namespace {

using nlohmann::json;

enum class Format { text, csv, json };

struct CommonOptions {
    std::string input;
    std::string outcome = "outcome";
    Format format = Format::text;
    std::uint64_t seed = 1;
    unsigned threads = 1;
    bool lenient = false;
    std::string rejects_path;
};

struct CheckOptions {
    bool yates = true;
    double alpha = 0.05;
};

struct PrevalenceOptions {
    std::string estimator = "both";
    double level = 0.95;
    std::size_t bootstrap = 0;
};

struct FitOptions {
    std::vector<std::string> covariates;
    std::vector<std::string> ref_levels;
    std::string model = "both";
    std::size_t iters = 20000;
    std::size_t burnin = 5000;
    std::size_t thin = 1;
    std::size_t chains = 1;
    double fix_d = 0.0;
    double level = 0.95;
};

struct SimulateOptions {
    std::size_t population = 1000;
    double mean_degree = 6.0;
    std::vector<double> beta{-1.0, 0.5};
    double tau = 1.0;
    double d = 1.0;
    bool no_network_effect = false;
    std::size_t seeds = 10;
    std::size_t coupons = 3;
    std::size_t target = 300;
    double acceptance = 1.0;
    std::string seed_rule = "uniform";
    std::string output;
    std::string truth;
};

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream in(s);
    while (std::getline(in, cur, ','))
        if (!cur.empty()) out.push_back(cur);
    return out;
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open input file '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct Loaded {
    RdsDataset dataset;
    std::size_t rejected;
};

Loaded load(const std::string& bytes, const CommonOptions& common, const std::string& outcome,
            const std::map<std::string, std::string>& refs = {}) {
    std::istringstream in(bytes);
    ParseOptions po;
    po.outcome_column = outcome;
    po.lenient = common.lenient;
    po.reference_levels = refs;
    auto parsed = parse_dataset(in, po);
    if (!common.rejects_path.empty()) {
        std::ofstream rej(common.rejects_path);
        if (!rej) throw InputError("cannot write rejects report '" + common.rejects_path + "'");
        write_rejects(parsed.rejects, rej);
    }
    return {std::move(parsed.dataset), parsed.rejects.size()};
}

json provenance(std::string_view command, const std::string& input_bytes, const CommonOptions& common, json options) {
    json p = {{"command", command},
              {"version", kVersion},
              {"seed", common.seed},
              {"rng", Rng::algorithm},
              {"options", std::move(options)}};
    if (!input_bytes.empty()) p["input_digest"] = "fnv1a64:" + fnv1a64_hex(input_bytes);
    return p;
}

json report_header(std::string_view command) { return {{"schema", kReportSchema}, {"command", command}}; }

std::string ci_text(double theta, double lo, double hi) {
    return fixed(theta, 4) + " (" + fixed(lo, 4) + "; " + fixed(hi, 4) + ")";
}

std::string sci(double v) {
    std::ostringstream s;
    s << std::setprecision(4) << v;
    return s.str();
}

// ---------------------------------------------------------------------------

int cmd_check(const CommonOptions& common, const CheckOptions& opt, std::ostream& out) {
    const std::string bytes = read_file(common.input);
    json report = report_header("check");
    report["provenance"] = provenance("check", bytes, common,
                                      {{"outcome", common.outcome}, {"yates", opt.yates}, {"alpha", opt.alpha},
                                       {"lenient", common.lenient}});
    json tests = json::array();
    std::ostringstream text, csv;
    csv << "outcome,statistic,dof,p_value,yates,dyads,dropped_dyads,small_expected,verdict\n";
    for (const auto& outcome : split_list(common.outcome)) {
        auto loaded = load(bytes, common, outcome);
        const auto table = dyad_table(loaded.dataset, outcome);
        const auto result = test_network_dependence(loaded.dataset, outcome, opt.yates);
        const bool reject = result.p_value < opt.alpha;
        const std::string verdict = reject ? "evidence of network dependence" : "no evidence of network dependence";

        tests.push_back({{"outcome", outcome},
                         {"dataset", dataset_summary(loaded.dataset, loaded.rejected)},
                         {"table", to_json(table)},
                         {"test", to_json(result)},
                         {"alpha", opt.alpha},
                         {"reject_independence", reject},
                         {"verdict", verdict}});

        text << "Network dependence test: " << outcome << "\n";
        text << "participants: " << loaded.dataset.size() << ", seeds: " << loaded.dataset.seed_count()
             << ", dyads used: " << result.dyads << " (dropped " << result.dropped_dyads << ")\n";
        text << std::setw(14) << "participant" << " | recruiter\n" << std::setw(14) << "";
        for (const auto& c : table.col_labels) text << std::setw(9) << c;
        text << "\n";
        for (std::size_t i = 0; i < table.rows(); ++i) {
            text << std::setw(14) << table.row_labels[i];
            for (long long v : table.counts[i]) text << std::setw(9) << v;
            text << "\n";
        }
        text << "Pearson chi-square" << (result.yates_applied ? " (Yates)" : "") << ": " << fixed(result.statistic, 4)
             << ", dof " << result.dof << ", p-value " << sci(result.p_value) << "\n";
        if (result.small_expected) text << "warning: an expected count is below 5\n";
        text << "verdict: " << verdict << " (alpha = " << opt.alpha << ")\n\n";
        csv << csv_escape(outcome) << ',' << sci(result.statistic) << ',' << result.dof << ',' << sci(result.p_value)
            << ',' << (result.yates_applied ? "true" : "false") << ',' << result.dyads << ',' << result.dropped_dyads
            << ',' << (result.small_expected ? "true" : "false") << ',' << verdict << "\n";
    }
    report["dependence"] = std::move(tests);

    if (common.format == Format::json)
        out << report.dump(2) << "\n";
    else if (common.format == Format::csv)
        out << csv.str();
    else
        out << text.str();
    return success;
}

int cmd_prevalence(const CommonOptions& common, const PrevalenceOptions& opt, std::ostream& out) {
    if (opt.estimator != "naive" && opt.estimator != "rds2" && opt.estimator != "both")
        throw InputError("--estimator must be naive, rds2 or both");
    if (!(opt.level > 0.0 && opt.level < 1.0)) throw InputError("--level must lie in (0, 1)");
    if (opt.bootstrap != 0 && opt.bootstrap < 100) throw InputError("--bootstrap needs at least 100 replicates");
    const bool naive = opt.estimator != "rds2";
    const bool rds2 = opt.estimator != "naive";

    const std::string bytes = read_file(common.input);
    json report = report_header("prevalence");
    report["provenance"] = provenance("prevalence", bytes, common,
                                      {{"outcome", common.outcome}, {"estimator", opt.estimator}, {"level", opt.level},
                                       {"bootstrap", opt.bootstrap}, {"lenient", common.lenient}});
    json rows = json::array();
    std::ostringstream text, csv;
    text << "Estimated prevalence, " << fixed(100.0 * opt.level, 0) << "% confidence interval\n";
    text << std::left << std::setw(16) << "outcome" << std::right << std::setw(7) << "n" << std::setw(7) << "n_A";
    if (naive) text << "   " << std::left << std::setw(26) << "Naive";
    if (rds2) text << "   " << std::left << std::setw(26) << (opt.bootstrap ? "RDS II (bootstrap)" : "RDS II");
    text << std::right << "\n";
    csv << "outcome,estimator,interval,n_used,n_positive,theta_hat,variance,ci_low,ci_high,level\n";

    for (const auto& outcome : split_list(common.outcome)) {
        auto loaded = load(bytes, common, outcome);
        const auto& ds = loaded.dataset;
        json row = {{"outcome", outcome}, {"dataset", dataset_summary(ds, loaded.rejected)}};
        std::vector<PrevalenceEstimate> estimates;
        if (naive) estimates.push_back(naive_prevalence(ds, opt.level));
        if (rds2) {
            if (opt.bootstrap > 0) {
                BootstrapOptions bo;
                bo.level = opt.level;
                bo.replicates = opt.bootstrap;
                bo.threads = common.threads;
                estimates.push_back(rds2_bootstrap_ci(ds, bo, Rng(common.seed)));
            } else {
                estimates.push_back(rds2_prevalence(ds, opt.level));
            }
        }
        json ests = json::array();
        text << std::left << std::setw(16) << outcome << std::right << std::setw(7) << estimates.front().n_used
             << std::setw(7) << estimates.front().n_positive;
        for (const auto& e : estimates) {
            ests.push_back(to_json(e));
            text << "   " << std::left << std::setw(26) << ci_text(e.theta_hat, e.ci_low, e.ci_high) << std::right;
            csv << csv_escape(outcome) << ',' << to_string(e.estimator) << ','
                << (e.replicates ? "bootstrap" : "wald") << ',' << e.n_used << ',' << e.n_positive << ','
                << sci(e.theta_hat) << ',' << sci(e.variance) << ',' << sci(e.ci_low) << ',' << sci(e.ci_high) << ','
                << e.level << "\n";
        }
        text << "\n";
        row["estimates"] = std::move(ests);
        rows.push_back(std::move(row));
    }
    report["prevalence"] = std::move(rows);

    if (common.format == Format::json)
        out << report.dump(2) << "\n";
    else if (common.format == Format::csv)
        out << csv.str();
    else
        out << text.str();
    return success;
}

std::string coefficient_cell(const CoefficientSummary& c) {
    return fixed(c.estimate, 4) + " (" + fixed(c.lower, 4) + ", " + fixed(c.upper, 4) + ")";
}

int cmd_fit(const CommonOptions& common, const FitOptions& opt, std::ostream& out) {
    if (opt.model != "logreg" && opt.model != "netlogreg" && opt.model != "both")
        throw InputError("--model must be logreg, netlogreg or both");
    std::map<std::string, std::string> refs;
    for (const auto& item : opt.ref_levels) {
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq == 0 || eq + 1 == item.size())
            throw InputError("--ref-levels entries must look like name=level");
        refs[item.substr(0, eq)] = item.substr(eq + 1);
    }
    const auto outcomes = split_list(common.outcome);
    if (outcomes.size() != 1) throw InputError("fit takes exactly one outcome");
    const std::string& outcome = outcomes.front();

    const std::string bytes = read_file(common.input);
    auto loaded = load(bytes, common, outcome, refs);
    const auto& ds = loaded.dataset;
    const DesignMatrix design = build_design(ds, opt.covariates, refs);
    const std::vector<int> y = design_response(ds, design);
    std::vector<std::string> ids;
    for (std::size_t r : design.rows) ids.push_back(ds[r].id);

    json options = {{"outcome", outcome},     {"covariates", opt.covariates}, {"ref_levels", refs},
                    {"model", opt.model},     {"iters", opt.iters},           {"burnin", opt.burnin},
                    {"thin", opt.thin},       {"chains", opt.chains},         {"level", opt.level},
                    {"lenient", common.lenient}};
    if (opt.fix_d > 0.0) options["fix_d"] = opt.fix_d;
    json report = report_header("fit");
    report["provenance"] = provenance("fit", bytes, common, options);
    json summary = dataset_summary(ds, loaded.rejected);
    summary["design_rows"] = design.n();
    summary["dropped_rows"] = design.dropped_rows;
    report["dataset"] = summary;
    report["design"] = {{"terms", design.labels}, {"reference_levels", design.reference_levels}};

    std::optional<FitResult> logreg, netlogreg;
    if (opt.model != "netlogreg") {
        MleOptions mo;
        mo.level = opt.level;
        mo.seed = common.seed;
        logreg = fit_logistic_mle(design, y, mo);
    }
    if (opt.model != "logreg") {
        CarSpec spec;
        spec.graph = build_network(ds).undirected.induced(design.rows);
        if (opt.fix_d > 0.0) spec.fixed_d = opt.fix_d;
        McmcOptions mc;
        mc.iterations = opt.iters;
        mc.burnin = opt.burnin;
        mc.thin = opt.thin;
        mc.chains = opt.chains;
        mc.seed = common.seed;
        mc.threads = common.threads;
        mc.level = opt.level;
        if (mc.iterations <= mc.burnin) throw InputError("--iters must exceed --burnin");
        if (mc.thin == 0 || mc.chains == 0) throw InputError("--thin and --chains must be positive");
        netlogreg = fit_netlogreg_mcmc(design, y, spec, mc);
    }

    json models = json::array();
    if (logreg) models.push_back(to_json(*logreg));
    if (netlogreg) models.push_back(to_json(*netlogreg, ids));
    report["models"] = std::move(models);
    std::optional<ModelComparison> comparison;
    if (logreg && netlogreg) {
        comparison = compare_models(logreg->dic, netlogreg->dic);
        report["comparison"] = to_json(*comparison);
    }

    if (common.format == Format::json) {
        out << report.dump(2) << "\n";
        return success;
    }
    if (common.format == Format::csv) {
        out << "model,term,estimate,sd,lower,upper,odds_ratio,or_lower,or_upper\n";
        for (const auto* fit : {logreg ? &*logreg : nullptr, netlogreg ? &*netlogreg : nullptr}) {
            if (!fit) continue;
            for (const auto& c : fit->coefficients)
                out << to_string(fit->model) << ',' << csv_escape(c.label) << ',' << sci(c.estimate) << ','
                    << sci(c.sd) << ',' << sci(c.lower) << ',' << sci(c.upper) << ',' << sci(c.odds_ratio) << ','
                    << sci(c.or_lower) << ',' << sci(c.or_upper) << "\n";
            out << to_string(fit->model) << ",DIC," << sci(fit->dic) << ",,,,,,\n";
            out << to_string(fit->model) << ",p_D," << sci(fit->p_d) << ",,,,,,\n";
        }
        return success;
    }

    const int pct = static_cast<int>(std::lround(100.0 * opt.level));
    out << "Binary regression for '" << outcome << "' (n = " << design.n() << ", dropped " << design.dropped_rows
        << ")\n";
    out << std::left << std::setw(28) << "term";
    if (logreg) out << std::setw(34) << ("LogReg (" + std::to_string(pct) + "% CI)");
    if (netlogreg) out << std::setw(34) << ("NetLogReg (" + std::to_string(pct) + "% CrI)");
    out << "\n";
    for (std::size_t j = 0; j < design.p(); ++j) {
        out << std::setw(28) << design.labels[j];
        if (logreg) out << std::setw(34) << coefficient_cell(logreg->coefficients[j]);
        if (netlogreg) out << std::setw(34) << coefficient_cell(netlogreg->coefficients[j]);
        out << "\n";
    }
    out << std::setw(28) << "odds ratios:" << "\n";
    for (std::size_t j = 1; j < design.p(); ++j) {
        out << std::setw(28) << design.labels[j];
        for (const auto* fit : {logreg ? &*logreg : nullptr, netlogreg ? &*netlogreg : nullptr}) {
            if (!fit) continue;
            const auto& c = fit->coefficients[j];
            out << std::setw(34) << (fixed(c.odds_ratio, 2) + " (" + fixed(c.or_lower, 2) + ", " + fixed(c.or_upper, 2) + ")");
        }
        out << "\n";
    }
    out << std::setw(28) << "DIC";
    if (logreg) out << std::setw(34) << fixed(logreg->dic, 2);
    if (netlogreg) out << std::setw(34) << fixed(netlogreg->dic, 2);
    out << "\n" << std::setw(28) << "p_D";
    if (logreg) out << std::setw(34) << fixed(logreg->p_d, 2);
    if (netlogreg) out << std::setw(34) << fixed(netlogreg->p_d, 2);
    out << "\n" << std::right;
    if (netlogreg) {
        out << "tau: " << fixed(netlogreg->tau->mean, 4) << " (" << fixed(netlogreg->tau->lower, 4) << ", "
            << fixed(netlogreg->tau->upper, 4) << ")  d: " << fixed(netlogreg->d->mean, 4) << " ("
            << fixed(netlogreg->d->lower, 4) << ", " << fixed(netlogreg->d->upper, 4) << ")\n";
    }
    if (comparison) {
        out << "preferred model: " << comparison->preferred << " (DIC difference netlogreg - logreg = "
            << fixed(comparison->delta_dic, 2) << ")\n";
    }
    return success;
}

int cmd_simulate(const CommonOptions& common, const SimulateOptions& opt, std::ostream& out) {
    if (opt.output.empty()) throw InputError("--output is required");
    if (opt.beta.empty()) throw InputError("--beta needs at least an intercept");
    if (!opt.no_network_effect && (!(opt.tau > 0.0) || !(opt.d > 0.0)))
        throw InputError("--tau and --d must be positive");
    if (opt.seed_rule != "uniform" && opt.seed_rule != "degree")
        throw InputError("--seed-rule must be uniform or degree");

    PopulationConfig pc;
    pc.size = opt.population;
    pc.mean_degree = opt.mean_degree;
    pc.beta = Eigen::Map<const Eigen::VectorXd>(opt.beta.data(), static_cast<Eigen::Index>(opt.beta.size()));
    pc.tau = opt.no_network_effect ? std::nullopt : std::optional<double>(opt.tau);
    pc.d = opt.d;

    RdsProcessConfig rc;
    rc.seed_count = opt.seeds;
    rc.coupons = opt.coupons;
    rc.target = std::min(opt.target, opt.population);
    rc.acceptance = opt.acceptance;
    rc.seed_rule = opt.seed_rule == "degree" ? SeedRule::degree_proportional : SeedRule::uniform;

    Rng rng(common.seed);
    SyntheticPopulation pop;
    try {
        pop = gen_population(pc, rng);
    } catch (const std::invalid_argument& e) {
        throw InputError(e.what());
    }
    const auto sample = run_rds(pop, rc, rng, common.outcome);

    {
        std::ofstream csv(opt.output);
        if (!csv) throw InputError("cannot write '" + opt.output + "'");
        write_csv(sample.dataset, csv);
        if (!csv) throw InputError("failed writing '" + opt.output + "'");
    }
    const std::string truth_path = opt.truth.empty() ? opt.output + ".truth.json" : opt.truth;
    std::size_t sample_positive = 0;
    for (const auto& r : sample.dataset.records()) sample_positive += static_cast<std::size_t>(r.outcome.value_or(0));
    json truth = {{"schema", "rdsnet.truth/1"},
                  {"seed", common.seed},
                  {"population_size", pop.size()},
                  {"mean_degree", opt.mean_degree},
                  {"realized_mean_degree", 2.0 * static_cast<double>(pop.graph.edge_count()) / static_cast<double>(pop.size())},
                  {"beta", opt.beta},
                  {"terms", [&] {
                       std::vector<std::string> t{"(Intercept)"};
                       for (const auto& n : pop.covariate_names) t.push_back(n);
                       return t;
                   }()},
                  {"network_effect", !opt.no_network_effect},
                  {"population_prevalence", pop.prevalence()},
                  {"sample_size", sample.dataset.size()},
                  {"sample_positive", sample_positive},
                  {"extinct", sample.extinct},
                  {"rds", {{"seeds", opt.seeds}, {"coupons", opt.coupons}, {"target", rc.target},
                           {"acceptance", opt.acceptance}, {"seed_rule", opt.seed_rule}}}};
    if (!opt.no_network_effect) {
        truth["tau"] = opt.tau;
        truth["d"] = opt.d;
    }
    {
        std::ofstream tf(truth_path);
        if (!tf) throw InputError("cannot write '" + truth_path + "'");
        tf << truth.dump(2) << "\n";
    }

    if (common.format == Format::json) {
        json report = report_header("simulate");
        report["provenance"] = provenance("simulate", "", common, {{"output", opt.output}, {"truth", truth_path}});
        report["truth"] = truth;
        out << report.dump(2) << "\n";
    } else {
        out << "wrote " << sample.dataset.size() << " participants (" << sample.dataset.seed_count() << " seeds"
            << (sample.extinct ? ", recruitment died out before the target" : "") << ") to " << opt.output << "\n";
        out << "truth: " << truth_path << "\n";
    }
    return success;
}

int cmd_export_dot(const CommonOptions& common, std::ostream& out) {
    const std::string bytes = read_file(common.input);
    const auto outcomes = split_list(common.outcome);
    auto loaded = load(bytes, common, outcomes.empty() ? std::string("outcome") : outcomes.front());
    out << to_dot(loaded.dataset);
    return success;
}

void add_common(CLI::App* sub, CommonOptions& common, bool needs_input) {
    auto* input = sub->add_option("--input,-i", common.input, "Input CSV file");
    if (needs_input) input->required();
    sub->add_option("--outcome", common.outcome, "Outcome column(s), comma separated")->capture_default_str();
    sub->add_option("--format", common.format, "Output format")
        ->transform(CLI::CheckedTransformer(
            std::map<std::string, Format>{{"text", Format::text}, {"csv", Format::csv}, {"json", Format::json}}))
        ->capture_default_str();
    sub->add_option("--seed", common.seed, "Random seed")->capture_default_str();
    sub->add_option("--threads", common.threads, "Worker threads")->check(CLI::PositiveNumber)->capture_default_str();
    sub->add_flag("--lenient", common.lenient, "Collect malformed rows instead of failing");
    sub->add_option("--rejects", common.rejects_path, "Write rejected rows (line_number,reason) to this file");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    CLI::App app{"Analysis of binary outcomes from respondent-driven sampling studies", "rdsnet"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kVersion));

    CommonOptions common;
    CheckOptions check;
    PrevalenceOptions prevalence;
    FitOptions fit;
    SimulateOptions simulate;

    auto* check_cmd = app.add_subcommand("check", "Test recruiter-recruit dependence of an outcome");
    add_common(check_cmd, common, true);
    check_cmd->add_flag("--yates,!--no-yates", check.yates, "Yates continuity correction on 2x2 tables")
        ->capture_default_str();
    check_cmd->add_option("--alpha", check.alpha, "Significance level")->check(CLI::Range(0.0, 1.0))->capture_default_str();

    auto* prev_cmd = app.add_subcommand("prevalence", "Naive and RDS II prevalence estimates");
    add_common(prev_cmd, common, true);
    prev_cmd->add_option("--estimator", prevalence.estimator, "naive, rds2 or both")->capture_default_str();
    prev_cmd->add_option("--level", prevalence.level, "Confidence level")->capture_default_str();
    prev_cmd->add_option("--bootstrap", prevalence.bootstrap, "Chain-bootstrap replicates for RDS II (0: delta method)")
        ->capture_default_str();

    auto* fit_cmd = app.add_subcommand("fit", "Logistic regression with and without a CAR network effect");
    add_common(fit_cmd, common, true);
    fit_cmd->add_option("--covariates", fit.covariates, "Covariate columns")->delimiter(',');
    fit_cmd->add_option("--ref-levels", fit.ref_levels, "Reference levels, name=level")->delimiter(',');
    fit_cmd->add_option("--model", fit.model, "logreg, netlogreg or both")->capture_default_str();
    fit_cmd->add_option("--iters", fit.iters, "MCMC sweeps per chain, burn-in included")->capture_default_str();
    fit_cmd->add_option("--burnin", fit.burnin, "MCMC burn-in sweeps")->capture_default_str();
    fit_cmd->add_option("--thin", fit.thin, "Keep every k-th sweep")->capture_default_str();
    fit_cmd->add_option("--chains", fit.chains, "Independent chains")->capture_default_str();
    fit_cmd->add_option("--fix-d", fit.fix_d, "Fix the CAR diagonal parameter d instead of sampling it")
        ->check(CLI::PositiveNumber);
    fit_cmd->add_option("--level", fit.level, "Interval level")->check(CLI::Range(0.5, 0.999))->capture_default_str();

    auto* sim_cmd = app.add_subcommand("simulate", "Simulate an RDS sample from a synthetic population");
    add_common(sim_cmd, common, false);
    sim_cmd->add_option("--population", simulate.population, "Population size")->capture_default_str();
    sim_cmd->add_option("--mean-degree", simulate.mean_degree, "Mean degree of the population graph")->capture_default_str();
    sim_cmd->add_option("--beta", simulate.beta, "Coefficients, intercept first")->delimiter(',')->capture_default_str();
    sim_cmd->add_option("--tau", simulate.tau, "CAR precision")->capture_default_str();
    sim_cmd->add_option("--d", simulate.d, "CAR diagonal parameter")->capture_default_str();
    sim_cmd->add_flag("--no-network-effect", simulate.no_network_effect, "Generate the trait with omega = 0");
    sim_cmd->add_option("--seeds", simulate.seeds, "Number of seeds")->capture_default_str();
    sim_cmd->add_option("--coupons", simulate.coupons, "Coupons per participant")->capture_default_str();
    sim_cmd->add_option("--target", simulate.target, "Target sample size")->capture_default_str();
    sim_cmd->add_option("--acceptance", simulate.acceptance, "Coupon redemption probability")->capture_default_str();
    sim_cmd->add_option("--seed-rule", simulate.seed_rule, "uniform or degree")->capture_default_str();
    sim_cmd->add_option("--output,-o", simulate.output, "Output CSV path")->required();
    sim_cmd->add_option("--truth", simulate.truth, "Truth sidecar path (default: <output>.truth.json)");

    auto* dot_cmd = app.add_subcommand("export-dot", "Write the recruitment forest as Graphviz DOT");
    add_common(dot_cmd, common, true);

    try {
        std::vector<std::string> reversed(args.rbegin(), args.rend());
        app.parse(reversed);
    } catch (const CLI::CallForHelp&) {
        out << app.help();
        return success;
    } catch (const CLI::CallForVersion&) {
        out << kVersion << "\n";
        return success;
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            out << app.help();
            return success;
        }
        err << "error: " << e.what() << "\n";
        return input_error;
    }

    try {
        if (check_cmd->parsed()) return cmd_check(common, check, out);
        if (prev_cmd->parsed()) return cmd_prevalence(common, prevalence, out);
        if (fit_cmd->parsed()) return cmd_fit(common, fit, out);
        if (sim_cmd->parsed()) return cmd_simulate(common, simulate, out);
        if (dot_cmd->parsed()) return cmd_export_dot(common, out);
    } catch (const InputError& e) {
        err << "input error: " << e.what() << "\n";
        return input_error;
    } catch (const FitError& e) {
        err << "fit error: " << e.what() << "\n";
        return fit_error;
    } catch (const std::invalid_argument& e) {
        err << "invalid argument: " << e.what() << "\n";
        return input_error;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return internal_error;
    }
    return internal_error;
}

}  // namespace rdsnet::cli
