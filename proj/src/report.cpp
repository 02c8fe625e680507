#include "rdsnet/report.hpp"

#include <cmath>
#include <cstdio>
#include <sstream>

namespace rdsnet {

std::string fnv1a64_hex(std::string_view bytes) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : bytes) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return buf;
}

ModelComparison compare_models(double dic_logreg, double dic_netlogreg, double tie_threshold) {
    ModelComparison c;
    c.delta_dic = dic_netlogreg - dic_logreg;
    if (std::abs(c.delta_dic) < tie_threshold)
        c.preferred = "tie";
    else
        c.preferred = c.delta_dic < 0.0 ? "netlogreg" : "logreg";
    return c;
}

std::string fixed(double value, int digits) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", digits, value);
    return buf;
}

nlohmann::json dataset_summary(const RdsDataset& ds, std::size_t rejected_rows) {
    std::size_t observed = 0, imputed = 0;
    for (const auto& r : ds.records()) {
        observed += r.outcome ? 1 : 0;
        imputed += r.degree_imputed ? 1 : 0;
    }
    return {{"n", ds.size()},
            {"seeds", ds.seed_count()},
            {"waves", ds.max_wave()},
            {"outcome", ds.outcome_name()},
            {"outcome_observed", observed},
            {"degrees_imputed", imputed},
            {"rejected_rows", rejected_rows}};
}

nlohmann::json to_json(const ContingencyTable& table) {
    return {{"variable", table.variable},
            {"row_labels", table.row_labels},
            {"col_labels", table.col_labels},
            {"counts", table.counts},
            {"dropped_dyads", table.dropped_dyads}};
}

nlohmann::json to_json(const ChiSquareResult& r) {
    return {{"statistic", r.statistic},   {"dof", r.dof},
            {"p_value", r.p_value},       {"yates_applied", r.yates_applied},
            {"expected", r.expected},     {"small_expected_warning", r.small_expected},
            {"dyads", r.dyads},           {"dropped_dyads", r.dropped_dyads}};
}

nlohmann::json to_json(const PrevalenceEstimate& e) {
    nlohmann::json j = {{"estimator", to_string(e.estimator)},
                        {"theta_hat", e.theta_hat},
                        {"variance", e.variance},
                        {"ci_low", e.ci_low},
                        {"ci_high", e.ci_high},
                        {"level", e.level},
                        {"n_used", e.n_used},
                        {"n_positive", e.n_positive},
                        {"interval", e.replicates > 0 ? "bootstrap" : "wald"}};
    if (e.replicates > 0) j["replicates"] = e.replicates;
    return j;
}

namespace {

nlohmann::json to_json(const ScalarSummary& s) {
    return {{"mean", s.mean}, {"sd", s.sd}, {"lower", s.lower}, {"upper", s.upper}};
}

}  // namespace

nlohmann::json to_json(const FitResult& fit, const std::vector<std::string>& ids) {
    nlohmann::json coefs = nlohmann::json::array();
    for (const auto& c : fit.coefficients)
        coefs.push_back({{"term", c.label},
                         {"estimate", c.estimate},
                         {"sd", c.sd},
                         {"lower", c.lower},
                         {"upper", c.upper},
                         {"odds_ratio", c.odds_ratio},
                         {"or_lower", c.or_lower},
                         {"or_upper", c.or_upper}});
    nlohmann::json j = {{"model", to_string(fit.model)},
                        {"n", fit.n},
                        {"level", fit.level},
                        {"coefficients", coefs},
                        {"deviance_at_plugin", fit.deviance_at_plugin},
                        {"dic", fit.dic},
                        {"p_d", fit.p_d},
                        {"seed", fit.seed}};
    nlohmann::json diag = {{"converged", fit.diagnostics.converged}, {"iterations", fit.diagnostics.iterations}};
    if (fit.model == Model::netlogreg) {
        diag["beta_acceptance"] = fit.diagnostics.beta_acceptance;
        diag["omega_acceptance"] = fit.diagnostics.omega_acceptance;
        diag["log_d_acceptance"] = fit.diagnostics.log_d_acceptance;
        diag["beta_ess"] = fit.diagnostics.beta_ess;
        diag["draws"] = fit.deviance_samples.size();
        if (fit.tau) j["tau"] = to_json(*fit.tau);
        if (fit.d) j["d"] = to_json(*fit.d);
        nlohmann::json latent = nlohmann::json::array();
        for (std::size_t i = 0; i < fit.latent.size(); ++i) {
            nlohmann::json l = {{"mean", fit.latent[i].mean}, {"sd", fit.latent[i].sd}};
            if (i < ids.size()) l["id"] = ids[i];
            latent.push_back(std::move(l));
        }
        j["latent"] = std::move(latent);
    } else {
        diag["loglik_trace"] = fit.diagnostics.loglik_trace;
        j["log_likelihood"] = fit.log_likelihood;
    }
    j["diagnostics"] = std::move(diag);
    return j;
}

nlohmann::json to_json(const ModelComparison& c) {
    return {{"delta_dic", c.delta_dic}, {"preferred", c.preferred}, {"tie_threshold", 2.0}};
}

namespace {

std::string dot_quote(std::string_view s) {
    std::string out = "\"";
    for (char c : s) {
        if (c == '"' || c == '\\') out.push_back('\\');
        if (c == '\n') {
            out += "\\n";
            continue;
        }
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

}  // namespace

std::string to_dot(const RdsDataset& ds) {
    std::ostringstream out;
    out << "digraph recruitment {\n";
    out << "  node [shape=circle, width=0.15, label=\"\"];\n";
    for (const auto& r : ds.records()) {
        out << "  " << dot_quote(r.id);
        if (r.is_seed())
            out << " [width=0.45, style=filled, fillcolor=gray, seed=true]";
        out << ";\n";
    }
    for (const auto& r : ds.records())
        if (r.recruiter_id) out << "  " << dot_quote(*r.recruiter_id) << " -> " << dot_quote(r.id) << ";\n";
    out << "}\n";
    return out.str();
}

}  // namespace rdsnet
