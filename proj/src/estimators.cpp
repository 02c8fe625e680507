#include "rdsnet/estimators.hpp"

#include "rdsnet/error.hpp"
#include "rdsnet/stats.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <deque>
#include <stdexcept>
#include <thread>
#include <vector>

namespace rdsnet {

namespace {

double critical_value(double level) {
    if (!(level > 0.0 && level < 1.0)) throw std::invalid_argument("confidence level must lie in (0, 1)");
    return normal_quantile(0.5 + 0.5 * level);
}

void wald_interval(PrevalenceEstimate& e) {
    const double half = critical_value(e.level) * std::sqrt(e.variance);
    e.ci_low = std::clamp(e.theta_hat - half, 0.0, 1.0);
    e.ci_high = std::clamp(e.theta_hat + half, 0.0, 1.0);
}

}  // namespace

std::string_view to_string(Estimator e) noexcept {
    return e == Estimator::naive ? "naive" : "rds2";
}

PrevalenceEstimate naive_prevalence(std::size_t n_positive, std::size_t n, double level) {
    if (n == 0) throw std::invalid_argument("naive_prevalence: n must be positive");
    if (n_positive > n) throw std::invalid_argument("naive_prevalence: n_positive exceeds n");
    PrevalenceEstimate e;
    e.estimator = Estimator::naive;
    e.level = level;
    e.n_used = n;
    e.n_positive = n_positive;
    e.theta_hat = static_cast<double>(n_positive) / static_cast<double>(n);
    e.variance = e.theta_hat * (1.0 - e.theta_hat) / static_cast<double>(n);
    wald_interval(e);
    return e;
}

PrevalenceEstimate rds2_prevalence(std::span<const int> outcomes, std::span<const double> degrees, double level) {
    if (outcomes.empty()) throw std::invalid_argument("rds2_prevalence: empty input");
    if (outcomes.size() != degrees.size())
        throw std::invalid_argument("rds2_prevalence: outcomes and degrees differ in length");

    double weight_sum = 0.0;
    double positive_weight = 0.0;
    std::size_t positives = 0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        if (!(degrees[i] > 0.0) || !std::isfinite(degrees[i]))
            throw std::invalid_argument("rds2_prevalence: degrees must be positive");
        if (outcomes[i] != 0 && outcomes[i] != 1) throw std::invalid_argument("rds2_prevalence: outcomes must be 0/1");
        const double w = 1.0 / degrees[i];
        weight_sum += w;
        if (outcomes[i] == 1) {
            positive_weight += w;
            ++positives;
        }
    }

    PrevalenceEstimate e;
    e.estimator = Estimator::rds2;
    e.level = level;
    e.n_used = outcomes.size();
    e.n_positive = positives;
    e.theta_hat = positive_weight / weight_sum;
    if (positives == outcomes.size()) e.theta_hat = 1.0;
    if (positives == 0) e.theta_hat = 0.0;

    double v = 0.0;
    for (std::size_t i = 0; i < outcomes.size(); ++i) {
        const double w = (1.0 / degrees[i]) / weight_sum;
        const double r = outcomes[i] - e.theta_hat;
        v += w * w * r * r;
    }
    e.variance = v;
    wald_interval(e);
    return e;
}

PrevalenceEstimate naive_prevalence(const RdsDataset& ds, double level) {
    std::size_t n = 0, pos = 0;
    for (const auto& r : ds.records())
        if (r.outcome) {
            ++n;
            pos += static_cast<std::size_t>(*r.outcome);
        }
    if (n == 0) throw InputError("no participant has an observed outcome");
    return naive_prevalence(pos, n, level);
}

PrevalenceEstimate rds2_prevalence(const RdsDataset& ds, double level) {
    std::vector<int> y;
    std::vector<double> deg;
    for (const auto& r : ds.records())
        if (r.outcome) {
            y.push_back(*r.outcome);
            deg.push_back(static_cast<double>(r.degree));
        }
    if (y.empty()) throw InputError("no participant has an observed outcome");
    return rds2_prevalence(y, deg, level);
}

PrevalenceEstimate rds2_bootstrap_ci(const RdsDataset& ds, const BootstrapOptions& options, const Rng& rng) {
    if (options.replicates < 100) throw std::invalid_argument("rds2_bootstrap_ci: at least 100 replicates required");
    if (ds.seed_count() == 0) throw InputError("rds2_bootstrap_ci: dataset has no seeds");

    PrevalenceEstimate point = rds2_prevalence(ds, options.level);

    const std::size_t n = ds.size();
    auto status = [&](std::size_t i) -> std::size_t { return ds[i].outcome ? static_cast<std::size_t>(*ds[i].outcome) : 2; };
    std::vector<std::size_t> children(n, 0), seeds, all_recruits;
    std::array<std::vector<std::size_t>, 3> pool;  // recruits grouped by recruiter status
    for (std::size_t i = 0; i < n; ++i) {
        if (auto r = ds.recruiter_index(i)) {
            ++children[*r];
            pool[status(*r)].push_back(i);
            all_recruits.push_back(i);
        } else {
            seeds.push_back(i);
        }
    }
    for (auto& p : pool)
        if (p.empty()) p = all_recruits;

    std::vector<double> estimates(options.replicates, std::nan(""));
    auto run = [&](std::size_t begin, std::size_t end) {
        std::deque<std::size_t> queue;
        for (std::size_t b = begin; b < end; ++b) {
            Rng local = rng.substream(b);
            double wsum = 0.0, wpos = 0.0;
            queue.clear();
            for (std::size_t s = 0; s < seeds.size(); ++s) queue.push_back(seeds[local.uniform_index(seeds.size())]);
            for (std::size_t drawn = 0; drawn < n; ++drawn) {
                if (queue.empty()) queue.push_back(seeds[local.uniform_index(seeds.size())]);
                const std::size_t v = queue.front();
                queue.pop_front();
                const auto& rec = ds[v];
                if (rec.outcome) {
                    const double w = 1.0 / rec.degree;
                    wsum += w;
                    if (*rec.outcome == 1) wpos += w;
                }
                const auto& from = pool[status(v)];
                for (std::size_t k = 0; k < children[v]; ++k) queue.push_back(from[local.uniform_index(from.size())]);
            }
            if (wsum > 0.0) estimates[b] = wpos / wsum;
        }
    };

    const unsigned threads = std::max(1u, std::min<unsigned>(options.threads, options.replicates));
    if (threads == 1) {
        run(0, options.replicates);
    } else {
        std::vector<std::thread> pool;
        const std::size_t chunk = (options.replicates + threads - 1) / threads;
        for (unsigned t = 0; t < threads; ++t) {
            const std::size_t b = t * chunk, e = std::min(options.replicates, b + chunk);
            if (b < e) pool.emplace_back(run, b, e);
        }
        for (auto& th : pool) th.join();
    }

    std::vector<double> valid;
    valid.reserve(estimates.size());
    for (double v : estimates)
        if (!std::isnan(v)) valid.push_back(v);
    if (valid.empty()) throw InputError("rds2_bootstrap_ci: no replicate contained an observed outcome");
    std::sort(valid.begin(), valid.end());

    double mean = 0.0;
    for (double v : valid) mean += v;
    mean /= static_cast<double>(valid.size());
    double var = 0.0;
    for (double v : valid) var += (v - mean) * (v - mean);

    const double alpha = 1.0 - options.level;
    point.variance = valid.size() > 1 ? var / static_cast<double>(valid.size() - 1) : 0.0;
    point.ci_low = std::clamp(quantile_sorted(valid, alpha / 2.0), 0.0, 1.0);
    point.ci_high = std::clamp(quantile_sorted(valid, 1.0 - alpha / 2.0), 0.0, 1.0);
    point.ci_low = std::min(point.ci_low, point.theta_hat);
    point.ci_high = std::max(point.ci_high, point.theta_hat);
    point.replicates = valid.size();
    return point;
}

}  // namespace rdsnet
