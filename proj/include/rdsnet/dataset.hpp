#pragma once

#include <cstddef>
#include <iosfwd>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <variant>
#include <vector>

namespace rdsnet {

enum class CovariateKind { categorical, numeric };

struct CovariateSpec {
    std::string name;
    CovariateKind kind = CovariateKind::categorical;
    std::vector<std::string> levels;  // categorical; empty while inferring
    std::string reference;            // categorical; defaults to levels.front()
};

/// monostate = missing.
using CovariateValue = std::variant<std::monostate, std::string, double>;

struct ParticipantRecord {
    std::string id;
    std::optional<std::string> recruiter_id;  // absent for seeds
    int degree = 1;                           // self-reported network size
    bool degree_imputed = false;
    std::optional<int> outcome;               // 0/1, absent when unobserved
    std::vector<CovariateValue> covariates;   // aligned with RdsDataset::schema()
    std::size_t line = 0;                     // source CSV line, 0 if synthetic

    bool is_seed() const noexcept { return !recruiter_id.has_value(); }
};

/// Validated, immutable collection of RDS participant records.
///
/// Construction enforces: unique non-empty ids, recruiters that exist and are
/// not the participant itself, an acyclic recruitment forest with at least one
/// seed, degree >= 1, outcome in {0, 1}, and covariate values consistent with
/// the schema. Violations throw InputError.
class RdsDataset {
public:
    RdsDataset(std::vector<ParticipantRecord> records, std::string outcome_name,
               std::vector<CovariateSpec> schema);

    std::size_t size() const noexcept { return records_.size(); }
    const std::vector<ParticipantRecord>& records() const noexcept { return records_; }
    const ParticipantRecord& operator[](std::size_t i) const noexcept { return records_[i]; }

    const std::string& outcome_name() const noexcept { return outcome_name_; }
    const std::vector<CovariateSpec>& schema() const noexcept { return schema_; }

    std::optional<std::size_t> index_of(std::string_view id) const;
    std::optional<std::size_t> covariate_index(std::string_view name) const;
    std::optional<std::size_t> recruiter_index(std::size_t i) const noexcept;

    std::size_t seed_count() const noexcept { return seed_count_; }
    /// Recruitment wave; seeds are wave 0.
    std::size_t wave(std::size_t i) const noexcept { return waves_[i]; }
    std::size_t max_wave() const noexcept;

private:
    std::vector<ParticipantRecord> records_;
    std::string outcome_name_;
    std::vector<CovariateSpec> schema_;
    std::unordered_map<std::string, std::size_t> index_;
    std::vector<std::size_t> recruiter_;  // npos for seeds
    std::vector<std::size_t> waves_;
    std::size_t seed_count_ = 0;
};

struct ParseOptions {
    std::string outcome_column = "outcome";
    /// Lenient mode collects bad rows into ParseResult::rejects and imputes
    /// missing or zero degrees as max(1, n_i); strict mode throws InputError.
    bool lenient = false;
    /// Covariate columns to load. Empty: every non-required column, with the
    /// kind inferred (numeric when every observed value parses as a number).
    std::vector<CovariateSpec> schema;
    /// Reference level overrides by column; forces the column categorical.
    std::map<std::string, std::string> reference_levels;
};

struct RejectedRow {
    std::size_t line;
    std::string reason;
};

struct ParseResult {
    RdsDataset dataset;
    std::vector<RejectedRow> rejects;
    std::vector<std::string> warnings;
};

/// Reads RFC 4180 CSV with header `id, recruiter_id, degree, <outcome>, ...`
/// (any column order). Empty fields are missing values.
ParseResult parse_dataset(std::istream& in, const ParseOptions& options = {});

/// Inverse of parse_dataset for every retained field.
void write_csv(const RdsDataset& ds, std::ostream& out);

/// Rejects report: `line_number,reason`.
void write_rejects(std::span<const RejectedRow> rejects, std::ostream& out);

/// RFC 4180 record splitting; exposed for the CLI and tests.
struct CsvRow {
    std::size_t line;
    std::vector<std::string> fields;
};
std::vector<CsvRow> read_csv(std::istream& in);
std::string csv_escape(std::string_view field);

}  // namespace rdsnet
