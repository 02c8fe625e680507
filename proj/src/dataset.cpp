#include "rdsnet/dataset.hpp"

#include "rdsnet/error.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <istream>
#include <limits>
#include <ostream>
#include <set>

namespace rdsnet {

namespace {

constexpr std::size_t npos = std::numeric_limits<std::size_t>::max();

std::string line_prefix(std::size_t line) {
    return line > 0 ? "line " + std::to_string(line) + ": " : std::string{};
}

std::optional<double> parse_number(std::string_view s) {
    double v = 0.0;
    const auto* first = s.data();
    const auto* last = s.data() + s.size();
    auto [ptr, ec] = std::from_chars(first, last, v);
    if (ec != std::errc{} || ptr != last || !std::isfinite(v)) return std::nullopt;
    return v;
}

std::optional<long long> parse_integer(std::string_view s) {
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) return std::nullopt;
    return v;
}

std::string trim(std::string_view s) {
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string_view::npos) return {};
    const auto e = s.find_last_not_of(" \t");
    return std::string(s.substr(b, e - b + 1));
}

std::string format_number(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

}  // namespace

// ---------------------------------------------------------------------------
// RdsDataset
// ---------------------------------------------------------------------------

RdsDataset::RdsDataset(std::vector<ParticipantRecord> records, std::string outcome_name,
                       std::vector<CovariateSpec> schema)
    : records_(std::move(records)), outcome_name_(std::move(outcome_name)), schema_(std::move(schema)) {
    for (auto& spec : schema_) {
        if (spec.kind != CovariateKind::categorical) continue;
        if (spec.levels.empty()) throw InputError("covariate '" + spec.name + "' has no levels");
        if (spec.reference.empty()) spec.reference = spec.levels.front();
        if (std::find(spec.levels.begin(), spec.levels.end(), spec.reference) == spec.levels.end())
            throw InputError("covariate '" + spec.name + "': reference level '" + spec.reference +
                             "' is not a level");
    }

    const std::size_t n = records_.size();
    index_.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records_[i];
        const std::string where = line_prefix(r.line);
        if (r.id.empty()) throw InputError(where + "empty id");
        if (!index_.emplace(r.id, i).second) throw InputError(where + "duplicate id '" + r.id + "'");
        if (r.degree < 1) throw InputError(where + "degree must be a positive integer");
        if (r.outcome && *r.outcome != 0 && *r.outcome != 1)
            throw InputError(where + "outcome must be 0, 1 or empty");
        if (r.covariates.size() != schema_.size())
            throw InputError(where + "covariate count does not match schema");
        for (std::size_t c = 0; c < schema_.size(); ++c) {
            const auto& v = r.covariates[c];
            if (std::holds_alternative<std::monostate>(v)) continue;
            const auto& spec = schema_[c];
            if (spec.kind == CovariateKind::numeric) {
                if (!std::holds_alternative<double>(v))
                    throw InputError(where + "covariate '" + spec.name + "' must be numeric");
            } else {
                const auto* s = std::get_if<std::string>(&v);
                if (!s || std::find(spec.levels.begin(), spec.levels.end(), *s) == spec.levels.end())
                    throw InputError(where + "covariate '" + spec.name + "' has an unknown level");
            }
        }
    }

    recruiter_.assign(n, npos);
    for (std::size_t i = 0; i < n; ++i) {
        const auto& r = records_[i];
        if (!r.recruiter_id) {
            ++seed_count_;
            continue;
        }
        if (*r.recruiter_id == r.id)
            throw InputError(line_prefix(r.line) + "participant '" + r.id + "' lists itself as recruiter");
        auto it = index_.find(*r.recruiter_id);
        if (it == index_.end())
            throw InputError(line_prefix(r.line) + "unknown recruiter_id '" + *r.recruiter_id + "'");
        recruiter_[i] = it->second;
    }
    if (n == 0 || seed_count_ == 0) throw InputError("dataset has no seeds");

    // Waves by walking up to the root; a walk longer than n means a cycle.
    waves_.assign(n, npos);
    std::vector<std::size_t> path;
    for (std::size_t i = 0; i < n; ++i) {
        path.clear();
        std::size_t cur = i;
        while (waves_[cur] == npos) {
            if (recruiter_[cur] == npos) {
                waves_[cur] = 0;
                break;
            }
            path.push_back(cur);
            if (path.size() > n)
                throw InputError(line_prefix(records_[i].line) + "recruitment cycle involving '" +
                                 records_[i].id + "'");
            cur = recruiter_[cur];
        }
        std::size_t w = waves_[cur];
        for (auto it = path.rbegin(); it != path.rend(); ++it) waves_[*it] = ++w;
    }
}

std::optional<std::size_t> RdsDataset::index_of(std::string_view id) const {
    auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

std::optional<std::size_t> RdsDataset::covariate_index(std::string_view name) const {
    for (std::size_t c = 0; c < schema_.size(); ++c)
        if (schema_[c].name == name) return c;
    return std::nullopt;
}

std::optional<std::size_t> RdsDataset::recruiter_index(std::size_t i) const noexcept {
    if (recruiter_[i] == npos) return std::nullopt;
    return recruiter_[i];
}

std::size_t RdsDataset::max_wave() const noexcept {
    return waves_.empty() ? 0 : *std::max_element(waves_.begin(), waves_.end());
}

// ---------------------------------------------------------------------------
// CSV
// ---------------------------------------------------------------------------

std::vector<CsvRow> read_csv(std::istream& in) {
    std::vector<CsvRow> rows;
    std::string field;
    std::vector<std::string> fields;
    std::size_t line = 1;
    std::size_t row_line = 1;
    bool in_quotes = false;
    bool field_started = false;
    bool row_has_content = false;

    auto end_field = [&] {
        fields.push_back(std::move(field));
        field.clear();
        field_started = false;
    };
    auto end_row = [&] {
        end_field();
        if (row_has_content || fields.size() > 1 || !fields.front().empty())
            rows.push_back({row_line, std::move(fields)});
        fields.clear();
        row_has_content = false;
    };

    char ch;
    while (in.get(ch)) {
        if (in_quotes) {
            if (ch == '"') {
                if (in.peek() == '"') {
                    in.get(ch);
                    field.push_back('"');
                } else {
                    in_quotes = false;
                }
            } else {
                if (ch == '\n') ++line;
                field.push_back(ch);
            }
            continue;
        }
        switch (ch) {
            case '"':
                if (!field_started && field.empty()) {
                    in_quotes = true;
                    field_started = true;
                    row_has_content = true;
                } else {
                    field.push_back(ch);
                }
                break;
            case ',':
                end_field();
                row_has_content = true;
                break;
            case '\r':
                if (in.peek() == '\n') break;
                [[fallthrough]];
            case '\n':
                end_row();
                ++line;
                row_line = line;
                break;
            default:
                field.push_back(ch);
                field_started = true;
        }
    }
    if (in_quotes) throw InputError("line " + std::to_string(row_line) + ": unterminated quoted field");
    if (field_started || !fields.empty() || !field.empty()) end_row();
    return rows;
}

std::string csv_escape(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos) return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"') out.push_back('"');
        out.push_back(c);
    }
    out.push_back('"');
    return out;
}

namespace {

struct PendingRow {
    ParticipantRecord record;
    std::vector<std::string> raw_covariates;
    bool degree_missing = false;
};

}  // namespace

ParseResult parse_dataset(std::istream& in, const ParseOptions& options) {
    const auto rows = read_csv(in);
    if (rows.empty()) throw InputError("input is empty (a header row is required)");

    const auto& header = rows.front().fields;
    std::unordered_map<std::string, std::size_t> column;
    for (std::size_t c = 0; c < header.size(); ++c) {
        const std::string name = trim(header[c]);
        if (!column.emplace(name, c).second) throw InputError("duplicate column '" + name + "'");
    }
    auto require = [&](const std::string& name) {
        auto it = column.find(name);
        if (it == column.end()) throw InputError("missing required column '" + name + "'");
        return it->second;
    };
    const std::size_t id_col = require("id");
    const std::size_t recruiter_col = require("recruiter_id");
    const std::size_t degree_col = require("degree");
    const std::size_t outcome_col = require(options.outcome_column);

    // Covariate columns and their (possibly still incomplete) specs.
    std::vector<CovariateSpec> schema;
    std::vector<std::size_t> cov_cols;
    if (!options.schema.empty()) {
        for (const auto& spec : options.schema) {
            cov_cols.push_back(require(spec.name));
            schema.push_back(spec);
        }
    } else {
        for (std::size_t c = 0; c < header.size(); ++c) {
            if (c == id_col || c == recruiter_col || c == degree_col || c == outcome_col) continue;
            CovariateSpec spec;
            spec.name = trim(header[c]);
            spec.kind = CovariateKind::numeric;  // refined below
            schema.push_back(std::move(spec));
            cov_cols.push_back(c);
        }
    }
    for (const auto& [name, ref] : options.reference_levels) {
        auto it = std::find_if(schema.begin(), schema.end(), [&](const auto& s) { return s.name == name; });
        if (it == schema.end()) throw InputError("reference level given for unknown covariate '" + name + "'");
        it->kind = CovariateKind::categorical;
        it->reference = ref;
    }

    std::vector<RejectedRow> rejects;
    std::vector<std::string> warnings;
    auto reject = [&](std::size_t line, std::string reason) {
        if (!options.lenient) throw InputError("line " + std::to_string(line) + ": " + reason);
        rejects.push_back({line, std::move(reason)});
    };

    // Pass 1: per-row field validation.
    std::vector<PendingRow> pending;
    std::unordered_map<std::string, std::size_t> seen;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto& row = rows[r];
        if (row.fields.size() != header.size()) {
            reject(row.line, "expected " + std::to_string(header.size()) + " fields, found " +
                                 std::to_string(row.fields.size()));
            continue;
        }
        PendingRow p;
        auto& rec = p.record;
        rec.line = row.line;
        rec.id = trim(row.fields[id_col]);
        if (rec.id.empty()) {
            reject(row.line, "empty id");
            continue;
        }
        if (seen.count(rec.id)) {
            reject(row.line, "duplicate id '" + rec.id + "'");
            continue;
        }
        if (auto rid = trim(row.fields[recruiter_col]); !rid.empty()) rec.recruiter_id = rid;

        const std::string degree = trim(row.fields[degree_col]);
        if (degree.empty()) {
            p.degree_missing = true;
        } else if (auto d = parse_integer(degree); !d) {
            reject(row.line, "degree '" + degree + "' is not an integer");
            continue;
        } else if (*d < 0 || *d > std::numeric_limits<int>::max()) {
            reject(row.line, "non-positive degree " + degree);
            continue;
        } else if (*d == 0) {
            p.degree_missing = true;
        } else {
            rec.degree = static_cast<int>(*d);
        }
        if (p.degree_missing && !options.lenient) {
            reject(row.line, degree.empty() ? "missing degree" : "non-positive degree " + degree);
            continue;
        }

        const std::string outcome = trim(row.fields[outcome_col]);
        if (outcome == "0") {
            rec.outcome = 0;
        } else if (outcome == "1") {
            rec.outcome = 1;
        } else if (!outcome.empty()) {
            reject(row.line, "outcome value '" + outcome + "' is outside {0,1,empty}");
            continue;
        }

        bool ok = true;
        for (std::size_t c = 0; c < cov_cols.size() && ok; ++c) {
            std::string v = trim(row.fields[cov_cols[c]]);
            const auto& spec = schema[c];
            if (!v.empty() && !options.schema.empty()) {
                if (spec.kind == CovariateKind::numeric && !parse_number(v)) {
                    reject(row.line, "covariate '" + spec.name + "' value '" + v + "' is not numeric");
                    ok = false;
                } else if (spec.kind == CovariateKind::categorical && !spec.levels.empty() &&
                           std::find(spec.levels.begin(), spec.levels.end(), v) == spec.levels.end()) {
                    reject(row.line, "covariate '" + spec.name + "' has unknown level '" + v + "'");
                    ok = false;
                }
            }
            p.raw_covariates.push_back(std::move(v));
        }
        if (!ok) continue;
        seen.emplace(rec.id, pending.size());
        pending.push_back(std::move(p));
    }

    // Pass 2: structural validation, iterated because rejecting a row can
    // orphan its recruits.
    std::vector<bool> alive(pending.size(), true);
    for (bool changed = true; changed;) {
        changed = false;
        std::unordered_map<std::string, std::size_t> live_index;
        for (std::size_t i = 0; i < pending.size(); ++i)
            if (alive[i]) live_index.emplace(pending[i].record.id, i);

        std::vector<std::size_t> parent(pending.size(), npos);
        for (std::size_t i = 0; i < pending.size(); ++i) {
            if (!alive[i]) continue;
            const auto& rec = pending[i].record;
            if (!rec.recruiter_id) continue;
            if (*rec.recruiter_id == rec.id) {
                reject(rec.line, "participant lists itself as recruiter");
                alive[i] = false;
                changed = true;
                continue;
            }
            auto it = live_index.find(*rec.recruiter_id);
            if (it == live_index.end()) {
                reject(rec.line, "unknown recruiter_id '" + *rec.recruiter_id + "'");
                alive[i] = false;
                changed = true;
                continue;
            }
            parent[i] = it->second;
        }
        if (changed) continue;

        // Cycle detection on the parent pointers (functional graph colouring).
        std::vector<int> state(pending.size(), 0);  // 0 new, 1 on stack, 2 done
        for (std::size_t i = 0; i < pending.size(); ++i) {
            if (!alive[i] || state[i] != 0) continue;
            std::vector<std::size_t> stack;
            std::size_t cur = i;
            while (cur != npos && state[cur] == 0) {
                state[cur] = 1;
                stack.push_back(cur);
                cur = parent[cur];
            }
            if (cur != npos && state[cur] == 1) {
                std::vector<std::size_t> cycle;
                for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
                    cycle.push_back(*it);
                    if (*it == cur) break;
                }
                std::sort(cycle.begin(), cycle.end());
                for (std::size_t k : cycle) {
                    reject(pending[k].record.line, "recruitment cycle involving '" + pending[k].record.id + "'");
                    alive[k] = false;
                }
                changed = true;
            }
            for (std::size_t k : stack) state[k] = 2;
        }
    }

    std::vector<PendingRow> kept;
    for (std::size_t i = 0; i < pending.size(); ++i)
        if (alive[i]) kept.push_back(std::move(pending[i]));
    if (kept.empty()) throw InputError("no valid participant rows");

    // Infer kinds and levels from retained rows.
    for (std::size_t c = 0; c < schema.size(); ++c) {
        auto& spec = schema[c];
        const bool explicit_spec = !options.schema.empty();
        if (!explicit_spec && spec.kind == CovariateKind::numeric) {
            for (const auto& p : kept)
                if (!p.raw_covariates[c].empty() && !parse_number(p.raw_covariates[c])) {
                    spec.kind = CovariateKind::categorical;
                    break;
                }
        }
        if (spec.kind == CovariateKind::categorical && spec.levels.empty()) {
            std::set<std::string> levels;
            for (const auto& p : kept)
                if (!p.raw_covariates[c].empty()) levels.insert(p.raw_covariates[c]);
            spec.levels.assign(levels.begin(), levels.end());
            if (spec.levels.empty()) throw InputError("covariate '" + spec.name + "' has no observed values");
        }
        if (spec.kind == CovariateKind::categorical && spec.reference.empty()) spec.reference = spec.levels.front();
        if (spec.kind == CovariateKind::categorical &&
            std::find(spec.levels.begin(), spec.levels.end(), spec.reference) == spec.levels.end())
            throw InputError("covariate '" + spec.name + "': reference level '" + spec.reference +
                             "' does not occur");
    }

    // Contact counts for degree imputation: recruits + (1 if recruited).
    std::unordered_map<std::string, std::size_t> contacts;
    for (const auto& p : kept)
        if (p.record.recruiter_id) {
            ++contacts[p.record.id];
            ++contacts[*p.record.recruiter_id];
        }

    std::vector<ParticipantRecord> records;
    records.reserve(kept.size());
    for (auto& p : kept) {
        auto& rec = p.record;
        for (std::size_t c = 0; c < schema.size(); ++c) {
            const std::string& raw = p.raw_covariates[c];
            if (raw.empty())
                rec.covariates.emplace_back(std::monostate{});
            else if (schema[c].kind == CovariateKind::numeric)
                rec.covariates.emplace_back(*parse_number(raw));
            else
                rec.covariates.emplace_back(raw);
        }
        if (p.degree_missing) {
            const std::size_t ni = contacts.count(rec.id) ? contacts[rec.id] : 0;
            rec.degree = static_cast<int>(std::max<std::size_t>(1, ni));
            rec.degree_imputed = true;
            warnings.push_back(line_prefix(rec.line) + "degree imputed as " + std::to_string(rec.degree) +
                                      " for '" + rec.id + "'");
        }
        records.push_back(std::move(rec));
    }

    std::stable_sort(rejects.begin(), rejects.end(),
                     [](const RejectedRow& a, const RejectedRow& b) { return a.line < b.line; });
    return ParseResult{RdsDataset(std::move(records), options.outcome_column, std::move(schema)),
                       std::move(rejects), std::move(warnings)};
}

void write_csv(const RdsDataset& ds, std::ostream& out) {
    out << "id,recruiter_id,degree," << csv_escape(ds.outcome_name());
    for (const auto& spec : ds.schema()) out << ',' << csv_escape(spec.name);
    out << '\n';
    for (const auto& r : ds.records()) {
        out << csv_escape(r.id) << ',' << (r.recruiter_id ? csv_escape(*r.recruiter_id) : "") << ',' << r.degree
            << ',';
        if (r.outcome) out << *r.outcome;
        for (const auto& v : r.covariates) {
            out << ',';
            if (const auto* s = std::get_if<std::string>(&v))
                out << csv_escape(*s);
            else if (const auto* d = std::get_if<double>(&v))
                out << format_number(*d);
        }
        out << '\n';
    }
}

void write_rejects(std::span<const RejectedRow> rejects, std::ostream& out) {
    out << "line_number,reason\n";
    for (const auto& r : rejects) out << r.line << ',' << csv_escape(r.reason) << '\n';
}

}  // namespace rdsnet
