#include "perfcharter/model.hpp"

#include "csv.hpp"
#include "perfcharter/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <charconv>
#include <cmath>
#include <set>
#include <unordered_set>

namespace perfcharter {

using ordered_json = nlohmann::ordered_json;

namespace {

std::string at_line(std::size_t line) { return "line " + std::to_string(line); }

double parse_real(std::string_view cell, std::size_t line, std::string_view column) {
    double value = 0.0;
    const auto *end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec != std::errc{} || ptr != end || !std::isfinite(value))
        throw Error(ErrorKind::NonNumericCell,
                    at_line(line) + ", column '" + std::string(column) + "': '" + std::string(cell) + "'");
    return value;
}

std::uint64_t parse_count(std::string_view cell, std::size_t line, std::string_view column) {
    std::uint64_t value = 0;
    const auto *end = cell.data() + cell.size();
    const auto [ptr, ec] = std::from_chars(cell.data(), end, value);
    if (ec == std::errc{} && ptr == end) return value;
    // Accept integral values written in floating notation, e.g. "1.2e3".
    const double real = parse_real(cell, line, column);
    if (real < 0.0 || std::floor(real) != real || real > 1.8e19)
        throw Error(ErrorKind::NonNumericCell,
                    at_line(line) + ", column '" + std::string(column) + "': expected a non-negative count");
    return static_cast<std::uint64_t>(real);
}

double json_real(const ordered_json &value, std::size_t row, std::string_view key) {
    if (!value.is_number())
        throw Error(ErrorKind::NonNumericCell,
                    "record " + std::to_string(row) + ", field '" + std::string(key) + "' is not a number");
    const double v = value.get<double>();
    if (!std::isfinite(v))
        throw Error(ErrorKind::NonNumericCell, "record " + std::to_string(row) + ": non-finite value");
    return v;
}

std::uint64_t json_count(const ordered_json &value, std::size_t row, std::string_view key) {
    if (value.is_number_unsigned()) return value.get<std::uint64_t>();
    const double v = json_real(value, row, key);
    if (v < 0.0 || std::floor(v) != v)
        throw Error(ErrorKind::NonNumericCell,
                    "record " + std::to_string(row) + ", field '" + std::string(key) + "': expected a count");
    return static_cast<std::uint64_t>(v);
}

ordered_json parse_json_array(std::string_view text) {
    ordered_json doc;
    try {
        doc = ordered_json::parse(text);
    } catch (const nlohmann::json::parse_error &e) {
        throw Error(ErrorKind::MalformedRow, std::string("invalid JSON: ") + e.what());
    }
    if (!doc.is_array()) throw Error(ErrorKind::MalformedRow, "expected a JSON array of records");
    return doc;
}

// One row of a profiles file before missing-column resolution.
struct RawProfile {
    std::string name;
    Suite suite = Suite::Other;
    std::map<std::string, double> values;
    std::size_t line = 0;
};

ProfileParseResult assemble_profiles(std::vector<RawProfile> rows, std::vector<std::string> columns) {
    std::unordered_set<std::string> seen_names;
    for (const auto &row : rows) {
        if (!seen_names.insert(row.name).second)
            throw Error(ErrorKind::DuplicateWorkloadName, at_line(row.line) + ": '" + row.name + "'");
    }
    if (rows.size() < 2)
        throw Error(ErrorKind::TooFewWorkloads, "need at least 2 workloads, got " + std::to_string(rows.size()));

    // Canonical metrics first, in canonical order; extras keep input order.
    std::stable_sort(columns.begin(), columns.end(), [](const std::string &a, const std::string &b) {
        const auto ra = canonical_rank(a), rb = canonical_rank(b);
        const std::size_t ka = ra ? *ra : std::size(kCanonicalMetrics);
        const std::size_t kb = rb ? *rb : std::size(kCanonicalMetrics);
        return ka < kb;
    });

    ProfileParseResult result;
    std::vector<std::string> kept;
    for (const auto &column : columns) {
        const bool complete = std::all_of(rows.begin(), rows.end(),
                                          [&](const RawProfile &r) { return r.values.contains(column); });
        (complete ? kept : result.dropped).push_back(column);
    }

    auto &m = result.matrix;
    m.metrics = kept;
    m.values = Matrix(rows.size(), kept.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        m.workloads.push_back(rows[i].name);
        m.suites.push_back(rows[i].suite);
        for (std::size_t j = 0; j < kept.size(); ++j) m.values(i, j) = rows[i].values.at(kept[j]);
    }
    return result;
}

void check_metric_value(double value, std::size_t line, std::string_view column) {
    if (value < 0.0)
        throw Error(ErrorKind::InvalidArgument,
                    at_line(line) + ", column '" + std::string(column) + "': metrics must be non-negative");
}

ProfileParseResult parse_profiles_csv(std::string_view text) {
    auto rows = detail::read_csv(text);
    if (rows.empty()) throw Error(ErrorKind::TooFewWorkloads, "empty profiles file");

    const auto &header = rows.front();
    if (header.cells.size() < 2 || header.cells[0] != "name" || header.cells[1] != "suite")
        throw Error(ErrorKind::MalformedRow, at_line(header.line) + ": header must start with 'name,suite'");
    std::vector<std::string> columns(header.cells.begin() + 2, header.cells.end());
    std::set<std::string> unique_columns;
    for (const auto &c : columns) {
        if (c.empty() || !unique_columns.insert(c).second)
            throw Error(ErrorKind::MalformedRow, at_line(header.line) + ": empty or duplicate metric column '" + c + "'");
    }

    std::vector<RawProfile> parsed;
    for (std::size_t r = 1; r < rows.size(); ++r) {
        const auto &row = rows[r];
        if (row.cells.size() != header.cells.size())
            throw Error(ErrorKind::MalformedRow, at_line(row.line) + ": expected " +
                                                     std::to_string(header.cells.size()) + " cells, got " +
                                                     std::to_string(row.cells.size()));
        if (row.cells[0].empty()) throw Error(ErrorKind::MalformedRow, at_line(row.line) + ": empty workload name");
        RawProfile p{row.cells[0], parse_suite(row.cells[1]), {}, row.line};
        for (std::size_t j = 0; j < columns.size(); ++j) {
            const auto &cell = row.cells[j + 2];
            if (cell.empty()) continue;
            const double v = parse_real(cell, row.line, columns[j]);
            check_metric_value(v, row.line, columns[j]);
            p.values.emplace(columns[j], v);
        }
        parsed.push_back(std::move(p));
    }
    return assemble_profiles(std::move(parsed), std::move(columns));
}

ProfileParseResult parse_profiles_json(std::string_view text) {
    const auto doc = parse_json_array(text);
    std::vector<std::string> columns;
    std::set<std::string> known;
    std::vector<RawProfile> parsed;
    std::size_t index = 0;
    for (const auto &rec : doc) {
        ++index;
        if (!rec.is_object() || !rec.contains("name") || !rec["name"].is_string())
            throw Error(ErrorKind::MalformedRow, "record " + std::to_string(index) + ": missing string 'name'");
        RawProfile p;
        p.name = rec["name"].get<std::string>();
        p.line = index;
        if (rec.contains("suite") && rec["suite"].is_string()) p.suite = parse_suite(rec["suite"].get<std::string>());
        for (const auto &[key, value] : rec.items()) {
            if (key == "name" || key == "suite") continue;
            if (known.insert(key).second) columns.push_back(key);
            if (value.is_null()) continue;
            const double v = json_real(value, index, key);
            check_metric_value(v, index, key);
            p.values.emplace(key, v);
        }
        parsed.push_back(std::move(p));
    }
    return assemble_profiles(std::move(parsed), std::move(columns));
}

} // namespace

std::optional<std::size_t> canonical_rank(std::string_view name) noexcept {
    for (std::size_t i = 0; i < std::size(kCanonicalMetrics); ++i)
        if (kCanonicalMetrics[i] == name) return i;
    return std::nullopt;
}

std::string_view to_string(Suite suite) noexcept {
    switch (suite) {
    case Suite::MLPerf: return "MLPerf";
    case Suite::DAWNBench: return "DAWNBench";
    case Suite::DeepBench: return "DeepBench";
    case Suite::Other: return "Other";
    }
    return "Other";
}

Suite parse_suite(std::string_view text) noexcept {
    if (text == "MLPerf") return Suite::MLPerf;
    if (text == "DAWNBench") return Suite::DAWNBench;
    if (text == "DeepBench") return Suite::DeepBench;
    return Suite::Other;
}

std::optional<std::size_t> MetricMatrix::workload_index(std::string_view name) const {
    const auto it = std::find(workloads.begin(), workloads.end(), name);
    if (it == workloads.end()) return std::nullopt;
    return static_cast<std::size_t>(it - workloads.begin());
}

std::optional<std::size_t> MetricMatrix::metric_index(std::string_view name) const {
    const auto it = std::find(metrics.begin(), metrics.end(), name);
    if (it == metrics.end()) return std::nullopt;
    return static_cast<std::size_t>(it - metrics.begin());
}

WorkloadProfile MetricMatrix::profile(std::size_t row) const {
    if (row >= rows()) throw Error(ErrorKind::IndexOutOfRange, "workload row " + std::to_string(row));
    WorkloadProfile p{workloads[row], row < suites.size() ? suites[row] : Suite::Other, {}};
    for (std::size_t j = 0; j < cols(); ++j) p.metrics.emplace(metrics[j], values(row, j));
    return p;
}

ProfileParseResult parse_profiles(std::string_view text, Format format) {
    return format == Format::Csv ? parse_profiles_csv(text) : parse_profiles_json(text);
}

std::string format_double(double value) {
    char buf[64];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, value);
    return std::string(buf, ec == std::errc{} ? ptr : buf);
}

std::string serialize_profiles(const MetricMatrix &matrix, Format format) {
    if (format == Format::Json) {
        ordered_json doc = ordered_json::array();
        for (std::size_t i = 0; i < matrix.rows(); ++i) {
            ordered_json rec;
            rec["name"] = matrix.workloads[i];
            rec["suite"] = to_string(i < matrix.suites.size() ? matrix.suites[i] : Suite::Other);
            for (std::size_t j = 0; j < matrix.cols(); ++j) rec[matrix.metrics[j]] = matrix.values(i, j);
            doc.push_back(std::move(rec));
        }
        return doc.dump(2) + "\n";
    }
    std::string out = "name,suite";
    for (const auto &m : matrix.metrics) out += "," + detail::csv_escape(m);
    out += "\n";
    for (std::size_t i = 0; i < matrix.rows(); ++i) {
        out += detail::csv_escape(matrix.workloads[i]);
        out += ",";
        out += to_string(i < matrix.suites.size() ? matrix.suites[i] : Suite::Other);
        for (std::size_t j = 0; j < matrix.cols(); ++j) out += "," + format_double(matrix.values(i, j));
        out += "\n";
    }
    return out;
}

std::vector<KernelRecord> parse_kernels(std::string_view text, Format format) {
    std::vector<KernelRecord> records;
    auto validate = [](const KernelRecord &r, std::size_t where) {
        if (r.time_ms < 0.0)
            throw Error(ErrorKind::InvalidArgument, "record " + std::to_string(where) + ": negative time_ms");
    };

    if (format == Format::Json) {
        const auto doc = parse_json_array(text);
        std::size_t index = 0;
        for (const auto &rec : doc) {
            ++index;
            if (!rec.is_object() || !rec.contains("class") || !rec["class"].is_string())
                throw Error(ErrorKind::MalformedRow, "record " + std::to_string(index) + ": missing string 'class'");
            KernelRecord r;
            if (rec.contains("workload") && rec["workload"].is_string()) r.workload = rec["workload"].get<std::string>();
            r.class_name = rec["class"].get<std::string>();
            auto field = [&](const char *key) -> const ordered_json & {
                if (!rec.contains(key))
                    throw Error(ErrorKind::MalformedRow, "record " + std::to_string(index) + ": missing '" + key + "'");
                return rec[key];
            };
            r.time_ms = json_real(field("time_ms"), index, "time_ms");
            r.calls = json_count(field("calls"), index, "calls");
            r.unique_kernels = json_count(field("unique"), index, "unique");
            r.flops = json_count(field("flops"), index, "flops");
            r.transactions = json_count(field("transactions"), index, "transactions");
            validate(r, index);
            records.push_back(std::move(r));
        }
    } else {
        const auto rows = detail::read_csv(text);
        if (rows.empty()) throw Error(ErrorKind::EmptyInput, "empty kernels file");
        static const std::vector<std::string> base = {"class", "time_ms", "calls", "unique", "flops", "transactions"};
        const auto &header = rows.front().cells;
        const bool with_workload = !header.empty() && header[0] == "workload";
        const std::vector<std::string> tail(header.begin() + (with_workload ? 1 : 0), header.end());
        if (tail != base)
            throw Error(ErrorKind::MalformedRow,
                        "line 1: header must be '[workload,]class,time_ms,calls,unique,flops,transactions'");
        const std::size_t off = with_workload ? 1 : 0;
        for (std::size_t i = 1; i < rows.size(); ++i) {
            const auto &row = rows[i];
            if (row.cells.size() != header.size())
                throw Error(ErrorKind::MalformedRow, at_line(row.line) + ": expected " +
                                                         std::to_string(header.size()) + " cells");
            KernelRecord r;
            if (with_workload) r.workload = row.cells[0];
            r.class_name = row.cells[off];
            r.time_ms = parse_real(row.cells[off + 1], row.line, "time_ms");
            r.calls = parse_count(row.cells[off + 2], row.line, "calls");
            r.unique_kernels = parse_count(row.cells[off + 3], row.line, "unique");
            r.flops = parse_count(row.cells[off + 4], row.line, "flops");
            r.transactions = parse_count(row.cells[off + 5], row.line, "transactions");
            validate(r, row.line);
            records.push_back(std::move(r));
        }
    }
    if (records.empty()) throw Error(ErrorKind::EmptyInput, "kernels input has no records");
    return records;
}

KernelSummary kernel_summary(std::span<const KernelRecord> records, std::uint64_t transaction_bytes) {
    if (records.empty()) throw Error(ErrorKind::EmptyInput, "kernel_summary needs at least one record");
    KernelSummary s;
    std::vector<double> times;
    times.reserve(records.size());
    for (const auto &r : records) {
        s.total_flops += r.flops;
        s.total_transactions += r.transactions;
        times.push_back(r.time_ms);
    }
    std::sort(times.begin(), times.end());
    double ms = 0.0;
    for (double t : times) ms += t;
    s.total_bytes = s.total_transactions * transaction_bytes;
    s.total_time_s = ms / 1000.0;
    return s;
}

Job make_job(std::string name, double t1_minutes, std::map<unsigned, double> speedup) {
    if (name.empty()) throw Error(ErrorKind::InvalidArgument, "job name is empty");
    if (!(t1_minutes > 0.0) || !std::isfinite(t1_minutes))
        throw Error(ErrorKind::NonPositiveTime, "job '" + name + "': t1_minutes must be > 0");
    for (const auto &[width, s] : speedup) {
        if (width == 0) throw Error(ErrorKind::UnsupportedWidth, "job '" + name + "': width 0");
        if (!(s > 0.0) || !std::isfinite(s))
            throw Error(ErrorKind::NonPositiveSpeedup,
                        "job '" + name + "': speedup at width " + std::to_string(width) + " must be > 0");
    }
    const auto one = speedup.find(1);
    if (one != speedup.end() && one->second != 1.0)
        throw Error(ErrorKind::InvalidArgument, "job '" + name + "': speedup at width 1 must be 1.0");
    speedup[1] = 1.0;
    return Job{std::move(name), t1_minutes, std::move(speedup)};
}

namespace {

std::optional<unsigned> width_column(std::string_view column) {
    if (column.size() < 2 || column[0] != 's') return std::nullopt;
    unsigned width = 0;
    const auto *end = column.data() + column.size();
    const auto [ptr, ec] = std::from_chars(column.data() + 1, end, width);
    if (ec != std::errc{} || ptr != end || width == 0) return std::nullopt;
    return width;
}

void check_unique_jobs(const std::vector<Job> &jobs) {
    std::unordered_set<std::string> names;
    for (const auto &j : jobs)
        if (!names.insert(j.name).second) throw Error(ErrorKind::DuplicateJobName, "'" + j.name + "'");
}

} // namespace

std::vector<Job> parse_jobs(std::string_view text, Format format) {
    std::vector<Job> jobs;
    if (format == Format::Json) {
        const auto doc = parse_json_array(text);
        std::size_t index = 0;
        for (const auto &rec : doc) {
            ++index;
            if (!rec.is_object() || !rec.contains("name") || !rec["name"].is_string() || !rec.contains("t1_minutes"))
                throw Error(ErrorKind::MalformedRow, "record " + std::to_string(index) + ": needs 'name' and 't1_minutes'");
            std::map<unsigned, double> speedup;
            for (const auto &[key, value] : rec.items()) {
                if (key == "name" || key == "t1_minutes") continue;
                const auto width = width_column(key);
                if (!width) throw Error(ErrorKind::MalformedRow, "record " + std::to_string(index) + ": unknown field '" + key + "'");
                if (value.is_null()) continue;
                speedup[*width] = json_real(value, index, key);
            }
            jobs.push_back(make_job(rec["name"].get<std::string>(), json_real(rec["t1_minutes"], index, "t1_minutes"),
                                    std::move(speedup)));
        }
    } else {
        const auto rows = detail::read_csv(text);
        if (rows.empty()) return jobs;
        const auto &header = rows.front().cells;
        if (header.size() < 2 || header[0] != "name" || header[1] != "t1_minutes")
            throw Error(ErrorKind::MalformedRow, "line 1: header must start with 'name,t1_minutes'");
        std::vector<unsigned> widths;
        std::set<unsigned> seen;
        for (std::size_t c = 2; c < header.size(); ++c) {
            const auto width = width_column(header[c]);
            if (!width || !seen.insert(*width).second)
                throw Error(ErrorKind::MalformedRow, "line 1: bad or duplicate width column '" + header[c] + "'");
            widths.push_back(*width);
        }
        for (std::size_t r = 1; r < rows.size(); ++r) {
            const auto &row = rows[r];
            if (row.cells.size() != header.size())
                throw Error(ErrorKind::MalformedRow, at_line(row.line) + ": expected " +
                                                         std::to_string(header.size()) + " cells");
            std::map<unsigned, double> speedup;
            for (std::size_t c = 0; c < widths.size(); ++c) {
                const auto &cell = row.cells[c + 2];
                if (!cell.empty()) speedup[widths[c]] = parse_real(cell, row.line, header[c + 2]);
            }
            jobs.push_back(make_job(row.cells[0], parse_real(row.cells[1], row.line, "t1_minutes"), std::move(speedup)));
        }
    }
    check_unique_jobs(jobs);
    return jobs;
}

std::string serialize_jobs(std::span<const Job> jobs, Format format) {
    std::set<unsigned> widths;
    for (const auto &j : jobs)
        for (const auto &[w, s] : j.speedup)
            if (w != 1) widths.insert(w);

    if (format == Format::Json) {
        ordered_json doc = ordered_json::array();
        for (const auto &j : jobs) {
            ordered_json rec;
            rec["name"] = j.name;
            rec["t1_minutes"] = j.t1_minutes;
            for (const auto &[w, s] : j.speedup)
                if (w != 1) rec["s" + std::to_string(w)] = s;
            doc.push_back(std::move(rec));
        }
        return doc.dump(2) + "\n";
    }
    std::string out = "name,t1_minutes";
    for (unsigned w : widths) out += ",s" + std::to_string(w);
    out += "\n";
    for (const auto &j : jobs) {
        out += detail::csv_escape(j.name) + "," + format_double(j.t1_minutes);
        for (unsigned w : widths) {
            out += ",";
            if (const auto it = j.speedup.find(w); it != j.speedup.end()) out += format_double(it->second);
        }
        out += "\n";
    }
    return out;
}

} // namespace perfcharter
