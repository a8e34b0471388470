#pragma once

#include "perfcharter/matrix.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace perfcharter {

// The eight canonical workload characteristics, in their fixed order. Any
// other column name in an input file is accepted as an extra metric and
// ordered after these.
inline constexpr std::string_view kCanonicalMetrics[] = {
    "pcie_util_pct",          "gpu_util_pct",      "cpu_util_pct",
    "ddr_footprint_mb",       "hbm2_footprint_mb", "flop_throughput_gflops",
    "mem_throughput_gbps",    "epochs",
};

/// Position of `name` in the canonical list, or nullopt for extras.
[[nodiscard]] std::optional<std::size_t> canonical_rank(std::string_view name) noexcept;

enum class Suite { MLPerf, DAWNBench, DeepBench, Other };

[[nodiscard]] std::string_view to_string(Suite suite) noexcept;
[[nodiscard]] Suite parse_suite(std::string_view text) noexcept;

enum class Format { Csv, Json };

struct WorkloadProfile {
    std::string name;
    Suite suite = Suite::Other;
    std::map<std::string, double> metrics;
};

/// Workloads as rows, metrics as columns. No missing cells.
struct MetricMatrix {
    std::vector<std::string> workloads;
    std::vector<Suite> suites;
    std::vector<std::string> metrics;
    Matrix values;

    [[nodiscard]] std::size_t rows() const noexcept { return workloads.size(); }
    [[nodiscard]] std::size_t cols() const noexcept { return metrics.size(); }
    [[nodiscard]] std::optional<std::size_t> workload_index(std::string_view name) const;
    [[nodiscard]] std::optional<std::size_t> metric_index(std::string_view name) const;
    [[nodiscard]] WorkloadProfile profile(std::size_t row) const;

    friend bool operator==(const MetricMatrix &, const MetricMatrix &) = default;
};

struct ProfileParseResult {
    MetricMatrix matrix;
    /// Columns removed because at least one workload had no value.
    std::vector<std::string> dropped;
};

/// Reads `profiles.csv` (`name,suite,<metric...>`) or its JSON mirror (an
/// array of objects with the same keys). Empty cells / null / absent keys
/// count as missing.
[[nodiscard]] ProfileParseResult parse_profiles(std::string_view text, Format format);
[[nodiscard]] std::string serialize_profiles(const MetricMatrix &matrix, Format format);

struct KernelRecord {
    std::string workload; // empty when the input has no workload column
    std::string class_name;
    double time_ms = 0.0;
    std::uint64_t calls = 0;
    std::uint64_t unique_kernels = 0;
    std::uint64_t flops = 0;
    std::uint64_t transactions = 0;

    friend bool operator==(const KernelRecord &, const KernelRecord &) = default;
};

inline constexpr std::uint64_t kDefaultTransactionBytes = 32;

/// Reads `kernels.csv` (`[workload,]class,time_ms,calls,unique,flops,transactions`)
/// or its JSON mirror. Throws EmptyInput when there are no rows.
[[nodiscard]] std::vector<KernelRecord> parse_kernels(std::string_view text, Format format);

struct KernelSummary {
    std::uint64_t total_flops = 0;
    std::uint64_t total_transactions = 0;
    std::uint64_t total_bytes = 0;
    double total_time_s = 0.0;
};

/// Totals over the records. Times are summed in ascending order so the result
/// does not depend on record order.
[[nodiscard]] KernelSummary kernel_summary(std::span<const KernelRecord> records,
                                           std::uint64_t transaction_bytes = kDefaultTransactionBytes);

struct Job {
    std::string name;
    double t1_minutes = 0.0;
    std::map<unsigned, double> speedup; // width -> speedup over one device; always has {1: 1.0}

    friend bool operator==(const Job &, const Job &) = default;
};

/// Validates and normalizes a job (inserts speedup{1} = 1.0).
[[nodiscard]] Job make_job(std::string name, double t1_minutes, std::map<unsigned, double> speedup);

/// Reads `jobs.csv` (`name,t1_minutes,s<k>...`) or its JSON mirror.
[[nodiscard]] std::vector<Job> parse_jobs(std::string_view text, Format format = Format::Csv);
[[nodiscard]] std::string serialize_jobs(std::span<const Job> jobs, Format format = Format::Csv);

/// Shortest decimal text that parses back to the same double.
[[nodiscard]] std::string format_double(double value);

} // namespace perfcharter
