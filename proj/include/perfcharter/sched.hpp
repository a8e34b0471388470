#pragma once

#include "perfcharter/model.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace perfcharter {

/// P identical GPUs and the widths a job may be launched with.
struct ClusterSpec {
    unsigned gpu_count = 1;
    std::vector<unsigned> widths;  // ascending, unique, contains 1, max <= gpu_count

    /// Powers of two up to `gpu_count`.
    [[nodiscard]] static ClusterSpec with_default_widths(unsigned gpu_count);
    /// Validates and normalizes an explicit width set.
    [[nodiscard]] static ClusterSpec make(unsigned gpu_count, std::vector<unsigned> widths);

    [[nodiscard]] bool allows(unsigned width) const;
    [[nodiscard]] unsigned max_width() const { return widths.back(); }
};

struct Placement {
    std::string job;
    unsigned width = 0;
    std::vector<unsigned> gpu_ids;
    double start = 0.0;  // minutes
    double end = 0.0;

    friend bool operator==(const Placement &, const Placement &) = default;
};

struct Schedule {
    unsigned gpu_count = 0;
    std::vector<Placement> placements;  // ordered by (start, job input order)
    double makespan = 0.0;
    std::string method;

    friend bool operator==(const Schedule &, const Schedule &) = default;
};

/// t1 / speedup(width). Throws UnsupportedWidth for unmeasured widths.
[[nodiscard]] double runtime(const Job &job, unsigned width);

/// speedup(width) / width.
[[nodiscard]] double scaling_efficiency(const Job &job, unsigned width);

/// Jobs one after another, each on max(W) GPUs.
[[nodiscard]] Schedule naive_schedule(std::span<const Job> jobs, const ClusterSpec &cluster);

/// Event-driven greedy placement. Whenever GPUs free up, the highest-priority
/// unstarted job whose width fits the free count is started; this repeats
/// until nothing else fits. GPUs are handed out lowest index first.
/// `widths[j]` is the width of jobs[j]; `priority` lists job indices.
[[nodiscard]] Schedule list_schedule(std::span<const Job> jobs, std::span<const unsigned> widths,
                                     std::span<const std::size_t> priority, const ClusterSpec &cluster);
/// Same, with input order as priority.
[[nodiscard]] Schedule list_schedule(std::span<const Job> jobs, std::span<const unsigned> widths,
                                     const ClusterSpec &cluster);

inline constexpr std::size_t kPermutationLimit = 8;
inline constexpr std::size_t kExactLimit = 10;

struct SearchResult {
    Schedule schedule;
    std::uint64_t explored = 0;
    std::vector<unsigned> widths;
    std::vector<std::size_t> priority;
};

/// Best list schedule over every width assignment and every priority order.
/// Ties keep the lexicographically smallest (width vector, permutation), so
/// the answer does not depend on `threads`. Throws SearchSpaceTooLarge when
/// there are more than `limit` jobs.
[[nodiscard]] SearchResult permutation_search(std::span<const Job> jobs, const ClusterSpec &cluster,
                                              std::size_t limit = kPermutationLimit, unsigned threads = 1);

/// Cheap list-scheduling heuristic: for each width cap, every job takes its
/// fastest measured width under the cap and jobs go longest-first. Keeps the
/// best cap. Never worse than running everything at max width in input order.
[[nodiscard]] Schedule heuristic_schedule(std::span<const Job> jobs, const ClusterSpec &cluster);

struct ExactStats {
    std::uint64_t nodes = 0;
};

/// Provably minimal makespan by branch and bound. Jobs may start at time 0 or
/// when another job ends, so schedules that leave GPUs idle on purpose are
/// reachable. Throws SearchSpaceTooLarge above `limit` jobs.
[[nodiscard]] Schedule exact_schedule(std::span<const Job> jobs, const ClusterSpec &cluster,
                                      std::size_t limit = kExactLimit, ExactStats *stats = nullptr);

/// naive.makespan - best.makespan. Throws JobSetMismatch.
[[nodiscard]] double savings(const Schedule &naive, const Schedule &best);

/// Problems found in `schedule` (empty when valid): GPU overlap, jobs missing
/// or repeated, wrong runtimes or widths, makespan not the latest end.
[[nodiscard]] std::vector<std::string> validate_schedule(const Schedule &schedule, std::span<const Job> jobs,
                                                         const ClusterSpec &cluster);

/// One text row per GPU, `columns` characters across the makespan.
[[nodiscard]] std::string render_gantt_ascii(const Schedule &schedule, unsigned columns = 64);

} // namespace perfcharter
