#pragma once

#include "perfcharter/model.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace perfcharter {

enum class Precision { Double, Single, Half };

[[nodiscard]] std::string_view to_string(Precision precision) noexcept;
[[nodiscard]] Precision parse_precision(std::string_view text);

/// Compute peaks per precision and memory-bandwidth ceilings of one device.
struct MachineModel {
    std::string name;
    std::map<Precision, double> peaks;  // GFLOP/s
    double mem_bandwidth_gbps = 0.0;
    std::vector<std::pair<std::string, double>> extra_bandwidths;  // label -> GB/s

    /// Throws UnknownPrecision when no peak is configured.
    [[nodiscard]] double peak(Precision precision) const;
    /// Intensity at which the bandwidth slope meets the compute peak.
    [[nodiscard]] double ridge(Precision precision) const { return peak(precision) / mem_bandwidth_gbps; }
    /// Non-fatal oddities, e.g. half peak below single peak.
    [[nodiscard]] std::vector<std::string> warnings() const;
};

/// Parses `machine.json`: {name, peaks:{double,single,half}, mem_bandwidth_gbps,
/// [extra_bandwidths:{label: GB/s}]}.
[[nodiscard]] MachineModel parse_machine(std::string_view json_text);
[[nodiscard]] std::string serialize_machine(const MachineModel &machine);

/// FLOPs per byte of memory traffic. Zero traffic with work gives +inf;
/// zero of both gives 0.
[[nodiscard]] double intensity(std::uint64_t flops, std::uint64_t transactions,
                               std::uint64_t transaction_bytes = kDefaultTransactionBytes);

/// GFLOP/s. Throws NonPositiveTime when time_s <= 0.
[[nodiscard]] double throughput(std::uint64_t flops, double time_s);

/// min(peak, bandwidth * intensity).
[[nodiscard]] double attainable(const MachineModel &machine, Precision precision, double intensity);

struct RooflinePoint {
    std::string name;
    double intensity = 0.0;
    double throughput = 0.0;
    Precision precision = Precision::Single;
};

enum class Boundedness { MemoryBound, ComputeBound, AtRidge };

[[nodiscard]] std::string_view to_string(Boundedness b) noexcept;

/// Relative band around the ridge point treated as "at ridge".
inline constexpr double kRidgeBand = 1e-9;

[[nodiscard]] Boundedness classify(const MachineModel &machine, Precision precision, const RooflinePoint &point);

/// Point for a single kernel record.
[[nodiscard]] RooflinePoint kernel_point(const KernelRecord &record,
                                         std::uint64_t transaction_bytes = kDefaultTransactionBytes,
                                         Precision precision = Precision::Single);

/// Aggregate point: total FLOPs over total bytes and over total time.
/// Throws EmptyInput or ZeroTotalTime.
[[nodiscard]] RooflinePoint workload_point(std::span<const KernelRecord> records,
                                           std::uint64_t transaction_bytes = kDefaultTransactionBytes,
                                           std::string name = {}, Precision precision = Precision::Single);

/// Records grouped by their workload column, in order of first appearance.
[[nodiscard]] std::vector<std::pair<std::string, std::vector<KernelRecord>>>
group_by_workload(std::span<const KernelRecord> records);

} // namespace perfcharter
