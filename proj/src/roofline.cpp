#include "perfcharter/roofline.hpp"

#include "perfcharter/error.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>

namespace perfcharter {

std::string_view to_string(Precision precision) noexcept {
    switch (precision) {
    case Precision::Double: return "double";
    case Precision::Single: return "single";
    case Precision::Half: return "half";
    }
    return "single";
}

Precision parse_precision(std::string_view text) {
    if (text == "double" || text == "fp64") return Precision::Double;
    if (text == "single" || text == "fp32") return Precision::Single;
    if (text == "half" || text == "fp16") return Precision::Half;
    throw Error(ErrorKind::UnknownPrecision, "'" + std::string(text) + "'");
}

std::string_view to_string(Boundedness b) noexcept {
    switch (b) {
    case Boundedness::MemoryBound: return "memory_bound";
    case Boundedness::ComputeBound: return "compute_bound";
    case Boundedness::AtRidge: return "at_ridge";
    }
    return "memory_bound";
}

double MachineModel::peak(Precision precision) const {
    const auto it = peaks.find(precision);
    if (it == peaks.end())
        throw Error(ErrorKind::UnknownPrecision, "machine '" + name + "' has no " + std::string(to_string(precision)) + " peak");
    return it->second;
}

std::vector<std::string> MachineModel::warnings() const {
    std::vector<std::string> out;
    auto get = [&](Precision p) { return peaks.contains(p) ? peaks.at(p) : std::numeric_limits<double>::quiet_NaN(); };
    const double d = get(Precision::Double), s = get(Precision::Single), h = get(Precision::Half);
    if (!std::isnan(s) && !std::isnan(d) && s < d) out.push_back("single peak is below double peak");
    if (!std::isnan(h) && !std::isnan(s) && h < s) out.push_back("half peak is below single peak");
    return out;
}

MachineModel parse_machine(std::string_view json_text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(json_text);
    } catch (const nlohmann::json::parse_error &e) {
        throw Error(ErrorKind::MalformedRow, std::string("machine config: ") + e.what());
    }
    if (!doc.is_object() || !doc.contains("peaks") || !doc["peaks"].is_object() ||
        !doc.contains("mem_bandwidth_gbps") || !doc["mem_bandwidth_gbps"].is_number())
        throw Error(ErrorKind::MalformedRow, "machine config needs 'peaks' and 'mem_bandwidth_gbps'");

    MachineModel m;
    m.name = doc.value("name", std::string("machine"));
    for (const auto &[key, value] : doc["peaks"].items()) {
        if (!value.is_number()) throw Error(ErrorKind::NonNumericCell, "peak '" + key + "'");
        const double v = value.get<double>();
        if (!(v > 0.0)) throw Error(ErrorKind::InvalidArgument, "peak '" + key + "' must be > 0");
        m.peaks[parse_precision(key)] = v;
    }
    m.mem_bandwidth_gbps = doc["mem_bandwidth_gbps"].get<double>();
    if (!(m.mem_bandwidth_gbps > 0.0)) throw Error(ErrorKind::InvalidArgument, "mem_bandwidth_gbps must be > 0");
    if (doc.contains("extra_bandwidths")) {
        for (const auto &[key, value] : doc["extra_bandwidths"].items()) {
            if (!value.is_number() || !(value.get<double>() > 0.0))
                throw Error(ErrorKind::InvalidArgument, "extra bandwidth '" + key + "' must be > 0");
            m.extra_bandwidths.emplace_back(key, value.get<double>());
        }
    }
    return m;
}

std::string serialize_machine(const MachineModel &machine) {
    nlohmann::ordered_json doc;
    doc["name"] = machine.name;
    doc["peaks"] = nlohmann::ordered_json::object();
    for (const auto &[p, v] : machine.peaks) doc["peaks"][std::string(to_string(p))] = v;
    doc["mem_bandwidth_gbps"] = machine.mem_bandwidth_gbps;
    if (!machine.extra_bandwidths.empty()) {
        doc["extra_bandwidths"] = nlohmann::ordered_json::object();
        for (const auto &[label, v] : machine.extra_bandwidths) doc["extra_bandwidths"][label] = v;
    }
    return doc.dump(2) + "\n";
}

double intensity(std::uint64_t flops, std::uint64_t transactions, std::uint64_t transaction_bytes) {
    if (transaction_bytes == 0) throw Error(ErrorKind::InvalidArgument, "transaction_bytes must be > 0");
    if (transactions == 0) return flops == 0 ? 0.0 : std::numeric_limits<double>::infinity();
    return static_cast<double>(flops) / (static_cast<double>(transactions) * static_cast<double>(transaction_bytes));
}

double throughput(std::uint64_t flops, double time_s) {
    if (!(time_s > 0.0)) throw Error(ErrorKind::NonPositiveTime, "time must be > 0 s");
    return static_cast<double>(flops) / time_s / 1e9;
}

double attainable(const MachineModel &machine, Precision precision, double intensity) {
    if (intensity < 0.0) throw Error(ErrorKind::InvalidArgument, "intensity must be >= 0");
    const double peak = machine.peak(precision);
    if (std::isinf(intensity)) return peak;
    return std::min(peak, machine.mem_bandwidth_gbps * intensity);
}

Boundedness classify(const MachineModel &machine, Precision precision, const RooflinePoint &point) {
    const double ridge = machine.ridge(precision);
    if (std::abs(point.intensity - ridge) <= kRidgeBand * ridge) return Boundedness::AtRidge;
    return point.intensity < ridge ? Boundedness::MemoryBound : Boundedness::ComputeBound;
}

RooflinePoint kernel_point(const KernelRecord &record, std::uint64_t transaction_bytes, Precision precision) {
    return {record.class_name, intensity(record.flops, record.transactions, transaction_bytes),
            throughput(record.flops, record.time_ms / 1000.0), precision};
}

RooflinePoint workload_point(std::span<const KernelRecord> records, std::uint64_t transaction_bytes,
                             std::string name, Precision precision) {
    if (records.empty()) throw Error(ErrorKind::EmptyInput, "workload_point needs at least one record");
    const auto s = kernel_summary(records, transaction_bytes);
    if (!(s.total_time_s > 0.0)) throw Error(ErrorKind::ZeroTotalTime, "records have zero total time");
    if (name.empty()) name = records.front().workload.empty() ? "all" : records.front().workload;
    return {std::move(name), intensity(s.total_flops, s.total_transactions, transaction_bytes),
            throughput(s.total_flops, s.total_time_s), precision};
}

std::vector<std::pair<std::string, std::vector<KernelRecord>>> group_by_workload(std::span<const KernelRecord> records) {
    std::vector<std::pair<std::string, std::vector<KernelRecord>>> groups;
    for (const auto &r : records) {
        const std::string key = r.workload.empty() ? "all" : r.workload;
        auto it = std::find_if(groups.begin(), groups.end(), [&](const auto &g) { return g.first == key; });
        if (it == groups.end()) {
            groups.emplace_back(key, std::vector<KernelRecord>{});
            it = std::prev(groups.end());
        }
        it->second.push_back(r);
    }
    return groups;
}

} // namespace perfcharter
