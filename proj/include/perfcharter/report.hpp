#pragma once

#include "perfcharter/cluster.hpp"
#include "perfcharter/roofline.hpp"
#include "perfcharter/sched.hpp"
#include "perfcharter/stats.hpp"

#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace perfcharter {

/// Human-readable number with `digits` significant digits.
[[nodiscard]] std::string format_sig(double value, int digits = 6);

/// pca.json: metrics, means, stds, eigenvalues, eigenvectors (row-major),
/// explained, projections and the dominant metric per PC.
[[nodiscard]] std::string pca_json(const PcaModel &model);

/// dendrogram.json: leaves and merges[{left,right,height,size}].
[[nodiscard]] std::string dendrogram_json(const Dendrogram &dendrogram, Linkage linkage);

/// subset_report.json: clusters, selected, coverage map.
[[nodiscard]] std::string subset_report_json(const SubsetReport &report, const Clusters &clusters,
                                             const std::vector<std::string> &names, double threshold);

/// schedule.json: {gpu_count, placements:[{job,width,gpu_ids,start,end}], makespan_min, method}.
[[nodiscard]] std::string schedule_json(const Schedule &schedule);

/// roofline.csv: name,intensity,throughput,classification.
[[nodiscard]] std::string roofline_csv(std::span<const RooflinePoint> points, const MachineModel &machine);

[[nodiscard]] std::string dendrogram_svg(const Dendrogram &dendrogram, double cut_height = -1.0);
/// Log-log axes, one ceiling per configured precision. Points with zero or
/// infinite intensity cannot be placed and are skipped.
[[nodiscard]] std::string roofline_svg(std::span<const RooflinePoint> points, const MachineModel &machine);
[[nodiscard]] std::string gantt_svg(const Schedule &schedule);

/// Writes through a temporary file in the same directory, then renames.
void write_atomic(const std::filesystem::path &path, std::string_view content);

} // namespace perfcharter
