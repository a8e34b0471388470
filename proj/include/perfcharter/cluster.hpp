#pragma once

#include "perfcharter/matrix.hpp"
#include "perfcharter/model.hpp"

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

namespace perfcharter {

/// Euclidean distances between the rows of `points`. Rows may be split across
/// `threads` workers; the result does not depend on the split.
[[nodiscard]] Matrix pairwise_distances(const Matrix &points, unsigned threads = 1);

enum class Linkage { Single, Complete, Average };

[[nodiscard]] std::string_view to_string(Linkage linkage) noexcept;
/// Accepts single|complete|average|avg.
[[nodiscard]] Linkage parse_linkage(std::string_view text);

struct Merge {
    std::size_t left = 0;   // node ids: 0..n-1 leaves, n+k for the k-th merge
    std::size_t right = 0;
    double height = 0.0;
    std::size_t size = 0;

    friend bool operator==(const Merge &, const Merge &) = default;
};

struct Dendrogram {
    std::vector<std::string> leaves;
    std::vector<Merge> merges;  // n-1 entries, non-decreasing height

    [[nodiscard]] std::size_t leaf_count() const noexcept { return leaves.size(); }
};

/// Agglomerative clustering over a distance matrix. At each step the closest
/// pair of active clusters is merged; equal distances go to the pair with the
/// smallest (min id, max id). Throws InvalidDistanceMatrix.
[[nodiscard]] Dendrogram agglomerate(const Matrix &distances, Linkage linkage,
                                     std::vector<std::string> leaf_names = {});

/// Leaf indices per cluster, ascending; clusters ordered by smallest leaf.
using Clusters = std::vector<std::vector<std::size_t>>;

/// Partition formed by the merges whose height is strictly below `height`.
[[nodiscard]] Clusters cut(const Dendrogram &dendrogram, double height);

struct KCut {
    Clusters clusters;
    double threshold = std::numeric_limits<double>::infinity();
};

/// Undoes the last k-1 merges. `threshold` is the height of the first undone
/// merge (+inf for k = 1). Throws KOutOfRange.
[[nodiscard]] KCut cut_k(const Dendrogram &dendrogram, std::size_t k);

/// Medoid of each cluster (minimal summed distance to the other members),
/// ties resolved by the lexicographically smallest name.
[[nodiscard]] std::vector<std::string> select_representatives(const Clusters &clusters, const Matrix &distances,
                                                              const std::vector<std::string> &names);

struct CoverageRange {
    std::string metric;
    double low_pct = 0.0;
    double high_pct = 100.0;
    bool degenerate = false;  // metric constant over the full set
};

struct SubsetReport {
    std::vector<std::string> selected;
    std::vector<CoverageRange> coverage;  // in metric order
};

/// Where the subset's per-metric min and max sit inside the full set's range,
/// as percentages. Throws UnknownWorkload.
[[nodiscard]] SubsetReport coverage(const MetricMatrix &full, const std::vector<std::string> &subset);

} // namespace perfcharter
