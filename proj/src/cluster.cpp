#include "perfcharter/cluster.hpp"

#include "parallel.hpp"
#include "perfcharter/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace perfcharter {

Matrix pairwise_distances(const Matrix &points, unsigned threads) {
    const std::size_t n = points.rows();
    if (n < 2) throw Error(ErrorKind::TooFewRows, "pairwise_distances needs at least 2 rows");
    Matrix d(n, n);
    detail::parallel_blocks(n, threads, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i)
            for (std::size_t j = 0; j < n; ++j) {
                if (i == j) continue;
                // Always accumulate in (min, max) row order so d(i,j) == d(j,i) bit for bit.
                const auto a = points.row(std::min(i, j));
                const auto b = points.row(std::max(i, j));
                double sum = 0.0;
                for (std::size_t k = 0; k < a.size(); ++k) sum += (a[k] - b[k]) * (a[k] - b[k]);
                d(i, j) = std::sqrt(sum);
            }
    });
    return d;
}

std::string_view to_string(Linkage linkage) noexcept {
    switch (linkage) {
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
    case Linkage::Average: return "average";
    }
    return "average";
}

Linkage parse_linkage(std::string_view text) {
    if (text == "single") return Linkage::Single;
    if (text == "complete") return Linkage::Complete;
    if (text == "average" || text == "avg") return Linkage::Average;
    throw Error(ErrorKind::InvalidArgument, "unknown linkage '" + std::string(text) + "'");
}

Dendrogram agglomerate(const Matrix &distances, Linkage linkage, std::vector<std::string> leaf_names) {
    const std::size_t n = distances.rows();
    if (distances.cols() != n) throw Error(ErrorKind::InvalidDistanceMatrix, "matrix is not square");
    double scale = 0.0;
    for (double v : distances.data()) {
        if (!std::isfinite(v) || v < 0.0)
            throw Error(ErrorKind::InvalidDistanceMatrix, "entries must be finite and non-negative");
        scale = std::max(scale, v);
    }
    for (std::size_t i = 0; i < n; ++i) {
        if (distances(i, i) != 0.0) throw Error(ErrorKind::InvalidDistanceMatrix, "non-zero diagonal");
        for (std::size_t j = i + 1; j < n; ++j)
            if (std::abs(distances(i, j) - distances(j, i)) > 1e-12 * std::max(1.0, scale))
                throw Error(ErrorKind::InvalidDistanceMatrix,
                            "asymmetric at (" + std::to_string(i) + "," + std::to_string(j) + ")");
    }
    if (leaf_names.empty()) {
        for (std::size_t i = 0; i < n; ++i) leaf_names.push_back(std::to_string(i));
    } else if (leaf_names.size() != n) {
        throw Error(ErrorKind::InvalidArgument, "leaf name count does not match the distance matrix");
    }

    Dendrogram tree;
    tree.leaves = std::move(leaf_names);
    if (n < 2) return tree;

    // Slot s holds one active cluster; `link` keeps the single/complete
    // distance or, for average linkage, the sum of member-pair distances.
    std::vector<std::size_t> node_id(n), size(n, 1);
    std::iota(node_id.begin(), node_id.end(), 0);
    std::vector<bool> active(n, true);
    Matrix link(n, n);
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) link(i, j) = (i == j) ? 0.0 : 0.5 * (distances(i, j) + distances(j, i));

    auto value = [&](std::size_t a, std::size_t b) {
        return linkage == Linkage::Average ? link(a, b) / static_cast<double>(size[a] * size[b]) : link(a, b);
    };

    double last_height = 0.0;
    for (std::size_t step = 0; step + 1 < n; ++step) {
        std::size_t best_a = n, best_b = n;
        double best = std::numeric_limits<double>::infinity();
        std::pair<std::size_t, std::size_t> best_ids{n * 2, n * 2};
        for (std::size_t a = 0; a < n; ++a) {
            if (!active[a]) continue;
            for (std::size_t b = a + 1; b < n; ++b) {
                if (!active[b]) continue;
                const double d = value(a, b);
                const std::pair ids{std::min(node_id[a], node_id[b]), std::max(node_id[a], node_id[b])};
                if (d < best || (d == best && ids < best_ids)) {
                    best = d;
                    best_a = a;
                    best_b = b;
                    best_ids = ids;
                }
            }
        }

        // Rounding in the average update can dip a hair below the previous
        // height; the exact sequence is non-decreasing.
        const double height = std::max(best, last_height);
        last_height = height;
        tree.merges.push_back({best_ids.first, best_ids.second, height, size[best_a] + size[best_b]});

        for (std::size_t c = 0; c < n; ++c) {
            if (!active[c] || c == best_a || c == best_b) continue;
            double merged = 0.0;
            switch (linkage) {
            case Linkage::Single: merged = std::min(link(best_a, c), link(best_b, c)); break;
            case Linkage::Complete: merged = std::max(link(best_a, c), link(best_b, c)); break;
            case Linkage::Average: merged = link(best_a, c) + link(best_b, c); break;
            }
            link(best_a, c) = link(c, best_a) = merged;
        }
        size[best_a] += size[best_b];
        node_id[best_a] = n + step;
        active[best_b] = false;
    }
    return tree;
}

namespace {

Clusters partition_after(const Dendrogram &tree, std::size_t merges_applied) {
    const std::size_t n = tree.leaf_count();
    // Union-find over node ids; each merge links its two children to the new node.
    std::vector<std::size_t> parent(n + tree.merges.size());
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](std::size_t x) {
        while (parent[x] != x) x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t k = 0; k < merges_applied; ++k) {
        parent[find(tree.merges[k].left)] = n + k;
        parent[find(tree.merges[k].right)] = n + k;
    }

    Clusters clusters;
    std::vector<std::size_t> slot(parent.size(), static_cast<std::size_t>(-1));
    for (std::size_t leaf = 0; leaf < n; ++leaf) {
        const std::size_t root = find(leaf);
        if (slot[root] == static_cast<std::size_t>(-1)) {
            slot[root] = clusters.size();
            clusters.emplace_back();
        }
        clusters[slot[root]].push_back(leaf);
    }
    return clusters;
}

} // namespace

Clusters cut(const Dendrogram &dendrogram, double height) {
    std::size_t applied = 0;
    while (applied < dendrogram.merges.size() && dendrogram.merges[applied].height < height) ++applied;
    return partition_after(dendrogram, applied);
}

KCut cut_k(const Dendrogram &dendrogram, std::size_t k) {
    const std::size_t n = dendrogram.leaf_count();
    if (k < 1 || k > n)
        throw Error(ErrorKind::KOutOfRange, "k = " + std::to_string(k) + " with " + std::to_string(n) + " leaves");
    KCut out;
    out.clusters = partition_after(dendrogram, n - k);
    if (k > 1) out.threshold = dendrogram.merges[n - k].height;
    return out;
}

std::vector<std::string> select_representatives(const Clusters &clusters, const Matrix &distances,
                                                const std::vector<std::string> &names) {
    std::vector<std::string> out;
    for (const auto &cluster : clusters) {
        if (cluster.empty()) continue;
        for (std::size_t id : cluster)
            if (id >= distances.rows() || id >= names.size())
                throw Error(ErrorKind::IndexOutOfRange, "cluster member " + std::to_string(id));

        // Sum in name order so the totals do not depend on row order.
        std::vector<std::size_t> members = cluster;
        std::sort(members.begin(), members.end(),
                  [&](std::size_t a, std::size_t b) { return names[a] < names[b]; });

        std::size_t best = members.front();
        double best_sum = 0.0;
        for (std::size_t other : members) best_sum += distances(best, other);
        for (std::size_t candidate : members) {
            double sum = 0.0;
            for (std::size_t other : members) sum += distances(candidate, other);
            const double slack = 1e-12 * std::max(1.0, best_sum);
            if (sum < best_sum - slack) {
                best = candidate;
                best_sum = sum;
            }
        }
        out.push_back(names[best]);
    }
    return out;
}

SubsetReport coverage(const MetricMatrix &full, const std::vector<std::string> &subset) {
    if (subset.empty()) throw Error(ErrorKind::InvalidArgument, "subset is empty");
    std::vector<std::size_t> rows;
    for (const auto &name : subset) {
        const auto idx = full.workload_index(name);
        if (!idx) throw Error(ErrorKind::UnknownWorkload, "'" + name + "'");
        rows.push_back(*idx);
    }

    SubsetReport report;
    report.selected = subset;
    for (std::size_t j = 0; j < full.cols(); ++j) {
        const auto column = full.values.column(j);
        const auto [lo_all, hi_all] = std::minmax_element(column.begin(), column.end());
        CoverageRange range{full.metrics[j]};
        if (*hi_all == *lo_all) {
            range.degenerate = true;
        } else {
            double lo = column[rows.front()], hi = lo;
            for (std::size_t r : rows) {
                lo = std::min(lo, column[r]);
                hi = std::max(hi, column[r]);
            }
            const double span = *hi_all - *lo_all;
            range.low_pct = std::clamp(100.0 * (lo - *lo_all) / span, 0.0, 100.0);
            range.high_pct = std::clamp(100.0 * (hi - *lo_all) / span, 0.0, 100.0);
        }
        report.coverage.push_back(std::move(range));
    }
    return report;
}

} // namespace perfcharter
