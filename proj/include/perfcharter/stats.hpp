#pragma once

#include "perfcharter/matrix.hpp"
#include "perfcharter/model.hpp"

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

namespace perfcharter {

/// Column-wise z-score parameters. `stds` uses the n-1 divisor.
struct Standardization {
    std::vector<std::string> metrics;
    std::vector<double> means;
    std::vector<double> stds;
};

struct StandardizeResult {
    Matrix z;                          // n x retained
    Standardization standardization;
    std::vector<std::string> dropped;  // zero-variance columns
};

[[nodiscard]] StandardizeResult standardize(const MetricMatrix &matrix);

struct EigenDecomposition {
    std::vector<double> values;  // descending
    Matrix vectors;              // column k pairs with values[k]
    unsigned sweeps = 0;
};

inline constexpr double kJacobiTolerance = 1e-12;
inline constexpr unsigned kJacobiMaxSweeps = 100;

/// Cyclic Jacobi eigensolver for a real symmetric matrix. Converges when the
/// off-diagonal Frobenius norm drops to `tolerance * ||A||_F`. Throws
/// NotSymmetric or MaxSweepsExceeded.
[[nodiscard]] EigenDecomposition jacobi_eigen(const Matrix &symmetric, double tolerance = kJacobiTolerance,
                                              unsigned max_sweeps = kJacobiMaxSweeps);

/// Principal components of a standardized metric matrix.
///
/// Eigenvectors are unit columns with their largest-magnitude entry positive.
struct PcaModel {
    std::vector<std::string> workloads;
    Standardization standardization;
    std::vector<std::string> dropped;
    std::vector<double> eigenvalues;
    Matrix eigenvectors;   // m x m
    Matrix projections;    // n x m
    std::vector<double> explained;

    [[nodiscard]] std::size_t components() const noexcept { return eigenvalues.size(); }
    [[nodiscard]] const std::vector<std::string> &metrics() const noexcept { return standardization.metrics; }
};

[[nodiscard]] PcaModel fit_pca(const MetricMatrix &matrix);

struct DominantMetric {
    std::string metric;
    double loading = 0.0;
};

/// Metric with the largest |loading| on component `pc`. Ties go to the
/// earlier metric, and metrics are held in canonical order.
[[nodiscard]] DominantMetric dominant_metric(const PcaModel &model, std::size_t pc);

/// Coordinates of an arbitrary workload in the fitted component space.
[[nodiscard]] std::vector<double> project(const PcaModel &model, const WorkloadProfile &profile);

/// Running sum of `explained`.
[[nodiscard]] std::vector<double> cumulative_explained(const PcaModel &model);

} // namespace perfcharter
