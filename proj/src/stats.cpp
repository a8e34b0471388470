#include "perfcharter/stats.hpp"

#include "perfcharter/error.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace perfcharter {

namespace {

double frobenius(const Matrix &a) {
    double sum = 0.0;
    for (double v : a.data()) sum += v * v;
    return std::sqrt(sum);
}

double off_diagonal_norm(const Matrix &a) {
    double sum = 0.0;
    for (std::size_t i = 0; i < a.rows(); ++i)
        for (std::size_t j = 0; j < a.cols(); ++j)
            if (i != j) sum += a(i, j) * a(i, j);
    return std::sqrt(sum);
}

} // namespace

StandardizeResult standardize(const MetricMatrix &matrix) {
    const std::size_t n = matrix.rows();
    const std::size_t m = matrix.cols();
    if (n < 2) throw Error(ErrorKind::TooFewRows, "standardize needs at least 2 rows, got " + std::to_string(n));

    StandardizeResult result;
    std::vector<std::size_t> kept;
    for (std::size_t j = 0; j < m; ++j) {
        double mean = 0.0;
        for (std::size_t i = 0; i < n; ++i) mean += matrix.values(i, j);
        mean /= static_cast<double>(n);
        double ss = 0.0;
        for (std::size_t i = 0; i < n; ++i) {
            const double d = matrix.values(i, j) - mean;
            ss += d * d;
        }
        const double sd = std::sqrt(ss / static_cast<double>(n - 1));
        // Identical values can still leave a rounding-level residue in sd.
        if (sd == 0.0 || sd <= 1e-12 * std::abs(mean)) {
            result.dropped.push_back(matrix.metrics[j]);
            continue;
        }
        kept.push_back(j);
        result.standardization.metrics.push_back(matrix.metrics[j]);
        result.standardization.means.push_back(mean);
        result.standardization.stds.push_back(sd);
    }

    result.z = Matrix(n, kept.size());
    for (std::size_t k = 0; k < kept.size(); ++k) {
        const double mean = result.standardization.means[k];
        const double sd = result.standardization.stds[k];
        for (std::size_t i = 0; i < n; ++i) result.z(i, k) = (matrix.values(i, kept[k]) - mean) / sd;
    }
    return result;
}

EigenDecomposition jacobi_eigen(const Matrix &symmetric, double tolerance, unsigned max_sweeps) {
    const std::size_t m = symmetric.rows();
    if (symmetric.cols() != m) throw Error(ErrorKind::NotSymmetric, "matrix is not square");
    if (!(tolerance > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be > 0");

    double max_abs = 0.0;
    for (double v : symmetric.data()) max_abs = std::max(max_abs, std::abs(v));
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j)
            if (std::abs(symmetric(i, j) - symmetric(j, i)) > 1e-10 * std::max(1.0, max_abs))
                throw Error(ErrorKind::NotSymmetric, "entries (" + std::to_string(i) + "," + std::to_string(j) +
                                                         ") differ from their transpose");

    Matrix a = symmetric;
    for (std::size_t i = 0; i < m; ++i)
        for (std::size_t j = i + 1; j < m; ++j) a(i, j) = a(j, i) = 0.5 * (symmetric(i, j) + symmetric(j, i));
    Matrix v = Matrix::identity(m);

    const double target = tolerance * frobenius(a);
    unsigned sweep = 0;
    while (off_diagonal_norm(a) > target) {
        if (sweep == max_sweeps)
            throw Error(ErrorKind::MaxSweepsExceeded,
                        "off-diagonal norm " + std::to_string(off_diagonal_norm(a)) + " after " +
                            std::to_string(max_sweeps) + " sweeps");
        ++sweep;
        for (std::size_t p = 0; p + 1 < m; ++p) {
            for (std::size_t q = p + 1; q < m; ++q) {
                const double apq = a(p, q);
                if (apq == 0.0) continue;
                // Rotation angle that annihilates a(p,q); the smaller root keeps |theta| <= pi/4.
                const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
                const double t = (tau >= 0.0 ? 1.0 : -1.0) / (std::abs(tau) + std::sqrt(1.0 + tau * tau));
                const double c = 1.0 / std::sqrt(1.0 + t * t);
                const double s = t * c;

                for (std::size_t k = 0; k < m; ++k) {
                    const double akp = a(k, p), akq = a(k, q);
                    a(k, p) = c * akp - s * akq;
                    a(k, q) = s * akp + c * akq;
                }
                for (std::size_t k = 0; k < m; ++k) {
                    const double apk = a(p, k), aqk = a(q, k);
                    a(p, k) = c * apk - s * aqk;
                    a(q, k) = s * apk + c * aqk;
                }
                a(p, q) = a(q, p) = 0.0;
                for (std::size_t k = 0; k < m; ++k) {
                    const double vkp = v(k, p), vkq = v(k, q);
                    v(k, p) = c * vkp - s * vkq;
                    v(k, q) = s * vkp + c * vkq;
                }
            }
        }
    }

    std::vector<std::size_t> order(m);
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) { return a(x, x) > a(y, y); });

    EigenDecomposition out;
    out.sweeps = sweep;
    out.vectors = Matrix(m, m);
    for (std::size_t k = 0; k < m; ++k) {
        out.values.push_back(a(order[k], order[k]));
        for (std::size_t i = 0; i < m; ++i) out.vectors(i, k) = v(i, order[k]);
    }
    return out;
}

PcaModel fit_pca(const MetricMatrix &matrix) {
    auto standardized = standardize(matrix);
    const std::size_t n = standardized.z.rows();
    const std::size_t m = standardized.z.cols();
    if (m == 0) throw Error(ErrorKind::TooFewRows, "no metric with non-zero variance");

    Matrix cov(m, m);
    for (std::size_t a = 0; a < m; ++a)
        for (std::size_t b = a; b < m; ++b) {
            double sum = 0.0;
            for (std::size_t i = 0; i < n; ++i) sum += standardized.z(i, a) * standardized.z(i, b);
            cov(a, b) = cov(b, a) = sum / static_cast<double>(n - 1);
        }

    auto eig = jacobi_eigen(cov, kJacobiTolerance, kJacobiMaxSweeps);

    PcaModel model;
    model.workloads = matrix.workloads;
    model.standardization = std::move(standardized.standardization);
    model.dropped = std::move(standardized.dropped);
    model.eigenvectors = std::move(eig.vectors);

    for (std::size_t k = 0; k < m; ++k) {
        std::size_t arg = 0;
        for (std::size_t i = 1; i < m; ++i)
            if (std::abs(model.eigenvectors(i, k)) > std::abs(model.eigenvectors(arg, k)) + 1e-12) arg = i;
        if (model.eigenvectors(arg, k) < 0.0)
            for (std::size_t i = 0; i < m; ++i) model.eigenvectors(i, k) = -model.eigenvectors(i, k);
    }

    double total = 0.0;
    for (double lambda : eig.values) {
        const double clamped = std::max(lambda, 0.0);
        model.eigenvalues.push_back(clamped);
        total += clamped;
    }
    for (double lambda : model.eigenvalues) model.explained.push_back(total > 0.0 ? lambda / total : 0.0);

    model.projections = standardized.z * model.eigenvectors;
    return model;
}

DominantMetric dominant_metric(const PcaModel &model, std::size_t pc) {
    const std::size_t m = model.components();
    if (pc >= m)
        throw Error(ErrorKind::IndexOutOfRange,
                    "component " + std::to_string(pc) + " of " + std::to_string(m));
    auto rank = [&](std::size_t i) {
        return std::pair{canonical_rank(model.metrics()[i]).value_or(std::size(kCanonicalMetrics)), i};
    };
    std::size_t best = 0;
    for (std::size_t i = 1; i < m; ++i) {
        const double a = std::abs(model.eigenvectors(i, pc)), b = std::abs(model.eigenvectors(best, pc));
        if (a > b + 1e-12 || (a >= b - 1e-12 && rank(i) < rank(best))) best = i;
    }
    return {model.metrics()[best], model.eigenvectors(best, pc)};
}

std::vector<double> project(const PcaModel &model, const WorkloadProfile &profile) {
    const auto &s = model.standardization;
    const std::size_t m = s.metrics.size();
    std::vector<double> z(m);
    for (std::size_t j = 0; j < m; ++j) {
        const auto it = profile.metrics.find(s.metrics[j]);
        if (it == profile.metrics.end())
            throw Error(ErrorKind::MissingMetric, "profile '" + profile.name + "' lacks '" + s.metrics[j] + "'");
        z[j] = (it->second - s.means[j]) / s.stds[j];
    }
    std::vector<double> out(m, 0.0);
    for (std::size_t k = 0; k < m; ++k)
        for (std::size_t j = 0; j < m; ++j) out[k] += z[j] * model.eigenvectors(j, k);
    return out;
}

std::vector<double> cumulative_explained(const PcaModel &model) {
    std::vector<double> out(model.explained.size());
    std::partial_sum(model.explained.begin(), model.explained.end(), out.begin());
    return out;
}

} // namespace perfcharter
