#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <vector>

#include "ggls/errors.hpp"

namespace ggls {

enum class KernelKind { linear, rbf };

/// Requested kernel. For rbf, either an explicit bandwidth sigma or the
/// median heuristic (sigma^2 = median of the positive squared pairwise
/// distances).
struct KernelParams {
    KernelKind kind = KernelKind::rbf;
    bool median_bandwidth = true;
    double bandwidth = 0.0; // sigma, used when median_bandwidth is false
};

/// Kernel matrix over the joint sample set; columns 1..source_count are
/// source samples. bandwidth_sq records the realized sigma^2 so the exact
/// same kernel can be evaluated against new samples later.
struct KernelMatrix {
    Eigen::MatrixXd k;
    Eigen::Index source_count = 0;
    KernelKind kind = KernelKind::linear;
    double bandwidth_sq = 0.0;
};

namespace detail {

inline Eigen::MatrixXd squared_distances(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const Eigen::VectorXd na = a.colwise().squaredNorm();
    const Eigen::VectorXd nb = b.colwise().squaredNorm();
    Eigen::MatrixXd d2 = (-2.0 * (a.transpose() * b));
    d2.colwise() += na;
    d2.rowwise() += nb.transpose();
    return d2.cwiseMax(0.0);
}

inline double median_positive(const Eigen::MatrixXd& d2) {
    std::vector<double> vals;
    vals.reserve(static_cast<std::size_t>(d2.size()));
    for (Eigen::Index j = 0; j < d2.cols(); ++j)
        for (Eigen::Index i = 0; i < j; ++i)
            if (d2(i, j) > 0.0) vals.push_back(d2(i, j));
    if (vals.empty()) return 1.0; // all samples coincide
    std::sort(vals.begin(), vals.end());
    const std::size_t n = vals.size();
    return n % 2 == 1 ? vals[n / 2] : 0.5 * (vals[n / 2 - 1] + vals[n / 2]);
}

} // namespace detail

inline KernelMatrix kernel_matrix(const Eigen::MatrixXd& features,
                                  const KernelParams& params,
                                  Eigen::Index source_count) {
    if (!features.allFinite())
        throw NumericError("kernel: non-finite features");
    if (params.kind == KernelKind::rbf && !params.median_bandwidth && !(params.bandwidth > 0.0))
        throw NumericError("kernel: bandwidth must be positive");

    KernelMatrix km;
    km.kind = params.kind;
    km.source_count = source_count;
    if (params.kind == KernelKind::linear) {
        km.k = features.transpose() * features;
    } else {
        const Eigen::MatrixXd d2 = detail::squared_distances(features, features);
        km.bandwidth_sq = params.median_bandwidth ? detail::median_positive(d2)
                                                  : params.bandwidth * params.bandwidth;
        km.k = (-d2 / (2.0 * km.bandwidth_sq)).array().exp();
    }
    km.k = 0.5 * (km.k + km.k.transpose().eval());
    return km;
}

/// Kernel between stored training samples (rows) and new samples (columns),
/// with the bandwidth frozen at its training value.
inline Eigen::MatrixXd kernel_cross(const Eigen::MatrixXd& train_features,
                                    const Eigen::MatrixXd& new_features,
                                    KernelKind kind, double bandwidth_sq) {
    if (train_features.rows() != new_features.rows())
        throw NumericError("kernel: feature dimension mismatch");
    if (!train_features.allFinite() || !new_features.allFinite())
        throw NumericError("kernel: non-finite features");
    if (kind == KernelKind::linear)
        return train_features.transpose() * new_features;
    if (!(bandwidth_sq > 0.0))
        throw NumericError("kernel: bandwidth must be positive");
    const Eigen::MatrixXd d2 = detail::squared_distances(train_features, new_features);
    return (-d2 / (2.0 * bandwidth_sq)).array().exp();
}

} // namespace ggls
