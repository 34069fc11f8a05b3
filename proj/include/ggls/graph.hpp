#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <numeric>
#include <vector>

#include "ggls/errors.hpp"

namespace ggls {

/// Graph Laplacian L = S - G of a symmetric similarity matrix, S diagonal
/// with the row sums of G.
struct Laplacian {
    Eigen::MatrixXd l;
};

/// Column-stochastic attention matrix B over the per-sample landmark sets.
/// Each column has at most neighbor_count + 1 nonzeros (its neighbors plus
/// the sample itself).
struct AttentionMatrix {
    Eigen::SparseMatrix<double> b;
    int neighbor_count = 0;
};

namespace detail {

/// Columns scaled to unit norm; all-zero columns stay zero so that their
/// cosine against anything is 0.
inline Eigen::MatrixXd unit_columns(const Eigen::MatrixXd& m) {
    Eigen::MatrixXd out = m;
    for (Eigen::Index j = 0; j < out.cols(); ++j) {
        const double n = out.col(j).norm();
        if (n > 0.0) out.col(j) /= n;
    }
    return out;
}

/// Indices of the k columns most cosine-similar to column j, excluding j,
/// similarity descending, ties broken by lower index.
inline std::vector<Eigen::Index> top_k_neighbors(const Eigen::MatrixXd& cosine,
                                                 Eigen::Index j, int k) {
    std::vector<Eigen::Index> idx;
    idx.reserve(static_cast<std::size_t>(cosine.rows()) - 1);
    for (Eigen::Index i = 0; i < cosine.rows(); ++i)
        if (i != j) idx.push_back(i);
    std::partial_sort(idx.begin(), idx.begin() + k, idx.end(),
                      [&](Eigen::Index a, Eigen::Index b) {
                          if (cosine(a, j) != cosine(b, j)) return cosine(a, j) > cosine(b, j);
                          return a < b;
                      });
    idx.resize(static_cast<std::size_t>(k));
    return idx;
}

} // namespace detail

/// Mutual k-nearest-neighbor cosine graph: entry (i, j) holds the cosine
/// similarity when i is among the k nearest of j or j among the k nearest
/// of i, and 0 otherwise. The diagonal is excluded from the search.
inline Eigen::MatrixXd knn_cosine_graph(const Eigen::MatrixXd& features, int k) {
    const Eigen::Index n = features.cols();
    if (k < 1 || k >= n)
        throw ConfigError("graph: neighbor count must satisfy 1 <= k < N");

    const Eigen::MatrixXd un = detail::unit_columns(features);
    Eigen::MatrixXd cosine = un.transpose() * un;
    cosine = 0.5 * (cosine + cosine.transpose().eval());

    Eigen::MatrixXd g = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index j = 0; j < n; ++j)
        for (Eigen::Index i : detail::top_k_neighbors(cosine, j, k)) {
            g(i, j) = cosine(i, j);
            g(j, i) = cosine(i, j);
        }
    return g;
}

inline Laplacian laplacian(const Eigen::MatrixXd& similarity) {
    if (similarity.rows() != similarity.cols() ||
        (similarity - similarity.transpose()).cwiseAbs().maxCoeff() > 1e-10)
        throw NumericError("graph: similarity matrix must be symmetric");
    Laplacian lap;
    lap.l = Eigen::MatrixXd(similarity.rowwise().sum().asDiagonal()) - similarity;
    return lap;
}

/// Normalizes attention coefficients column-wise (each column divided by
/// the sum over its landmark set). Columns whose sum is below 1e-12 fall
/// back to the indicator of the sample itself.
inline AttentionMatrix normalize_attention_columns(const Eigen::SparseMatrix<double>& coeffs,
                                                   int neighbor_count) {
    const Eigen::Index n = coeffs.cols();
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(coeffs.nonZeros()) + static_cast<std::size_t>(n));
    for (Eigen::Index j = 0; j < n; ++j) {
        double sum = 0.0;
        for (Eigen::SparseMatrix<double>::InnerIterator it(coeffs, j); it; ++it)
            sum += it.value();
        if (sum < 1e-12) {
            triplets.emplace_back(j, j, 1.0);
        } else {
            for (Eigen::SparseMatrix<double>::InnerIterator it(coeffs, j); it; ++it)
                if (it.value() != 0.0) triplets.emplace_back(it.row(), j, it.value() / sum);
        }
    }
    AttentionMatrix att;
    att.neighbor_count = neighbor_count;
    att.b.resize(coeffs.rows(), n);
    att.b.setFromTriplets(triplets.begin(), triplets.end());
    return att;
}

/// Identity attention, the initialization state before any projection
/// exists.
inline AttentionMatrix identity_attention(Eigen::Index n, int neighbor_count) {
    AttentionMatrix att;
    att.neighbor_count = neighbor_count;
    att.b.resize(n, n);
    att.b.setIdentity();
    return att;
}

/// Attention over projected features u_j = P' k_j: every column j holds the
/// cosine similarities of its k nearest projected neighbors (plus itself),
/// negatives clamped to 0, normalized to sum to 1.
inline AttentionMatrix attention_matrix(const Eigen::MatrixXd& projection,
                                        const Eigen::MatrixXd& kernel_columns, int k) {
    const Eigen::Index n = kernel_columns.cols();
    if (k < 1 || k >= n)
        throw ConfigError("graph: neighbor count must satisfy 1 <= k < N");
    if (projection.rows() != kernel_columns.rows())
        throw NumericError("graph: projection and kernel shapes disagree");

    const Eigen::MatrixXd projected = projection.transpose() * kernel_columns; // C x n
    const Eigen::MatrixXd un = detail::unit_columns(projected);
    Eigen::MatrixXd cosine = un.transpose() * un;
    cosine = 0.5 * (cosine + cosine.transpose().eval());

    Eigen::SparseMatrix<double> coeffs(n, n);
    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(static_cast<std::size_t>(n) * static_cast<std::size_t>(k + 1));
    for (Eigen::Index j = 0; j < n; ++j) {
        triplets.emplace_back(j, j, std::max(cosine(j, j), 0.0));
        for (Eigen::Index i : detail::top_k_neighbors(cosine, j, k))
            triplets.emplace_back(i, j, std::max(cosine(i, j), 0.0));
    }
    coeffs.setFromTriplets(triplets.begin(), triplets.end());
    return normalize_attention_columns(coeffs, k);
}

/// Output features of every sample: y_j = P' K b_j, i.e. P' K B.
inline Eigen::MatrixXd aggregate(const Eigen::MatrixXd& projection,
                                 const Eigen::MatrixXd& kernel_columns,
                                 const AttentionMatrix& attention) {
    return (projection.transpose() * kernel_columns) * attention.b;
}

} // namespace ggls
