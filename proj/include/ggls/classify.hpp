#pragma once

#include <Eigen/Dense>

#include "ggls/errors.hpp"

namespace ggls {

/// 1-nearest-neighbor labels for each query column, Euclidean distance over
/// the training columns, ties resolved toward the lower training index.
inline Eigen::VectorXi nn_classify(const Eigen::MatrixXd& train_features,
                                   const Eigen::VectorXi& train_labels,
                                   const Eigen::MatrixXd& query_features) {
    if (train_features.rows() != query_features.rows())
        throw NumericError("classify: feature dimension mismatch");
    if (train_labels.size() != train_features.cols())
        throw NumericError("classify: label count mismatch");
    if (train_features.cols() == 0)
        throw NumericError("classify: empty training set");

    const Eigen::VectorXd tn = train_features.colwise().squaredNorm();
    Eigen::VectorXi labels(query_features.cols());
    for (Eigen::Index j = 0; j < query_features.cols(); ++j) {
        const Eigen::VectorXd d2 =
            tn - 2.0 * (train_features.transpose() * query_features.col(j));
        Eigen::Index best = 0;
        for (Eigen::Index i = 1; i < d2.size(); ++i)
            if (d2[i] < d2[best]) best = i;
        labels[j] = train_labels[best];
    }
    return labels;
}

} // namespace ggls
