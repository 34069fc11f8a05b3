#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <algorithm>
#include <vector>

#include "ggls/errors.hpp"

namespace ggls {

/// Marginal MMD matrix M0, per-class conditional matrices Mc, and their
/// mu-weighted combination. All row sums vanish; classes missing from
/// either domain contribute an all-zero matrix.
struct MmdMatrix {
    Eigen::MatrixXd m0;
    std::vector<Eigen::SparseMatrix<double>> m_class;
    Eigen::MatrixXd combined;
    double mu = 0.5;
};

/// Result of the balance-factor update. When the denominator trace
/// degenerates, the previous value is kept and the flag is set.
struct MuEstimate {
    double mu = 0.5;
    bool degenerate_trace = false;
};

/// Block-constant marginal MMD matrix over Ns source and Nt target samples.
inline Eigen::MatrixXd mmd_m0(Eigen::Index ns, Eigen::Index nt) {
    if (ns < 1 || nt < 1) throw NumericError("mmd: both domains must be non-empty");
    const Eigen::Index n = ns + nt;
    Eigen::VectorXd v(n);
    v.head(ns).setConstant(1.0 / static_cast<double>(ns));
    v.tail(nt).setConstant(-1.0 / static_cast<double>(nt));
    return v * v.transpose();
}

/// Conditional MMD matrix for one class, built from the source labels and
/// the current target pseudo-labels. If the class is absent from either
/// domain the matrix is zero (that class is skipped this iteration).
inline Eigen::SparseMatrix<double> mmd_mc(const Eigen::VectorXi& source_labels,
                                          const Eigen::VectorXi& target_pseudo_labels,
                                          int class_id) {
    const Eigen::Index ns = source_labels.size();
    const Eigen::Index nt = target_pseudo_labels.size();
    const Eigen::Index n = ns + nt;

    std::vector<Eigen::Index> src, tgt;
    for (Eigen::Index i = 0; i < ns; ++i)
        if (source_labels[i] == class_id) src.push_back(i);
    for (Eigen::Index j = 0; j < nt; ++j)
        if (target_pseudo_labels[j] == class_id) tgt.push_back(ns + j);

    Eigen::SparseMatrix<double> mc(n, n);
    if (src.empty() || tgt.empty()) return mc;

    const double ws = 1.0 / static_cast<double>(src.size());
    const double wt = -1.0 / static_cast<double>(tgt.size());
    std::vector<Eigen::Index> members = src;
    members.insert(members.end(), tgt.begin(), tgt.end());

    std::vector<Eigen::Triplet<double>> triplets;
    triplets.reserve(members.size() * members.size());
    for (Eigen::Index a : members) {
        const double wa = a < ns ? ws : wt;
        for (Eigen::Index b : members) {
            const double wb = b < ns ? ws : wt;
            triplets.emplace_back(a, b, wa * wb);
        }
    }
    mc.setFromTriplets(triplets.begin(), triplets.end());
    return mc;
}

/// M = (1 - mu) M0 + mu * sum_c Mc.
inline MmdMatrix combine(const Eigen::MatrixXd& m0,
                         const std::vector<Eigen::SparseMatrix<double>>& m_class,
                         double mu) {
    if (!(mu >= 0.0 && mu <= 1.0))
        throw NumericError("mmd: balance factor must lie in [0, 1]");
    MmdMatrix m;
    m.m0 = m0;
    m.m_class = m_class;
    m.mu = mu;
    m.combined = (1.0 - mu) * m0;
    for (const auto& mc : m_class) m.combined += mu * Eigen::MatrixXd(mc);
    return m;
}

namespace detail {

/// tr(Y M Y') for a C x N embedding Y.
inline double embedding_trace(const Eigen::MatrixXd& y, const Eigen::MatrixXd& m) {
    return (y * m).cwiseProduct(y).sum();
}

} // namespace detail

/// Balance factor mu = 1 - tr(Y M0 Y') / tr(Y M Y') evaluated on the
/// embedded features Y = P' K B, clamped to [0, 1].
inline MuEstimate estimate_mu(const Eigen::MatrixXd& projection,
                              const Eigen::MatrixXd& kernel_times_attention,
                              const Eigen::MatrixXd& m0,
                              const Eigen::MatrixXd& m_combined,
                              double previous_mu) {
    const Eigen::MatrixXd y = projection.transpose() * kernel_times_attention;
    const double num = detail::embedding_trace(y, m0);
    const double den = detail::embedding_trace(y, m_combined);
    if (den <= 1e-15) return {previous_mu, true};
    return {std::clamp(1.0 - num / den, 0.0, 1.0), false};
}

} // namespace ggls
