#pragma once

#include <Eigen/Dense>

#include <cmath>

#include "ggls/errors.hpp"

namespace ggls {

/// A point on the Grassmannian: D x d basis with orthonormal columns.
struct Subspace {
    Eigen::MatrixXd basis;

    Eigen::Index ambient_dim() const { return basis.rows(); }
    Eigen::Index dim() const { return basis.cols(); }
};

/// The geodesic flow kernel matrix Q together with its PSD square root,
/// so that transformed features z = q_sqrt * x satisfy <z_i, z_j> = x_i' Q x_j.
struct GeodesicKernel {
    Eigen::MatrixXd q;      // D x D, symmetric PSD
    Eigen::MatrixXd q_sqrt; // D x D, symmetric
};

namespace detail {

inline void check_orthonormal(const Subspace& sub, const char* which) {
    const Eigen::MatrixXd gram = sub.basis.transpose() * sub.basis;
    const double err = (gram - Eigen::MatrixXd::Identity(sub.dim(), sub.dim()))
                           .cwiseAbs()
                           .maxCoeff();
    if (err > 1e-8)
        throw InvalidSubspaceError(std::string("manifold: ") + which +
                                   " subspace basis is not orthonormal");
}

/// Orthonormal complement of an orthonormal D x d basis, via full
/// Householder QR completion. Deterministic for a fixed input.
inline Eigen::MatrixXd orthonormal_complement(const Eigen::MatrixXd& basis) {
    const Eigen::Index d_amb = basis.rows();
    const Eigen::Index d_sub = basis.cols();
    const Eigen::HouseholderQR<Eigen::MatrixXd> qr(basis);
    Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(d_amb, d_amb);
    return full.rightCols(d_amb - d_sub);
}

} // namespace detail

/// Top-d principal directions of the mean-centered samples, ordered by
/// descending eigenvalue. Column signs are fixed so that the
/// largest-magnitude entry of each direction is positive.
inline Subspace pca_subspace(const Eigen::MatrixXd& features, Eigen::Index dim) {
    const Eigen::Index d_amb = features.rows();
    const Eigen::Index n = features.cols();
    if (dim < 1 || dim > std::min(d_amb, n))
        throw ConfigError("manifold: subspace dimension out of range");
    if (!features.allFinite())
        throw NumericError("manifold: non-finite features in PCA");

    const Eigen::VectorXd mean = features.rowwise().mean();
    const Eigen::MatrixXd centered = features.colwise() - mean;
    const Eigen::MatrixXd cov = centered * centered.transpose();

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(cov);
    // eigenvalues come back ascending; take the trailing dim columns
    Subspace sub;
    sub.basis.resize(d_amb, dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
        Eigen::VectorXd v = eig.eigenvectors().col(d_amb - 1 - j);
        Eigen::Index imax = 0;
        v.cwiseAbs().maxCoeff(&imax);
        if (v[imax] < 0.0) v = -v;
        sub.basis.col(j) = v;
    }
    return sub;
}

/// Geodesic flow kernel between the source and target subspaces:
/// Q = integral over t in [0,1] of Phi(t) Phi(t)', where Phi(t) is the
/// geodesic from the source basis to the target basis. Closed form via the
/// paired SVDs Ss'St = U1 G V' and Rs'St = -U2 S V'.
inline GeodesicKernel geodesic_kernel(const Subspace& source_sub, const Subspace& target_sub) {
    const Eigen::Index d_amb = source_sub.ambient_dim();
    const Eigen::Index d_sub = source_sub.dim();
    if (target_sub.ambient_dim() != d_amb || target_sub.dim() != d_sub)
        throw ConfigError("manifold: subspace shape mismatch");
    if (2 * d_sub > d_amb)
        throw ConfigError("manifold: subspace dimension must satisfy d <= D/2");
    detail::check_orthonormal(source_sub, "source");
    detail::check_orthonormal(target_sub, "target");

    const Eigen::MatrixXd rs = detail::orthonormal_complement(source_sub.basis);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(source_sub.basis.transpose() * target_sub.basis,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd u1 = svd.matrixU();
    const Eigen::VectorXd gamma = svd.singularValues();

    // The second SVD pair shares V: columns of Rs'St V are orthogonal with
    // norms sin(theta_i), so U2 follows by column scaling.
    const Eigen::MatrixXd w = rs.transpose() * target_sub.basis * svd.matrixV();
    Eigen::MatrixXd u2 = Eigen::MatrixXd::Zero(d_amb - d_sub, d_sub);
    Eigen::VectorXd theta(d_sub);
    for (Eigen::Index i = 0; i < d_sub; ++i) {
        const double g = std::clamp(gamma[i], 0.0, 1.0);
        theta[i] = std::acos(g);
        const double sigma = w.col(i).norm();
        if (sigma > 1e-12) u2.col(i) = -w.col(i) / sigma;
    }

    // Diagonal blocks of the integrated projector. a1 = int cos^2(theta t),
    // a2 = -int cos(theta t) sin(theta t), a3 = int sin^2(theta t), over [0,1].
    Eigen::VectorXd a1(d_sub), a2(d_sub), a3(d_sub);
    for (Eigen::Index i = 0; i < d_sub; ++i) {
        const double t = theta[i];
        if (std::abs(t) < 1e-8) {
            a1[i] = 1.0;
            a2[i] = 0.0;
            a3[i] = 0.0;
        } else {
            a1[i] = 0.5 + std::sin(2.0 * t) / (4.0 * t);
            a2[i] = (std::cos(2.0 * t) - 1.0) / (4.0 * t);
            a3[i] = 0.5 - std::sin(2.0 * t) / (4.0 * t);
        }
    }

    const Eigen::MatrixXd left = source_sub.basis * u1;
    const Eigen::MatrixXd right = rs * u2;

    GeodesicKernel gk;
    gk.q = left * a1.asDiagonal() * left.transpose() +
           left * a2.asDiagonal() * right.transpose() +
           right * a2.asDiagonal() * left.transpose() +
           right * a3.asDiagonal() * right.transpose();
    gk.q = 0.5 * (gk.q + gk.q.transpose().eval());

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gk.q);
    Eigen::VectorXd ev = eig.eigenvalues();
    const double clamp_floor = 1e-12 * std::max(ev.cwiseAbs().maxCoeff(), 0.0);
    for (Eigen::Index i = 0; i < ev.size(); ++i)
        ev[i] = ev[i] > clamp_floor ? std::sqrt(ev[i]) : 0.0;
    gk.q_sqrt = eig.eigenvectors() * ev.asDiagonal() * eig.eigenvectors().transpose();
    return gk;
}

/// Maps features into the Grassmannian feature space: z = Q^{1/2} x.
inline Eigen::MatrixXd manifold_transform(const GeodesicKernel& kernel,
                                          const Eigen::MatrixXd& features) {
    if (features.rows() != kernel.q_sqrt.cols())
        throw NumericError("manifold: feature dimension does not match kernel");
    return kernel.q_sqrt * features;
}

} // namespace ggls
