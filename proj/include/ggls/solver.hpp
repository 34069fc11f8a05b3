#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "ggls/classify.hpp"
#include "ggls/dataset.hpp"
#include "ggls/errors.hpp"
#include "ggls/graph.hpp"
#include "ggls/kernel.hpp"
#include "ggls/manifold.hpp"
#include "ggls/mmd.hpp"

namespace ggls {

/// Whether the balance factor is estimated before the projection update
/// (the training loop's stated line order, so it sees the previous
/// projection) or right after it.
enum class MuUpdateOrder { before_projection, after_projection };

struct GglsConfig {
    double beta = 0.1;
    double gamma = 0.1;
    double lambda1 = 0.001;
    double lambda2 = 0.01;
    int subspace_dim = 30;
    int neighbor_count = 3;
    int max_iterations = 10;
    KernelParams kernel;
    bool no_landmark = false;
    bool no_manifold = false;
    bool no_kernel = false;
    MuUpdateOrder mu_update_order = MuUpdateOrder::before_projection;
    bool normalize_features = true;
    std::uint64_t seed = 0;

    void validate() const {
        const bool regs_ok = beta >= 0.0 && gamma >= 0.0 && lambda1 >= 0.0 && lambda2 >= 0.0 &&
                             std::isfinite(beta) && std::isfinite(gamma) &&
                             std::isfinite(lambda1) && std::isfinite(lambda2);
        if (!regs_ok)
            throw ConfigError("config: regularizers must be finite and non-negative");
        if (max_iterations < 1) throw ConfigError("config: iteration count must be >= 1");
        if (subspace_dim < 1) throw ConfigError("config: subspace dimension must be >= 1");
        if (neighbor_count < 1) throw ConfigError("config: neighbor count must be >= 1");
        if (kernel.kind == KernelKind::rbf && !kernel.median_bandwidth &&
            !(kernel.bandwidth > 0.0))
            throw ConfigError("config: explicit bandwidth must be positive");
    }
};

struct TraceRecord {
    int iteration = 0;
    double objective = 0.0;
    double mu = 0.5;
    std::optional<double> accuracy;
};

/// Everything one training iteration reads and writes.
struct AdaptationState {
    Eigen::MatrixXd kernel;           // K
    Eigen::Index source_count = 0;
    AttentionMatrix attention;        // B
    MmdMatrix mmd;                    // M0, Mc, combined
    Eigen::MatrixXd laplacian;        // L
    Eigen::MatrixXd label_matrix;     // H, C x N, target columns zero
    Eigen::VectorXd domain_indicator; // diagonal of R, 1 on source entries
    Eigen::MatrixXd projection;       // P, N x C
    Eigen::VectorXd subgradient_diag; // diagonal of F
    Eigen::VectorXi pseudo_labels;    // length Nt
    double mu = 0.5;
    std::vector<TraceRecord> objective_trace;
};

/// tr(P'KB(M+bL)B'KP) + g|(H - P'KB)R|_F^2 + l1|P|_{2,1} + l2 tr(P'KP).
inline double objective(const AdaptationState& st, const GglsConfig& cfg) {
    const Eigen::MatrixXd kb = st.kernel * st.attention.b;
    const Eigen::MatrixXd e = kb.transpose() * st.projection; // B'KP
    const Eigen::MatrixXd mbl = st.mmd.combined + cfg.beta * st.laplacian;
    const double adaptation = (mbl * e).cwiseProduct(e).sum();

    const Eigen::MatrixXd resid = st.label_matrix - st.projection.transpose() * kb;
    double fit = 0.0;
    for (Eigen::Index j = 0; j < resid.cols(); ++j)
        fit += st.domain_indicator[j] * resid.col(j).squaredNorm();

    const double row_sparsity = st.projection.rowwise().norm().sum();
    const double ridge = (st.kernel * st.projection).cwiseProduct(st.projection).sum();
    return adaptation + cfg.gamma * fit + cfg.lambda1 * row_sparsity + cfg.lambda2 * ridge;
}

/// Closed-form projection update:
/// P = g (KBUB'K + l1 F + l2 K)^{-1} KBRH' with U = M + bL + gR.
/// Solved as a symmetric linear system; jitter is added once when the
/// condition number exceeds 1e12. Rows whose subgradient weight vanished
/// were eliminated by the l2,1 sparsifier (the stationarity system only
/// covers nonzero rows), so they stay at zero instead of re-entering the
/// solve unpenalized.
inline Eigen::MatrixXd update_projection(const AdaptationState& st, const GglsConfig& cfg) {
    const Eigen::Index n = st.kernel.rows();
    const Eigen::MatrixXd kb = st.kernel * st.attention.b;

    Eigen::MatrixXd u = st.mmd.combined + cfg.beta * st.laplacian;
    u.diagonal() += cfg.gamma * st.domain_indicator;

    Eigen::MatrixXd system = kb * u * kb.transpose();
    system.diagonal() += cfg.lambda1 * st.subgradient_diag;
    system += cfg.lambda2 * st.kernel;
    system = 0.5 * (system + system.transpose().eval());

    const Eigen::MatrixXd rhs =
        cfg.gamma *
        (kb * (st.domain_indicator.asDiagonal() * st.label_matrix.transpose()));

    std::vector<Eigen::Index> active;
    active.reserve(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i)
        if (cfg.lambda1 == 0.0 || st.subgradient_diag[i] > 0.0) active.push_back(i);

    Eigen::MatrixXd p = Eigen::MatrixXd::Zero(n, st.label_matrix.rows());
    if (active.empty()) return p;

    const Eigen::Index na = static_cast<Eigen::Index>(active.size());
    Eigen::MatrixXd sys_a(na, na);
    Eigen::MatrixXd rhs_a(na, rhs.cols());
    for (Eigen::Index r = 0; r < na; ++r) {
        rhs_a.row(r) = rhs.row(active[static_cast<std::size_t>(r)]);
        for (Eigen::Index c = 0; c < na; ++c)
            sys_a(r, c) = system(active[static_cast<std::size_t>(r)],
                                 active[static_cast<std::size_t>(c)]);
    }

    Eigen::LDLT<Eigen::MatrixXd> ldlt(sys_a);
    bool ill_conditioned = ldlt.info() != Eigen::Success;
    if (!ill_conditioned && ldlt.rcond() < 1e-10) {
        // the 1-norm rcond estimate is pessimistic when the reweighting
        // puts large spikes on the diagonal; settle borderline cases with
        // the exact spectrum before perturbing the system
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sys_a,
                                                           Eigen::EigenvaluesOnly);
        const double lmax = eig.eigenvalues().cwiseAbs().maxCoeff();
        ill_conditioned = !(eig.eigenvalues().minCoeff() > 1e-12 * lmax);
    }
    if (ill_conditioned) {
        sys_a.diagonal().array() += 1e-8 * sys_a.trace() / static_cast<double>(na);
        ldlt.compute(sys_a);
        if (ldlt.info() != Eigen::Success)
            throw SingularSystemError("solver: projection system is singular");
    }
    const Eigen::MatrixXd p_a = ldlt.solve(rhs_a);
    if (!p_a.allFinite())
        throw SingularSystemError("solver: projection solve produced non-finite values");
    for (Eigen::Index r = 0; r < na; ++r)
        p.row(active[static_cast<std::size_t>(r)]) = p_a.row(r);
    return p;
}

/// Row-norm subgradient of the l2,1 term: F_ii = 1/(2|p^i|), zero rows
/// (norm below 1e-12) map to zero.
inline Eigen::VectorXd update_subgradient(const Eigen::MatrixXd& projection) {
    Eigen::VectorXd f(projection.rows());
    for (Eigen::Index i = 0; i < projection.rows(); ++i) {
        const double norm = projection.row(i).norm();
        f[i] = norm < 1e-12 ? 0.0 : 0.5 / norm;
    }
    return f;
}

/// Everything the test path needs, frozen at the end of training.
struct FittedModel {
    GglsConfig config;
    std::optional<NormalizationStats> normalization;
    std::optional<GeodesicKernel> geodesic; // absent under no_manifold
    Eigen::MatrixXd manifold_features;      // Z over all training samples
    Eigen::Index source_count = 0;
    int class_count = 0;
    Eigen::VectorXi source_labels;
    KernelKind kernel_kind = KernelKind::rbf;
    double bandwidth_sq = 0.0;
    Eigen::MatrixXd projection;        // P
    AttentionMatrix attention;         // final B
    Eigen::MatrixXd embedded_features; // Y = P'KB over all training samples
    Eigen::VectorXi pseudo_labels;     // final target labels
    std::vector<TraceRecord> trace;
    int iterations_executed = 0;

    Eigen::MatrixXd source_manifold_features() const {
        return manifold_features.leftCols(source_count);
    }
    Eigen::MatrixXd embedded_source() const { return embedded_features.leftCols(source_count); }
};

namespace detail {

inline double label_match_fraction(const Eigen::VectorXi& a, const Eigen::VectorXi& b) {
    return static_cast<double>((a.array() == b.array()).count()) /
           static_cast<double>(a.size());
}

} // namespace detail

/// Trains GGLS: manifold feature learning, kernelization, then alternating
/// updates of M, mu, P, F, B and the target pseudo-labels. Deterministic
/// for a fixed dataset and configuration.
inline FittedModel fit(const DomainDataset& dataset, const GglsConfig& config) {
    config.validate();
    validate_dataset(dataset);

    const Eigen::Index ns = dataset.source_count();
    const Eigen::Index nt = dataset.target_count();
    const Eigen::Index n = ns + nt;
    const int c_count = dataset.class_count;

    FittedModel model;
    model.config = config;
    model.source_count = ns;
    model.class_count = c_count;
    model.source_labels = dataset.source_labels;

    Eigen::MatrixXd xs = dataset.source_features;
    Eigen::MatrixXd xt = dataset.target_features;
    if (config.normalize_features) {
        const NormalizationStats stats = compute_normalization(dataset.joint_features());
        xs = apply_normalization(stats, xs);
        xt = apply_normalization(stats, xt);
        model.normalization = stats;
    }

    Eigen::MatrixXd z(xs.rows(), n);
    if (config.no_manifold) {
        z.leftCols(ns) = xs;
        z.rightCols(nt) = xt;
    } else {
        const Eigen::Index max_dim =
            std::min({xs.rows() / 2, static_cast<Eigen::Index>(xs.cols()),
                      static_cast<Eigen::Index>(xt.cols())});
        if (config.subspace_dim > max_dim)
            throw ConfigError("config: subspace dimension too large for this dataset");
        const Subspace source_sub = pca_subspace(xs, config.subspace_dim);
        const Subspace target_sub = pca_subspace(xt, config.subspace_dim);
        const GeodesicKernel gk = geodesic_kernel(source_sub, target_sub);
        z.leftCols(ns) = manifold_transform(gk, xs);
        z.rightCols(nt) = manifold_transform(gk, xt);
        model.geodesic = gk;
    }
    model.manifold_features = z;

    KernelParams kparams = config.kernel;
    if (config.no_kernel) kparams.kind = KernelKind::linear;
    const KernelMatrix km = kernel_matrix(z, kparams, ns);
    model.kernel_kind = km.kind;
    model.bandwidth_sq = km.bandwidth_sq;

    AdaptationState st;
    st.kernel = km.k;
    st.source_count = ns;
    st.laplacian = laplacian(knn_cosine_graph(z, config.neighbor_count)).l;
    st.label_matrix = one_hot(dataset.source_labels, c_count, n, 0).one_hot;
    st.domain_indicator = Eigen::VectorXd::Zero(n);
    st.domain_indicator.head(ns).setOnes();
    st.attention = identity_attention(n, config.neighbor_count);
    st.projection = Eigen::MatrixXd::Zero(n, c_count);
    st.subgradient_diag = Eigen::VectorXd::Ones(n);
    st.mu = 0.5;
    st.pseudo_labels = nn_classify(z.leftCols(ns), dataset.source_labels, z.rightCols(nt));

    const Eigen::MatrixXd m0 = mmd_m0(ns, nt);
    int executed = 0;
    for (int iter = 1; iter <= config.max_iterations; ++iter) {
        std::vector<Eigen::SparseMatrix<double>> m_class;
        m_class.reserve(static_cast<std::size_t>(c_count));
        for (int c = 1; c <= c_count; ++c)
            m_class.push_back(mmd_mc(dataset.source_labels, st.pseudo_labels, c));
        st.mmd = combine(m0, m_class, st.mu);

        if (config.mu_update_order == MuUpdateOrder::before_projection)
            st.mu = estimate_mu(st.projection, st.kernel * st.attention.b, m0,
                                st.mmd.combined, st.mu)
                        .mu;

        st.projection = update_projection(st, config);
        st.subgradient_diag = update_subgradient(st.projection);

        if (config.mu_update_order == MuUpdateOrder::after_projection)
            st.mu = estimate_mu(st.projection, st.kernel * st.attention.b, m0,
                                st.mmd.combined, st.mu)
                        .mu;

        st.attention = config.no_landmark
                           ? identity_attention(n, config.neighbor_count)
                           : attention_matrix(st.projection, st.kernel,
                                              config.neighbor_count);

        const Eigen::MatrixXd embedded = aggregate(st.projection, st.kernel, st.attention);
        const Eigen::VectorXi new_pseudo = nn_classify(
            embedded.leftCols(ns), dataset.source_labels, embedded.rightCols(nt));

        TraceRecord rec;
        rec.iteration = iter;
        rec.objective = objective(st, config);
        rec.mu = st.mu;
        if (dataset.target_labels)
            rec.accuracy = detail::label_match_fraction(new_pseudo, *dataset.target_labels);

        bool converged = false;
        if (!st.objective_trace.empty()) {
            const double prev = st.objective_trace.back().objective;
            const bool labels_fixed = (new_pseudo.array() == st.pseudo_labels.array()).all();
            const bool objective_settled =
                std::abs(rec.objective - prev) < 1e-6 * std::max(std::abs(prev), 1e-12);
            converged = labels_fixed && objective_settled;
        }

        st.pseudo_labels = new_pseudo;
        st.objective_trace.push_back(rec);
        executed = iter;
        if (converged) break;
    }

    model.projection = st.projection;
    model.attention = st.attention;
    model.embedded_features = aggregate(st.projection, st.kernel, st.attention);
    model.pseudo_labels = st.pseudo_labels;
    model.trace = st.objective_trace;
    model.iterations_executed = executed;
    return model;
}

/// Labels new target samples: manifold transform, joint kernel against the
/// stored training features at the frozen bandwidth, attention over the
/// joint set with the trained projection, then 1-NN against the stored
/// embedded source features.
inline Eigen::VectorXi predict(const FittedModel& model, const Eigen::MatrixXd& new_target) {
    if (new_target.rows() != model.manifold_features.rows())
        throw DataFormatError("data: target feature dimension does not match the model");
    if (new_target.cols() < 1)
        throw DataFormatError("data: no samples to predict");

    Eigen::MatrixXd xt = new_target;
    if (model.normalization) xt = apply_normalization(*model.normalization, xt);
    const Eigen::MatrixXd zt = model.geodesic ? manifold_transform(*model.geodesic, xt) : xt;

    Eigen::MatrixXd joint(zt.rows(), model.source_count + zt.cols());
    joint.leftCols(model.source_count) = model.source_manifold_features();
    joint.rightCols(zt.cols()) = zt;

    const Eigen::MatrixXd cross = kernel_cross(model.manifold_features, joint,
                                               model.kernel_kind, model.bandwidth_sq);

    const AttentionMatrix att =
        model.config.no_landmark
            ? identity_attention(joint.cols(), model.config.neighbor_count)
            : attention_matrix(model.projection, cross, model.config.neighbor_count);

    const Eigen::MatrixXd embedded = aggregate(model.projection, cross, att);
    return nn_classify(model.embedded_source(), model.source_labels,
                       embedded.rightCols(zt.cols()));
}

} // namespace ggls
