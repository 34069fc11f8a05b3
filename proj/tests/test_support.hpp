#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "ggls/ggls.hpp"

namespace test_support {

inline Eigen::MatrixXd random_matrix(ggls::Xoshiro256& rng, Eigen::Index rows,
                                     Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index j = 0; j < cols; ++j)
        for (Eigen::Index i = 0; i < rows; ++i) m(i, j) = rng.next_gaussian();
    return m;
}

inline Eigen::VectorXi random_labels(ggls::Xoshiro256& rng, Eigen::Index n, int class_count) {
    Eigen::VectorXi l(n);
    for (Eigen::Index i = 0; i < n; ++i)
        l[i] = 1 + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(class_count));
    // guarantee every class appears at least once
    for (int c = 1; c <= class_count && c <= n; ++c) l[c - 1] = c;
    return l;
}

/// Scratch directory removed on destruction.
struct TempDir {
    std::filesystem::path path;

    explicit TempDir(const std::string& tag) {
        static int counter = 0;
        path = std::filesystem::temp_directory_path() /
               ("ggls_" + tag + "_" + std::to_string(::getpid()) + "_" +
                std::to_string(counter++));
        std::filesystem::create_directories(path);
    }
    ~TempDir() {
        std::error_code ec;
        std::filesystem::remove_all(path, ec);
    }
    std::string file(const std::string& name) const { return (path / name).string(); }
};

inline std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

inline void write_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    out << content;
}

/// Numerical-quadrature oracle for the geodesic flow kernel: builds the
/// geodesic path from its own SVD pair and integrates Phi(t) Phi(t)' with
/// the trapezoid rule. Independent of the closed-form assembly under test.
inline Eigen::MatrixXd gfk_quadrature(const Eigen::MatrixXd& ss, const Eigen::MatrixXd& st,
                                      int points) {
    const Eigen::Index dim = ss.rows();
    const Eigen::Index sub = ss.cols();

    Eigen::HouseholderQR<Eigen::MatrixXd> qr(ss);
    const Eigen::MatrixXd full = qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
    const Eigen::MatrixXd rs = full.rightCols(dim - sub);

    Eigen::JacobiSVD<Eigen::MatrixXd> svd(ss.transpose() * st,
                                          Eigen::ComputeFullU | Eigen::ComputeFullV);
    const Eigen::MatrixXd u1 = svd.matrixU();
    const Eigen::MatrixXd w = rs.transpose() * st * svd.matrixV();
    Eigen::MatrixXd u2 = Eigen::MatrixXd::Zero(dim - sub, sub);
    Eigen::VectorXd theta(sub);
    for (Eigen::Index i = 0; i < sub; ++i) {
        theta[i] = std::acos(std::clamp(svd.singularValues()[i], 0.0, 1.0));
        const double sigma = w.col(i).norm();
        if (sigma > 1e-12) u2.col(i) = -w.col(i) / sigma;
    }

    const auto phi = [&](double t) {
        Eigen::VectorXd c(sub), s(sub);
        for (Eigen::Index i = 0; i < sub; ++i) {
            c[i] = std::cos(theta[i] * t);
            s[i] = std::sin(theta[i] * t);
        }
        return Eigen::MatrixXd(ss * u1 * c.asDiagonal() - rs * u2 * s.asDiagonal());
    };

    const double h = 1.0 / static_cast<double>(points - 1);
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(dim, dim);
    for (int i = 0; i < points; ++i) {
        const Eigen::MatrixXd p = phi(i * h);
        const double weight = (i == 0 || i == points - 1) ? 0.5 * h : h;
        q += weight * (p * p.transpose());
    }
    return q;
}

/// Random but internally consistent adaptation state: PSD kernel from rbf
/// features, Laplacian from the cosine graph, MMD from random labels,
/// column-stochastic attention from a random projection.
inline ggls::AdaptationState random_state(std::uint64_t seed, Eigen::Index ns, Eigen::Index nt,
                                          Eigen::Index dim, int class_count, int neighbors,
                                          bool identity_attention_flag = false) {
    ggls::Xoshiro256 rng(seed);
    const Eigen::Index n = ns + nt;
    const Eigen::MatrixXd z = random_matrix(rng, dim, n);

    ggls::AdaptationState st;
    st.kernel = ggls::kernel_matrix(z, ggls::KernelParams{}, ns).k;
    st.source_count = ns;
    st.laplacian = ggls::laplacian(ggls::knn_cosine_graph(z, neighbors)).l;

    const Eigen::VectorXi source_labels = random_labels(rng, ns, class_count);
    const Eigen::VectorXi pseudo_labels = random_labels(rng, nt, class_count);
    st.label_matrix = ggls::one_hot(source_labels, class_count, n, 0).one_hot;
    st.domain_indicator = Eigen::VectorXd::Zero(n);
    st.domain_indicator.head(ns).setOnes();
    st.pseudo_labels = pseudo_labels;

    std::vector<Eigen::SparseMatrix<double>> mcs;
    for (int c = 1; c <= class_count; ++c)
        mcs.push_back(ggls::mmd_mc(source_labels, pseudo_labels, c));
    st.mmd = ggls::combine(ggls::mmd_m0(ns, nt), mcs, 0.5);

    if (identity_attention_flag) {
        st.attention = ggls::identity_attention(n, neighbors);
    } else {
        const Eigen::MatrixXd p0 = random_matrix(rng, n, class_count);
        st.attention = ggls::attention_matrix(p0, st.kernel, neighbors);
    }
    st.projection = random_matrix(rng, n, class_count);
    st.subgradient_diag = ggls::update_subgradient(st.projection);
    st.mu = 0.5;
    return st;
}

/// The F-smoothed surrogate the closed-form update minimizes: the training
/// objective with the l2,1 term replaced by l1 * tr(P' F P) for frozen F.
inline double smoothed_objective(const ggls::AdaptationState& st, const ggls::GglsConfig& cfg,
                                 const Eigen::MatrixXd& p) {
    const Eigen::MatrixXd kb = st.kernel * st.attention.b;
    const Eigen::MatrixXd e = kb.transpose() * p;
    const Eigen::MatrixXd mbl = st.mmd.combined + cfg.beta * st.laplacian;
    double value = (mbl * e).cwiseProduct(e).sum();
    const Eigen::MatrixXd resid = st.label_matrix - p.transpose() * kb;
    for (Eigen::Index j = 0; j < resid.cols(); ++j)
        value += cfg.gamma * st.domain_indicator[j] * resid.col(j).squaredNorm();
    value += cfg.lambda1 * (st.subgradient_diag.array() *
                            p.rowwise().squaredNorm().array())
                               .sum();
    value += cfg.lambda2 * (st.kernel * p).cwiseProduct(p).sum();
    return value;
}

/// Generic numerical minimizer of the smoothed surrogate: conjugate
/// gradients on its normal equations, never touching the closed-form
/// solve. Used as the independent optimum oracle.
inline Eigen::MatrixXd cg_minimizer(const ggls::AdaptationState& st, const ggls::GglsConfig& cfg,
                                    int max_iter = 20000, double tol = 1e-14) {
    const Eigen::MatrixXd kb = st.kernel * st.attention.b;
    Eigen::MatrixXd u = st.mmd.combined + cfg.beta * st.laplacian;
    u.diagonal() += cfg.gamma * st.domain_indicator;
    Eigen::MatrixXd a = kb * u * kb.transpose();
    a.diagonal() += cfg.lambda1 * st.subgradient_diag;
    a += cfg.lambda2 * st.kernel;
    a = 0.5 * (a + a.transpose().eval());
    const Eigen::MatrixXd rhs =
        cfg.gamma * (kb * (st.domain_indicator.asDiagonal() * st.label_matrix.transpose()));

    Eigen::MatrixXd x = Eigen::MatrixXd::Zero(rhs.rows(), rhs.cols());
    Eigen::MatrixXd r = rhs;
    Eigen::MatrixXd d = r;
    double rs_old = r.squaredNorm();
    const double rhs_norm = std::max(rhs.squaredNorm(), 1e-300);
    for (int it = 0; it < max_iter && rs_old / rhs_norm > tol * tol; ++it) {
        const Eigen::MatrixXd ad = a * d;
        const double alpha = rs_old / d.cwiseProduct(ad).sum();
        x += alpha * d;
        r -= alpha * ad;
        const double rs_new = r.squaredNorm();
        d = r + (rs_new / rs_old) * d;
        rs_old = rs_new;
    }
    return x;
}

inline ggls::SyntheticShiftSpec acceptance_spec(std::uint64_t seed) {
    ggls::SyntheticShiftSpec spec;
    spec.class_count = 3;
    spec.samples_per_class_source = 20;
    spec.samples_per_class_target = 20;
    spec.dimension = 10;
    spec.rotation_angle_degrees = 30.0;
    spec.translation_magnitude = 1.0;
    spec.noise_sigma = 0.3;
    spec.seed = seed;
    return spec;
}

inline ggls::GglsConfig acceptance_config() {
    ggls::GglsConfig cfg;
    cfg.subspace_dim = 5;
    cfg.neighbor_count = 3;
    return cfg;
}

} // namespace test_support
