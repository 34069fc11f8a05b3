#include <catch2/catch_amalgamated.hpp>

#include "test_support.hpp"

using namespace ggls;

TEST_CASE("kernel_matrix computes linear and rbf kernels") {
    SECTION("linear kernel on orthonormal columns is the identity") {
        const Eigen::MatrixXd z = Eigen::MatrixXd::Identity(4, 4);
        const KernelMatrix km = kernel_matrix(z, {KernelKind::linear}, 2);
        CHECK((km.k - Eigen::MatrixXd::Identity(4, 4)).cwiseAbs().maxCoeff() == 0.0);
    }
    SECTION("rbf diagonal is 1 and entries lie in (0, 1]") {
        Xoshiro256 rng(5);
        const Eigen::MatrixXd z = test_support::random_matrix(rng, 3, 8);
        const KernelMatrix km = kernel_matrix(z, KernelParams{}, 4);
        for (Eigen::Index i = 0; i < 8; ++i) CHECK(km.k(i, i) == 1.0);
        CHECK(km.k.minCoeff() > 0.0);
        CHECK(km.k.maxCoeff() <= 1.0);
    }
    SECTION("rbf with sigma = 1 on scalars 0 and 2") {
        Eigen::MatrixXd z(1, 2);
        z << 0.0, 2.0;
        const KernelMatrix km = kernel_matrix(z, {KernelKind::rbf, false, 1.0}, 1);
        CHECK(km.k(0, 1) == Catch::Approx(std::exp(-2.0)).epsilon(1e-12));
    }
    SECTION("median bandwidth is the median squared distance") {
        Eigen::MatrixXd z(1, 3);
        z << 0.0, 1.0, 3.0; // squared pairwise distances 1, 9, 4
        const KernelMatrix km = kernel_matrix(z, KernelParams{}, 1);
        CHECK(km.bandwidth_sq == Catch::Approx(4.0));
        CHECK(km.k(0, 1) == Catch::Approx(std::exp(-1.0 / 8.0)));
    }
    SECTION("symmetry is exact") {
        Xoshiro256 rng(6);
        const Eigen::MatrixXd z = test_support::random_matrix(rng, 4, 9);
        const KernelMatrix km = kernel_matrix(z, KernelParams{}, 3);
        CHECK(km.k == km.k.transpose().eval());
        const KernelMatrix lin = kernel_matrix(z, {KernelKind::linear}, 3);
        CHECK(lin.k == lin.k.transpose().eval());
    }
    SECTION("non-finite input is rejected") {
        Eigen::MatrixXd z(1, 2);
        z << 0.0, std::numeric_limits<double>::quiet_NaN();
        CHECK_THROWS_AS(kernel_matrix(z, KernelParams{}, 1), NumericError);
    }
}

TEST_CASE("kernel_cross reproduces the training kernel") {
    Xoshiro256 rng(7);
    const Eigen::MatrixXd z = test_support::random_matrix(rng, 3, 6);
    const KernelMatrix km = kernel_matrix(z, KernelParams{}, 3);

    SECTION("cross against the training set equals the kernel matrix") {
        const Eigen::MatrixXd cross = kernel_cross(z, z, km.kind, km.bandwidth_sq);
        CHECK((cross - km.k).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("a duplicated training sample reproduces its column") {
        const Eigen::MatrixXd one = z.col(3);
        const Eigen::MatrixXd cross = kernel_cross(z, one, km.kind, km.bandwidth_sq);
        CHECK((cross.col(0) - km.k.col(3)).cwiseAbs().maxCoeff() < 1e-12);
    }
    SECTION("entries match the scalar definition") {
        const Eigen::MatrixXd fresh = test_support::random_matrix(rng, 3, 4);
        const Eigen::MatrixXd cross = kernel_cross(z, fresh, km.kind, km.bandwidth_sq);
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j < 4; ++j) {
                const double d2 = (z.col(i) - fresh.col(j)).squaredNorm();
                CHECK(cross(i, j) ==
                      Catch::Approx(std::exp(-d2 / (2.0 * km.bandwidth_sq))).margin(1e-12));
            }
        const Eigen::MatrixXd lin = kernel_cross(z, fresh, KernelKind::linear, 0.0);
        for (Eigen::Index i = 0; i < 6; ++i)
            for (Eigen::Index j = 0; j < 4; ++j)
                CHECK(lin(i, j) == Catch::Approx(z.col(i).dot(fresh.col(j))).margin(1e-12));
    }
    SECTION("dimension mismatch is rejected") {
        const Eigen::MatrixXd bad = test_support::random_matrix(rng, 2, 4);
        CHECK_THROWS_AS(kernel_cross(z, bad, km.kind, km.bandwidth_sq), NumericError);
    }
}
