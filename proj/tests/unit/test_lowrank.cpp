#include "oracles.hpp"
#include "tagprof/lowrank.hpp"
#include "tagprof/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace tagprof;

namespace {

Eigen::MatrixXd random_matrix(Rng& rng, Eigen::Index rows, Eigen::Index cols) {
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < m.size(); ++i) {
        m(i) = rng.normal();
    }
    return m;
}

void check_factor_invariants(const LowRankFactors& f) {
    const auto r = f.rank();
    CHECK((f.u.transpose() * f.u - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-8);
    CHECK((f.v.transpose() * f.v - Eigen::MatrixXd::Identity(r, r)).cwiseAbs().maxCoeff() <= 1e-8);
    for (Eigen::Index i = 1; i < r; ++i) {
        CHECK(f.s(i - 1) >= f.s(i));
    }
    CHECK(f.s.minCoeff() >= 0.0);
}

}  // namespace

TEST_CASE("full-rank factorization reconstructs the matrix") {
    Rng rng(1);
    const Eigen::MatrixXd m = random_matrix(rng, 9, 6);
    const auto f = truncated_svd(m, 6, 7);
    check_factor_invariants(f);
    CHECK((m - f.reconstruct()).norm() <= 1e-8 * m.norm());
}

TEST_CASE("rank-one outer product") {
    Eigen::VectorXd u(4);
    u << 1, -2, 0.5, 3;
    Eigen::VectorXd v(3);
    v << 2, 0, -1;
    const Eigen::MatrixXd m = u * v.transpose();
    const auto f = truncated_svd(m, 1, 3);
    CHECK(f.s(0) == doctest::Approx(u.norm() * v.norm()).epsilon(1e-12));
    CHECK((m - f.reconstruct()).norm() <= 1e-10);
}

TEST_CASE("diag(3, 2, 1) at rank 2") {
    const Eigen::MatrixXd m = Eigen::Vector3d(3, 2, 1).asDiagonal();
    const auto f = truncated_svd(SparseMatrix::from_dense(m), 2, 5);
    CHECK(f.s(0) == doctest::Approx(3.0).epsilon(1e-12));
    CHECK(f.s(1) == doctest::Approx(2.0).epsilon(1e-12));
    CHECK((m - f.reconstruct()).norm() == doctest::Approx(1.0).epsilon(1e-10));
    const auto oracle_s = oracle::singular_values(m);
    CHECK(oracle_s[0] == doctest::Approx(3.0));
    CHECK(oracle_s[1] == doctest::Approx(2.0));
}

TEST_CASE("singular values match the Jacobi oracle up to 12x12") {
    Rng rng(17);
    for (int trial = 0; trial < 25; ++trial) {
        const auto rows = 2 + static_cast<Eigen::Index>(rng.below(11));
        const auto cols = 2 + static_cast<Eigen::Index>(rng.below(11));
        const Eigen::MatrixXd m = random_matrix(rng, rows, cols);
        const auto rank = 1 + static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(std::min(rows, cols))));
        const auto f = truncated_svd(m, rank, static_cast<std::uint64_t>(trial));
        check_factor_invariants(f);
        const auto expected = oracle::singular_values(m);
        for (Eigen::Index i = 0; i < rank; ++i) {
            CHECK(std::abs(f.s(i) - expected[static_cast<std::size_t>(i)]) <= 1e-8);
        }
    }
}

TEST_CASE("approximation error is nonincreasing in rank") {
    Rng rng(2);
    const Eigen::MatrixXd m = random_matrix(rng, 12, 9);
    double previous = m.norm();
    for (Eigen::Index r = 1; r <= 9; ++r) {
        const double err = (m - truncated_svd(m, r, 1).reconstruct()).norm();
        CHECK(err <= previous + 1e-10);
        previous = err;
    }
}

TEST_CASE("rank errors and determinism") {
    const Eigen::MatrixXd m = Eigen::MatrixXd::Ones(3, 2);
    CHECK_THROWS_AS(truncated_svd(m, 0, 1), std::invalid_argument);
    CHECK_THROWS_AS(truncated_svd(m, 3, 1), std::invalid_argument);
    Rng rng(4);
    const Eigen::MatrixXd r = random_matrix(rng, 30, 20);
    const auto a = truncated_svd(r, 5, 99);
    const auto b = truncated_svd(r, 5, 99);
    CHECK(a.u == b.u);
    CHECK(a.s == b.s);
    CHECK(a.v == b.v);
    SvdOptions tight;
    tight.max_iterations = 1;
    tight.oversample = 0;
    CHECK_THROWS_AS(truncated_svd(r, 5, 99, tight), ConvergenceError);
}

TEST_CASE("tag similarity") {
    LowRankFactors f;
    f.s = Eigen::Vector2d(2.0, 1.0);
    f.v.resize(4, 2);
    f.v << 1, 0, 0, 1, -1, 0, 0, 0;
    f.u = Eigen::MatrixXd::Identity(2, 2);
    CHECK(tag_similarity(f, 0, 0) == doctest::Approx(1.0));
    CHECK(tag_similarity(f, 0, 1) == doctest::Approx(0.0));
    CHECK(tag_similarity(f, 0, 2) == doctest::Approx(-1.0));
    Diagnostics diag;
    CHECK(tag_similarity(f, 0, 3, &diag) == 0.0);
    CHECK_FALSE(diag.warnings.empty());
    CHECK_THROWS_AS(tag_similarity(f, 0, 4), std::out_of_range);
}

TEST_CASE("column similarity equals cosine between approximation columns") {
    Rng rng(9);
    const Eigen::MatrixXd m = random_matrix(rng, 10, 8);
    const auto f = truncated_svd(m, 3, 2);
    const CosineLookup lookup = column_similarity(f);
    const Eigen::MatrixXd approx = f.reconstruct();
    for (Eigen::Index a = 0; a < 8; ++a) {
        for (Eigen::Index b = 0; b < 8; ++b) {
            const double direct = approx.col(a).dot(approx.col(b)) / (approx.col(a).norm() * approx.col(b).norm());
            CHECK(lookup(a, b) == doctest::Approx(direct).epsilon(1e-10));
            CHECK(lookup(a, b) == lookup(b, a));
            CHECK(std::abs(lookup(a, b)) <= 1.0 + 1e-12);
        }
    }
}
