#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "nlss/filters.hpp"

#include "nlss/svd.hpp"
#include "nlss/tensor.hpp"
#include "oracles.hpp"
#include "testutil.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using nlss::Tensor;

namespace {

// Straight-line transcription of the modified-SVD filter, running on the
// hand-rolled Jacobi factorization: group transform from the channel-summed
// group, patch transform from the transposed stack-mode unfolding, matrix
// core, hard threshold, invert, fold.
Tensor msvd_oracle(const Tensor& g, double tau) {
    const std::size_t last = g.order() - 1;
    Tensor opp = g;
    if (g.order() == 4 && g.dim(2) == 3) {
        Tensor sum({g.dim(0), g.dim(1), g.dim(3)});
        for (std::size_t m = 0; m < g.dim(3); ++m)
            for (std::size_t c = 0; c < 3; ++c)
                for (std::size_t j = 0; j < g.dim(1); ++j)
                    for (std::size_t i = 0; i < g.dim(0); ++i)
                        sum(i, j, m) += g(i, j, c, m);
        opp = std::move(sum);
    }
    const Eigen::MatrixXd gu = nlss::unfold(g, last);
    const Eigen::MatrixXd u = oracle::jacobi_svd(nlss::unfold(opp, opp.order() - 1)).u;
    const Eigen::MatrixXd v = oracle::jacobi_svd(Eigen::MatrixXd(gu.transpose())).u;
    Eigen::MatrixXd core = u.transpose() * gu * v;
    for (Eigen::Index i = 0; i < core.size(); ++i)
        if (std::abs(core(i)) < tau) core(i) = 0.0;
    const Eigen::MatrixXd ghat = u * core * v.transpose();
    return nlss::fold(ghat, last, g.dims());
}

Tensor constant_group(std::vector<std::size_t> dims, double value) {
    Tensor t(std::move(dims));
    for (std::size_t i = 0; i < t.size(); ++i) t[i] = value;
    return t;
}

}  // namespace

TEST_CASE("zero threshold is the identity for every backend") {
    const Tensor g = testutil::random_tensor({6, 6, 3, 8}, 3, 0.0, 1.0);
    CHECK(testutil::rel_error(nlss::hosvd_hard(g, 0.0), g) < 1e-9);
    CHECK(testutil::rel_error(nlss::msvd_hard(g, 0.0), g) < 1e-9);
    CHECK(testutil::rel_error(nlss::hosvd_truncate(g, {6, 6, 3, 8}), g) < 1e-9);
    CHECK(testutil::rel_error(nlss::hosvd_truncate(g, {}), g) < 1e-9);

    const Tensor mono = testutil::random_tensor({5, 5, 7}, 4, 0.0, 1.0);
    CHECK(testutil::rel_error(nlss::msvd_hard(mono, 0.0), mono) < 1e-9);
}

TEST_CASE("threshold above the whole spectrum zeroes the group") {
    const Tensor g = testutil::random_tensor({4, 4, 6}, 9, 0.0, 1.0);
    const double big = 10.0 * nlss::frobenius_norm(g);
    const Tensor out = nlss::hosvd_hard(g, big);
    CHECK(nlss::frobenius_norm(out) == 0.0);
    const Tensor outm = nlss::msvd_hard(g, big);
    CHECK(nlss::frobenius_norm(outm) == 0.0);
}

TEST_CASE("a stack of identical flat patches survives a sub-dominant threshold") {
    const Tensor g = constant_group({8, 8, 3, 16}, 7.0);
    // dominant coefficient = frobenius norm; anything below keeps it
    const double tau = 0.5 * nlss::frobenius_norm(g);
    CHECK(testutil::rel_error(nlss::msvd_hard(g, tau), g) < 1e-9);
    CHECK(testutil::rel_error(nlss::hosvd_hard(g, tau), g) < 1e-9);
}

TEST_CASE("hard thresholding never adds energy") {
    std::uint64_t seed = 31;
    for (int trial = 0; trial < 50; ++trial) {
        const Tensor g = testutil::random_tensor({5, 5, 3, 6}, seed++, -2.0, 2.0);
        const double tau = 0.1 * (trial % 7);
        const double in = nlss::frobenius_norm(g);
        CHECK(nlss::frobenius_norm(nlss::hosvd_hard(g, tau)) <= in + 1e-9);
        CHECK(nlss::frobenius_norm(nlss::msvd_hard(g, tau)) <= in + 1e-9);
    }
}

TEST_CASE("rank-1 data reconstructs exactly under rank-1 truncation") {
    const std::size_t I = 5, J = 4, K = 3;
    Tensor g({I, J, K});
    for (std::size_t k = 0; k < K; ++k)
        for (std::size_t j = 0; j < J; ++j)
            for (std::size_t i = 0; i < I; ++i)
                g(i, j, k) = (1.0 + i) * (2.0 - 0.5 * j) * (0.3 + k);
    const Tensor out = nlss::hosvd_truncate(g, {1, 1, 1});
    CHECK(testutil::rel_error(out, g) < 1e-9);
}

TEST_CASE("multirank validation") {
    const Tensor g = testutil::random_tensor({4, 4, 3}, 77);
    CHECK_THROWS_AS(nlss::hosvd_truncate(g, {5, 4, 3}), std::invalid_argument);
    CHECK_THROWS_AS(nlss::hosvd_truncate(g, {0, 4, 3}), std::invalid_argument);
    CHECK_THROWS_AS(nlss::hosvd_truncate(g, {4, 4, 3, 1}), std::invalid_argument);
    // listing only leading modes leaves the rest at full rank
    CHECK_NOTHROW(nlss::hosvd_truncate(g, {2}));
    CHECK(testutil::rel_error(nlss::hosvd_truncate(g, {4, 4}), g) < 1e-9);
}

TEST_CASE("truncation equals zeroing the trailing core entries") {
    const Tensor g = testutil::random_tensor({5, 4, 6}, 13);
    const auto h = nlss::hosvd(g);
    const Tensor fast = nlss::hosvd_truncate(g, {3, 2, 6});
    // independent route: zero core outside the leading (3,2,6) block, then
    // reconstruct with the full factors
    Tensor core = h.core;
    for (std::size_t k = 0; k < 6; ++k)
        for (std::size_t j = 0; j < 4; ++j)
            for (std::size_t i = 0; i < 5; ++i)
                if (i >= 3 || j >= 2) core(i, j, k) = 0.0;
    auto full = h;
    full.core = core;
    const Tensor slow = nlss::hosvd_reconstruct(full);
    CHECK(testutil::max_abs_diff(fast, slow) < 1e-10);
}

TEST_CASE("worked 3x3x3 example: equal loss from truncation and mid-band threshold") {
    const Tensor g = testutil::fixture_group();
    const Tensor trunc = nlss::hosvd_truncate(g, {2, 2, 3});
    double loss_trunc = 0.0;
    for (std::size_t i = 0; i < g.size(); ++i) {
        const double d = g[i] - trunc[i];
        loss_trunc += d * d;
    }
    CHECK(std::abs(loss_trunc - 4.29) < 0.01);

    for (const double tau : {2.1, 3.0, 4.9, 5.36}) {
        const Tensor ht = nlss::hosvd_hard(g, tau);
        double loss = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            const double d = g[i] - ht[i];
            loss += d * d;
        }
        CHECK(std::abs(loss - 4.29) < 0.01);
        CHECK(testutil::max_abs_diff(ht, trunc) < 1e-9);
    }
}

TEST_CASE("modified svd matches the straight-line jacobi oracle") {
    SUBCASE("color group") {
        const Tensor g = testutil::random_tensor({8, 8, 3, 16}, 55, 0.0, 1.0);
        const double tau = 2.7 * 20.0 / 255.0;
        const Tensor lib = nlss::msvd_hard(g, tau);
        const Tensor ora = msvd_oracle(g, tau);
        CHECK(testutil::rel_error(lib, ora) < 1e-9);
        CHECK(testutil::max_abs_diff(lib, g) > 1e-6);  // the filter did something
    }
    SUBCASE("single-channel group uses itself as the opponent signal") {
        const Tensor g = testutil::random_tensor({6, 6, 12}, 56, 0.0, 1.0);
        const double tau = 0.15;
        CHECK(testutil::rel_error(nlss::msvd_hard(g, tau), msvd_oracle(g, tau)) < 1e-9);
    }
    SUBCASE("constructed spectrum: the threshold keeps exactly the strong pair") {
        // build a stack whose stack-mode unfolding has singular values
        // {5, 2, 1, 0.5}; tau = 1.5 must keep the first two and drop the rest
        const Eigen::MatrixXd u =
            nlss::left_singular_vectors(Eigen::MatrixXd(
                Eigen::MatrixXd::NullaryExpr(4, 4, [](Eigen::Index i, Eigen::Index j) {
                    return testutil::unit(301, i * 7 + j) - 0.5;
                })));
        const Eigen::MatrixXd v =
            nlss::left_singular_vectors(Eigen::MatrixXd(
                Eigen::MatrixXd::NullaryExpr(9, 9, [](Eigen::Index i, Eigen::Index j) {
                    return testutil::unit(302, i * 11 + j) - 0.5;
                })));
        Eigen::MatrixXd sigma = Eigen::MatrixXd::Zero(4, 9);
        sigma(0, 0) = 5.0;
        sigma(1, 1) = 2.0;
        sigma(2, 2) = 1.0;
        sigma(3, 3) = 0.5;
        const Eigen::MatrixXd a = u * sigma * v.transpose();
        const Tensor g = nlss::fold(a, 2, {3, 3, 4});

        Eigen::MatrixXd kept = Eigen::MatrixXd::Zero(4, 9);
        kept(0, 0) = 5.0;
        kept(1, 1) = 2.0;
        const Tensor want = nlss::fold(Eigen::MatrixXd(u * kept * v.transpose()), 2,
                                       {3, 3, 4});
        const Tensor got = nlss::msvd_hard(g, 1.5);
        CHECK(testutil::max_abs_diff(got, want) < 1e-9);
    }
}

TEST_CASE("filters preserve group shape") {
    const Tensor g = testutil::random_tensor({4, 4, 4, 4}, 60);
    CHECK(nlss::hosvd_hard(g, 0.5).dims() == g.dims());
    CHECK(nlss::msvd_hard(g, 0.5).dims() == g.dims());
    CHECK(nlss::hosvd_truncate(g, {2, 2}).dims() == g.dims());
}
