#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "pwa/measure.hpp"

using namespace pwa;

namespace {

Eigen::MatrixXd random_points(int n, int d, std::mt19937_64& rng, double scale = 1.0) {
    std::normal_distribution<double> g;
    Eigen::MatrixXd m(n, d);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < d; ++j) m(i, j) = scale * g(rng);
    return m;
}

// Exhaustive minimum over all assignments, uniform weights.
double brute_force_wpp(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double p) {
    const int n = static_cast<int>(x.rows());
    const Eigen::MatrixXd c = cost_matrix(x, y, p);
    std::vector<int> perm(n);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
        double total = 0.0;
        for (int i = 0; i < n; ++i) total += c(i, perm[i]);
        best = std::min(best, total);
    } while (std::next_permutation(perm.begin(), perm.end()));
    return best / n;
}

}  // namespace

TEST_CASE("cost matrix matches direct norms") {
    std::mt19937_64 rng(7);
    const Eigen::MatrixXd x = random_points(4, 3, rng);
    const Eigen::MatrixXd y = random_points(5, 3, rng);
    const Eigen::MatrixXd c2 = cost_matrix(x, y, 2.0);
    const Eigen::MatrixXd c1 = cost_matrix(x, y, 1.0);
    for (int i = 0; i < 4; ++i)
        for (int j = 0; j < 5; ++j) {
            const Eigen::VectorXd d = x.row(i) - y.row(j);
            CHECK(c2(i, j) == doctest::Approx(d.squaredNorm()).epsilon(1e-12));
            CHECK(c1(i, j) == doctest::Approx(d.cwiseAbs().sum()).epsilon(1e-12));
        }
}

TEST_CASE("assignment solver equals exhaustive enumeration, n <= 6") {
    std::mt19937_64 rng(11);
    for (int trial = 0; trial < 50; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 5);  // 2..6
        const double p = (trial % 2 == 0) ? 2.0 : 1.0;
        const Eigen::MatrixXd x = random_points(n, 2, rng);
        const Eigen::MatrixXd y = random_points(n, 2, rng);
        const double expected = brute_force_wpp(x, y, p);
        const double got = exact_wasserstein(EmpiricalMeasure::uniform(x),
                                             EmpiricalMeasure::uniform(y), p);
        CHECK(std::abs(got - expected) < 1e-9);
    }
}

TEST_CASE("transport LP handles non-uniform weights") {
    // Two suppliers, two consumers; optimum splits the heavy supplier.
    Eigen::MatrixXd x(2, 1), y(2, 1);
    x << 0.0, 1.0;
    y << 0.0, 1.0;
    Eigen::VectorXd a(2), b(2);
    a << 0.75, 0.25;
    b << 0.25, 0.75;
    const Eigen::MatrixXd c = cost_matrix(x, y, 2.0);
    const Eigen::MatrixXd plan = solve_transport_lp(c, a, b);
    CHECK((plan.rowwise().sum() - a).cwiseAbs().maxCoeff() < 1e-6);
    CHECK((plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff() < 1e-6);
    // Move mass 0.5 across distance 1: cost 0.5.
    CHECK((plan.array() * c.array()).sum() == doctest::Approx(0.5).epsilon(1e-9));

    const double w = exact_wasserstein(EmpiricalMeasure(x, a), EmpiricalMeasure(y, b), 2.0);
    CHECK(w == doctest::Approx(0.5).epsilon(1e-9));
}

TEST_CASE("transport LP agrees with assignment on uniform instances") {
    std::mt19937_64 rng(23);
    for (int trial = 0; trial < 10; ++trial) {
        const int n = 3 + static_cast<int>(rng() % 4);
        const Eigen::MatrixXd x = random_points(n, 2, rng);
        const Eigen::MatrixXd y = random_points(n, 2, rng);
        const Eigen::MatrixXd c = cost_matrix(x, y, 2.0);
        double assign_cost = 0.0;
        solve_assignment(c, &assign_cost);
        const Eigen::VectorXd u = Eigen::VectorXd::Constant(n, 1.0 / n);
        const Eigen::MatrixXd plan = solve_transport_lp(c, u, u);
        CHECK((plan.array() * c.array()).sum() ==
              doctest::Approx(assign_cost / n).epsilon(1e-6));
    }
}

TEST_CASE("1d order statistics formula matches the solver") {
    std::mt19937_64 rng(31);
    std::normal_distribution<double> g;
    for (int trial = 0; trial < 20; ++trial) {
        const int n = 2 + static_cast<int>(rng() % 7);
        std::vector<double> xs(n), ys(n);
        for (auto& v : xs) v = g(rng);
        for (auto& v : ys) v = g(rng);
        Eigen::MatrixXd mx(n, 1), my(n, 1);
        for (int i = 0; i < n; ++i) {
            mx(i, 0) = xs[i];
            my(i, 0) = ys[i];
        }
        const double p = (trial % 2 == 0) ? 2.0 : 1.0;
        const double via_sort = wasserstein_1d(xs, ys, p);
        const double via_lp = exact_wasserstein(EmpiricalMeasure::uniform(mx),
                                                EmpiricalMeasure::uniform(my), p);
        CHECK(std::abs(via_sort - via_lp) <= 1e-10);
    }
}

TEST_CASE("distance axioms hold on random instances") {
    std::mt19937_64 rng(43);
    for (int trial = 0; trial < 10; ++trial) {
        const Eigen::MatrixXd x = random_points(6, 3, rng);
        const Eigen::MatrixXd y = random_points(6, 3, rng);
        const auto mu = EmpiricalMeasure::uniform(x);
        const auto nu = EmpiricalMeasure::uniform(y);
        const double d_xy = exact_wasserstein(mu, nu, 2.0);
        const double d_yx = exact_wasserstein(nu, mu, 2.0);
        CHECK(d_xy >= 0.0);
        CHECK(d_xy == doctest::Approx(d_yx).epsilon(1e-12));
        CHECK(exact_wasserstein(mu, mu, 2.0) == doctest::Approx(0.0).epsilon(1e-12));
    }
}

TEST_CASE("sinkhorn approaches the exact cost as epsilon shrinks") {
    std::mt19937_64 rng(57);
    const Eigen::MatrixXd x = random_points(24, 2, rng);
    const Eigen::MatrixXd y = random_points(24, 2, rng) * 1.4;
    const auto mu = EmpiricalMeasure::uniform(x);
    const auto nu = EmpiricalMeasure::uniform(y);
    const double exact = exact_wasserstein(mu, nu, 2.0);
    double prev_err = std::numeric_limits<double>::infinity();
    for (double scale : {0.5, 0.1, 0.02}) {
        SinkhornOptions opts;
        opts.epsilon_scale = scale;
        opts.max_iters = 50000;
        opts.tol = 1e-6;
        const auto r = sinkhorn_divergence(mu, nu, opts);
        CHECK(r.converged);
        const double err = std::abs(r.value - exact) / exact;
        CHECK(err < prev_err + 1e-12);
        prev_err = err;
    }
    CHECK(prev_err < 0.05);
}

TEST_CASE("sinkhorn divergence vanishes on identical measures and is symmetric") {
    std::mt19937_64 rng(61);
    const auto mu = EmpiricalMeasure::uniform(random_points(16, 3, rng));
    const auto nu = EmpiricalMeasure::uniform(random_points(16, 3, rng));
    SinkhornOptions opts;
    opts.epsilon = 0.5;
    opts.max_iters = 5000;
    opts.tol = 1e-9;
    const auto self = sinkhorn_divergence(mu, mu, opts);
    CHECK(std::abs(self.value) < 1e-7);
    const auto ab = sinkhorn_divergence(mu, nu, opts);
    const auto ba = sinkhorn_divergence(nu, mu, opts);
    CHECK(ab.value == doctest::Approx(ba.value).epsilon(1e-7));
    CHECK(ab.value > 0.0);
}

TEST_CASE("sinkhorn reports non-convergence instead of hiding it") {
    std::mt19937_64 rng(67);
    const auto mu = EmpiricalMeasure::uniform(random_points(12, 2, rng));
    const auto nu = EmpiricalMeasure::uniform(random_points(12, 2, rng) * 3.0);
    SinkhornOptions opts;
    opts.epsilon_scale = 0.001;  // very cold, needs many iterations
    opts.max_iters = 3;
    const auto r = sinkhorn_divergence(mu, nu, opts);
    CHECK_FALSE(r.converged);
    CHECK(r.iterations == 3);
    CHECK(r.marginal_error > opts.tol);
}

TEST_CASE("sinkhorn point gradients match central differences") {
    std::mt19937_64 rng(71);
    const Eigen::MatrixXd x = random_points(5, 2, rng);
    const Eigen::MatrixXd y = random_points(5, 2, rng);
    SinkhornOptions opts;
    opts.epsilon = 0.7;
    opts.max_iters = 50000;
    opts.tol = 1e-13;
    opts.with_grad = true;
    const auto base = sinkhorn_divergence(EmpiricalMeasure::uniform(x),
                                          EmpiricalMeasure::uniform(y), opts);
    REQUIRE(base.converged);
    REQUIRE(base.grad_mu.rows() == 5);
    REQUIRE(base.grad_nu.rows() == 5);

    SinkhornOptions probe = opts;
    probe.with_grad = false;
    const double h = 1e-5;
    auto value_at = [&](const Eigen::MatrixXd& xs, const Eigen::MatrixXd& ys) {
        return sinkhorn_divergence(EmpiricalMeasure::uniform(xs),
                                   EmpiricalMeasure::uniform(ys), probe)
            .value;
    };
    double max_rel = 0.0;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 2; ++j) {
            Eigen::MatrixXd xp = x, xm = x;
            xp(i, j) += h;
            xm(i, j) -= h;
            const double fd = (value_at(xp, y) - value_at(xm, y)) / (2 * h);
            max_rel = std::max(max_rel, std::abs(fd - base.grad_mu(i, j)) /
                                            std::max(1e-8, std::abs(fd)));
            Eigen::MatrixXd yp = y, ym = y;
            yp(i, j) += h;
            ym(i, j) -= h;
            const double fdn = (value_at(x, yp) - value_at(x, ym)) / (2 * h);
            max_rel = std::max(max_rel, std::abs(fdn - base.grad_nu(i, j)) /
                                            std::max(1e-8, std::abs(fdn)));
        }
    CHECK(max_rel <= 1e-4);
}

TEST_CASE("sliced distance reduces to the 1d formula in 1d") {
    std::mt19937_64 rng(83);
    std::normal_distribution<double> g;
    std::vector<double> xs(10), ys(10);
    for (auto& v : xs) v = g(rng);
    for (auto& v : ys) v = g(rng);
    Eigen::MatrixXd mx(10, 1), my(10, 1);
    for (int i = 0; i < 10; ++i) {
        mx(i, 0) = xs[i];
        my(i, 0) = ys[i];
    }
    const double expected = wasserstein_1d(xs, ys, 2.0);
    const double got = sliced_wasserstein(EmpiricalMeasure::uniform(mx),
                                          EmpiricalMeasure::uniform(my), 16, 2.0, 5);
    CHECK(got == doctest::Approx(expected).epsilon(1e-10));
}

TEST_CASE("sliced gradient matches central differences") {
    std::mt19937_64 rng(89);
    const Eigen::MatrixXd x = random_points(6, 3, rng);
    const Eigen::MatrixXd y = random_points(6, 3, rng);
    const auto nu = EmpiricalMeasure::uniform(y);
    const auto res = sliced_wasserstein_grad(EmpiricalMeasure::uniform(x), nu, 8, 3);
    const double h = 1e-6;
    for (int i = 0; i < 6; ++i)
        for (int j = 0; j < 3; ++j) {
            Eigen::MatrixXd xp = x, xm = x;
            xp(i, j) += h;
            xm(i, j) -= h;
            const double fd =
                (sliced_wasserstein(EmpiricalMeasure::uniform(xp), nu, 8, 2.0, 3) -
                 sliced_wasserstein(EmpiricalMeasure::uniform(xm), nu, 8, 2.0, 3)) /
                (2 * h);
            CHECK(res.grad_mu(i, j) == doctest::Approx(fd).epsilon(1e-5));
        }
    CHECK(res.value == doctest::Approx(sliced_wasserstein(EmpiricalMeasure::uniform(x),
                                                          nu, 8, 2.0, 3))
                           .epsilon(1e-12));
}

TEST_CASE("mmd closed form on two single points") {
    Eigen::MatrixXd x(1, 2), y(1, 2);
    x << 0.0, 0.0;
    y << 1.0, 1.0;
    const double bw = 0.8;
    const double expected = 2.0 - 2.0 * std::exp(-2.0 / (2.0 * bw * bw));
    const double got =
        mmd(EmpiricalMeasure::uniform(x), EmpiricalMeasure::uniform(y), bw, true);
    CHECK(got == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("biased mmd vanishes on identical point sets") {
    std::mt19937_64 rng(97);
    const Eigen::MatrixXd x = random_points(12, 4, rng);
    const auto mu = EmpiricalMeasure::uniform(x);
    CHECK(std::abs(mmd(mu, mu, 1.3, true)) < 1e-12);
}

TEST_CASE("mmd gradient matches central differences") {
    std::mt19937_64 rng(101);
    const Eigen::MatrixXd x = random_points(5, 2, rng);
    const Eigen::MatrixXd y = random_points(7, 2, rng);
    const auto nu = EmpiricalMeasure::uniform(y);
    const double bw = 1.1;
    const auto res = mmd_grad(EmpiricalMeasure::uniform(x), nu, bw);
    const double h = 1e-6;
    for (int i = 0; i < 5; ++i)
        for (int j = 0; j < 2; ++j) {
            Eigen::MatrixXd xp = x, xm = x;
            xp(i, j) += h;
            xm(i, j) -= h;
            const double fd = (mmd(EmpiricalMeasure::uniform(xp), nu, bw) -
                               mmd(EmpiricalMeasure::uniform(xm), nu, bw)) /
                              (2 * h);
            CHECK(res.grad_mu(i, j) == doctest::Approx(fd).epsilon(1e-6));
        }
}

TEST_CASE("median bandwidth on a hand-checked set") {
    Eigen::MatrixXd x(2, 1), y(1, 1);
    x << 0.0, 1.0;
    y << 3.0;
    // pooled pairwise distances: 1, 3, 2 -> median 2
    CHECK(median_bandwidth(EmpiricalMeasure::uniform(x), EmpiricalMeasure::uniform(y)) ==
          doctest::Approx(2.0).epsilon(1e-12));
}

TEST_CASE("measure validation rejects bad weights") {
    Eigen::MatrixXd x(2, 1);
    x << 0.0, 1.0;
    Eigen::VectorXd w(2);
    w << 0.7, 0.7;  // does not sum to one
    CHECK_THROWS_AS(EmpiricalMeasure(x, w).validate(), std::invalid_argument);
    w << -0.5, 1.5;
    CHECK_THROWS_AS(EmpiricalMeasure(x, w).validate(), std::invalid_argument);
}
