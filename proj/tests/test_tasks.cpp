#include <doctest.h>

#include <cmath>

#include "pwa/latent.hpp"
#include "pwa/measure.hpp"
#include "pwa/tasks.hpp"

using namespace pwa;

TEST_CASE("task names round trip") {
    for (TaskKind k : {TaskKind::denoising, TaskKind::inpainting, TaskKind::translation})
        CHECK(task_from_string(to_string(k)) == k);
    CHECK_THROWS_AS(task_from_string("nonsense"), std::invalid_argument);
}

TEST_CASE("left half mask zeroes the left columns") {
    const Eigen::VectorXd m = left_half_mask(2, 4);
    REQUIRE(m.size() == 8);
    // row-major: columns 0,1 of each row are missing (mask = 0)
    CHECK(m(0) == 0.0);
    CHECK(m(1) == 0.0);
    CHECK(m(2) == 1.0);
    CHECK(m(3) == 1.0);
    CHECK(m(4) == 0.0);
    CHECK(m(7) == 1.0);
}

TEST_CASE("denoising pairs add the configured noise") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(2000, 5, 0.5);
    const Eigen::MatrixXd y = make_denoising_pairs(x, 0.3, 21);
    const Eigen::MatrixXd noise = y - x;
    CHECK(std::abs(noise.mean()) < 0.01);
    CHECK(std::sqrt(noise.array().square().mean()) == doctest::Approx(0.3).epsilon(0.03));
    // deterministic per seed
    CHECK((make_denoising_pairs(x, 0.3, 21) - y).cwiseAbs().maxCoeff() == 0.0);
}

TEST_CASE("inpainting pairs mask before adding noise") {
    const Eigen::MatrixXd x = Eigen::MatrixXd::Constant(500, 4, 1.0);
    Eigen::VectorXd mask(4);
    mask << 0, 1, 0, 1;
    const Eigen::MatrixXd y = make_inpainting_pairs(x, mask, 0.0, 5);
    CHECK(y.col(0).cwiseAbs().maxCoeff() == 0.0);
    CHECK((y.col(1).array() - 1.0).abs().maxCoeff() == 0.0);
}

TEST_CASE("posterior matches brute-force grid integration in 1d") {
    LinearGaussianOracle oracle;
    oracle.prior_mean = Eigen::VectorXd::Constant(1, 0.3);
    oracle.prior_cov = Eigen::MatrixXd::Constant(1, 1, 0.8);
    oracle.forward = Eigen::MatrixXd::Constant(1, 1, 1.5);
    oracle.noise_cov = Eigen::MatrixXd::Constant(1, 1, 0.25);
    const Eigen::VectorXd obs = Eigen::VectorXd::Constant(1, 1.1);
    const auto post = oracle.posterior(obs);

    // numerically integrate p(x) p(y|x) over a fine grid
    const int n = 20001;
    const double lo = -8.0, hi = 8.0, dx = (hi - lo) / (n - 1);
    double z = 0.0, m1 = 0.0, m2 = 0.0;
    for (int i = 0; i < n; ++i) {
        const double x = lo + i * dx;
        const double prior = std::exp(-0.5 * (x - 0.3) * (x - 0.3) / 0.8);
        const double lik = std::exp(-0.5 * std::pow(obs(0) - 1.5 * x, 2) / 0.25);
        const double w = prior * lik;
        z += w;
        m1 += w * x;
        m2 += w * x * x;
    }
    const double mean = m1 / z;
    const double var = m2 / z - mean * mean;
    CHECK(post.mean(0) == doctest::Approx(mean).epsilon(1e-6));
    CHECK(post.cov(0, 0) == doctest::Approx(var).epsilon(1e-4));
}

TEST_CASE("isotropic 2d posterior has the textbook shrinkage form") {
    // x2 = x1 + noise(0.5^2 I), prior N(0, I): mean 0.8 x2, cov 0.2 I
    LinearGaussianOracle oracle;
    oracle.prior_mean = Eigen::VectorXd::Zero(2);
    oracle.prior_cov = Eigen::MatrixXd::Identity(2, 2);
    oracle.forward = Eigen::MatrixXd::Identity(2, 2);
    oracle.noise_cov = 0.25 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd obs(2);
    obs << 1.0, -0.5;
    const auto post = oracle.posterior(obs);
    CHECK((post.mean - 0.8 * obs).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((post.cov - 0.2 * Eigen::MatrixXd::Identity(2, 2)).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("posterior sampling matches its own moments") {
    LinearGaussianOracle oracle;
    oracle.prior_mean = Eigen::VectorXd::Zero(2);
    oracle.prior_cov = Eigen::MatrixXd::Identity(2, 2);
    oracle.forward = Eigen::MatrixXd::Identity(2, 2);
    oracle.noise_cov = 0.25 * Eigen::MatrixXd::Identity(2, 2);
    Eigen::VectorXd obs(2);
    obs << 0.7, 0.2;
    const auto post = oracle.posterior(obs);
    const Eigen::MatrixXd s = oracle.sample_posterior(obs, 40000, 8);
    CHECK((s.colwise().mean().transpose() - post.mean).cwiseAbs().maxCoeff() < 0.02);
    const Eigen::MatrixXd centered = s.rowwise() - s.colwise().mean();
    const Eigen::MatrixXd cov = centered.transpose() * centered / (s.rows() - 1.0);
    CHECK((cov - post.cov).cwiseAbs().maxCoeff() < 0.02);
}

TEST_CASE("oracle rejects non-spd covariance") {
    LinearGaussianOracle oracle;
    oracle.prior_mean = Eigen::VectorXd::Zero(2);
    oracle.prior_cov = -Eigen::MatrixXd::Identity(2, 2);
    oracle.forward = Eigen::MatrixXd::Identity(2, 2);
    oracle.noise_cov = Eigen::MatrixXd::Identity(2, 2);
    CHECK_THROWS_AS(oracle.posterior(Eigen::VectorXd::Zero(2)), std::invalid_argument);
}

TEST_CASE("spd sqrt squares back") {
    Eigen::MatrixXd a(2, 2);
    a << 2.0, 0.4, 0.4, 1.0;
    const Eigen::MatrixXd r = spd_sqrt(a);
    CHECK((r * r - a).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((r - r.transpose()).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("gaussian monge map pushes one gaussian onto the other") {
    Eigen::VectorXd m1(2), m2(2);
    m1 << 0.0, 0.0;
    m2 << 2.0, -1.0;
    Eigen::MatrixXd s1(2, 2), s2(2, 2);
    s1 << 1.0, 0.2, 0.2, 0.5;
    s2 << 2.0, -0.3, -0.3, 1.5;
    const AffineMap t = gaussian_monge_map(m1, s1, m2, s2);
    // pushforward of N(m1, s1) under x -> Tx + b is N(T m1 + b, T s1 T')
    CHECK((t.linear * m1 + t.offset - m2).cwiseAbs().maxCoeff() < 1e-10);
    CHECK((t.linear * s1 * t.linear.transpose() - s2).cwiseAbs().maxCoeff() < 1e-10);
    // optimal map is the gradient of a convex potential: T s1-symmetric positive
    const Eigen::MatrixXd sym = t.linear;
    CHECK((sym - sym.transpose()).cwiseAbs().maxCoeff() < 1e-10);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
    CHECK(es.eigenvalues().minCoeff() > 0.0);
}

TEST_CASE("monge map cost equals the closed-form w2 squared") {
    Eigen::VectorXd m1(2), m2(2);
    m1 << 0.5, -0.5;
    m2 << -1.0, 2.0;
    Eigen::MatrixXd s1(2, 2), s2(2, 2);
    s1 << 1.2, 0.1, 0.1, 0.7;
    s2 << 0.6, -0.2, -0.2, 1.9;
    const AffineMap t = gaussian_monge_map(m1, s1, m2, s2);
    const double w2 = gaussian_w2_squared(m1, s1, m2, s2);

    // E||x - T(x)||^2 under N(m1, s1), in closed form:
    const Eigen::MatrixXd d = Eigen::MatrixXd::Identity(2, 2) - t.linear;
    const double mean_part = (m1 - (t.linear * m1 + t.offset)).squaredNorm();
    const double cov_part = (d * s1 * d.transpose()).trace();
    CHECK(mean_part + cov_part == doctest::Approx(w2).epsilon(1e-10));

    // and empirically on samples
    const Eigen::MatrixXd xs = sample_gaussian({m1, s1}, 60000, 13);
    double acc = 0.0;
    for (Eigen::Index i = 0; i < xs.rows(); ++i)
        acc += (xs.row(i).transpose() - t(xs.row(i))).squaredNorm();
    CHECK(acc / xs.rows() == doctest::Approx(w2).epsilon(0.03));
}

TEST_CASE("gaussian w2 reduces to mean distance for equal covariances") {
    Eigen::VectorXd m1(3), m2(3);
    m1 << 1, 2, 3;
    m2 << 0, 0, 1;
    const Eigen::MatrixXd s = 0.7 * Eigen::MatrixXd::Identity(3, 3);
    CHECK(gaussian_w2_squared(m1, s, m2, s) ==
          doctest::Approx((m1 - m2).squaredNorm()).epsilon(1e-12));
}

TEST_CASE("translation datasets are unpaired") {
    GaussianSpec mu1{Eigen::VectorXd::Zero(2), Eigen::MatrixXd::Identity(2, 2)};
    Eigen::VectorXd m2(2);
    m2 << 3.0, 3.0;
    GaussianSpec mu2{m2, Eigen::MatrixXd::Identity(2, 2)};
    const TranslationData d = make_translation_datasets(mu1, mu2, 1000, 3);
    CHECK(d.x1.rows() == 1000);
    CHECK(d.x2.rows() == 1000);
    CHECK((d.x1.colwise().mean()).cwiseAbs().maxCoeff() < 0.15);
    CHECK((d.x2.colwise().mean().transpose() - m2).cwiseAbs().maxCoeff() < 0.15);
    // rows are not index-correlated: correlation of x1[i] with x2[i] small
    const Eigen::VectorXd a = d.x1.col(0).array() - d.x1.col(0).mean();
    const Eigen::VectorXd b = d.x2.col(0).array() - d.x2.col(0).mean();
    const double corr = a.dot(b) / std::sqrt(a.squaredNorm() * b.squaredNorm());
    CHECK(std::abs(corr) < 0.1);
}

TEST_CASE("task validation") {
    TaskSpec t;
    t.kind = TaskKind::inpainting;
    t.mask.resize(0);
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
    t.mask = left_half_mask(28, 28);
    t.noise_std = 0.1;
    CHECK_NOTHROW(t.validate());
    t.noise_std = -1.0;
    CHECK_THROWS_AS(t.validate(), std::invalid_argument);
}
