#include <doctest.h>

#include "pwa/latent.hpp"
#include "pwa/model.hpp"

using namespace pwa;
using nn::Mat;

namespace {

PairedModel tiny_model(std::uint64_t seed = 3) {
    return PairedModel::build(dense_arch(4, {8}), dense_arch(4, {8}),
                              LatentSplit{2, 2, 2}, seed);
}

}  // namespace

TEST_CASE("encoder and decoder shapes follow the split") {
    PairedModel m = tiny_model();
    const Mat x = gaussian_matrix(5, 4, 1);
    CHECK(m.encode1(x).cols() == 4);  // d1 + d2
    CHECK(m.encode2(x).cols() == 4);  // d2 + d3
    const Mat z = gaussian_matrix(5, 2, 2);
    CHECK(m.decode1(z, z).cols() == 4);
    CHECK(m.decode2(z, z).cols() == 4);
}

TEST_CASE("construction is deterministic in the seed") {
    PairedModel a = tiny_model(9);
    PairedModel b = tiny_model(9);
    PairedModel c = tiny_model(10);
    const Eigen::VectorXd ta = nn::flatten(a.params());
    const Eigen::VectorXd tb = nn::flatten(b.params());
    const Eigen::VectorXd tc = nn::flatten(c.params());
    CHECK((ta - tb).cwiseAbs().maxCoeff() == 0.0);
    CHECK((ta - tc).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("the four networks have distinct initializations") {
    PairedModel m = tiny_model();
    const Eigen::VectorXd e1 = nn::flatten(m.e1.params());
    const Eigen::VectorXd e2 = nn::flatten(m.e2.params());
    CHECK(e1.size() == e2.size());
    CHECK((e1 - e2).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("decoder ignores latent blocks outside its slice") {
    PairedModel m = tiny_model();
    const Mat z1 = gaussian_matrix(3, 2, 4);
    const Mat z2 = gaussian_matrix(3, 2, 5);
    const Mat z2b = gaussian_matrix(3, 2, 6);
    // decode1 depends on both of its inputs
    CHECK((m.decode1(z1, z2) - m.decode1(z1, z2b)).cwiseAbs().maxCoeff() > 0.0);
    const Mat z1b = gaussian_matrix(3, 2, 7);
    CHECK((m.decode1(z1, z2) - m.decode1(z1b, z2)).cwiseAbs().maxCoeff() > 0.0);
}

TEST_CASE("cross reconstruction routes the shared block") {
    PairedModel m = tiny_model();
    const Mat x1 = gaussian_matrix(3, 4, 8);
    const Mat x2 = gaussian_matrix(3, 4, 9);
    const auto& sp = m.split();

    const Mat z1 = gaussian_matrix(3, sp.d1, 10);
    const Mat expected = m.decode1(z1, m.encode2(x2).leftCols(sp.d2));
    CHECK((m.cross_reconstruct_x1(z1, x2) - expected).cwiseAbs().maxCoeff() < 1e-12);

    const Mat z3 = gaussian_matrix(3, sp.d3, 11);
    const Mat expected2 = m.decode2(m.encode1(x1).rightCols(sp.d2), z3);
    CHECK((m.cross_reconstruct_x2(x1, z3) - expected2).cwiseAbs().maxCoeff() < 1e-12);
}

TEST_CASE("input dimension checks throw") {
    PairedModel m = tiny_model();
    const Mat bad = gaussian_matrix(2, 5, 12);
    CHECK_THROWS_AS(m.encode1(bad), std::invalid_argument);
    CHECK_THROWS_AS(m.encode2(bad), std::invalid_argument);
}

TEST_CASE("conv presets build and run end to end") {
    ArchitectureSpec a = mnist_conv_arch(ArchitectureSpec::Squash::sigmoid);
    PairedModel m = PairedModel::build(a, a, LatentSplit{4, 4, 4}, 2);
    const Mat x = (gaussian_matrix(2, 28 * 28, 13).array() * 0.1 + 0.5).matrix();
    const Mat codes = m.encode1(x);
    CHECK(codes.rows() == 2);
    CHECK(codes.cols() == 8);
    const Mat rec = m.decode1(codes.leftCols(4), codes.rightCols(4));
    CHECK(rec.rows() == 2);
    CHECK(rec.cols() == 28 * 28);
    CHECK(rec.minCoeff() >= 0.0);
    CHECK(rec.maxCoeff() <= 1.0);
}

TEST_CASE("translation preset accepts the shared-only split") {
    ArchitectureSpec a = dense_arch(6, {16});
    PairedModel m = PairedModel::build(a, a, LatentSplit{0, 5, 0}, 4);
    const Mat x = gaussian_matrix(3, 6, 14);
    CHECK(m.encode1(x).cols() == 5);
    const Mat z2 = gaussian_matrix(3, 5, 15);
    CHECK(m.decode2(z2, Mat::Zero(3, 0)).cols() == 6);
}

TEST_CASE("hcat concatenates and validates") {
    Mat a(2, 1), b(2, 2);
    a << 1, 2;
    b << 3, 4, 5, 6;
    const Mat c = hcat(a, b);
    CHECK(c.rows() == 2);
    CHECK(c.cols() == 3);
    CHECK(c(1, 2) == 6.0);
    CHECK_THROWS_AS(hcat(a, Mat::Zero(3, 1)), std::invalid_argument);
}

TEST_CASE("zero_grad clears accumulated gradients") {
    PairedModel m = tiny_model();
    const Mat x = gaussian_matrix(4, 4, 16);
    m.e1.forward(x, true);
    m.e1.backward(gaussian_matrix(4, 4, 17));
    CHECK(nn::flatten_grads(m.params()).cwiseAbs().maxCoeff() > 0.0);
    m.zero_grad();
    CHECK(nn::flatten_grads(m.params()).cwiseAbs().maxCoeff() == 0.0);
}
