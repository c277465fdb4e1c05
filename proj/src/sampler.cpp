#include "pwa/sampler.hpp"

#include <cmath>
#include <stdexcept>

#include "pwa/latent.hpp"

namespace pwa {

namespace {

Eigen::MatrixXd draw_block(int n, int d, std::uint64_t seed) {
    Eigen::MatrixXd z(n, d);
    for (int i = 0; i < n; ++i)
        z.row(i) = gaussian_matrix(1, d, mix_seed(seed, static_cast<std::uint64_t>(i)));
    return z;
}

}  // namespace

Eigen::VectorXd point_estimate(PairedModel& model, const Eigen::VectorXd& x2) {
    const LatentSplit& sp = model.split();
    const nn::Mat codes = model.encode2(x2.transpose());
    const nn::Mat z1 = nn::Mat::Zero(1, sp.d1);
    return model.decode1(z1, codes.leftCols(sp.d2)).row(0);
}

Eigen::MatrixXd sample_conditional(PairedModel& model, const Eigen::VectorXd& x2,
                                   int n, std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_conditional: n >= 1");
    const LatentSplit& sp = model.split();
    const nn::Mat codes = model.encode2(x2.transpose());  // z2 computed once
    const nn::Mat z2 = codes.leftCols(sp.d2).replicate(n, 1);
    const nn::Mat z1 = draw_block(n, sp.d1, seed);
    return model.decode1(z1, z2);
}

Eigen::MatrixXd sample_conditional_reverse(PairedModel& model,
                                           const Eigen::VectorXd& x1, int n,
                                           std::uint64_t seed) {
    if (n < 1) throw std::invalid_argument("sample_conditional_reverse: n >= 1");
    const LatentSplit& sp = model.split();
    const nn::Mat codes = model.encode1(x1.transpose());
    const nn::Mat z2 = codes.rightCols(sp.d2).replicate(n, 1);
    const nn::Mat z3 = draw_block(n, sp.d3, seed);
    return model.decode2(z2, z3);
}

std::vector<Eigen::VectorXd> perturbed_estimates(PairedModel& model,
                                                 const Eigen::VectorXd& x2,
                                                 const std::vector<double>& sigmas,
                                                 int axis_index) {
    const LatentSplit& sp = model.split();
    const nn::Mat codes = model.encode2(x2.transpose());
    const nn::Mat z2 = codes.leftCols(sp.d2);
    std::vector<Eigen::VectorXd> out;
    out.reserve(sigmas.size());
    for (double sigma : sigmas) {
        const Eigen::VectorXd z1 = perturbation_code(sp, sigma, axis_index);
        out.push_back(model.decode1(z1.transpose(), z2).row(0));
    }
    return out;
}

ConditionalMoments conditional_moments(PairedModel& model, const Eigen::VectorXd& x2,
                                       int n, std::uint64_t seed) {
    if (n < 2) throw std::invalid_argument("conditional_moments: n >= 2");
    const Eigen::MatrixXd samples = sample_conditional(model, x2, n, seed);
    ConditionalMoments m;
    m.mean = samples.colwise().mean();
    const Eigen::MatrixXd centered = samples.rowwise() - m.mean.transpose();
    m.stddev = (centered.array().square().colwise().sum() / (n - 1)).sqrt();
    return m;
}

namespace {

void require_translation_split(const PairedModel& model, const char* what) {
    const LatentSplit& sp = model.split();
    if (sp.d1 != 0 || sp.d3 != 0)
        throw std::invalid_argument(std::string(what) +
                                    ": requires translation split (0, d2, 0)");
}

}  // namespace

Eigen::MatrixXd translate_batch(PairedModel& model, const Eigen::MatrixXd& x1) {
    require_translation_split(model, "translate");
    const LatentSplit& sp = model.split();
    const nn::Mat codes = model.encode1(x1);
    return model.decode2(codes, nn::Mat::Zero(x1.rows(), sp.d3));
}

Eigen::MatrixXd translate_inverse_batch(PairedModel& model, const Eigen::MatrixXd& x2) {
    require_translation_split(model, "translate_inverse");
    const nn::Mat codes = model.encode2(x2);
    return model.decode1(nn::Mat::Zero(x2.rows(), 0), codes);
}

Eigen::VectorXd translate(PairedModel& model, const Eigen::VectorXd& x1) {
    return translate_batch(model, x1.transpose()).row(0);
}

Eigen::VectorXd translate_inverse(PairedModel& model, const Eigen::VectorXd& x2) {
    return translate_inverse_batch(model, x2.transpose()).row(0);
}

bool z1_block_is_dead(PairedModel& model, const Eigen::VectorXd& x2, double sigma,
                      double tol) {
    const LatentSplit& sp = model.split();
    if (sp.d1 == 0) return true;
    const Eigen::VectorXd base = point_estimate(model, x2);
    for (int axis = 0; axis < sp.d1; ++axis) {
        for (double s : {sigma, -sigma}) {
            const auto est = perturbed_estimates(model, x2, {s}, axis);
            if ((est[0] - base).cwiseAbs().maxCoeff() >= tol) return false;
        }
    }
    return true;
}

}  // namespace pwa
