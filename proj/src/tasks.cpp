#include "pwa/tasks.hpp"

#include <algorithm>
#include <numeric>
#include <random>
#include <stdexcept>

#include "pwa/latent.hpp"

namespace pwa {

std::string to_string(TaskKind k) {
    switch (k) {
        case TaskKind::denoising: return "denoise";
        case TaskKind::inpainting: return "inpaint";
        case TaskKind::translation: return "translate";
    }
    return "?";
}

TaskKind task_from_string(const std::string& s) {
    if (s == "denoise" || s == "denoising") return TaskKind::denoising;
    if (s == "inpaint" || s == "inpainting") return TaskKind::inpainting;
    if (s == "translate" || s == "translation") return TaskKind::translation;
    throw std::invalid_argument("unknown task kind: " + s);
}

void TaskSpec::validate() const {
    if (kind != TaskKind::translation && noise_std < 0.0)
        throw std::invalid_argument("task: negative noise std");
    if (kind == TaskKind::inpainting) {
        if (mask.size() != static_cast<Eigen::Index>(image_height) * image_width)
            throw std::invalid_argument("task: mask shape mismatch");
        if ((mask.array() < 0.0).any() || (mask.array() > 1.0).any())
            throw std::invalid_argument("task: mask entries must be in [0,1]");
    }
}

Eigen::VectorXd left_half_mask(int h, int w) {
    Eigen::VectorXd m = Eigen::VectorXd::Ones(static_cast<Eigen::Index>(h) * w);
    for (int i = 0; i < h; ++i)
        for (int j = 0; j < w / 2; ++j) m[static_cast<Eigen::Index>(i) * w + j] = 0.0;
    return m;
}

Eigen::MatrixXd make_denoising_pairs(const Eigen::MatrixXd& x1, double noise_std,
                                     std::uint64_t seed) {
    return x1 + noise_std * gaussian_matrix(x1.rows(), x1.cols(), seed);
}

Eigen::MatrixXd make_inpainting_pairs(const Eigen::MatrixXd& x1,
                                      const Eigen::VectorXd& mask,
                                      double noise_std, std::uint64_t seed) {
    if (mask.size() != x1.cols())
        throw std::invalid_argument("inpainting: mask shape mismatch");
    Eigen::MatrixXd x2 = x1.array().rowwise() * mask.transpose().array();
    return x2 + noise_std * gaussian_matrix(x1.rows(), x1.cols(), seed);
}

LinearGaussianOracle::Posterior LinearGaussianOracle::posterior(
    const Eigen::VectorXd& x2) const {
    const Eigen::Index d = prior_mean.size();
    if (prior_cov.rows() != d || forward.cols() != d ||
        noise_cov.rows() != forward.rows() || x2.size() != forward.rows())
        throw std::invalid_argument("linear-gaussian oracle: inconsistent dimensions");
    Eigen::LLT<Eigen::MatrixXd> llt0(prior_cov);
    Eigen::LLT<Eigen::MatrixXd> llte(noise_cov);
    if (llt0.info() != Eigen::Success || llte.info() != Eigen::Success)
        throw std::invalid_argument("linear-gaussian oracle: covariance not SPD");
    const Eigen::MatrixXd prec0 = llt0.solve(Eigen::MatrixXd::Identity(d, d));
    const Eigen::MatrixXd at_se_inv = forward.transpose() * llte.solve(
        Eigen::MatrixXd::Identity(noise_cov.rows(), noise_cov.cols()));
    Posterior p;
    const Eigen::MatrixXd prec_post = prec0 + at_se_inv * forward;
    Eigen::LLT<Eigen::MatrixXd> lltp(prec_post);
    p.cov = lltp.solve(Eigen::MatrixXd::Identity(d, d));
    p.cov = 0.5 * (p.cov + p.cov.transpose());
    p.mean = p.cov * (prec0 * prior_mean + at_se_inv * x2);
    return p;
}

Eigen::MatrixXd LinearGaussianOracle::sample_posterior(const Eigen::VectorXd& x2,
                                                       int n,
                                                       std::uint64_t seed) const {
    const Posterior p = posterior(x2);
    GaussianSpec spec{p.mean, p.cov};
    return sample_gaussian(spec, n, seed);
}

Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& s) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(s);
    if (es.info() != Eigen::Success)
        throw std::invalid_argument("spd_sqrt: eigendecomposition failed");
    if ((es.eigenvalues().array() < -1e-10).any())
        throw std::invalid_argument("spd_sqrt: matrix not positive semidefinite");
    return es.eigenvectors() *
           es.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal() *
           es.eigenvectors().transpose();
}

AffineMap gaussian_monge_map(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1,
                             const Eigen::VectorXd& m2, const Eigen::MatrixXd& s2) {
    Eigen::LLT<Eigen::MatrixXd> llt1(s1), llt2(s2);
    if (llt1.info() != Eigen::Success || llt2.info() != Eigen::Success)
        throw std::invalid_argument("gaussian_monge_map: inputs must be SPD");
    const Eigen::MatrixXd r1 = spd_sqrt(s1);
    const Eigen::MatrixXd r1_inv = r1.llt().solve(
        Eigen::MatrixXd::Identity(r1.rows(), r1.cols()));
    AffineMap map;
    map.linear = r1_inv * spd_sqrt(r1 * s2 * r1) * r1_inv;
    map.offset = m2 - map.linear * m1;
    return map;
}

double gaussian_w2_squared(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1,
                           const Eigen::VectorXd& m2, const Eigen::MatrixXd& s2) {
    const Eigen::MatrixXd r2 = spd_sqrt(s2);
    const Eigen::MatrixXd cross = spd_sqrt(r2 * s1 * r2);
    return (m1 - m2).squaredNorm() + (s1 + s2 - 2.0 * cross).trace();
}

Eigen::MatrixXd sample_gaussian(const GaussianSpec& spec, int n, std::uint64_t seed) {
    const Eigen::Index d = spec.mean.size();
    const Eigen::MatrixXd root = spd_sqrt(spec.cov);
    Eigen::MatrixXd z = gaussian_matrix(n, d, seed);
    Eigen::MatrixXd x = z * root.transpose();
    x.rowwise() += spec.mean.transpose();
    return x;
}

TranslationData make_translation_datasets(const GaussianSpec& mu1,
                                          const GaussianSpec& mu2, int n,
                                          std::uint64_t seed) {
    TranslationData out;
    out.x1 = sample_gaussian(mu1, n, mix_seed(seed, 1));
    out.x2 = sample_gaussian(mu2, n, mix_seed(seed, 2));
    // Shuffle each set independently so no index pairing leaks through.
    std::mt19937_64 rng(mix_seed(seed, 3));
    for (auto* m : {&out.x1, &out.x2}) {
        std::vector<int> idx(n);
        std::iota(idx.begin(), idx.end(), 0);
        std::shuffle(idx.begin(), idx.end(), rng);
        Eigen::MatrixXd shuffled(m->rows(), m->cols());
        for (int i = 0; i < n; ++i) shuffled.row(i) = m->row(idx[i]);
        *m = std::move(shuffled);
    }
    return out;
}

}  // namespace pwa
