#ifndef PWA_TASKS_HPP
#define PWA_TASKS_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>

namespace pwa {

enum class TaskKind { denoising, inpainting, translation };

std::string to_string(TaskKind k);
TaskKind task_from_string(const std::string& s);

// One experiment: forward operator, noise model, data-fidelity choice.
struct TaskSpec {
    TaskKind kind = TaskKind::denoising;
    double noise_std = 1.0;        // denoising default; inpainting uses 0.1
    Eigen::VectorXd mask;          // inpainting only, flattened, entries in [0,1]
    int image_height = 28;
    int image_width = 28;

    void validate() const;
};

// Left-half-zero mask for an h x w image (row-major flattening).
Eigen::VectorXd left_half_mask(int h, int w);

// x2 = x1 + N(0, noise_std^2 I). Observations are not clipped.
Eigen::MatrixXd make_denoising_pairs(const Eigen::MatrixXd& x1, double noise_std,
                                     std::uint64_t seed);

// x2 = mask .* x1 + N(0, noise_std^2 I).
Eigen::MatrixXd make_inpainting_pairs(const Eigen::MatrixXd& x1,
                                      const Eigen::VectorXd& mask,
                                      double noise_std, std::uint64_t seed);

// Closed-form Bayes for x1 ~ N(m0, S0), x2 = A x1 + N(0, Se).
struct LinearGaussianOracle {
    Eigen::VectorXd prior_mean;
    Eigen::MatrixXd prior_cov;
    Eigen::MatrixXd forward;      // A
    Eigen::MatrixXd noise_cov;    // Se

    struct Posterior {
        Eigen::VectorXd mean;
        Eigen::MatrixXd cov;
    };
    Posterior posterior(const Eigen::VectorXd& x2) const;
    Eigen::MatrixXd sample_posterior(const Eigen::VectorXd& x2, int n,
                                     std::uint64_t seed) const;
};

// Affine map x -> T x + b pushing N(m1,S1) onto N(m2,S2) at minimal
// expected squared cost.
struct AffineMap {
    Eigen::MatrixXd linear;
    Eigen::VectorXd offset;
    Eigen::VectorXd operator()(const Eigen::VectorXd& x) const {
        return linear * x + offset;
    }
};

AffineMap gaussian_monge_map(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1,
                             const Eigen::VectorXd& m2, const Eigen::MatrixXd& s2);

// W2^2 between two Gaussians.
double gaussian_w2_squared(const Eigen::VectorXd& m1, const Eigen::MatrixXd& s1,
                           const Eigen::VectorXd& m2, const Eigen::MatrixXd& s2);

// Principal matrix square root of a symmetric PSD matrix.
Eigen::MatrixXd spd_sqrt(const Eigen::MatrixXd& s);

struct GaussianSpec {
    Eigen::VectorXd mean;
    Eigen::MatrixXd cov;
};

// Two unpaired sample sets in independent random order.
struct TranslationData {
    Eigen::MatrixXd x1;
    Eigen::MatrixXd x2;
};

TranslationData make_translation_datasets(const GaussianSpec& mu1,
                                          const GaussianSpec& mu2, int n,
                                          std::uint64_t seed);

Eigen::MatrixXd sample_gaussian(const GaussianSpec& spec, int n, std::uint64_t seed);

}  // namespace pwa

#endif
