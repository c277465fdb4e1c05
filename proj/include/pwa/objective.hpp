#ifndef PWA_OBJECTIVE_HPP
#define PWA_OBJECTIVE_HPP

#include <cstdint>
#include <string>

#include "pwa/measure.hpp"
#include "pwa/model.hpp"
#include "pwa/tasks.hpp"

namespace pwa {

enum class DivergenceKind { sinkhorn, sliced, mmd };

std::string to_string(DivergenceKind k);
DivergenceKind divergence_from_string(const std::string& s);

struct DivergenceConfig {
    DivergenceKind kind = DivergenceKind::sinkhorn;
    SinkhornOptions sinkhorn;       // epsilon <= 0 means scale by mean cost
    int n_projections = 64;         // sliced
    double mmd_bandwidth = 0.0;     // <= 0 means median heuristic
    std::uint64_t seed = 0;         // sliced projections
};

struct TrainConfig {
    double lambda1 = 1.0;  // latent divergence weight
    double lambda2 = 1.0;  // data-fidelity weight
    DivergenceConfig divergence;
    int batch_size = 128;
    double learning_rate = 1e-3;
    int iterations = 2000;
    std::uint64_t seed = 0;

    void validate() const {
        if (lambda1 < 0.0 || lambda2 < 0.0)
            throw std::invalid_argument("train config: negative loss weight");
        if (batch_size < 2)
            throw std::invalid_argument("train config: batch_size must be >= 2");
    }
};

struct LossBreakdown {
    double total = 0.0;
    double reconstruction = 0.0;
    double divergence = 0.0;
    double fidelity = 0.0;
    bool divergence_converged = true;
};

// Shared dispatch for the configured latent divergence; gradient is with
// respect to the rows of `points`.
struct DivergenceValue {
    double value = 0.0;
    Eigen::MatrixXd grad;
    bool converged = true;
};

DivergenceValue latent_divergence(const DivergenceConfig& cfg,
                                  const Eigen::MatrixXd& points,
                                  const Eigen::MatrixXd& target,
                                  bool with_grad);

// All loss terms run the networks in training mode and, when `with_grad`
// is set, accumulate parameter gradients into the model. Reductions are
// mean-per-element within a sample, then mean over the batch.

double reconstruction_term(PairedModel& model, const nn::Mat& x1, const nn::Mat& x2,
                           bool with_grad = false);

// Mixed-code reconstruction for paired samples: the decoder for each side
// reads its private block from its own encoder but the shared block from the
// other side's encoder. This ties the two encoders' shared-block embeddings
// together; without it the decoders can treat the two shared-block manifolds
// as disjoint and conditional sampling degenerates to the posterior mean.
double cross_reconstruction_term(PairedModel& model, const nn::Mat& x1,
                                 const nn::Mat& x2, bool with_grad = false);

double latent_divergence_term(PairedModel& model, const nn::Mat& x1,
                              const nn::Mat& x2, const Eigen::MatrixXd& prior_sample,
                              const DivergenceConfig& cfg, bool with_grad = false,
                              bool* converged = nullptr, double grad_scale = 1.0);

double data_fidelity_denoising(PairedModel& model, const nn::Mat& x1,
                               const nn::Mat& x2, const Eigen::MatrixXd& z1_sample,
                               const Eigen::MatrixXd& z3_sample,
                               bool with_grad = false, double grad_scale = 1.0);

double data_fidelity_inpainting(PairedModel& model, const nn::Mat& x1,
                                const nn::Mat& x2, const Eigen::VectorXd& mask,
                                const Eigen::MatrixXd& z1_sample,
                                const Eigen::MatrixXd& z3_sample,
                                bool with_grad = false, double grad_scale = 1.0);

// Squared displacement of the two cross maps on independent marginal
// batches; minimal exactly for the least-cost cycle-consistent map.
double data_fidelity_translation(PairedModel& model, const nn::Mat& x1,
                                 const nn::Mat& x2, bool with_grad = false,
                                 double grad_scale = 1.0);

// reconstruction (plus cross reconstruction for paired tasks) +
// lambda1 * divergence + lambda2 * R_d, with prior draws derived from
// (config.seed, step).
LossBreakdown total_loss(PairedModel& model, const nn::Mat& x1, const nn::Mat& x2,
                         const TrainConfig& config, const TaskSpec& task,
                         long step = 0, bool with_grad = false);

}  // namespace pwa

#endif
