#include "pwa/objective.hpp"

#include <cmath>
#include <stdexcept>

namespace pwa {

std::string to_string(DivergenceKind k) {
    switch (k) {
        case DivergenceKind::sinkhorn: return "sinkhorn";
        case DivergenceKind::sliced: return "sliced";
        case DivergenceKind::mmd: return "mmd";
    }
    return "?";
}

DivergenceKind divergence_from_string(const std::string& s) {
    if (s == "sinkhorn") return DivergenceKind::sinkhorn;
    if (s == "sliced") return DivergenceKind::sliced;
    if (s == "mmd") return DivergenceKind::mmd;
    throw std::invalid_argument("unknown divergence: " + s);
}

DivergenceValue latent_divergence(const DivergenceConfig& cfg,
                                  const Eigen::MatrixXd& points,
                                  const Eigen::MatrixXd& target, bool with_grad) {
    const auto mu = EmpiricalMeasure::uniform(points);
    const auto nu = EmpiricalMeasure::uniform(target);
    DivergenceValue out;
    switch (cfg.kind) {
        case DivergenceKind::sinkhorn: {
            SinkhornOptions opts = cfg.sinkhorn;
            opts.with_grad = with_grad;
            const SinkhornResult r = sinkhorn_divergence(mu, nu, opts);
            out.value = r.value;
            out.converged = r.converged;
            if (with_grad) out.grad = r.grad_mu;
            break;
        }
        case DivergenceKind::sliced: {
            if (with_grad) {
                const SlicedResult r =
                    sliced_wasserstein_grad(mu, nu, cfg.n_projections, cfg.seed);
                out.value = r.value;
                out.grad = r.grad_mu;
            } else {
                out.value = sliced_wasserstein(mu, nu, cfg.n_projections, 2.0, cfg.seed);
            }
            break;
        }
        case DivergenceKind::mmd: {
            const double bw = cfg.mmd_bandwidth > 0.0 ? cfg.mmd_bandwidth
                                                      : median_bandwidth(mu, nu);
            if (with_grad) {
                const MmdResult r = mmd_grad(mu, nu, bw);
                out.value = r.value;
                out.grad = r.grad_mu;
            } else {
                out.value = mmd(mu, nu, bw, false);
            }
            break;
        }
    }
    return out;
}

namespace {

// d/dr of mean-per-element L1; also the loss value.
double l1_loss(const nn::Mat& pred, const nn::Mat& target, nn::Mat* grad) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::invalid_argument("loss: shape mismatch");
    const double scale = 1.0 / static_cast<double>(pred.size());
    const nn::Mat r = pred - target;
    if (grad) *grad = scale * r.array().sign().matrix();
    return scale * r.array().abs().sum();
}

double l2_loss(const nn::Mat& pred, const nn::Mat& target, nn::Mat* grad) {
    if (pred.rows() != target.rows() || pred.cols() != target.cols())
        throw std::invalid_argument("loss: shape mismatch");
    const double scale = 1.0 / static_cast<double>(pred.size());
    const nn::Mat r = pred - target;
    if (grad) *grad = 2.0 * scale * r;
    return scale * r.array().square().sum();
}

}  // namespace

double reconstruction_term(PairedModel& model, const nn::Mat& x1, const nn::Mat& x2,
                           bool with_grad) {
    if (x1.rows() == 0 || x2.rows() == 0)
        throw std::invalid_argument("reconstruction_term: empty batch");
    model.check_x1(x1);
    model.check_x2(x2);
    double value = 0.0;
    nn::Mat grad;
    {
        const nn::Mat codes = model.e1.forward(x1, true);
        const nn::Mat x1hat = model.d1.forward(codes, true);
        value += l1_loss(x1hat, x1, with_grad ? &grad : nullptr);
        if (with_grad) model.e1.backward(model.d1.backward(grad));
    }
    {
        const nn::Mat codes = model.e2.forward(x2, true);
        const nn::Mat x2hat = model.d2.forward(codes, true);
        value += l1_loss(x2hat, x2, with_grad ? &grad : nullptr);
        if (with_grad) model.e2.backward(model.d2.backward(grad));
    }
    return value;
}

double cross_reconstruction_term(PairedModel& model, const nn::Mat& x1,
                                 const nn::Mat& x2, bool with_grad) {
    if (x1.rows() != x2.rows())
        throw std::invalid_argument("cross_reconstruction_term: needs paired batches");
    model.check_x1(x1);
    model.check_x2(x2);
    const LatentSplit& sp = model.split();
    double value = 0.0;
    nn::Mat grad;
    {
        // D1(E1(x1)_z1, E2(x2)_z2) ~ x1
        const nn::Mat codes1 = model.e1.forward(x1, true);
        const nn::Mat codes2 = model.e2.forward(x2, true);
        const nn::Mat x1hat =
            model.d1.forward(hcat(codes1.leftCols(sp.d1), codes2.leftCols(sp.d2)), true);
        value += l1_loss(x1hat, x1, with_grad ? &grad : nullptr);
        if (with_grad) {
            const nn::Mat gin = model.d1.backward(grad);
            nn::Mat g1 = nn::Mat::Zero(x1.rows(), sp.d1 + sp.d2);
            g1.leftCols(sp.d1) = gin.leftCols(sp.d1);
            model.e1.backward(g1);
            nn::Mat g2 = nn::Mat::Zero(x2.rows(), sp.d2 + sp.d3);
            g2.leftCols(sp.d2) = gin.rightCols(sp.d2);
            model.e2.backward(g2);
        }
    }
    {
        // D2(E1(x1)_z2, E2(x2)_z3) ~ x2
        const nn::Mat codes1 = model.e1.forward(x1, true);
        const nn::Mat codes2 = model.e2.forward(x2, true);
        const nn::Mat x2hat =
            model.d2.forward(hcat(codes1.rightCols(sp.d2), codes2.rightCols(sp.d3)), true);
        value += l1_loss(x2hat, x2, with_grad ? &grad : nullptr);
        if (with_grad) {
            const nn::Mat gin = model.d2.backward(grad);
            nn::Mat g1 = nn::Mat::Zero(x1.rows(), sp.d1 + sp.d2);
            g1.rightCols(sp.d2) = gin.leftCols(sp.d2);
            model.e1.backward(g1);
            nn::Mat g2 = nn::Mat::Zero(x2.rows(), sp.d2 + sp.d3);
            g2.rightCols(sp.d3) = gin.rightCols(sp.d3);
            model.e2.backward(g2);
        }
    }
    return value;
}

double latent_divergence_term(PairedModel& model, const nn::Mat& x1,
                              const nn::Mat& x2, const Eigen::MatrixXd& prior_sample,
                              const DivergenceConfig& cfg, bool with_grad,
                              bool* converged, double grad_scale) {
    const LatentSplit& sp = model.split();
    if (prior_sample.cols() != sp.total())
        throw std::invalid_argument("latent_divergence_term: prior width mismatch");
    if (x1.rows() < 2 || prior_sample.rows() < 2)
        throw std::invalid_argument("latent_divergence_term: needs batch >= 2");
    bool ok = true;
    double value = 0.0;
    {
        const nn::Mat codes = model.e1.forward(x1, true);
        const DivergenceValue dv = latent_divergence(
            cfg, codes, prior_sample.leftCols(sp.d1 + sp.d2), with_grad);
        value += dv.value;
        ok = ok && dv.converged;
        if (with_grad) model.e1.backward(grad_scale * dv.grad);
    }
    {
        const nn::Mat codes = model.e2.forward(x2, true);
        const DivergenceValue dv = latent_divergence(
            cfg, codes, prior_sample.rightCols(sp.d2 + sp.d3), with_grad);
        value += dv.value;
        ok = ok && dv.converged;
        if (with_grad) model.e2.backward(grad_scale * dv.grad);
    }
    if (converged) *converged = ok;
    return value;
}

namespace {

// Cross-fidelity term ||x_target - D(z_free, shared-block-of E(x_cond))||
// with the gradient routed through both the decoder and the encoder.
// `shared_first`: whether the shared z2 block sits in the leading columns
// of the decoder input (D1 gets (z1, z2), D2 gets (z2, z3)).
double cross_fidelity(nn::Sequential& enc, nn::Sequential& dec,
                      const nn::Mat& x_cond, const nn::Mat& x_target,
                      const Eigen::MatrixXd& z_free, int d_shared,
                      bool shared_first_in_enc, bool shared_first_in_dec,
                      bool l1, const Eigen::VectorXd* mask, bool with_grad,
                      double grad_scale) {
    const nn::Mat codes = enc.forward(x_cond, true);
    const nn::Mat z_shared = shared_first_in_enc
                                 ? codes.leftCols(d_shared)
                                 : codes.rightCols(d_shared);
    const nn::Mat dec_in = shared_first_in_dec ? hcat(z_shared, z_free)
                                               : hcat(z_free, z_shared);
    const nn::Mat out = dec.forward(dec_in, true);
    nn::Mat grad;
    double value;
    if (mask) {
        const nn::Mat mout = out.array().rowwise() * mask->transpose().array();
        const nn::Mat mtgt = x_target.array().rowwise() * mask->transpose().array();
        value = l1 ? l1_loss(mout, mtgt, with_grad ? &grad : nullptr)
                   : l2_loss(mout, mtgt, with_grad ? &grad : nullptr);
        if (with_grad) grad = grad.array().rowwise() * mask->transpose().array();
    } else {
        value = l1 ? l1_loss(out, x_target, with_grad ? &grad : nullptr)
                   : l2_loss(out, x_target, with_grad ? &grad : nullptr);
    }
    if (with_grad) {
        const nn::Mat gin = dec.backward(grad_scale * grad);
        const nn::Mat gshared = shared_first_in_dec
                                    ? gin.leftCols(d_shared)
                                    : gin.rightCols(d_shared);
        nn::Mat genc = nn::Mat::Zero(codes.rows(), codes.cols());
        if (shared_first_in_enc)
            genc.leftCols(d_shared) = gshared;
        else
            genc.rightCols(d_shared) = gshared;
        enc.backward(genc);
    }
    return value;
}

}  // namespace

double data_fidelity_denoising(PairedModel& model, const nn::Mat& x1,
                               const nn::Mat& x2, const Eigen::MatrixXd& z1_sample,
                               const Eigen::MatrixXd& z3_sample, bool with_grad,
                               double grad_scale) {
    model.check_x1(x1);
    model.check_x2(x2);
    const LatentSplit& sp = model.split();
    // ||x1 - D1(z1, E2(x2)_2)||^2, z2 shared block first in E2's output,
    // second in D1's input.
    double value = cross_fidelity(model.e2, model.d1, x2, x1, z1_sample, sp.d2,
                                  /*shared_first_in_enc=*/true,
                                  /*shared_first_in_dec=*/false,
                                  /*l1=*/false, nullptr, with_grad, grad_scale);
    // ||x2 - D2(E1(x1)_2, z3)||^2
    value += cross_fidelity(model.e1, model.d2, x1, x2, z3_sample, sp.d2,
                            /*shared_first_in_enc=*/false,
                            /*shared_first_in_dec=*/true,
                            /*l1=*/false, nullptr, with_grad, grad_scale);
    return value;
}

double data_fidelity_inpainting(PairedModel& model, const nn::Mat& x1,
                                const nn::Mat& x2, const Eigen::VectorXd& mask,
                                const Eigen::MatrixXd& z1_sample,
                                const Eigen::MatrixXd& z3_sample, bool with_grad,
                               double grad_scale) {
    model.check_x1(x1);
    model.check_x2(x2);
    if (mask.size() != x1.cols())
        throw std::invalid_argument("data_fidelity_inpainting: mask shape mismatch");
    const LatentSplit& sp = model.split();
    double value = cross_fidelity(model.e2, model.d1, x2, x1, z1_sample, sp.d2,
                                  true, false, /*l1=*/true, &mask, with_grad, grad_scale);
    value += cross_fidelity(model.e1, model.d2, x1, x2, z3_sample, sp.d2,
                            false, true, /*l1=*/true, &mask, with_grad, grad_scale);
    return value;
}

double data_fidelity_translation(PairedModel& model, const nn::Mat& x1,
                                 const nn::Mat& x2, bool with_grad,
                                 double grad_scale) {
    const LatentSplit& sp = model.split();
    if (sp.d1 != 0 || sp.d3 != 0)
        throw std::invalid_argument(
            "data_fidelity_translation: requires split (0, d2, 0)");
    const Eigen::Index n1 = x1.rows(), n2 = x2.rows();
    const nn::Mat empty1(n2, 0), empty2(n1, 0);
    // ||x2 - D1(E2(x2))||^2: displacement of the backward map.
    double value = cross_fidelity(model.e2, model.d1, x2, x2, empty1, sp.d2,
                                  true, true, /*l1=*/false, nullptr, with_grad,
                                  grad_scale);
    // ||x1 - D2(E1(x1))||^2: displacement of the forward map.
    value += cross_fidelity(model.e1, model.d2, x1, x1, empty2, sp.d2,
                            true, true, /*l1=*/false, nullptr, with_grad,
                            grad_scale);
    return value;
}

LossBreakdown total_loss(PairedModel& model, const nn::Mat& x1, const nn::Mat& x2,
                         const TrainConfig& config, const TaskSpec& task,
                         long step, bool with_grad) {
    config.validate();
    const LatentSplit& sp = model.split();
    const std::uint64_t step_seed = mix_seed(config.seed, 0x10000 + static_cast<std::uint64_t>(step));
    const int n = static_cast<int>(x1.rows());

    LossBreakdown b;
    b.reconstruction = reconstruction_term(model, x1, x2, with_grad);
    if (task.kind != TaskKind::translation)
        b.reconstruction += cross_reconstruction_term(model, x1, x2, with_grad);

    if (config.lambda1 > 0.0) {
        const Eigen::MatrixXd prior =
            sample_prior(sp, std::max(n, 2), mix_seed(step_seed, 1));
        DivergenceConfig div_cfg = config.divergence;
        div_cfg.seed = mix_seed(step_seed, 2);
        bool converged = true;
        b.divergence = latent_divergence_term(model, x1, x2, prior, div_cfg,
                                              with_grad, &converged,
                                              config.lambda1);
        b.divergence_converged = converged;
    }

    if (config.lambda2 > 0.0) {
        switch (task.kind) {
            case TaskKind::denoising:
            case TaskKind::inpainting: {
                const Eigen::MatrixXd z1s =
                    gaussian_matrix(n, sp.d1, mix_seed(step_seed, 3));
                const Eigen::MatrixXd z3s =
                    gaussian_matrix(n, sp.d3, mix_seed(step_seed, 4));
                if (task.kind == TaskKind::denoising)
                    b.fidelity = data_fidelity_denoising(model, x1, x2, z1s, z3s,
                                                         with_grad, config.lambda2);
                else
                    b.fidelity = data_fidelity_inpainting(model, x1, x2, task.mask,
                                                          z1s, z3s, with_grad,
                                                          config.lambda2);
                break;
            }
            case TaskKind::translation:
                b.fidelity = data_fidelity_translation(model, x1, x2, with_grad,
                                                       config.lambda2);
                break;
        }
    }

    b.total = b.reconstruction + config.lambda1 * b.divergence +
              config.lambda2 * b.fidelity;
    return b;
}

}  // namespace pwa
