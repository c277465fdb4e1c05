#include "pwa/nn.hpp"

#include <cmath>
#include <stdexcept>

#include "pwa/latent.hpp"

namespace pwa::nn {

// ---------------------------------------------------------------- Dense

Dense::Dense(int in, int out)
    : w(Mat::Zero(in, out)), b(Mat::Zero(1, out)),
      gw(Mat::Zero(in, out)), gb(Mat::Zero(1, out)) {}

void Dense::init(std::uint64_t seed) {
    const double scale = std::sqrt(2.0 / static_cast<double>(w.rows()));
    w = scale * gaussian_matrix(w.rows(), w.cols(), seed);
    b.setZero();
}

Mat Dense::forward(const Mat& x, bool) {
    if (x.cols() != w.rows()) throw std::invalid_argument("dense: input width mismatch");
    x_ = x;
    Mat y = x * w;
    y.rowwise() += b.row(0);
    return y;
}

Mat Dense::backward(const Mat& gy) {
    gw += x_.transpose() * gy;
    gb.row(0) += gy.colwise().sum();
    return gy * w.transpose();
}

void Dense::collect(std::vector<ParamRef>& out) {
    out.push_back({&w, &gw});
    out.push_back({&b, &gb});
}

// ----------------------------------------------------------- activations

Mat Relu::forward(const Mat& x, bool) {
    x_ = x;
    return x.cwiseMax(0.0);
}

Mat Relu::backward(const Mat& gy) {
    return (x_.array() > 0.0).select(gy, 0.0);
}

Mat Sigmoid::forward(const Mat& x, bool) {
    y_ = (1.0 / (1.0 + (-x.array()).exp())).matrix();
    return y_;
}

Mat Sigmoid::backward(const Mat& gy) {
    return (gy.array() * y_.array() * (1.0 - y_.array())).matrix();
}

// ------------------------------------------------------------ BatchNorm

BatchNorm::BatchNorm(int channels, int spatial, double momentum, double eps)
    : gamma(Mat::Ones(1, channels)), beta(Mat::Zero(1, channels)),
      ggamma(Mat::Zero(1, channels)), gbeta(Mat::Zero(1, channels)),
      running_mean(Mat::Zero(1, channels)), running_var(Mat::Ones(1, channels)),
      c_(channels), s_(spatial), momentum_(momentum), eps_(eps) {}

Mat BatchNorm::forward(const Mat& x, bool training) {
    if (x.cols() != static_cast<Eigen::Index>(c_) * s_)
        throw std::invalid_argument("batchnorm: input width mismatch");
    const Eigen::Index bsz = x.rows();
    const double cnt = static_cast<double>(bsz) * s_;
    Mat y(bsz, x.cols());
    xc_.resize(bsz, x.cols());
    inv_std_.resize(c_);
    for (int c = 0; c < c_; ++c) {
        auto blk = x.middleCols(static_cast<Eigen::Index>(c) * s_, s_);
        double mean, var;
        if (training) {
            mean = blk.sum() / cnt;
            var = (blk.array() - mean).square().sum() / cnt;
            running_mean(0, c) = (1.0 - momentum_) * running_mean(0, c) + momentum_ * mean;
            running_var(0, c) = (1.0 - momentum_) * running_var(0, c) + momentum_ * var;
        } else {
            mean = running_mean(0, c);
            var = running_var(0, c);
        }
        const double istd = 1.0 / std::sqrt(var + eps_);
        inv_std_[c] = istd;
        xc_.middleCols(static_cast<Eigen::Index>(c) * s_, s_) = blk.array() - mean;
        y.middleCols(static_cast<Eigen::Index>(c) * s_, s_) =
            (xc_.middleCols(static_cast<Eigen::Index>(c) * s_, s_).array() * istd) *
                gamma(0, c) +
            beta(0, c);
    }
    return y;
}

Mat BatchNorm::backward(const Mat& gy) {
    const Eigen::Index bsz = gy.rows();
    const double cnt = static_cast<double>(bsz) * s_;
    Mat gx(bsz, gy.cols());
    for (int c = 0; c < c_; ++c) {
        auto g = gy.middleCols(static_cast<Eigen::Index>(c) * s_, s_);
        auto xc = xc_.middleCols(static_cast<Eigen::Index>(c) * s_, s_);
        const double istd = inv_std_[c];
        Eigen::ArrayXXd xhat = xc.array() * istd;
        gbeta(0, c) += g.sum();
        ggamma(0, c) += (g.array() * xhat).sum();
        // Standard batch-norm backward (batch statistics path).
        const double sum_g = g.sum();
        const double sum_gx = (g.array() * xhat).sum();
        gx.middleCols(static_cast<Eigen::Index>(c) * s_, s_) =
            (gamma(0, c) * istd / cnt) *
            (cnt * g.array() - sum_g - xhat * sum_gx).matrix();
    }
    return gx;
}

void BatchNorm::collect(std::vector<ParamRef>& out) {
    out.push_back({&gamma, &ggamma});
    out.push_back({&beta, &gbeta});
}

void BatchNorm::collect_state(std::vector<Eigen::MatrixXd*>& out) {
    out.push_back(&running_mean);
    out.push_back(&running_var);
}

// --------------------------------------------------------------- Conv2d

Conv2d::Conv2d(int in_c, int in_h, int in_w, int out_c, int kernel, int stride, int pad)
    : in_c_(in_c), in_h_(in_h), in_w_(in_w), out_c_(out_c), k_(kernel),
      stride_(stride), pad_(pad) {
    oh_ = (in_h + 2 * pad - kernel) / stride + 1;
    ow_ = (in_w + 2 * pad - kernel) / stride + 1;
    if (oh_ < 1 || ow_ < 1) throw std::invalid_argument("conv2d: empty output");
    w = Mat::Zero(out_c, in_c * kernel * kernel);
    b = Mat::Zero(1, out_c);
    gw = Mat::Zero(w.rows(), w.cols());
    gb = Mat::Zero(1, out_c);
}

void Conv2d::init(std::uint64_t seed) {
    const double scale = std::sqrt(2.0 / static_cast<double>(w.cols()));
    w = scale * gaussian_matrix(w.rows(), w.cols(), seed);
    b.setZero();
}

Mat Conv2d::im2col(const Eigen::Ref<const Eigen::RowVectorXd>& row) const {
    Mat col = Mat::Zero(static_cast<Eigen::Index>(in_c_) * k_ * k_,
                        static_cast<Eigen::Index>(oh_) * ow_);
    for (int c = 0; c < in_c_; ++c) {
        const int base = c * in_h_ * in_w_;
        for (int kh = 0; kh < k_; ++kh)
            for (int kw = 0; kw < k_; ++kw) {
                const int r = (c * k_ + kh) * k_ + kw;
                for (int y = 0; y < oh_; ++y) {
                    const int sy = y * stride_ + kh - pad_;
                    if (sy < 0 || sy >= in_h_) continue;
                    for (int x = 0; x < ow_; ++x) {
                        const int sx = x * stride_ + kw - pad_;
                        if (sx < 0 || sx >= in_w_) continue;
                        col(r, y * ow_ + x) = row[base + sy * in_w_ + sx];
                    }
                }
            }
    }
    return col;
}

Mat Conv2d::forward(const Mat& x, bool) {
    if (x.cols() != static_cast<Eigen::Index>(in_c_) * in_h_ * in_w_)
        throw std::invalid_argument("conv2d: input width mismatch");
    x_ = x;
    const Eigen::Index bsz = x.rows();
    Mat y(bsz, out_features());
    for (Eigen::Index s = 0; s < bsz; ++s) {
        Mat col = im2col(x.row(s));
        Mat o = w * col;  // out_c x (oh*ow)
        o.colwise() += b.row(0).transpose();
        for (int c = 0; c < out_c_; ++c)
            y.row(s).segment(static_cast<Eigen::Index>(c) * oh_ * ow_, oh_ * ow_) =
                o.row(c);
    }
    return y;
}

Mat Conv2d::backward(const Mat& gy) {
    const Eigen::Index bsz = gy.rows();
    Mat gx = Mat::Zero(bsz, x_.cols());
    for (Eigen::Index s = 0; s < bsz; ++s) {
        Mat go(out_c_, static_cast<Eigen::Index>(oh_) * ow_);
        for (int c = 0; c < out_c_; ++c)
            go.row(c) =
                gy.row(s).segment(static_cast<Eigen::Index>(c) * oh_ * ow_, oh_ * ow_);
        Mat col = im2col(x_.row(s));
        gw += go * col.transpose();
        gb.row(0) += go.rowwise().sum().transpose();
        Mat gcol = w.transpose() * go;  // (in_c*k*k) x (oh*ow)
        // col2im
        for (int c = 0; c < in_c_; ++c) {
            const int base = c * in_h_ * in_w_;
            for (int kh = 0; kh < k_; ++kh)
                for (int kw = 0; kw < k_; ++kw) {
                    const int r = (c * k_ + kh) * k_ + kw;
                    for (int y = 0; y < oh_; ++y) {
                        const int sy = y * stride_ + kh - pad_;
                        if (sy < 0 || sy >= in_h_) continue;
                        for (int x = 0; x < ow_; ++x) {
                            const int sx = x * stride_ + kw - pad_;
                            if (sx < 0 || sx >= in_w_) continue;
                            gx(s, base + sy * in_w_ + sx) += gcol(r, y * ow_ + x);
                        }
                    }
                }
        }
    }
    return gx;
}

void Conv2d::collect(std::vector<ParamRef>& out) {
    out.push_back({&w, &gw});
    out.push_back({&b, &gb});
}

// ----------------------------------------------------------- Upsample2x

Upsample2x::Upsample2x(int c, int h, int w) : c_(c), h_(h), w_(w) {}

Mat Upsample2x::forward(const Mat& x, bool) {
    if (x.cols() != static_cast<Eigen::Index>(c_) * h_ * w_)
        throw std::invalid_argument("upsample: input width mismatch");
    const Eigen::Index bsz = x.rows();
    const int oh = 2 * h_, ow = 2 * w_;
    Mat y(bsz, static_cast<Eigen::Index>(c_) * oh * ow);
    for (Eigen::Index s = 0; s < bsz; ++s)
        for (int c = 0; c < c_; ++c)
            for (int i = 0; i < h_; ++i)
                for (int j = 0; j < w_; ++j) {
                    const double v = x(s, (static_cast<Eigen::Index>(c) * h_ + i) * w_ + j);
                    const Eigen::Index base = static_cast<Eigen::Index>(c) * oh * ow;
                    y(s, base + (2 * i) * ow + 2 * j) = v;
                    y(s, base + (2 * i) * ow + 2 * j + 1) = v;
                    y(s, base + (2 * i + 1) * ow + 2 * j) = v;
                    y(s, base + (2 * i + 1) * ow + 2 * j + 1) = v;
                }
    return y;
}

Mat Upsample2x::backward(const Mat& gy) {
    const Eigen::Index bsz = gy.rows();
    const int oh = 2 * h_, ow = 2 * w_;
    Mat gx = Mat::Zero(bsz, static_cast<Eigen::Index>(c_) * h_ * w_);
    for (Eigen::Index s = 0; s < bsz; ++s)
        for (int c = 0; c < c_; ++c)
            for (int i = 0; i < h_; ++i)
                for (int j = 0; j < w_; ++j) {
                    const Eigen::Index base = static_cast<Eigen::Index>(c) * oh * ow;
                    gx(s, (static_cast<Eigen::Index>(c) * h_ + i) * w_ + j) =
                        gy(s, base + (2 * i) * ow + 2 * j) +
                        gy(s, base + (2 * i) * ow + 2 * j + 1) +
                        gy(s, base + (2 * i + 1) * ow + 2 * j) +
                        gy(s, base + (2 * i + 1) * ow + 2 * j + 1);
                }
    return gx;
}

// ----------------------------------------------------------- CropCenter

CropCenter::CropCenter(int c, int h, int w, int out_h, int out_w)
    : c_(c), h_(h), w_(w), oh_(out_h), ow_(out_w),
      off_h_((h - out_h) / 2), off_w_((w - out_w) / 2) {
    if (out_h > h || out_w > w) throw std::invalid_argument("crop: output larger than input");
}

Mat CropCenter::forward(const Mat& x, bool) {
    const Eigen::Index bsz = x.rows();
    Mat y(bsz, static_cast<Eigen::Index>(c_) * oh_ * ow_);
    for (Eigen::Index s = 0; s < bsz; ++s)
        for (int c = 0; c < c_; ++c)
            for (int i = 0; i < oh_; ++i)
                for (int j = 0; j < ow_; ++j)
                    y(s, (static_cast<Eigen::Index>(c) * oh_ + i) * ow_ + j) =
                        x(s, (static_cast<Eigen::Index>(c) * h_ + i + off_h_) * w_ + j + off_w_);
    return y;
}

Mat CropCenter::backward(const Mat& gy) {
    const Eigen::Index bsz = gy.rows();
    Mat gx = Mat::Zero(bsz, static_cast<Eigen::Index>(c_) * h_ * w_);
    for (Eigen::Index s = 0; s < bsz; ++s)
        for (int c = 0; c < c_; ++c)
            for (int i = 0; i < oh_; ++i)
                for (int j = 0; j < ow_; ++j)
                    gx(s, (static_cast<Eigen::Index>(c) * h_ + i + off_h_) * w_ + j + off_w_) =
                        gy(s, (static_cast<Eigen::Index>(c) * oh_ + i) * ow_ + j);
    return gx;
}

// ----------------------------------------------------------- Sequential

Mat Sequential::forward(const Mat& x, bool training) {
    Mat h = x;
    for (auto& l : layers_) h = l->forward(h, training);
    return h;
}

Mat Sequential::backward(const Mat& grad_out) {
    Mat g = grad_out;
    for (auto it = layers_.rbegin(); it != layers_.rend(); ++it) g = (*it)->backward(g);
    return g;
}

void Sequential::init(std::uint64_t seed) {
    for (size_t i = 0; i < layers_.size(); ++i)
        layers_[i]->init(mix_seed(seed, i));
}

std::vector<ParamRef> Sequential::params() {
    std::vector<ParamRef> out;
    for (auto& l : layers_) l->collect(out);
    return out;
}

std::vector<Eigen::MatrixXd*> Sequential::state() {
    std::vector<Eigen::MatrixXd*> out;
    for (auto& l : layers_) l->collect_state(out);
    return out;
}

void Sequential::zero_grad() {
    for (auto& p : params()) p.grad->setZero();
}

// ------------------------------------------------------------- flat view

Eigen::VectorXd flatten(const std::vector<ParamRef>& params) {
    Eigen::Index total = 0;
    for (const auto& p : params) total += p.value->size();
    Eigen::VectorXd theta(total);
    Eigen::Index at = 0;
    for (const auto& p : params) {
        theta.segment(at, p.value->size()) =
            Eigen::Map<const Eigen::VectorXd>(p.value->data(), p.value->size());
        at += p.value->size();
    }
    return theta;
}

Eigen::VectorXd flatten_grads(const std::vector<ParamRef>& params) {
    Eigen::Index total = 0;
    for (const auto& p : params) total += p.grad->size();
    Eigen::VectorXd g(total);
    Eigen::Index at = 0;
    for (const auto& p : params) {
        g.segment(at, p.grad->size()) =
            Eigen::Map<const Eigen::VectorXd>(p.grad->data(), p.grad->size());
        at += p.grad->size();
    }
    return g;
}

void unflatten(const std::vector<ParamRef>& params, const Eigen::VectorXd& theta) {
    Eigen::Index at = 0;
    for (const auto& p : params) {
        Eigen::Map<Eigen::VectorXd>(p.value->data(), p.value->size()) =
            theta.segment(at, p.value->size());
        at += p.value->size();
    }
    if (at != theta.size()) throw std::invalid_argument("unflatten: length mismatch");
}

// ------------------------------------------------------------------ Adam

Adam::Adam(std::vector<ParamRef> params, double lr_, double beta1, double beta2,
           double eps)
    : lr(lr_), params_(std::move(params)), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& p : params_) {
        m_.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
        v_.push_back(Eigen::MatrixXd::Zero(p.value->rows(), p.value->cols()));
    }
}

void Adam::step() {
    ++t_;
    const double bc1 = 1.0 - std::pow(beta1_, t_);
    const double bc2 = 1.0 - std::pow(beta2_, t_);
    for (size_t i = 0; i < params_.size(); ++i) {
        const Eigen::MatrixXd& g = *params_[i].grad;
        m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * g;
        v_[i] = beta2_ * v_[i].array().matrix() +
                (1.0 - beta2_) * g.cwiseProduct(g);
        *params_[i].value -=
            (lr * (m_[i] / bc1).array() / ((v_[i] / bc2).array().sqrt() + eps_))
                .matrix();
    }
}

void Adam::zero_grad() {
    for (auto& p : params_) p.grad->setZero();
}

}  // namespace pwa::nn
