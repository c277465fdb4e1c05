#ifndef PWA_NN_HPP
#define PWA_NN_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace pwa::nn {

using Mat = Eigen::MatrixXd;  // rows = batch, cols = features

struct ParamRef {
    Eigen::MatrixXd* value;
    Eigen::MatrixXd* grad;
};

class Layer {
public:
    virtual ~Layer() = default;
    virtual Mat forward(const Mat& x, bool training) = 0;
    // Consumes the cached state of the last forward pass; parameter
    // gradients accumulate.
    virtual Mat backward(const Mat& grad_out) = 0;
    virtual void collect(std::vector<ParamRef>&) {}
    // Non-trainable state that still belongs in a checkpoint
    // (batch-norm running statistics).
    virtual void collect_state(std::vector<Eigen::MatrixXd*>&) {}
    virtual void init(std::uint64_t) {}
    virtual std::string kind() const = 0;
};

class Dense : public Layer {
public:
    Dense(int in, int out);
    Mat forward(const Mat& x, bool training) override;
    Mat backward(const Mat& gy) override;
    void collect(std::vector<ParamRef>& out) override;
    void init(std::uint64_t seed) override;
    std::string kind() const override { return "dense"; }

    Mat w;  // in x out
    Mat b;  // 1 x out
    Mat gw, gb;

private:
    Mat x_;
};

class Relu : public Layer {
public:
    Mat forward(const Mat& x, bool training) override;
    Mat backward(const Mat& gy) override;
    std::string kind() const override { return "relu"; }

private:
    Mat x_;
};

class Sigmoid : public Layer {
public:
    Mat forward(const Mat& x, bool training) override;
    Mat backward(const Mat& gy) override;
    std::string kind() const override { return "sigmoid"; }

private:
    Mat y_;
};

// Per-channel batch normalization; a row holds `channels` blocks of
// `spatial` contiguous values. Dense features use spatial = 1.
class BatchNorm : public Layer {
public:
    BatchNorm(int channels, int spatial, double momentum = 0.1, double eps = 1e-5);
    Mat forward(const Mat& x, bool training) override;
    Mat backward(const Mat& gy) override;
    void collect(std::vector<ParamRef>& out) override;
    void collect_state(std::vector<Eigen::MatrixXd*>& out) override;
    std::string kind() const override { return "batchnorm"; }

    Mat gamma, beta;            // 1 x channels
    Mat ggamma, gbeta;
    Mat running_mean, running_var;  // 1 x channels (state, checkpointed)

private:
    int c_, s_;
    double momentum_, eps_;
    Mat xc_;       // x - mean
    Eigen::VectorXd inv_std_;
};

// 3x3-style convolution over rows laid out channel-major (c, h, w).
class Conv2d : public Layer {
public:
    Conv2d(int in_c, int in_h, int in_w, int out_c, int kernel, int stride, int pad);
    Mat forward(const Mat& x, bool training) override;
    Mat backward(const Mat& gy) override;
    void collect(std::vector<ParamRef>& out) override;
    void init(std::uint64_t seed) override;
    std::string kind() const override { return "conv2d"; }

    int out_h() const { return oh_; }
    int out_w() const { return ow_; }
    int out_features() const { return out_c_ * oh_ * ow_; }

    Mat w;   // out_c x (in_c * k * k)
    Mat b;   // 1 x out_c
    Mat gw, gb;

private:
    Mat im2col(const Eigen::Ref<const Eigen::RowVectorXd>& row) const;
    int in_c_, in_h_, in_w_, out_c_, k_, stride_, pad_, oh_, ow_;
    Mat x_;
};

// Nearest-neighbor 2x upsampling.
class Upsample2x : public Layer {
public:
    Upsample2x(int c, int h, int w);
    Mat forward(const Mat& x, bool training) override;
    Mat backward(const Mat& gy) override;
    std::string kind() const override { return "upsample2x"; }

private:
    int c_, h_, w_;
};

// Crops a centered window out of each channel plane (even border split,
// extra pixel trimmed at the far edge).
class CropCenter : public Layer {
public:
    CropCenter(int c, int h, int w, int out_h, int out_w);
    Mat forward(const Mat& x, bool training) override;
    Mat backward(const Mat& gy) override;
    std::string kind() const override { return "crop"; }

private:
    int c_, h_, w_, oh_, ow_, off_h_, off_w_;
};

class Sequential {
public:
    Sequential() = default;
    Sequential(Sequential&&) = default;
    Sequential& operator=(Sequential&&) = default;

    template <typename L, typename... Args>
    L* add(Args&&... args) {
        auto layer = std::make_unique<L>(std::forward<Args>(args)...);
        L* raw = layer.get();
        layers_.push_back(std::move(layer));
        return raw;
    }

    Mat forward(const Mat& x, bool training);
    Mat backward(const Mat& grad_out);
    void init(std::uint64_t seed);
    std::vector<ParamRef> params();
    std::vector<Eigen::MatrixXd*> state();
    void zero_grad();
    size_t size() const { return layers_.size(); }
    Layer& at(size_t i) { return *layers_[i]; }

private:
    std::vector<std::unique_ptr<Layer>> layers_;
};

// Flat parameter vector helpers (Eigen storage order within each tensor,
// tensors in collection order).
Eigen::VectorXd flatten(const std::vector<ParamRef>& params);
Eigen::VectorXd flatten_grads(const std::vector<ParamRef>& params);
void unflatten(const std::vector<ParamRef>& params, const Eigen::VectorXd& theta);

class Adam {
public:
    Adam(std::vector<ParamRef> params, double lr = 1e-3, double beta1 = 0.9,
         double beta2 = 0.999, double eps = 1e-8);
    void step();
    void zero_grad();
    double lr;

private:
    std::vector<ParamRef> params_;
    std::vector<Eigen::MatrixXd> m_, v_;
    double beta1_, beta2_, eps_;
    long t_ = 0;
};

}  // namespace pwa::nn

#endif
