#include "pwa/model.hpp"

#include <cmath>
#include <stdexcept>

namespace pwa {

ArchitectureSpec mnist_conv_arch(ArchitectureSpec::Squash squash) {
    ArchitectureSpec a;
    a.kind = ArchitectureSpec::Kind::conv;
    a.output_squash = squash;
    a.channels = 1;
    a.height = 28;
    a.width = 28;
    a.conv_channels = {32, 64, 128, 128};
    a.up_channels = {64, 32};
    a.batch_norm = true;
    return a;
}

ArchitectureSpec deep_translation_arch() {
    ArchitectureSpec a;
    a.kind = ArchitectureSpec::Kind::conv;
    a.output_squash = ArchitectureSpec::Squash::sigmoid;
    a.channels = 3;
    a.height = 32;
    a.width = 32;
    a.conv_channels = {32, 64, 128, 128, 128};
    a.up_channels = {128, 128, 64, 32, 32};
    a.batch_norm = true;
    return a;
}

ArchitectureSpec dense_arch(int input_dim, std::vector<int> hidden,
                            ArchitectureSpec::Squash squash) {
    ArchitectureSpec a;
    a.kind = ArchitectureSpec::Kind::dense;
    a.output_squash = squash;
    a.input_dim = input_dim;
    a.hidden = std::move(hidden);
    a.batch_norm = false;
    return a;
}

namespace {

void add_squash(nn::Sequential& net, ArchitectureSpec::Squash squash) {
    if (squash == ArchitectureSpec::Squash::sigmoid) net.add<nn::Sigmoid>();
}

nn::Sequential build_encoder(const ArchitectureSpec& a, int out_dim) {
    nn::Sequential net;
    if (a.kind == ArchitectureSpec::Kind::dense) {
        int prev = a.input_dim;
        for (int h : a.hidden) {
            net.add<nn::Dense>(prev, h);
            if (a.batch_norm) net.add<nn::BatchNorm>(h, 1);
            net.add<nn::Relu>();
            prev = h;
        }
        net.add<nn::Dense>(prev, out_dim);
        return net;
    }
    int c = a.channels, h = a.height, w = a.width;
    for (size_t i = 0; i < a.conv_channels.size(); ++i) {
        // last conv keeps resolution, earlier ones halve it
        const int stride = (i + 1 == a.conv_channels.size()) ? 1 : 2;
        auto* conv = net.add<nn::Conv2d>(c, h, w, a.conv_channels[i], 3, stride, 1);
        c = a.conv_channels[i];
        h = conv->out_h();
        w = conv->out_w();
        if (a.batch_norm) net.add<nn::BatchNorm>(c, h * w);
        net.add<nn::Relu>();
    }
    net.add<nn::Dense>(c * h * w, out_dim);
    return net;
}

nn::Sequential build_decoder(const ArchitectureSpec& a, int in_dim) {
    nn::Sequential net;
    if (a.kind == ArchitectureSpec::Kind::dense) {
        int prev = in_dim;
        for (auto it = a.hidden.rbegin(); it != a.hidden.rend(); ++it) {
            net.add<nn::Dense>(prev, *it);
            if (a.batch_norm) net.add<nn::BatchNorm>(*it, 1);
            net.add<nn::Relu>();
            prev = *it;
        }
        net.add<nn::Dense>(prev, a.input_dim);
        add_squash(net, a.output_squash);
        return net;
    }
    const int n_up = static_cast<int>(a.up_channels.size());
    int h = a.height, w = a.width;
    for (int i = 0; i < n_up; ++i) {
        h = (h + 1) / 2;
        w = (w + 1) / 2;
    }
    int c = a.conv_channels.back();
    net.add<nn::Dense>(in_dim, c * h * w);
    if (a.batch_norm) net.add<nn::BatchNorm>(c, h * w);
    net.add<nn::Relu>();
    for (int i = 0; i < n_up; ++i) {
        net.add<nn::Upsample2x>(c, h, w);
        h *= 2;
        w *= 2;
        auto* conv = net.add<nn::Conv2d>(c, h, w, a.up_channels[i], 3, 1, 1);
        c = a.up_channels[i];
        h = conv->out_h();
        w = conv->out_w();
        if (a.batch_norm) net.add<nn::BatchNorm>(c, h * w);
        net.add<nn::Relu>();
    }
    net.add<nn::Conv2d>(c, h, w, a.channels, 3, 1, 1);
    if (h != a.height || w != a.width)
        net.add<nn::CropCenter>(a.channels, h, w, a.height, a.width);
    add_squash(net, a.output_squash);
    return net;
}

}  // namespace

PairedModel PairedModel::build(ArchitectureSpec arch1, ArchitectureSpec arch2,
                               LatentSplit split, std::uint64_t seed) {
    split.validate();
    PairedModel m;
    m.split_ = split;
    m.arch1_ = std::move(arch1);
    m.arch2_ = std::move(arch2);
    m.e1 = build_encoder(m.arch1_, split.d1 + split.d2);
    m.e2 = build_encoder(m.arch2_, split.d2 + split.d3);
    m.d1 = build_decoder(m.arch1_, split.d1 + split.d2);
    m.d2 = build_decoder(m.arch2_, split.d2 + split.d3);
    m.e1.init(mix_seed(seed, 1));
    m.e2.init(mix_seed(seed, 2));
    m.d1.init(mix_seed(seed, 3));
    m.d2.init(mix_seed(seed, 4));
    return m;
}

void PairedModel::check_x1(const nn::Mat& x) const {
    if (x.cols() != x1_dim())
        throw std::invalid_argument("x1 shape mismatch: expected " +
                                    std::to_string(x1_dim()) + " features, got " +
                                    std::to_string(x.cols()));
}

void PairedModel::check_x2(const nn::Mat& x) const {
    if (x.cols() != x2_dim())
        throw std::invalid_argument("x2 shape mismatch: expected " +
                                    std::to_string(x2_dim()) + " features, got " +
                                    std::to_string(x.cols()));
}

nn::Mat PairedModel::encode1(const nn::Mat& x1) {
    check_x1(x1);
    return e1.forward(x1, false);
}

nn::Mat PairedModel::encode2(const nn::Mat& x2) {
    check_x2(x2);
    return e2.forward(x2, false);
}

nn::Mat PairedModel::decode1(const nn::Mat& z1, const nn::Mat& z2) {
    if (z1.cols() != split_.d1 || z2.cols() != split_.d2)
        throw std::invalid_argument("decode1: latent block dimension mismatch");
    return d1.forward(hcat(z1, z2), false);
}

nn::Mat PairedModel::decode2(const nn::Mat& z2, const nn::Mat& z3) {
    if (z2.cols() != split_.d2 || z3.cols() != split_.d3)
        throw std::invalid_argument("decode2: latent block dimension mismatch");
    return d2.forward(hcat(z2, z3), false);
}

nn::Mat PairedModel::cross_reconstruct_x1(const nn::Mat& z1, const nn::Mat& x2) {
    const nn::Mat codes = encode2(x2);
    return decode1(z1, codes.leftCols(split_.d2));
}

nn::Mat PairedModel::cross_reconstruct_x2(const nn::Mat& x1, const nn::Mat& z3) {
    const nn::Mat codes = encode1(x1);
    return decode2(codes.rightCols(split_.d2), z3);
}

std::vector<nn::ParamRef> PairedModel::params() {
    std::vector<nn::ParamRef> out;
    for (auto* net : {&e1, &e2, &d1, &d2}) {
        auto p = net->params();
        out.insert(out.end(), p.begin(), p.end());
    }
    return out;
}

std::vector<Eigen::MatrixXd*> PairedModel::state() {
    std::vector<Eigen::MatrixXd*> out;
    for (auto* net : {&e1, &e2, &d1, &d2}) {
        auto s = net->state();
        out.insert(out.end(), s.begin(), s.end());
    }
    return out;
}

void PairedModel::zero_grad() {
    for (auto& p : params()) p.grad->setZero();
}

nn::Mat hcat(const nn::Mat& a, const nn::Mat& b) {
    if (a.size() == 0) return b;
    if (b.size() == 0) return a;
    if (a.rows() != b.rows()) throw std::invalid_argument("hcat: row count mismatch");
    nn::Mat out(a.rows(), a.cols() + b.cols());
    out << a, b;
    return out;
}

}  // namespace pwa
