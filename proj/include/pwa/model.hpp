#ifndef PWA_MODEL_HPP
#define PWA_MODEL_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "pwa/latent.hpp"
#include "pwa/nn.hpp"

namespace pwa {

// Network layout for one side of the pair. Conv specs work on
// channel-major flattened image rows; dense specs on plain vectors.
struct ArchitectureSpec {
    enum class Kind { dense, conv };
    enum class Squash { sigmoid, linear };

    Kind kind = Kind::dense;
    Squash output_squash = Squash::linear;

    // conv
    int channels = 1, height = 28, width = 28;
    std::vector<int> conv_channels = {32, 64, 128, 128};  // stride-2 except last
    std::vector<int> up_channels = {64, 32};              // upsampling stages
    bool batch_norm = true;

    // dense
    int input_dim = 0;
    std::vector<int> hidden = {128, 128};

    int flat_dim() const {
        return kind == Kind::conv ? channels * height * width : input_dim;
    }
    bool operator==(const ArchitectureSpec&) const = default;
};

// Presets
ArchitectureSpec mnist_conv_arch(ArchitectureSpec::Squash squash);
ArchitectureSpec deep_translation_arch();  // 5 down/up stages, for 32x32-class inputs
ArchitectureSpec dense_arch(int input_dim, std::vector<int> hidden,
                            ArchitectureSpec::Squash squash = ArchitectureSpec::Squash::linear);

// The two encoder/decoder pairs sharing the z2 block. E1 maps x1 to
// (z1,z2), E2 maps x2 to (z2,z3); D1 reads (z1,z2) only, D2 (z2,z3) only.
class PairedModel {
public:
    PairedModel() = default;
    static PairedModel build(ArchitectureSpec arch1, ArchitectureSpec arch2,
                             LatentSplit split, std::uint64_t seed);

    // Inference-mode forward maps (batch-norm uses running statistics).
    nn::Mat encode1(const nn::Mat& x1);      // n x (d1+d2)
    nn::Mat encode2(const nn::Mat& x2);      // n x (d2+d3)
    nn::Mat decode1(const nn::Mat& z1, const nn::Mat& z2);
    nn::Mat decode2(const nn::Mat& z2, const nn::Mat& z3);
    nn::Mat cross_reconstruct_x1(const nn::Mat& z1, const nn::Mat& x2);
    nn::Mat cross_reconstruct_x2(const nn::Mat& x1, const nn::Mat& z3);

    std::vector<nn::ParamRef> params();
    std::vector<Eigen::MatrixXd*> state();
    void zero_grad();

    const LatentSplit& split() const { return split_; }
    const ArchitectureSpec& arch1() const { return arch1_; }
    const ArchitectureSpec& arch2() const { return arch2_; }
    int x1_dim() const { return arch1_.flat_dim(); }
    int x2_dim() const { return arch2_.flat_dim(); }

    nn::Sequential e1, e2, d1, d2;

    void check_x1(const nn::Mat& x) const;
    void check_x2(const nn::Mat& x) const;

private:
    LatentSplit split_;
    ArchitectureSpec arch1_, arch2_;
};

// Horizontal concatenation with matching row counts.
nn::Mat hcat(const nn::Mat& a, const nn::Mat& b);

}  // namespace pwa

#endif
