#include "pwa/latent.hpp"

#include <random>

namespace pwa {

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream) {
    // splitmix64 step on seed ^ golden-ratio-scaled stream
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (stream + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

Eigen::VectorXd LatentCode::concat() const {
    Eigen::VectorXd v(z1.size() + z2.size() + z3.size());
    v << z1, z2, z3;
    return v;
}

LatentCode LatentCode::from_concat(const LatentSplit& split, const Eigen::VectorXd& v) {
    split.validate();
    if (v.size() != split.total())
        throw std::invalid_argument("latent code length does not match split");
    LatentCode c;
    c.z1 = v.segment(0, split.d1);
    c.z2 = v.segment(split.d1, split.d2);
    c.z3 = v.segment(split.d1 + split.d2, split.d3);
    return c;
}

Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd m(rows, cols);
    for (Eigen::Index i = 0; i < rows; ++i)
        for (Eigen::Index j = 0; j < cols; ++j) m(i, j) = gauss(rng);
    return m;
}

Eigen::MatrixXd sample_prior(const LatentSplit& split, int n, std::uint64_t seed) {
    split.validate();
    if (n < 1) throw std::invalid_argument("sample_prior: n >= 1");
    return gaussian_matrix(n, split.total(), seed);
}

Eigen::VectorXd perturbation_code(const LatentSplit& split, double sigma, int axis_index) {
    split.validate();
    if (axis_index < 0 || axis_index >= split.d1)
        throw std::invalid_argument("perturbation_code: axis index outside Z1");
    Eigen::VectorXd v = Eigen::VectorXd::Zero(split.d1);
    v[axis_index] = sigma;
    return v;
}

}  // namespace pwa
