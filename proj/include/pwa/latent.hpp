#ifndef PWA_LATENT_HPP
#define PWA_LATENT_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>

namespace pwa {

// Mixes a base seed with a stream index into an independent-looking seed.
std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t stream);

// Block dimensions of the latent space Z = Z1 x Z2 x Z3.
struct LatentSplit {
    int d1 = 0;
    int d2 = 0;
    int d3 = 0;

    int total() const { return d1 + d2 + d3; }
    void validate() const {
        if (d1 < 0 || d2 < 0 || d3 < 0 || total() < 1)
            throw std::invalid_argument("latent split needs nonnegative blocks, total >= 1");
    }
    bool operator==(const LatentSplit&) const = default;
};

// A concrete code partitioned into the three blocks. Serialization order
// is always (z1, z2, z3).
struct LatentCode {
    Eigen::VectorXd z1, z2, z3;

    Eigen::VectorXd concat() const;
    static LatentCode from_concat(const LatentSplit& split, const Eigen::VectorXd& v);
};

// n i.i.d. standard-normal codes, rows ordered (z1, z2, z3). Deterministic
// per seed.
Eigen::MatrixXd sample_prior(const LatentSplit& split, int n, std::uint64_t seed);

// sigma * e_axis in R^{d1}.
Eigen::VectorXd perturbation_code(const LatentSplit& split, double sigma, int axis_index);

// Standard-normal matrix, row-major fill order, deterministic per seed.
Eigen::MatrixXd gaussian_matrix(Eigen::Index rows, Eigen::Index cols, std::uint64_t seed);

}  // namespace pwa

#endif
