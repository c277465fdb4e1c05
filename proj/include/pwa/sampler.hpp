#ifndef PWA_SAMPLER_HPP
#define PWA_SAMPLER_HPP

#include <cstdint>
#include <vector>

#include "pwa/model.hpp"

namespace pwa {

// All operations run the networks in inference mode and are
// deterministic per seed. Per-draw randomness derives from
// (seed, draw_index), so extending n keeps earlier samples fixed.

// D1(0, E2(x2)_2): the prior mode pushed through the decoder.
Eigen::VectorXd point_estimate(PairedModel& model, const Eigen::VectorXd& x2);

// n draws of D1(Z1, z2) with Z1 ~ N(0, I); z2 encoded once.
Eigen::MatrixXd sample_conditional(PairedModel& model, const Eigen::VectorXd& x2,
                                   int n, std::uint64_t seed);

// Mirror direction: D2(z2, Z3) for E1(x1) = (z1, z2).
Eigen::MatrixXd sample_conditional_reverse(PairedModel& model,
                                           const Eigen::VectorXd& x1, int n,
                                           std::uint64_t seed);

// D1(sigma * e_axis, E2(x2)_2) for each sigma; the sigma = 0 entry equals
// point_estimate exactly.
std::vector<Eigen::VectorXd> perturbed_estimates(PairedModel& model,
                                                 const Eigen::VectorXd& x2,
                                                 const std::vector<double>& sigmas,
                                                 int axis_index);

struct ConditionalMoments {
    Eigen::VectorXd mean;
    Eigen::VectorXd stddev;  // per-pixel, zero when d1 = 0
};

ConditionalMoments conditional_moments(PairedModel& model, const Eigen::VectorXd& x2,
                                       int n, std::uint64_t seed);

// Translation maps for the (0, d2, 0) split.
Eigen::VectorXd translate(PairedModel& model, const Eigen::VectorXd& x1);
Eigen::VectorXd translate_inverse(PairedModel& model, const Eigen::VectorXd& x2);
Eigen::MatrixXd translate_batch(PairedModel& model, const Eigen::MatrixXd& x1);
Eigen::MatrixXd translate_inverse_batch(PairedModel& model, const Eigen::MatrixXd& x2);

// Dead-z1 diagnostic: true when every axis/sigma perturbation moves the
// output by less than `tol` in max norm.
bool z1_block_is_dead(PairedModel& model, const Eigen::VectorXd& x2,
                      double sigma = 1.0, double tol = 1e-6);

}  // namespace pwa

#endif
