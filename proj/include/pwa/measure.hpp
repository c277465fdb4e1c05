#ifndef PWA_MEASURE_HPP
#define PWA_MEASURE_HPP

#include <Eigen/Dense>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace pwa {

// A finite weighted point set in R^d. Rows of `points` are samples.
struct EmpiricalMeasure {
    Eigen::MatrixXd points;   // n x d
    Eigen::VectorXd weights;  // n, nonnegative, sums to 1

    EmpiricalMeasure() = default;
    EmpiricalMeasure(Eigen::MatrixXd pts, Eigen::VectorXd w);

    // Uniform weights 1/n.
    static EmpiricalMeasure uniform(Eigen::MatrixXd pts);

    Eigen::Index size() const { return points.rows(); }
    Eigen::Index dim() const { return points.cols(); }
    bool is_uniform(double tol = 1e-12) const;
    void validate() const;
};

// entries[i][j] = ||x_i - y_j||_p^p
Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            double p);

// Minimum-cost perfect matching on a square cost matrix, O(n^3).
// Returns the column assigned to each row; total cost in *cost if non-null.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost,
                                  double* total_cost = nullptr);

// Optimal transport plan between general nonnegative weight vectors
// (transportation simplex). Returns the n x m plan.
Eigen::MatrixXd solve_transport_lp(const Eigen::MatrixXd& cost,
                                   const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& b);

// W_p^p between two empirical measures. Uniform equal-size measures go
// through the assignment solver, everything else through the LP.
double exact_wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                         double p);

// Order-statistics formula for d = 1, uniform weights, equal sizes.
double wasserstein_1d(std::vector<double> xs, std::vector<double> ys, double p);

struct SinkhornOptions {
    double epsilon = 0.0;          // absolute; <= 0 means epsilon_scale * mean cost
    double epsilon_scale = 0.05;
    int max_iters = 500;
    double tol = 1e-6;             // L1 marginal violation
    bool with_grad = false;
};

struct SinkhornResult {
    double value = 0.0;            // debiased divergence S_eps
    bool converged = false;
    int iterations = 0;
    double marginal_error = 0.0;
    double epsilon = 0.0;          // resolved absolute epsilon
    Eigen::MatrixXd grad_mu;       // d value / d points of mu (if requested)
    Eigen::MatrixXd grad_nu;
};

// Debiased Sinkhorn divergence with squared-Euclidean cost,
// S_eps(mu,nu) = OT_eps(mu,nu) - OT_eps(mu,mu)/2 - OT_eps(nu,nu)/2,
// run in the log domain. Non-convergence is reported through the
// `converged` flag, never swallowed.
SinkhornResult sinkhorn_divergence(const EmpiricalMeasure& mu,
                                   const EmpiricalMeasure& nu,
                                   const SinkhornOptions& opts = {});

struct SlicedResult {
    double value = 0.0;
    Eigen::MatrixXd grad_mu;
};

// Average of 1D W_p^p over seeded random unit-vector projections.
double sliced_wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                          int n_projections, double p, std::uint64_t seed);

// Same, with the gradient w.r.t. the points of mu (p = 2 only).
SlicedResult sliced_wasserstein_grad(const EmpiricalMeasure& mu,
                                     const EmpiricalMeasure& nu,
                                     int n_projections, std::uint64_t seed);

struct MmdResult {
    double value = 0.0;
    Eigen::MatrixXd grad_mu;
};

// Gaussian-kernel MMD^2. Unbiased estimator by default; the biased
// variant is exact-zero on identical point sets.
double mmd(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
           double bandwidth, bool biased = false);

MmdResult mmd_grad(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   double bandwidth);

// Median pairwise distance over the pooled point set.
double median_bandwidth(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu);

double mean_cost(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y);

}  // namespace pwa

#endif
