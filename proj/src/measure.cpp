#include "pwa/measure.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <random>

namespace pwa {

EmpiricalMeasure::EmpiricalMeasure(Eigen::MatrixXd pts, Eigen::VectorXd w)
    : points(std::move(pts)), weights(std::move(w)) {
    validate();
}

EmpiricalMeasure EmpiricalMeasure::uniform(Eigen::MatrixXd pts) {
    const Eigen::Index n = pts.rows();
    if (n < 1) throw std::invalid_argument("empirical measure needs n >= 1 points");
    Eigen::VectorXd w = Eigen::VectorXd::Constant(n, 1.0 / static_cast<double>(n));
    return EmpiricalMeasure(std::move(pts), std::move(w));
}

bool EmpiricalMeasure::is_uniform(double tol) const {
    const double u = 1.0 / static_cast<double>(size());
    return ((weights.array() - u).abs() < tol).all();
}

void EmpiricalMeasure::validate() const {
    if (points.rows() < 1 || points.cols() < 1)
        throw std::invalid_argument("empirical measure needs n >= 1, d >= 1");
    if (weights.size() != points.rows())
        throw std::invalid_argument("weight count does not match point count");
    if ((weights.array() < 0.0).any())
        throw std::invalid_argument("negative weight");
    if (std::abs(weights.sum() - 1.0) > 1e-9)
        throw std::invalid_argument("weights must sum to 1");
}

Eigen::MatrixXd cost_matrix(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y,
                            double p) {
    if (x.cols() != y.cols())
        throw std::invalid_argument("point dimension mismatch in cost matrix");
    const Eigen::Index n = x.rows(), m = y.rows();
    Eigen::MatrixXd c(n, m);
    if (p == 2.0) {
        // ||x-y||_2^2 via the expanded form
        Eigen::VectorXd xs = x.rowwise().squaredNorm();
        Eigen::VectorXd ys = y.rowwise().squaredNorm();
        c = (-2.0 * x * y.transpose());
        c.colwise() += xs;
        c.rowwise() += ys.transpose();
        c = c.cwiseMax(0.0);
    } else {
        for (Eigen::Index i = 0; i < n; ++i)
            for (Eigen::Index j = 0; j < m; ++j)
                c(i, j) = (x.row(i) - y.row(j)).array().abs().pow(p).sum();
    }
    return c;
}

double mean_cost(const Eigen::MatrixXd& x, const Eigen::MatrixXd& y) {
    return cost_matrix(x, y, 2.0).mean();
}

// Shortest-augmenting-path assignment with dual potentials.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost, double* total_cost) {
    const int n = static_cast<int>(cost.rows());
    if (cost.cols() != n) throw std::invalid_argument("assignment needs a square cost");
    const double inf = std::numeric_limits<double>::infinity();
    std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
    std::vector<int> p(n + 1, 0), way(n + 1, 0);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::vector<double> minv(n + 1, inf);
        std::vector<char> used(n + 1, 0);
        do {
            used[j0] = 1;
            const int i0 = p[j0];
            int j1 = 0;
            double delta = inf;
            for (int j = 1; j <= n; ++j) {
                if (used[j]) continue;
                const double cur = cost(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= n; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            const int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0 != 0);
    }
    std::vector<int> row_to_col(n, -1);
    for (int j = 1; j <= n; ++j)
        if (p[j] != 0) row_to_col[p[j] - 1] = j - 1;
    if (total_cost) {
        double s = 0.0;
        for (int i = 0; i < n; ++i) s += cost(i, row_to_col[i]);
        *total_cost = s;
    }
    return row_to_col;
}

namespace {

// Transportation simplex (MODI). Basis kept as a spanning tree over the
// bipartite row/column graph; supplies get a tiny staircase perturbation
// against degenerate pivots.
struct TransportSimplex {
    const Eigen::MatrixXd& c;
    int n, m;
    Eigen::VectorXd a, b;
    Eigen::MatrixXd plan;
    std::vector<std::vector<int>> row_basis;  // basic cols per row
    std::vector<std::vector<int>> col_basis;  // basic rows per col
    std::vector<char> is_basic;

    TransportSimplex(const Eigen::MatrixXd& cost, Eigen::VectorXd av, Eigen::VectorXd bv)
        : c(cost), n(static_cast<int>(av.size())), m(static_cast<int>(bv.size())),
          a(std::move(av)), b(std::move(bv)), plan(Eigen::MatrixXd::Zero(n, m)),
          row_basis(n), col_basis(m), is_basic(static_cast<size_t>(n) * m, 0) {}

    void add_basic(int i, int j) {
        if (is_basic[static_cast<size_t>(i) * m + j]) return;
        is_basic[static_cast<size_t>(i) * m + j] = 1;
        row_basis[i].push_back(j);
        col_basis[j].push_back(i);
    }
    void drop_basic(int i, int j) {
        is_basic[static_cast<size_t>(i) * m + j] = 0;
        auto& r = row_basis[i];
        r.erase(std::find(r.begin(), r.end(), j));
        auto& cb = col_basis[j];
        cb.erase(std::find(cb.begin(), cb.end(), i));
    }

    void northwest_init() {
        Eigen::VectorXd ra = a, rb = b;
        int i = 0, j = 0;
        while (i < n && j < m) {
            const double q = std::min(ra[i], rb[j]);
            plan(i, j) = q;
            add_basic(i, j);
            ra[i] -= q;
            rb[j] -= q;
            if (i == n - 1 && j == m - 1) break;
            if (ra[i] <= rb[j] && i < n - 1)
                ++i;
            else if (j < m - 1)
                ++j;
            else
                ++i;
        }
    }

    // Duals from the basis tree: u_i + v_j = c_ij on basic cells.
    void compute_duals(Eigen::VectorXd& u, Eigen::VectorXd& v) const {
        u.setConstant(n, std::numeric_limits<double>::quiet_NaN());
        v.setConstant(m, std::numeric_limits<double>::quiet_NaN());
        std::vector<std::pair<char, int>> stack;  // (0 = row, 1 = col, index)
        u[0] = 0.0;
        stack.push_back({0, 0});
        while (!stack.empty()) {
            auto [kind, idx] = stack.back();
            stack.pop_back();
            if (kind == 0) {
                for (int j : row_basis[idx])
                    if (std::isnan(v[j])) {
                        v[j] = c(idx, j) - u[idx];
                        stack.push_back({1, j});
                    }
            } else {
                for (int i : col_basis[idx])
                    if (std::isnan(u[i])) {
                        u[i] = c(i, idx) - v[idx];
                        stack.push_back({0, i});
                    }
            }
        }
        // Degenerate instances can leave the tree disconnected; pin stray
        // components so reduced costs stay finite.
        for (int i = 0; i < n; ++i)
            if (std::isnan(u[i])) u[i] = 0.0;
        for (int j = 0; j < m; ++j)
            if (std::isnan(v[j])) v[j] = 0.0;
    }

    // Alternating cycle from entering cell (ei, ej) through basic cells.
    bool find_cycle(int ei, int ej, std::vector<std::pair<int, int>>& cycle) const {
        // Path of cells from row ei back to col ej. DFS over the tree.
        std::vector<std::pair<int, int>> path{{ei, ej}};
        std::vector<char> row_seen(n, 0), col_seen(m, 0);
        col_seen[ej] = 1;
        return dfs_row(ei, ej, path, row_seen, col_seen, cycle);
    }

    bool dfs_row(int i, int target_col, std::vector<std::pair<int, int>>& path,
                 std::vector<char>& row_seen, std::vector<char>& col_seen,
                 std::vector<std::pair<int, int>>& cycle) const {
        row_seen[i] = 1;
        for (int j : row_basis[i]) {
            if (j == target_col) {
                cycle = path;
                cycle.push_back({i, j});
                return true;
            }
            if (col_seen[j]) continue;
            col_seen[j] = 1;
            path.push_back({i, j});  // leaves the row through a basic cell
            for (int i2 : col_basis[j]) {
                if (row_seen[i2]) continue;
                path.push_back({i2, j});  // enters the next row
                if (dfs_row(i2, target_col, path, row_seen, col_seen, cycle)) return true;
                path.pop_back();
            }
            path.pop_back();
        }
        return false;
    }

    Eigen::MatrixXd solve() {
        northwest_init();
        const int max_pivots = 200 * (n + m) * std::max(n, m);
        Eigen::VectorXd u(n), v(m);
        for (int it = 0; it < max_pivots; ++it) {
            compute_duals(u, v);
            int ei = -1, ej = -1;
            double best = -1e-11;
            for (int i = 0; i < n; ++i)
                for (int j = 0; j < m; ++j) {
                    if (is_basic[static_cast<size_t>(i) * m + j]) continue;
                    const double rc = c(i, j) - u[i] - v[j];
                    if (rc < best) {
                        best = rc;
                        ei = i;
                        ej = j;
                    }
                }
            if (ei < 0) return plan;  // optimal
            std::vector<std::pair<int, int>> cells;
            if (!find_cycle(ei, ej, cells))
                throw std::runtime_error("transport simplex: no pivot cycle");
            // cells[0] = entering cell; odd positions leave mass.
            // Build the alternating +/- sequence along the cycle.
            double theta = std::numeric_limits<double>::infinity();
            int li = -1, lj = -1;
            for (size_t k = 1; k < cells.size(); k += 2) {
                auto [i, j] = cells[k];
                if (plan(i, j) < theta) {
                    theta = plan(i, j);
                    li = i;
                    lj = j;
                }
            }
            if (li < 0)
                throw std::runtime_error("transport simplex: degenerate pivot cycle");
            for (size_t k = 0; k < cells.size(); ++k) {
                auto [i, j] = cells[k];
                plan(i, j) += (k % 2 == 0) ? theta : -theta;
            }
            add_basic(ei, ej);
            drop_basic(li, lj);
        }
        throw std::runtime_error("transport simplex: pivot limit exceeded");
    }
};

}  // namespace

Eigen::MatrixXd solve_transport_lp(const Eigen::MatrixXd& cost,
                                   const Eigen::VectorXd& a,
                                   const Eigen::VectorXd& b) {
    if (cost.rows() != a.size() || cost.cols() != b.size())
        throw std::invalid_argument("transport LP: shape mismatch");
    // Staircase perturbation keeps the basis nondegenerate; mass error is
    // O(n * delta) and removed by a final cleanup.
    const double delta = 1e-9;
    Eigen::VectorXd ap = a, bp = b;
    for (Eigen::Index i = 0; i < ap.size(); ++i) ap[i] += delta * static_cast<double>(i + 1);
    bp[bp.size() - 1] += ap.sum() - bp.sum();
    TransportSimplex ts(cost, ap, bp);
    Eigen::MatrixXd plan = ts.solve();
    plan = plan.cwiseMax(0.0);
    return plan;
}

double exact_wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                         double p) {
    mu.validate();
    nu.validate();
    if (mu.dim() != nu.dim())
        throw std::invalid_argument("exact_wasserstein: dimension mismatch");
    if (p < 1.0) throw std::invalid_argument("exact_wasserstein: p must be >= 1");
    const Eigen::MatrixXd c = cost_matrix(mu.points, nu.points, p);
    if (mu.size() == nu.size() && mu.is_uniform() && nu.is_uniform()) {
        double total = 0.0;
        solve_assignment(c, &total);
        return total / static_cast<double>(mu.size());
    }
    const Eigen::MatrixXd plan = solve_transport_lp(c, mu.weights, nu.weights);
    return (plan.array() * c.array()).sum();
}

double wasserstein_1d(std::vector<double> xs, std::vector<double> ys, double p) {
    if (xs.size() != ys.size())
        throw std::invalid_argument("wasserstein_1d: length mismatch");
    if (xs.empty()) throw std::invalid_argument("wasserstein_1d: empty input");
    std::sort(xs.begin(), xs.end());
    std::sort(ys.begin(), ys.end());
    double s = 0.0;
    for (size_t i = 0; i < xs.size(); ++i)
        s += std::pow(std::abs(xs[i] - ys[i]), p);
    return s / static_cast<double>(xs.size());
}

namespace {

struct OtResult {
    double value;        // dual objective: <a,f> + <b,g>
    Eigen::MatrixXd plan;
    bool converged;
    int iterations;
    double marginal_error;
};

// Log-domain Sinkhorn for OT_eps = min <pi,C> + eps KL(pi | a x b).
OtResult sinkhorn_ot(const Eigen::MatrixXd& c, const Eigen::VectorXd& a,
                     const Eigen::VectorXd& b, double eps, int max_iters,
                     double tol) {
    const Eigen::Index n = a.size(), m = b.size();
    const Eigen::VectorXd loga = a.array().log().matrix();
    const Eigen::VectorXd logb = b.array().log().matrix();
    Eigen::VectorXd f = Eigen::VectorXd::Zero(n), g = Eigen::VectorXd::Zero(m);
    auto lse_rows = [&](const Eigen::MatrixXd& s) -> Eigen::VectorXd {
        Eigen::VectorXd mx = s.rowwise().maxCoeff();
        return mx.array() +
               ((s.colwise() - mx).array().exp().rowwise().sum()).log();
    };
    OtResult out;
    out.converged = false;
    out.iterations = 0;
    Eigen::MatrixXd s(n, m);
    double err = std::numeric_limits<double>::infinity();
    for (int it = 1; it <= max_iters; ++it) {
        s = (-c) / eps;
        s.rowwise() += (g / eps + logb).transpose();
        f = -eps * lse_rows(s);
        s = (-c.transpose()) / eps;
        s.rowwise() += (f / eps + loga).transpose();
        g = -eps * lse_rows(s);
        // Marginal violation of the implied plan.
        Eigen::MatrixXd logpi = (-c) / eps;
        logpi.colwise() += (f / eps + loga);
        logpi.rowwise() += (g / eps + logb).transpose();
        Eigen::MatrixXd pi = logpi.array().exp().matrix();
        err = (pi.rowwise().sum() - a).cwiseAbs().sum() +
              (pi.colwise().sum().transpose() - b).cwiseAbs().sum();
        out.iterations = it;
        if (err < tol) {
            out.converged = true;
            out.plan = std::move(pi);
            break;
        }
        if (it == max_iters) out.plan = std::move(pi);
    }
    out.marginal_error = err;
    out.value = a.dot(f) + b.dot(g);
    return out;
}

}  // namespace

SinkhornResult sinkhorn_divergence(const EmpiricalMeasure& mu,
                                   const EmpiricalMeasure& nu,
                                   const SinkhornOptions& opts) {
    mu.validate();
    nu.validate();
    if (mu.dim() != nu.dim())
        throw std::invalid_argument("sinkhorn_divergence: dimension mismatch");
    const Eigen::MatrixXd cxy = cost_matrix(mu.points, nu.points, 2.0);
    double eps = opts.epsilon;
    if (eps <= 0.0) eps = opts.epsilon_scale * cxy.mean();
    if (eps <= 0.0) eps = 1e-12;  // coincident point sets
    const Eigen::MatrixXd cxx = cost_matrix(mu.points, mu.points, 2.0);
    const Eigen::MatrixXd cyy = cost_matrix(nu.points, nu.points, 2.0);

    OtResult xy = sinkhorn_ot(cxy, mu.weights, nu.weights, eps, opts.max_iters, opts.tol);
    OtResult xx = sinkhorn_ot(cxx, mu.weights, mu.weights, eps, opts.max_iters, opts.tol);
    OtResult yy = sinkhorn_ot(cyy, nu.weights, nu.weights, eps, opts.max_iters, opts.tol);

    SinkhornResult r;
    r.epsilon = eps;
    r.value = xy.value - 0.5 * xx.value - 0.5 * yy.value;
    r.converged = xy.converged && xx.converged && yy.converged;
    r.iterations = std::max({xy.iterations, xx.iterations, yy.iterations});
    r.marginal_error = std::max({xy.marginal_error, xx.marginal_error, yy.marginal_error});

    if (opts.with_grad) {
        const Eigen::MatrixXd& x = mu.points;
        const Eigen::MatrixXd& y = nu.points;
        // Envelope theorem: d OT / d x_i = sum_j pi_ij * d c_ij / d x_i.
        const Eigen::VectorXd row_mass = xy.plan.rowwise().sum();
        const Eigen::VectorXd col_mass = xy.plan.colwise().sum();
        Eigen::MatrixXd gx =
            2.0 * ((x.array().colwise() * row_mass.array()).matrix() - xy.plan * y);
        Eigen::MatrixXd gy =
            2.0 * ((y.array().colwise() * col_mass.array()).matrix() -
                   xy.plan.transpose() * x);
        // Self terms: x appears as both source and target.
        auto self_grad = [](const Eigen::MatrixXd& pts,
                            const Eigen::MatrixXd& plan) -> Eigen::MatrixXd {
            const Eigen::MatrixXd sym = plan + plan.transpose();
            const Eigen::VectorXd mass = sym.rowwise().sum();
            return 2.0 * ((pts.array().colwise() * mass.array()).matrix() - sym * pts);
        };
        r.grad_mu = gx - 0.5 * self_grad(x, xx.plan);
        r.grad_nu = gy - 0.5 * self_grad(y, yy.plan);
    }
    return r;
}

namespace {

Eigen::MatrixXd random_directions(int n_projections, Eigen::Index d,
                                  std::uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> gauss(0.0, 1.0);
    Eigen::MatrixXd dirs(n_projections, d);
    for (int k = 0; k < n_projections; ++k) {
        double norm2 = 0.0;
        do {
            for (Eigen::Index j = 0; j < d; ++j) dirs(k, j) = gauss(rng);
            norm2 = dirs.row(k).squaredNorm();
        } while (norm2 < 1e-24);
        dirs.row(k) /= std::sqrt(norm2);
    }
    return dirs;
}

}  // namespace

double sliced_wasserstein(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                          int n_projections, double p, std::uint64_t seed) {
    mu.validate();
    nu.validate();
    if (mu.dim() != nu.dim())
        throw std::invalid_argument("sliced_wasserstein: dimension mismatch");
    if (mu.size() != nu.size() || !mu.is_uniform() || !nu.is_uniform())
        throw std::invalid_argument("sliced_wasserstein: needs uniform equal-size measures");
    if (n_projections < 1)
        throw std::invalid_argument("sliced_wasserstein: n_projections >= 1");
    const Eigen::MatrixXd dirs = random_directions(n_projections, mu.dim(), seed);
    const Eigen::Index n = mu.size();
    double acc = 0.0;
    std::vector<double> u(n), v(n);
    for (int k = 0; k < n_projections; ++k) {
        Eigen::VectorXd pu = mu.points * dirs.row(k).transpose();
        Eigen::VectorXd pv = nu.points * dirs.row(k).transpose();
        for (Eigen::Index i = 0; i < n; ++i) {
            u[i] = pu[i];
            v[i] = pv[i];
        }
        acc += wasserstein_1d(u, v, p);
    }
    return acc / n_projections;
}

SlicedResult sliced_wasserstein_grad(const EmpiricalMeasure& mu,
                                     const EmpiricalMeasure& nu,
                                     int n_projections, std::uint64_t seed) {
    mu.validate();
    nu.validate();
    if (mu.size() != nu.size() || !mu.is_uniform() || !nu.is_uniform())
        throw std::invalid_argument("sliced_wasserstein_grad: needs uniform equal-size measures");
    const Eigen::Index n = mu.size();
    const Eigen::MatrixXd dirs = random_directions(n_projections, mu.dim(), seed);
    SlicedResult out;
    out.grad_mu = Eigen::MatrixXd::Zero(n, mu.dim());
    std::vector<int> iu(n), iv(n);
    for (int k = 0; k < n_projections; ++k) {
        Eigen::VectorXd pu = mu.points * dirs.row(k).transpose();
        Eigen::VectorXd pv = nu.points * dirs.row(k).transpose();
        std::iota(iu.begin(), iu.end(), 0);
        std::iota(iv.begin(), iv.end(), 0);
        std::sort(iu.begin(), iu.end(), [&](int a, int b) { return pu[a] < pu[b]; });
        std::sort(iv.begin(), iv.end(), [&](int a, int b) { return pv[a] < pv[b]; });
        for (Eigen::Index r = 0; r < n; ++r) {
            const double diff = pu[iu[r]] - pv[iv[r]];
            out.value += diff * diff;
            out.grad_mu.row(iu[r]) += (2.0 * diff) * dirs.row(k);
        }
    }
    const double scale = 1.0 / (static_cast<double>(n) * n_projections);
    out.value *= scale;
    out.grad_mu *= scale;
    return out;
}

namespace {

inline double gauss_kernel(double sq_dist, double bw) {
    return std::exp(-sq_dist / (2.0 * bw * bw));
}

}  // namespace

double mmd(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
           double bandwidth, bool biased) {
    mu.validate();
    nu.validate();
    if (bandwidth <= 0.0) throw std::invalid_argument("mmd: bandwidth must be positive");
    if (mu.dim() != nu.dim()) throw std::invalid_argument("mmd: dimension mismatch");
    const Eigen::Index n = mu.size(), m = nu.size();
    if (!biased && (n < 2 || m < 2))
        throw std::invalid_argument("mmd: unbiased estimator needs n >= 2");
    const Eigen::MatrixXd dxx = cost_matrix(mu.points, mu.points, 2.0);
    const Eigen::MatrixXd dyy = cost_matrix(nu.points, nu.points, 2.0);
    const Eigen::MatrixXd dxy = cost_matrix(mu.points, nu.points, 2.0);
    const double two_bw2 = 2.0 * bandwidth * bandwidth;
    const Eigen::ArrayXXd kxx = (-dxx.array() / two_bw2).exp();
    const Eigen::ArrayXXd kyy = (-dyy.array() / two_bw2).exp();
    const Eigen::ArrayXXd kxy = (-dxy.array() / two_bw2).exp();
    if (biased) {
        return kxx.sum() / (double(n) * n) + kyy.sum() / (double(m) * m) -
               2.0 * kxy.sum() / (double(n) * m);
    }
    const double sxx = kxx.sum() - static_cast<double>(n);  // drop diagonal (k=1)
    const double syy = kyy.sum() - static_cast<double>(m);
    return sxx / (double(n) * (n - 1)) + syy / (double(m) * (m - 1)) -
           2.0 * kxy.sum() / (double(n) * m);
}

MmdResult mmd_grad(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu,
                   double bandwidth) {
    MmdResult out;
    out.value = mmd(mu, nu, bandwidth, false);
    const Eigen::Index n = mu.size(), m = nu.size();
    const double bw2 = bandwidth * bandwidth;
    out.grad_mu = Eigen::MatrixXd::Zero(n, mu.dim());
    for (Eigen::Index i = 0; i < n; ++i) {
        Eigen::RowVectorXd g = Eigen::RowVectorXd::Zero(mu.dim());
        for (Eigen::Index j = 0; j < n; ++j) {
            if (j == i) continue;
            const Eigen::RowVectorXd d = mu.points.row(i) - mu.points.row(j);
            const double k = gauss_kernel(d.squaredNorm(), bandwidth);
            // Both k(x_i, x_j) and k(x_j, x_i) depend on x_i.
            g += (-2.0 * k / bw2 / (double(n) * (n - 1))) * d;
        }
        for (Eigen::Index j = 0; j < m; ++j) {
            const Eigen::RowVectorXd d = mu.points.row(i) - nu.points.row(j);
            const double k = gauss_kernel(d.squaredNorm(), bandwidth);
            g += (2.0 * k / bw2 / (double(n) * m)) * d;
        }
        out.grad_mu.row(i) = g;
    }
    return out;
}

double median_bandwidth(const EmpiricalMeasure& mu, const EmpiricalMeasure& nu) {
    Eigen::MatrixXd pooled(mu.size() + nu.size(), mu.dim());
    pooled << mu.points, nu.points;
    std::vector<double> d;
    d.reserve(static_cast<size_t>(pooled.rows()) * (pooled.rows() - 1) / 2);
    for (Eigen::Index i = 0; i < pooled.rows(); ++i)
        for (Eigen::Index j = i + 1; j < pooled.rows(); ++j)
            d.push_back((pooled.row(i) - pooled.row(j)).norm());
    if (d.empty()) return 1.0;
    const size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + mid, d.end());
    const double med = d[mid];
    return med > 0.0 ? med : 1.0;
}

}  // namespace pwa
