#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>
#include <pybind11/stl/filesystem.h>

#include "pwa/io.hpp"
#include "pwa/latent.hpp"
#include "pwa/measure.hpp"
#include "pwa/sampler.hpp"
#include "pwa/tasks.hpp"
#include "pwa/train.hpp"

namespace py = pybind11;
using namespace pwa;

namespace {

LatentSplit split_from_tuple(std::tuple<int, int, int> t) {
    LatentSplit sp{std::get<0>(t), std::get<1>(t), std::get<2>(t)};
    sp.validate();
    return sp;
}

TrainConfig make_train_config(double lambda1, double lambda2,
                              const std::string& divergence, int batch_size,
                              double learning_rate, int iterations,
                              std::uint64_t seed) {
    TrainConfig cfg;
    cfg.lambda1 = lambda1;
    cfg.lambda2 = lambda2;
    cfg.divergence.kind = divergence_from_string(divergence);
    cfg.batch_size = batch_size;
    cfg.learning_rate = learning_rate;
    cfg.iterations = iterations;
    cfg.seed = seed;
    cfg.validate();
    return cfg;
}

}  // namespace

PYBIND11_MODULE(_pwa, m) {
    m.doc() = "paired autoencoder core operations";

    // ------------------------------------------------------- divergences
    m.def(
        "exact_wasserstein",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double p) {
            return exact_wasserstein(EmpiricalMeasure::uniform(x),
                                     EmpiricalMeasure::uniform(y), p);
        },
        py::arg("x"), py::arg("y"), py::arg("p") = 2.0,
        "W_p^p between two uniform empirical measures (rows are points).");

    m.def(
        "sinkhorn_divergence",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double epsilon,
           double epsilon_scale, int max_iters, double tol) {
            SinkhornOptions opts;
            opts.epsilon = epsilon;
            opts.epsilon_scale = epsilon_scale;
            opts.max_iters = max_iters;
            opts.tol = tol;
            const auto r = sinkhorn_divergence(EmpiricalMeasure::uniform(x),
                                               EmpiricalMeasure::uniform(y), opts);
            py::dict out;
            out["value"] = r.value;
            out["converged"] = r.converged;
            out["iterations"] = r.iterations;
            out["epsilon"] = r.epsilon;
            out["marginal_error"] = r.marginal_error;
            return out;
        },
        py::arg("x"), py::arg("y"), py::arg("epsilon") = 0.0,
        py::arg("epsilon_scale") = 0.05, py::arg("max_iters") = 500,
        py::arg("tol") = 1e-6, "Debiased entropic divergence.");

    m.def(
        "sliced_wasserstein",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, int n_projections,
           double p, std::uint64_t seed) {
            return sliced_wasserstein(EmpiricalMeasure::uniform(x),
                                      EmpiricalMeasure::uniform(y), n_projections, p,
                                      seed);
        },
        py::arg("x"), py::arg("y"), py::arg("n_projections") = 64,
        py::arg("p") = 2.0, py::arg("seed") = 0);

    m.def(
        "mmd",
        [](const Eigen::MatrixXd& x, const Eigen::MatrixXd& y, double bandwidth,
           bool biased) {
            const auto mu = EmpiricalMeasure::uniform(x);
            const auto nu = EmpiricalMeasure::uniform(y);
            return mmd(mu, nu, bandwidth > 0 ? bandwidth : median_bandwidth(mu, nu),
                       biased);
        },
        py::arg("x"), py::arg("y"), py::arg("bandwidth") = 0.0,
        py::arg("biased") = false);

    m.def("sample_prior",
          [](std::tuple<int, int, int> split, int n, std::uint64_t seed) {
              return sample_prior(split_from_tuple(split), n, seed);
          },
          py::arg("split"), py::arg("n"), py::arg("seed") = 0);

    m.def("gaussian_w2_squared", &gaussian_w2_squared, py::arg("mean1"),
          py::arg("cov1"), py::arg("mean2"), py::arg("cov2"));

    // ------------------------------------------------------------- model
    py::class_<PairedModel>(m, "PairedModel")
        .def_static(
            "dense",
            [](int dim1, int dim2, std::vector<int> hidden,
               std::tuple<int, int, int> split, std::uint64_t seed, bool sigmoid) {
                const auto squash = sigmoid ? ArchitectureSpec::Squash::sigmoid
                                            : ArchitectureSpec::Squash::linear;
                return PairedModel::build(dense_arch(dim1, hidden, squash),
                                          dense_arch(dim2, hidden), split_from_tuple(split),
                                          seed);
            },
            py::arg("dim1"), py::arg("dim2"),
            py::arg("hidden") = std::vector<int>{128, 128}, py::arg("split"),
            py::arg("seed") = 0, py::arg("sigmoid") = false)
        .def_static(
            "conv28",
            [](std::tuple<int, int, int> split, std::uint64_t seed) {
                const auto a = mnist_conv_arch(ArchitectureSpec::Squash::sigmoid);
                return PairedModel::build(a, a, split_from_tuple(split), seed);
            },
            py::arg("split"), py::arg("seed") = 0)
        .def("encode1", &PairedModel::encode1)
        .def("encode2", &PairedModel::encode2)
        .def("decode1", &PairedModel::decode1)
        .def("decode2", &PairedModel::decode2)
        .def("point_estimate",
             [](PairedModel& self, const Eigen::VectorXd& x2) {
                 return point_estimate(self, x2);
             })
        .def("sample_conditional",
             [](PairedModel& self, const Eigen::VectorXd& x2, int n,
                std::uint64_t seed) { return sample_conditional(self, x2, n, seed); },
             py::arg("x2"), py::arg("n"), py::arg("seed") = 0)
        .def("translate",
             [](PairedModel& self, const Eigen::MatrixXd& x1) {
                 return translate_batch(self, x1);
             })
        .def("translate_inverse",
             [](PairedModel& self, const Eigen::MatrixXd& x2) {
                 return translate_inverse_batch(self, x2);
             })
        .def_property_readonly("split", [](const PairedModel& self) {
            const auto& sp = self.split();
            return std::make_tuple(sp.d1, sp.d2, sp.d3);
        });

    // ---------------------------------------------------------- training
    m.def(
        "train",
        [](PairedModel& model, const Eigen::MatrixXd& x1, const Eigen::MatrixXd& x2,
           const std::string& task, bool paired, double noise_std,
           const Eigen::VectorXd& mask, double lambda1, double lambda2,
           const std::string& divergence, int batch_size, double learning_rate,
           int iterations, std::uint64_t seed) {
            TaskSpec spec;
            spec.kind = task_from_string(task);
            spec.noise_std = noise_std;
            spec.mask = mask;
            Dataset data{x1, x2, paired};
            const TrainConfig cfg = make_train_config(
                lambda1, lambda2, divergence, batch_size, learning_rate, iterations, seed);
            std::vector<double> losses;
            train(model, data, cfg, spec,
                  [&](const StepRecord& r) { losses.push_back(r.loss.total); });
            return losses;
        },
        py::arg("model"), py::arg("x1"), py::arg("x2"), py::arg("task") = "denoise",
        py::arg("paired") = true, py::arg("noise_std") = 1.0,
        py::arg("mask") = Eigen::VectorXd(), py::arg("lambda1") = 1.0,
        py::arg("lambda2") = 1.0, py::arg("divergence") = "sinkhorn",
        py::arg("batch_size") = 64, py::arg("learning_rate") = 1e-3,
        py::arg("iterations") = 200, py::arg("seed") = 0,
        "Runs the optimizer in place; returns the per-step total losses.");

    m.def("make_denoising_pairs", &make_denoising_pairs, py::arg("x1"),
          py::arg("noise_std"), py::arg("seed") = 0);
    m.def("make_inpainting_pairs", &make_inpainting_pairs, py::arg("x1"),
          py::arg("mask"), py::arg("noise_std"), py::arg("seed") = 0);
    m.def("left_half_mask", &left_half_mask, py::arg("height"), py::arg("width"));

    // ---------------------------------------------------------------- io
    m.def("load_idx_images", [](const std::filesystem::path& p) {
        const IdxImages imgs = load_idx_images(p);
        return std::make_tuple(imgs.data, imgs.height, imgs.width);
    });
    m.def("save_checkpoint", &save_checkpoint, py::arg("model"), py::arg("path"),
          py::arg("task_id") = "denoise", py::arg("config_hash") = "",
          py::arg("seed") = 0);
    m.def("load_checkpoint", [](const std::filesystem::path& p) {
        Checkpoint ck = load_checkpoint(p);
        return std::make_tuple(std::move(ck.model), ck.task_id, ck.config_hash,
                               ck.seed);
    });
}
