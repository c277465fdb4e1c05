// Command-line front end: train / sample / evaluate / plot.
#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <json.hpp>

#include "pwa/io.hpp"
#include "pwa/latent.hpp"
#include "pwa/sampler.hpp"
#include "pwa/tasks.hpp"
#include "pwa/train.hpp"

namespace fs = std::filesystem;
using namespace pwa;

namespace {

std::string cli_task_name(TaskKind k) {
    switch (k) {
        case TaskKind::denoising: return "denoise";
        case TaskKind::inpainting: return "inpaint";
        case TaskKind::translation: return "translate";
    }
    return "?";
}

TaskKind cli_task_from(const std::string& s) {
    if (s == "denoise") return TaskKind::denoising;
    if (s == "inpaint") return TaskKind::inpainting;
    if (s == "translate") return TaskKind::translation;
    throw std::invalid_argument("unknown task: " + s +
                                " (expected denoise, inpaint, or translate)");
}

// Collects every violated field instead of stopping at the first.
std::vector<std::string> validate_config(const RunConfig& cfg) {
    std::vector<std::string> bad;
    if (cfg.train.lambda1 < 0.0) bad.push_back("train.lambda1: negative");
    if (cfg.train.lambda2 < 0.0) bad.push_back("train.lambda2: negative");
    if (cfg.train.batch_size < 2) bad.push_back("train.batch_size: must be >= 2");
    if (cfg.train.iterations < 1) bad.push_back("train.iterations: must be >= 1");
    if (cfg.train.learning_rate <= 0.0) bad.push_back("train.learning_rate: must be > 0");
    if (cfg.task.noise_std < 0.0) bad.push_back("task.noise_std: negative");
    if (cfg.split.d1 < 0 || cfg.split.d2 < 0 || cfg.split.d3 < 0)
        bad.push_back("split: negative block size");
    if (cfg.split.total() < 1) bad.push_back("split: total must be >= 1");
    if (cfg.task.kind == TaskKind::translation && (cfg.split.d1 != 0 || cfg.split.d3 != 0))
        bad.push_back("split: translation requires (0, d2, 0)");
    if (cfg.task.kind == TaskKind::inpainting &&
        cfg.task.mask.size() != cfg.arch1.flat_dim())
        bad.push_back("task.mask: length does not match the image size");
    if (cfg.eval.n_samples < 2) bad.push_back("eval.n_samples: must be >= 2");
    if (cfg.output_dir.empty()) bad.push_back("output_dir: empty");
    return bad;
}

RunConfig default_config(TaskKind task, int dim, int height, int width) {
    RunConfig cfg;
    cfg.task.kind = task;
    cfg.task.image_height = height;
    cfg.task.image_width = width;
    if (task == TaskKind::translation) {
        cfg.task.noise_std = 0.0;
        cfg.arch1 = dense_arch(dim, {64, 64});
        cfg.arch2 = dense_arch(dim, {64, 64});
        cfg.split = LatentSplit{0, std::min(16, dim * 2), 0};
        cfg.train.lambda1 = 50.0;
        cfg.train.lambda2 = 0.1;
    } else {
        cfg.task.noise_std = task == TaskKind::denoising ? 1.0 : 0.1;
        if (task == TaskKind::inpainting) cfg.task.mask = left_half_mask(height, width);
        cfg.arch1 = dense_arch(dim, {256, 128}, ArchitectureSpec::Squash::sigmoid);
        cfg.arch2 = dense_arch(dim, {256, 128}, ArchitectureSpec::Squash::linear);
        cfg.split = LatentSplit{16, 16, 16};
        cfg.train.lambda1 = 2.0;
    }
    cfg.train.divergence.kind = DivergenceKind::sliced;
    cfg.train.batch_size = 64;
    cfg.train.iterations = 1500;
    cfg.train.learning_rate = 1e-3;
    return cfg;
}

Dataset build_dataset(const RunConfig& cfg, const Eigen::MatrixXd& x1,
                      const Eigen::MatrixXd* x2_raw, std::uint64_t seed) {
    Dataset d;
    d.x1 = x1;
    switch (cfg.task.kind) {
        case TaskKind::denoising:
            d.x2 = make_denoising_pairs(x1, cfg.task.noise_std, mix_seed(seed, 0xda7a));
            break;
        case TaskKind::inpainting:
            d.x2 = make_inpainting_pairs(x1, cfg.task.mask, cfg.task.noise_std,
                                         mix_seed(seed, 0xda7a));
            break;
        case TaskKind::translation:
            if (!x2_raw)
                throw std::invalid_argument("translate: needs --data2 with the target set");
            d.x2 = *x2_raw;
            d.paired = false;
            break;
    }
    return d;
}

double psnr(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
    const double mse = (a - b).array().square().mean();
    return mse <= 0.0 ? 99.0 : 10.0 * std::log10(1.0 / mse);
}

int run_train(const std::string& task_name, const std::string& config_path,
              const std::string& data_path, const std::string& data2_path,
              std::uint64_t seed, int iterations, const std::string& out_dir) {
    const TaskKind task = cli_task_from(task_name);
    IdxImages imgs = load_idx_images(data_path);
    Eigen::MatrixXd x2_raw;
    const bool has_x2 = !data2_path.empty();
    if (has_x2) x2_raw = load_idx_images(data2_path).data;

    RunConfig cfg;
    if (!config_path.empty()) {
        cfg = load_run_config(config_path);
        if (cfg.task.kind != task)
            throw std::invalid_argument("config task disagrees with --task");
    } else {
        cfg = default_config(task, static_cast<int>(imgs.data.cols()), imgs.height,
                             imgs.width);
    }
    cfg.train.seed = seed;
    if (iterations > 0) cfg.train.iterations = iterations;
    if (!out_dir.empty()) cfg.output_dir = out_dir;

    const auto bad = validate_config(cfg);
    if (!bad.empty()) {
        for (const auto& b : bad) std::cerr << "error: config: " << b << "\n";
        return 1;
    }

    fs::create_directories(cfg.output_dir);
    save_run_config(cfg, fs::path(cfg.output_dir) / "config.json");
    const std::string config_hash = cfg.hash();

    PairedModel model = PairedModel::build(cfg.arch1, cfg.arch2, cfg.split, seed);
    const Dataset data = build_dataset(cfg, imgs.data, has_x2 ? &x2_raw : nullptr, seed);

    std::ofstream metrics(fs::path(cfg.output_dir) / "metrics.csv");
    metrics << kMetricsCsvHeader << '\n';
    metrics.precision(17);
    const int every = std::max(1, cfg.train.iterations / 100);
    train(model, data, cfg.train, cfg.task, [&](const StepRecord& rec) {
        if (rec.step % every == 0 || rec.step + 1 == cfg.train.iterations)
            write_metrics_row(metrics, rec);
    });

    const fs::path ckpt = fs::path(cfg.output_dir) / "model.ckpt";
    save_checkpoint(model, ckpt, cli_task_name(task), config_hash, seed);
    metrics << "# checkpoint_hash," << file_hash(ckpt) << '\n';
    std::cout << "checkpoint " << ckpt.string() << " config_hash " << config_hash
              << "\n";
    return 0;
}

std::vector<double> parse_sigmas(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) out.push_back(std::stod(item));
    if (out.empty()) throw std::invalid_argument("--sigmas: empty list");
    return out;
}

int run_sample(const std::string& ckpt_path, const std::string& cond_path, int n,
               const std::string& sigmas_text, int max_conditions,
               const std::string& out_dir) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    const IdxImages cond = load_idx_images(cond_path);
    const std::vector<double> sigmas = parse_sigmas(sigmas_text);
    const int k = std::min<int>(max_conditions, cond.count);
    if (k < 1) throw std::invalid_argument("sample: empty condition file");
    const int d1 = ck.model.x1_dim();

    Eigen::MatrixXd points(k, d1), means(k, d1), stds(k, d1);
    Eigen::MatrixXd ladder(k * static_cast<int>(sigmas.size()), d1);
    Eigen::MatrixXd draws(k * n, d1);
    for (int i = 0; i < k; ++i) {
        const Eigen::VectorXd x2 = cond.data.row(i);
        points.row(i) = point_estimate(ck.model, x2);
        const auto ests = perturbed_estimates(ck.model, x2, sigmas, 0);
        for (size_t s = 0; s < sigmas.size(); ++s)
            ladder.row(i * static_cast<int>(sigmas.size()) + static_cast<int>(s)) =
                ests[s];
        draws.middleRows(static_cast<Eigen::Index>(i) * n, n) =
            sample_conditional(ck.model, x2, n, mix_seed(ck.seed, 0x5a + i));
        const auto mom = conditional_moments(ck.model, x2, std::max(n, 2),
                                             mix_seed(ck.seed, 0x5a + i));
        means.row(i) = mom.mean;
        stds.row(i) = mom.stddev;
    }

    fs::create_directories(out_dir);
    const fs::path out(out_dir);
    write_array(out / "conditions.bin", cond.data.topRows(k), ck.seed, ck.config_hash);
    write_array(out / "point.bin", points, ck.seed, ck.config_hash);
    write_array(out / "ladder.bin", ladder, ck.seed, ck.config_hash);
    write_array(out / "samples.bin", draws, ck.seed, ck.config_hash);
    write_array(out / "mean.bin", means, ck.seed, ck.config_hash);
    write_array(out / "std.bin", stds, ck.seed, ck.config_hash);

    nlohmann::json meta;
    meta["height"] = cond.height;
    meta["width"] = cond.width;
    meta["n"] = n;
    meta["sigmas"] = sigmas;
    meta["conditions"] = k;
    meta["config_hash"] = ck.config_hash;
    std::ofstream(out / "meta.json") << meta.dump(2) << "\n";
    std::cout << "wrote " << k << " condition rows to " << out_dir << "\n";
    return 0;
}

int run_plot(const std::string& samples_dir) {
    const fs::path dir(samples_dir);
    nlohmann::json meta;
    std::ifstream meta_in(dir / "meta.json");
    if (!meta_in) throw std::invalid_argument("plot: missing meta.json in " + samples_dir);
    meta_in >> meta;
    const int h = meta.at("height"), w = meta.at("width");
    const int k = meta.at("conditions");
    const std::vector<double> sigmas = meta.at("sigmas").get<std::vector<double>>();

    const Eigen::MatrixXd cond = read_array(dir / "conditions.bin");
    const Eigen::MatrixXd ladder = read_array(dir / "ladder.bin");
    const Eigen::MatrixXd means = read_array(dir / "mean.bin");
    const Eigen::MatrixXd stds = read_array(dir / "std.bin");

    // rows: conditions; columns: observation, sigma ladder, mean, std
    std::vector<std::vector<Eigen::VectorXd>> cells(k);
    const int s = static_cast<int>(sigmas.size());
    for (int i = 0; i < k; ++i) {
        cells[i].push_back(cond.row(i));
        for (int j = 0; j < s; ++j) cells[i].push_back(ladder.row(i * s + j));
        cells[i].push_back(means.row(i));
        Eigen::VectorXd sd = stds.row(i);
        const double peak = sd.maxCoeff();
        if (peak > 0.0) sd /= peak;  // std panel rescaled to full range
        cells[i].push_back(sd);
    }
    write_image_grid(dir / "grid.pgm", cells, h, w);
    std::cout << "wrote " << (dir / "grid.pgm").string() << "\n";
    return 0;
}

int run_evaluate(const std::string& ckpt_path, const std::string& data_path,
                 bool use_oracle, int n_samples, int n_conditions,
                 const std::string& out_path) {
    Checkpoint ck = load_checkpoint(ckpt_path);
    const TaskKind task = cli_task_from(ck.task_id);
    const IdxImages imgs = load_idx_images(data_path);
    const Eigen::MatrixXd& clean = imgs.data;
    const std::uint64_t seed = mix_seed(ck.seed, 0xe7a1);

    std::ostringstream report;
    report.precision(17);
    report << "metric,value\n";

    if (task == TaskKind::denoising || task == TaskKind::inpainting) {
        TaskSpec spec;
        spec.kind = task;
        spec.noise_std = task == TaskKind::denoising ? 1.0 : 0.1;
        // read the trained noise level back from the stored run config when
        // it sits next to the checkpoint
        const fs::path cfg_path = fs::path(ckpt_path).parent_path() / "config.json";
        if (fs::exists(cfg_path)) {
            const RunConfig cfg = load_run_config(cfg_path);
            spec = cfg.task;
        } else if (task == TaskKind::inpainting) {
            spec.mask = left_half_mask(imgs.height, imgs.width);
        }
        const int k = std::min<int>(n_conditions, imgs.count);
        const Eigen::MatrixXd x1 = clean.topRows(k);
        const Eigen::MatrixXd x2 =
            task == TaskKind::denoising
                ? make_denoising_pairs(x1, spec.noise_std, seed)
                : make_inpainting_pairs(x1, spec.mask, spec.noise_std, seed);

        Eigen::MatrixXd est(k, x1.cols());
        double std_positive = 0.0;
        double masked_residual = 0.0;
        for (int i = 0; i < k; ++i) {
            est.row(i) = point_estimate(ck.model, x2.row(i));
            const auto mom =
                conditional_moments(ck.model, x2.row(i), 64, mix_seed(seed, i));
            std_positive += (mom.stddev.array() > 0.0).cast<double>().mean();
            if (task == TaskKind::inpainting) {
                const Eigen::VectorXd rec =
                    est.row(i).transpose().cwiseProduct(spec.mask);
                const Eigen::VectorXd obs = x2.row(i).transpose().cwiseProduct(spec.mask);
                masked_residual += (rec - obs).cwiseAbs().sum() / spec.mask.sum();
            }
        }
        report << "psnr_noisy," << psnr(x2.cwiseMax(0.0).cwiseMin(1.0), x1) << "\n";
        report << "psnr_point_estimate," << psnr(est, x1) << "\n";
        report << "std_positive_fraction," << std_positive / k << "\n";
        if (task == TaskKind::inpainting)
            report << "masked_residual_l1," << masked_residual / k << "\n";

        // latent diagnostics against the prior
        const int m = std::min<int>(256, imgs.count);
        const Eigen::MatrixXd codes = ck.model.encode1(clean.topRows(m));
        const Eigen::MatrixXd prior =
            sample_prior(ck.model.split(), m, mix_seed(seed, 0x9));
        SinkhornOptions so;
        so.max_iters = 2000;
        const auto div = sinkhorn_divergence(
            EmpiricalMeasure::uniform(codes),
            EmpiricalMeasure::uniform(prior.leftCols(codes.cols())), so);
        report << "latent_sinkhorn," << div.value << "\n";
        report << "latent_sinkhorn_converged," << div.converged << "\n";
    }

    if (task == TaskKind::translation) {
        const Eigen::MatrixXd mapped = translate_batch(ck.model, clean);
        report << "mean_squared_displacement,"
               << (mapped - clean).rowwise().squaredNorm().mean() << "\n";
        const Eigen::MatrixXd back = translate_inverse_batch(ck.model, mapped);
        report << "cycle_l2," << (back - clean).rowwise().norm().mean() << "\n";
    }

    if (use_oracle && task == TaskKind::denoising && clean.cols() <= 8) {
        // linear-Gaussian toy: x1 ~ N(0, I), x2 = x1 + noise
        const int d = static_cast<int>(clean.cols());
        LinearGaussianOracle oracle;
        oracle.prior_mean = Eigen::VectorXd::Zero(d);
        oracle.prior_cov = Eigen::MatrixXd::Identity(d, d);
        oracle.forward = Eigen::MatrixXd::Identity(d, d);
        const fs::path cfg_path = fs::path(ckpt_path).parent_path() / "config.json";
        double noise_std = 0.5;
        if (fs::exists(cfg_path)) noise_std = load_run_config(cfg_path).task.noise_std;
        oracle.noise_cov =
            noise_std * noise_std * Eigen::MatrixXd::Identity(d, d);
        const int k = std::min<int>(n_conditions, imgs.count);
        double acc = 0.0;
        for (int i = 0; i < k; ++i) {
            const Eigen::VectorXd x2 =
                clean.row(i).transpose() +
                noise_std *
                    gaussian_matrix(1, d, mix_seed(seed, 0x70 + i)).row(0).transpose();
            const Eigen::MatrixXd model_draws =
                sample_conditional(ck.model, x2, n_samples, mix_seed(seed, 0x80 + i));
            const Eigen::MatrixXd post =
                oracle.sample_posterior(x2, n_samples, mix_seed(seed, 0x90 + i));
            acc += std::sqrt(exact_wasserstein(EmpiricalMeasure::uniform(model_draws),
                                               EmpiricalMeasure::uniform(post), 2.0));
        }
        report << "w2_to_posterior," << acc / k << "\n";
    }

    const std::string text = report.str();
    if (out_path.empty()) {
        std::cout << text;
    } else {
        std::ofstream ofs(out_path);
        ofs << text;
        if (!ofs)
            throw std::runtime_error("evaluate: cannot write report to " + out_path);
        std::cout << "wrote " << out_path << "\n";
    }
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"paired autoencoder toolkit"};
    app.require_subcommand(1);

    auto* t = app.add_subcommand("train", "train a paired model");
    std::string task = "denoise", config, data, data2, out = "out";
    std::uint64_t seed = 0;
    int iterations = -1;
    t->add_option("--task", task, "denoise, inpaint, or translate");
    t->add_option("--config", config, "run config JSON");
    t->add_option("--data", data, "IDX image file with the clean/source set")
        ->required();
    t->add_option("--data2", data2, "IDX image file with the target set (translate)");
    t->add_option("--seed", seed, "RNG seed");
    t->add_option("--iterations", iterations, "override training iterations");
    t->add_option("--out", out, "output directory");

    auto* s = app.add_subcommand("sample", "draw conditional samples");
    std::string ckpt, cond, sdir = "samples", sigmas = "-1,-0.5,0,0.5,1";
    int n = 16, max_conditions = 8;
    s->add_option("--checkpoint", ckpt, "trained checkpoint")->required();
    s->add_option("--condition-input", cond, "IDX file with conditioning images")
        ->required();
    s->add_option("--n", n, "samples per condition");
    s->add_option("--sigmas", sigmas, "comma-separated ladder of z1 offsets");
    s->add_option("--conditions", max_conditions, "number of condition rows");
    s->add_option("--out", sdir, "output directory");

    auto* e = app.add_subcommand("evaluate", "compute evaluation metrics");
    std::string eckpt, edata, eout;
    bool oracle = false;
    int en = 512, econds = 10;
    e->add_option("--checkpoint", eckpt, "trained checkpoint")->required();
    e->add_option("--data", edata, "IDX file with held-out clean images")->required();
    e->add_flag("--oracle", oracle, "compare against the analytic posterior (toy)");
    e->add_option("--n", en, "samples per condition for oracle comparison");
    e->add_option("--conditions", econds, "held-out conditions to evaluate");
    e->add_option("--out", eout, "report file (default: stdout)");

    auto* p = app.add_subcommand("plot", "render a sample grid");
    std::string pdir;
    p->add_option("--samples-dir", pdir, "directory written by `sample`")->required();

    CLI11_PARSE(app, argc, argv);
    try {
        if (t->parsed()) return run_train(task, config, data, data2, seed, iterations, out);
        if (s->parsed()) return run_sample(ckpt, cond, n, sigmas, max_conditions, sdir);
        if (e->parsed()) return run_evaluate(eckpt, edata, oracle, en, econds, eout);
        if (p->parsed()) return run_plot(pdir);
    } catch (const std::exception& ex) {
        std::cerr << "error: " << ex.what() << "\n";
        return 1;
    }
    return 1;
}
