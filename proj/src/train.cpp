#include "pwa/train.hpp"

#include <chrono>
#include <random>

namespace pwa {

const char* kMetricsCsvHeader = "schema,step,total,recon,div,fidelity,wall_seconds";

void write_metrics_row(std::ostream& os, const StepRecord& rec) {
    os << "1," << rec.step << ',' << rec.loss.total << ',' << rec.loss.reconstruction
       << ',' << rec.loss.divergence << ',' << rec.loss.fidelity << ','
       << rec.wall_seconds << '\n';
}

namespace {

Eigen::MatrixXd take_rows(const Eigen::MatrixXd& m, const std::vector<int>& idx) {
    Eigen::MatrixXd out(static_cast<Eigen::Index>(idx.size()), m.cols());
    for (size_t i = 0; i < idx.size(); ++i) out.row(static_cast<Eigen::Index>(i)) = m.row(idx[i]);
    return out;
}

std::vector<int> draw_indices(int n_total, int batch, std::mt19937_64& rng) {
    std::uniform_int_distribution<int> pick(0, n_total - 1);
    std::vector<int> idx(batch);
    for (int i = 0; i < batch; ++i) idx[i] = pick(rng);
    return idx;
}

}  // namespace

LossBreakdown train(PairedModel& model, const Dataset& data,
                    const TrainConfig& config, const TaskSpec& task,
                    const StepCallback& on_step) {
    config.validate();
    task.validate();
    if (data.x1.rows() < config.batch_size || data.x2.rows() < config.batch_size)
        throw std::invalid_argument("train: dataset smaller than batch size");

    nn::Adam opt(model.params(), config.learning_rate);
    std::mt19937_64 rng(mix_seed(config.seed, 0xba7c4));
    const auto t0 = std::chrono::steady_clock::now();
    LossBreakdown last;
    for (long step = 0; step < config.iterations; ++step) {
        const auto idx1 = draw_indices(static_cast<int>(data.x1.rows()),
                                       config.batch_size, rng);
        const auto idx2 = data.paired
                              ? idx1
                              : draw_indices(static_cast<int>(data.x2.rows()),
                                             config.batch_size, rng);
        const Eigen::MatrixXd b1 = take_rows(data.x1, idx1);
        const Eigen::MatrixXd b2 = take_rows(data.x2, idx2);
        model.zero_grad();
        last = total_loss(model, b1, b2, config, task, step, true);
        opt.step();
        if (on_step) {
            const double secs =
                std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
                    .count();
            on_step({step, last, secs});
        }
    }
    return last;
}

}  // namespace pwa
