#ifndef PWA_TRAIN_HPP
#define PWA_TRAIN_HPP

#include <functional>
#include <ostream>
#include <string>

#include "pwa/objective.hpp"

namespace pwa {

struct StepRecord {
    long step;
    LossBreakdown loss;
    double wall_seconds;
};

using StepCallback = std::function<void(const StepRecord&)>;

// Joint mini-batch dataset; translation tasks carry unpaired sets and
// draw the two sides with independent batch indices.
struct Dataset {
    Eigen::MatrixXd x1;
    Eigen::MatrixXd x2;
    bool paired = true;
};

// Stochastic optimization of total_loss with Adam. Deterministic given
// (model init, dataset, config.seed). Returns the final loss breakdown.
LossBreakdown train(PairedModel& model, const Dataset& data,
                    const TrainConfig& config, const TaskSpec& task,
                    const StepCallback& on_step = {});

// Versioned per-step metrics CSV.
extern const char* kMetricsCsvHeader;
void write_metrics_row(std::ostream& os, const StepRecord& rec);

}  // namespace pwa

#endif
