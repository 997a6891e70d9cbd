#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "odm/dataset_stats.hpp"
#include "odm/instance.hpp"
#include "odm/memory.hpp"
#include "odm/model.hpp"

namespace odm {

enum class TrainMode { baseline, odm, reweight };

TrainMode parse_train_mode(const std::string& name);
std::string train_mode_name(TrainMode mode);

struct TrainConfig {
    int epochs = 10;
    int fm_start_epoch = 3;  // first epoch (1-based) with memory read/write and f_m updates
    double learning_rate = 0.2;
    int batch_size = 32;
    std::uint64_t seed = 0;
    TrainMode mode = TrainMode::baseline;
    double lambda = 0.4;  // blend weight saved with odm models; others save 1.0
    OdmConfig odm;        // thresholds/weights may be left empty to derive from stats
    int snapshot_every = 500;

    void validate() const;
};

/// Per-parameter gradient block, same shapes as DualClassifier.
struct Gradients {
    Eigen::MatrixXd wb;
    Eigen::VectorXd bb;
    Eigen::MatrixXd w1, w2, w3;
    Eigen::VectorXd b1, b2, b3;

    static Gradients zero(int feature_dim, int num_verbs);
};

/// One instance of a step batch, with the memory entries retrieved for it.
/// `class_weights` points at the per-verb loss weights in reweight mode.
struct StepInstance {
    std::vector<double> feature;
    Label label;
    bool fm_active = false;
    std::vector<MemoryEntry> retrieved;
    const std::vector<double>* class_weights = nullptr;
};

struct StepResult {
    double loss_b = 0.0;
    double loss_m = 0.0;
    Gradients grads;
};

/// Loss and exact analytic gradients of one SGD step.
///
/// loss_b averages per-instance BCE over the batch. loss_m averages, over
/// instances with fm_active, the mean BCE of the instance feature plus each
/// retrieved feature scored by f_m against its own label.
StepResult compute_step(const DualClassifier& clf, const std::vector<StepInstance>& batch);

/// Step loss alone; the finite-difference oracle in the tests drives this.
double step_loss(const DualClassifier& clf, const std::vector<StepInstance>& batch);

struct LossRow {
    int epoch = 0;
    long long iteration = 0;
    double loss_b = 0.0;
    double loss_m = 0.0;
};

/// Accumulated per-object verb counts: what the memory served (sampled) and
/// what the raw instance stream carried, both restricted to odm-active steps.
struct SamplingSnapshot {
    long long iteration = 0;
    std::vector<std::vector<long long>> sampled;
    std::vector<std::vector<long long>> stream;
};

struct TrainingLog {
    std::vector<LossRow> losses;
    std::vector<SamplingSnapshot> snapshots;
};

struct TrainResult {
    DualClassifier clf;
    TrainingLog log;
};

/// Mini-batch SGD over the shuffled training set. In odm mode, from
/// fm_start_epoch on, each interactive instance reads from its object's
/// memory cell before being offered for writing.
TrainResult train(const std::vector<HoiInstance>& train_set, const DatasetStats& stats,
                  const TrainConfig& config, OdmMemory* memory);

std::string losses_to_csv(const TrainingLog& log);
/// Rows: iteration,object,verb,sampled_count,stream_count over feasible verbs.
std::string sampling_to_csv(const TrainingLog& log, const DatasetStats& stats);

}  // namespace odm
