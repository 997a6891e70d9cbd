#include "odm/trainer.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>

#include "odm/text.hpp"

namespace odm {

TrainMode parse_train_mode(const std::string& name) {
    if (name == "baseline") return TrainMode::baseline;
    if (name == "odm") return TrainMode::odm;
    if (name == "reweight") return TrainMode::reweight;
    throw std::invalid_argument("unknown training mode: " + name);
}

std::string train_mode_name(TrainMode mode) {
    switch (mode) {
        case TrainMode::baseline: return "baseline";
        case TrainMode::odm: return "odm";
        case TrainMode::reweight: return "reweight";
    }
    throw std::logic_error("unreachable");
}

void TrainConfig::validate() const {
    if (epochs < 1) throw std::invalid_argument("train config: epochs must be >= 1");
    if (fm_start_epoch < 1 || fm_start_epoch > epochs)
        throw std::invalid_argument("train config: fm_start_epoch must be in [1, epochs]");
    if (learning_rate < 0.0)
        throw std::invalid_argument("train config: learning_rate must be >= 0");
    if (batch_size < 1) throw std::invalid_argument("train config: batch_size must be >= 1");
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("train config: lambda must be in [0,1]");
    if (snapshot_every < 1)
        throw std::invalid_argument("train config: snapshot_every must be >= 1");
}

Gradients Gradients::zero(int d, int c) {
    Gradients g;
    g.wb = Eigen::MatrixXd::Zero(c, d);
    g.bb = Eigen::VectorXd::Zero(c);
    g.w1 = Eigen::MatrixXd::Zero(d, d);
    g.b1 = Eigen::VectorXd::Zero(d);
    g.w2 = Eigen::MatrixXd::Zero(d, d);
    g.b2 = Eigen::VectorXd::Zero(d);
    g.w3 = Eigen::MatrixXd::Zero(c, d);
    g.b3 = Eigen::VectorXd::Zero(c);
    return g;
}

namespace {

double weighted_bce(const Eigen::VectorXd& logits, const Label& targets,
                    const std::vector<double>* weights) {
    if (!weights) return bce_multilabel(logits, targets);
    if (logits.size() != static_cast<Eigen::Index>(weights->size()))
        throw std::invalid_argument("bce: weight length mismatch");
    double total = 0.0;
    for (Eigen::Index t = 0; t < logits.size(); ++t) {
        if (targets[t] != 0 && targets[t] != 1)
            throw std::invalid_argument("bce: non-binary target");
        const double z = logits[t];
        const double y = targets[t];
        const double l = std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
        total += (*weights)[t] * l;
    }
    return total / static_cast<double>(logits.size());
}

// Accumulates gradients of `scale * bce(f_m(x), y)` into g.
void backprop_fm(const DualClassifier& clf, Eigen::Ref<const Eigen::VectorXd> x,
                 const Label& y, double scale, Gradients& g) {
    const Eigen::VectorXd a1 = clf.w1 * x + clf.b1;
    const Eigen::VectorXd h1 = a1.cwiseMax(0.0);
    const Eigen::VectorXd a2 = clf.w2 * h1 + clf.b2;
    const Eigen::VectorXd h2 = a2.cwiseMax(0.0);
    const Eigen::VectorXd z = clf.w3 * h2 + clf.b3;

    const double inv_c = 1.0 / static_cast<double>(clf.num_verbs);
    Eigen::VectorXd dz(clf.num_verbs);
    for (int t = 0; t < clf.num_verbs; ++t)
        dz[t] = scale * inv_c * (sigmoid(z[t]) - static_cast<double>(y[t]));

    g.w3.noalias() += dz * h2.transpose();
    g.b3 += dz;
    Eigen::VectorXd d2 = clf.w3.transpose() * dz;
    for (int i = 0; i < d2.size(); ++i)
        if (a2[i] <= 0.0) d2[i] = 0.0;
    g.w2.noalias() += d2 * h1.transpose();
    g.b2 += d2;
    Eigen::VectorXd d1 = clf.w2.transpose() * d2;
    for (int i = 0; i < d1.size(); ++i)
        if (a1[i] <= 0.0) d1[i] = 0.0;
    g.w1.noalias() += d1 * x.transpose();
    g.b1 += d1;
}

}  // namespace

StepResult compute_step(const DualClassifier& clf, const std::vector<StepInstance>& batch) {
    if (batch.empty()) throw std::invalid_argument("compute_step: empty batch");
    StepResult result;
    result.grads = Gradients::zero(clf.feature_dim, clf.num_verbs);

    long long fm_instances = 0;
    for (const auto& item : batch)
        if (item.fm_active) ++fm_instances;

    const double inv_b = 1.0 / static_cast<double>(batch.size());
    const double inv_c = 1.0 / static_cast<double>(clf.num_verbs);

    for (const auto& item : batch) {
        if (static_cast<int>(item.feature.size()) != clf.feature_dim)
            throw std::invalid_argument("compute_step: feature dimension mismatch");
        Eigen::Map<const Eigen::VectorXd> x(item.feature.data(), clf.feature_dim);

        const Eigen::VectorXd zb = base_logits(clf, x);
        result.loss_b += inv_b * weighted_bce(zb, item.label, item.class_weights);
        for (int t = 0; t < clf.num_verbs; ++t) {
            const double w = item.class_weights ? (*item.class_weights)[t] : 1.0;
            const double dz =
                inv_b * inv_c * w * (sigmoid(zb[t]) - static_cast<double>(item.label[t]));
            result.grads.wb.row(t).noalias() += dz * x.transpose();
            result.grads.bb[t] += dz;
        }

        if (item.fm_active) {
            const double scale =
                1.0 / (static_cast<double>(fm_instances) *
                       static_cast<double>(1 + item.retrieved.size()));
            result.loss_m += scale * bce_multilabel(memory_logits(clf, x), item.label);
            backprop_fm(clf, x, item.label, scale, result.grads);
            for (const auto& entry : item.retrieved) {
                Eigen::Map<const Eigen::VectorXd> xe(entry.feature.data(), clf.feature_dim);
                result.loss_m += scale * bce_multilabel(memory_logits(clf, xe), entry.label);
                backprop_fm(clf, xe, entry.label, scale, result.grads);
            }
        }
    }
    return result;
}

double step_loss(const DualClassifier& clf, const std::vector<StepInstance>& batch) {
    const StepResult r = compute_step(clf, batch);
    return r.loss_b + r.loss_m;
}

TrainResult train(const std::vector<HoiInstance>& train_set, const DatasetStats& stats,
                  const TrainConfig& config, OdmMemory* memory) {
    config.validate();
    if (train_set.empty()) throw std::invalid_argument("train: empty dataset");
    const int d = static_cast<int>(train_set.front().feature.size());
    const int c = stats.num_verbs();
    const int m = stats.num_objects();
    for (const auto& inst : train_set) {
        if (static_cast<int>(inst.feature.size()) != d)
            throw std::invalid_argument("train: feature dimension mismatch");
        if (static_cast<int>(inst.verbs.size()) != c)
            throw std::invalid_argument("train: label length mismatch against stats");
    }
    if (config.mode == TrainMode::odm) {
        if (!memory) throw std::invalid_argument("train: odm mode requires a memory");
        if (memory->num_objects() != m)
            throw std::invalid_argument("train: memory object count mismatch");
        if (memory->config().feature_dim != d)
            throw std::invalid_argument("train: memory feature_dim mismatch");
    }

    TrainResult result;
    Rng init_rng = Rng::substream(config.seed, "train.init");
    const double lambda = config.mode == TrainMode::odm ? config.lambda : 1.0;
    result.clf = make_classifier(d, c, lambda, init_rng);

    Rng shuffle_rng = Rng::substream(config.seed, "train.shuffle");
    std::vector<std::size_t> order(train_set.size());
    std::iota(order.begin(), order.end(), 0);

    std::vector<std::vector<long long>> sampled(m, std::vector<long long>(c, 0));
    std::vector<std::vector<long long>> stream(m, std::vector<long long>(c, 0));
    long long iteration = 0;
    long long write_step = memory ? memory->clock() : 0;
    const int k = config.odm.read_count;

    auto take_snapshot = [&]() {
        result.log.snapshots.push_back(SamplingSnapshot{iteration, sampled, stream});
    };
    bool activation_logged = false;

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        shuffle_rng.shuffle(order);
        const bool odm_active =
            config.mode == TrainMode::odm && epoch >= config.fm_start_epoch;

        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t end =
                std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            std::vector<StepInstance> batch;
            batch.reserve(end - start);
            for (std::size_t i = start; i < end; ++i) {
                const HoiInstance& inst = train_set[order[i]];
                StepInstance item;
                item.feature = inst.feature;
                item.label = inst.verbs;
                if (config.mode == TrainMode::reweight)
                    item.class_weights = &stats.weights(inst.object);
                if (odm_active && inst.interactive()) {
                    item.fm_active = true;
                    item.retrieved = memory->read(inst.object, inst.verbs, k);
                    for (const auto& entry : item.retrieved)
                        for (int t = 0; t < c; ++t)
                            if (entry.label[t]) sampled[inst.object][t] += 1;
                    for (int t = 0; t < c; ++t)
                        if (inst.verbs[t]) stream[inst.object][t] += 1;
                    memory->write(inst.object, inst.feature, inst.verbs, ++write_step);
                }
                batch.push_back(std::move(item));
            }

            const StepResult step = compute_step(result.clf, batch);
            result.clf.wb -= config.learning_rate * step.grads.wb;
            result.clf.bb -= config.learning_rate * step.grads.bb;
            result.clf.w1 -= config.learning_rate * step.grads.w1;
            result.clf.b1 -= config.learning_rate * step.grads.b1;
            result.clf.w2 -= config.learning_rate * step.grads.w2;
            result.clf.b2 -= config.learning_rate * step.grads.b2;
            result.clf.w3 -= config.learning_rate * step.grads.w3;
            result.clf.b3 -= config.learning_rate * step.grads.b3;

            ++iteration;
            result.log.losses.push_back(LossRow{epoch, iteration, step.loss_b, step.loss_m});
            if (odm_active && !activation_logged) {
                // cold-start reference point for the sampling-evolution log
                take_snapshot();
                activation_logged = true;
            } else if (iteration % config.snapshot_every == 0) {
                take_snapshot();
            }
        }
    }
    if (result.log.snapshots.empty() || result.log.snapshots.back().iteration != iteration)
        take_snapshot();
    return result;
}

std::string losses_to_csv(const TrainingLog& log) {
    std::string csv = "epoch,iteration,loss_b,loss_m\n";
    for (const auto& row : log.losses)
        csv += std::to_string(row.epoch) + "," + std::to_string(row.iteration) + "," +
               format_double(row.loss_b) + "," + format_double(row.loss_m) + "\n";
    return csv;
}

std::string sampling_to_csv(const TrainingLog& log, const DatasetStats& stats) {
    std::string csv = "iteration,object,verb,sampled_count,stream_count\n";
    for (const auto& snap : log.snapshots) {
        for (int o = 0; o < stats.num_objects(); ++o) {
            for (int t : stats.feasible(o)) {
                csv += std::to_string(snap.iteration) + "," + std::to_string(o) + "," +
                       std::to_string(t) + "," + std::to_string(snap.sampled[o][t]) + "," +
                       std::to_string(snap.stream[o][t]) + "\n";
            }
        }
    }
    return csv;
}

}  // namespace odm
