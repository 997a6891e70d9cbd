#pragma once

#include <Eigen/Core>
#include <string>
#include <vector>

#include "json.hpp"
#include "odm/instance.hpp"
#include "odm/rng.hpp"

namespace odm {

/// Base verb classifier (affine) plus a classifier trained on memory-balanced
/// batches (three-layer perceptron, ReLU after the first two layers). At
/// inference the heads are blended: sigmoid(lambda * f_b + (1-lambda) * f_m).
struct DualClassifier {
    int feature_dim = 0;
    int num_verbs = 0;
    double lambda = 0.4;
    std::string vocab_hash;

    Eigen::MatrixXd wb;  // c x d
    Eigen::VectorXd bb;  // c

    Eigen::MatrixXd w1;  // d x d
    Eigen::VectorXd b1;  // d
    Eigen::MatrixXd w2;  // d x d
    Eigen::VectorXd b2;  // d
    Eigen::MatrixXd w3;  // c x d
    Eigen::VectorXd b3;  // c
};

/// Kaiming-uniform weights (ReLU gain on the hidden layers), biases zero.
DualClassifier make_classifier(int feature_dim, int num_verbs, double lambda, Rng& rng);

struct ForwardLogits {
    Eigen::VectorXd logits_b;
    Eigen::VectorXd logits_m;
};

/// Pre-sigmoid logits from both heads.
ForwardLogits forward_scores(const DualClassifier& clf, const std::vector<double>& x);

Eigen::VectorXd base_logits(const DualClassifier& clf,
                            Eigen::Ref<const Eigen::VectorXd> x);
Eigen::VectorXd memory_logits(const DualClassifier& clf,
                              Eigen::Ref<const Eigen::VectorXd> x);

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

/// Blended per-verb scores in (0,1).
std::vector<double> predict(const DualClassifier& clf, const std::vector<double>& x);

/// Mean over classes of binary cross entropy, evaluated in the stable
/// log-sum form. Targets must be 0/1.
double bce_multilabel(const Eigen::VectorXd& logits, const Label& targets);

/// s^{h,v,o} = s^v * s^h * s^o; all factors must lie in [0,1].
double compose_triplet_score(double verb_score, double human_score, double object_score);

/// Model file: parameter tensors row-major, lambda, vocabulary hash, and the
/// training config snapshot.
void save_model(const std::string& path, const DualClassifier& clf,
                const nlohmann::json& config);
struct LoadedModel {
    DualClassifier clf;
    nlohmann::json config;
};
LoadedModel load_model(const std::string& path);

}  // namespace odm
