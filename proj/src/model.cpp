#include "odm/model.hpp"

#include <cmath>
#include <fstream>
#include <stdexcept>

namespace odm {

namespace {

Eigen::MatrixXd init_matrix(int rows, int cols, double gain, Rng& rng) {
    const double a = gain * std::sqrt(3.0 / static_cast<double>(cols));
    Eigen::MatrixXd m(rows, cols);
    for (int r = 0; r < rows; ++r)
        for (int c = 0; c < cols; ++c) m(r, c) = (2.0 * rng.uniform() - 1.0) * a;
    return m;
}

Eigen::VectorXd check_input(const DualClassifier& clf, const std::vector<double>& x) {
    if (static_cast<int>(x.size()) != clf.feature_dim)
        throw std::invalid_argument("feature dimension mismatch");
    return Eigen::Map<const Eigen::VectorXd>(x.data(), x.size());
}

}  // namespace

DualClassifier make_classifier(int feature_dim, int num_verbs, double lambda, Rng& rng) {
    if (feature_dim < 1 || num_verbs < 1)
        throw std::invalid_argument("classifier: dimensions must be >= 1");
    if (lambda < 0.0 || lambda > 1.0)
        throw std::invalid_argument("classifier: lambda must be in [0,1]");
    DualClassifier clf;
    clf.feature_dim = feature_dim;
    clf.num_verbs = num_verbs;
    clf.lambda = lambda;
    const double relu_gain = std::sqrt(2.0);
    clf.wb = init_matrix(num_verbs, feature_dim, 1.0, rng);
    clf.bb = Eigen::VectorXd::Zero(num_verbs);
    clf.w1 = init_matrix(feature_dim, feature_dim, relu_gain, rng);
    clf.b1 = Eigen::VectorXd::Zero(feature_dim);
    clf.w2 = init_matrix(feature_dim, feature_dim, relu_gain, rng);
    clf.b2 = Eigen::VectorXd::Zero(feature_dim);
    clf.w3 = init_matrix(num_verbs, feature_dim, 1.0, rng);
    clf.b3 = Eigen::VectorXd::Zero(num_verbs);
    return clf;
}

Eigen::VectorXd base_logits(const DualClassifier& clf, Eigen::Ref<const Eigen::VectorXd> x) {
    return clf.wb * x + clf.bb;
}

Eigen::VectorXd memory_logits(const DualClassifier& clf, Eigen::Ref<const Eigen::VectorXd> x) {
    Eigen::VectorXd h1 = (clf.w1 * x + clf.b1).cwiseMax(0.0);
    Eigen::VectorXd h2 = (clf.w2 * h1 + clf.b2).cwiseMax(0.0);
    return clf.w3 * h2 + clf.b3;
}

ForwardLogits forward_scores(const DualClassifier& clf, const std::vector<double>& x) {
    Eigen::VectorXd xv = check_input(clf, x);
    return ForwardLogits{base_logits(clf, xv), memory_logits(clf, xv)};
}

std::vector<double> predict(const DualClassifier& clf, const std::vector<double>& x) {
    Eigen::VectorXd xv = check_input(clf, x);
    Eigen::VectorXd z =
        clf.lambda * base_logits(clf, xv) + (1.0 - clf.lambda) * memory_logits(clf, xv);
    std::vector<double> scores(clf.num_verbs);
    for (int t = 0; t < clf.num_verbs; ++t) scores[t] = sigmoid(z[t]);
    return scores;
}

double bce_multilabel(const Eigen::VectorXd& logits, const Label& targets) {
    if (logits.size() != static_cast<Eigen::Index>(targets.size()))
        throw std::invalid_argument("bce: length mismatch");
    double total = 0.0;
    for (Eigen::Index t = 0; t < logits.size(); ++t) {
        if (targets[t] != 0 && targets[t] != 1)
            throw std::invalid_argument("bce: non-binary target");
        const double z = logits[t];
        const double y = targets[t];
        total += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    }
    return total / static_cast<double>(logits.size());
}

double compose_triplet_score(double verb_score, double human_score, double object_score) {
    for (double s : {verb_score, human_score, object_score})
        if (!(s >= 0.0 && s <= 1.0))
            throw std::invalid_argument("triplet score factor outside [0,1]");
    return verb_score * human_score * object_score;
}

namespace {

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
    std::vector<double> flat;
    flat.reserve(static_cast<std::size_t>(m.size()));
    for (Eigen::Index r = 0; r < m.rows(); ++r)
        for (Eigen::Index c = 0; c < m.cols(); ++c) flat.push_back(m(r, c));
    return flat;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j, Eigen::Index rows,
                                 Eigen::Index cols) {
    auto flat = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != rows * cols)
        throw std::runtime_error("model file: tensor size mismatch");
    Eigen::MatrixXd m(rows, cols);
    std::size_t i = 0;
    for (Eigen::Index r = 0; r < rows; ++r)
        for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = flat[i++];
    return m;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j, Eigen::Index n) {
    auto flat = j.get<std::vector<double>>();
    if (static_cast<Eigen::Index>(flat.size()) != n)
        throw std::runtime_error("model file: tensor size mismatch");
    return Eigen::Map<const Eigen::VectorXd>(flat.data(), n);
}

}  // namespace

void save_model(const std::string& path, const DualClassifier& clf,
                const nlohmann::json& config) {
    nlohmann::json j;
    j["format"] = "odm-model";
    j["feature_dim"] = clf.feature_dim;
    j["num_verbs"] = clf.num_verbs;
    j["lambda"] = clf.lambda;
    j["vocab_hash"] = clf.vocab_hash;
    j["config"] = config;
    j["params"] = {{"wb", matrix_to_json(clf.wb)}, {"bb", matrix_to_json(clf.bb)},
                   {"w1", matrix_to_json(clf.w1)}, {"b1", matrix_to_json(clf.b1)},
                   {"w2", matrix_to_json(clf.w2)}, {"b2", matrix_to_json(clf.b2)},
                   {"w3", matrix_to_json(clf.w3)}, {"b3", matrix_to_json(clf.b3)}};
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    out << j.dump(2) << "\n";
}

LoadedModel load_model(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    nlohmann::json j = nlohmann::json::parse(in);
    if (j.value("format", "") != "odm-model")
        throw std::runtime_error("not a model file: " + path);

    LoadedModel loaded;
    DualClassifier& clf = loaded.clf;
    clf.feature_dim = j.at("feature_dim").get<int>();
    clf.num_verbs = j.at("num_verbs").get<int>();
    clf.lambda = j.at("lambda").get<double>();
    clf.vocab_hash = j.at("vocab_hash").get<std::string>();
    const int d = clf.feature_dim;
    const int c = clf.num_verbs;
    const auto& p = j.at("params");
    clf.wb = matrix_from_json(p.at("wb"), c, d);
    clf.bb = vector_from_json(p.at("bb"), c);
    clf.w1 = matrix_from_json(p.at("w1"), d, d);
    clf.b1 = vector_from_json(p.at("b1"), d);
    clf.w2 = matrix_from_json(p.at("w2"), d, d);
    clf.b2 = vector_from_json(p.at("b2"), d);
    clf.w3 = matrix_from_json(p.at("w3"), c, d);
    clf.b3 = vector_from_json(p.at("b3"), c);
    loaded.config = j.value("config", nlohmann::json::object());
    return loaded;
}

}  // namespace odm
