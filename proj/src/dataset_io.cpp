#include "odm/dataset_io.hpp"

#include <fstream>
#include <stdexcept>

#include "json.hpp"
#include "odm/hash.hpp"

namespace odm {

using nlohmann::json;

namespace {

json box_to_json(const std::optional<Box>& box) {
    if (!box) return nullptr;
    return json::array({box->x1, box->y1, box->x2, box->y2});
}

std::optional<Box> box_from_json(const json& j) {
    if (j.is_null()) return std::nullopt;
    if (!j.is_array() || j.size() != 4) throw std::invalid_argument("box must be [x1,y1,x2,y2]");
    Box b{j[0].get<double>(), j[1].get<double>(), j[2].get<double>(), j[3].get<double>()};
    if (!b.valid()) throw std::invalid_argument("degenerate box: requires x1<x2 and y1<y2");
    return b;
}

std::ofstream open_out(const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    return out;
}

std::ifstream open_in(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    return in;
}

}  // namespace

void save_vocabulary(const std::string& path, const Vocabulary& vocab) {
    vocab.validate();
    json j{{"verbs", vocab.verb_names},
           {"objects", vocab.object_names},
           {"feature_dim", vocab.feature_dim}};
    auto out = open_out(path);
    out << j.dump(2) << "\n";
}

Vocabulary load_vocabulary(const std::string& path) {
    auto in = open_in(path);
    json j = json::parse(in);
    Vocabulary vocab;
    vocab.verb_names = j.at("verbs").get<std::vector<std::string>>();
    vocab.object_names = j.at("objects").get<std::vector<std::string>>();
    vocab.feature_dim = j.at("feature_dim").get<int>();
    vocab.validate();
    return vocab;
}

std::string vocabulary_hash(const Vocabulary& vocab) {
    json j{{"verbs", vocab.verb_names},
           {"objects", vocab.object_names},
           {"feature_dim", vocab.feature_dim}};
    return fnv1a64_hex(j.dump());
}

std::string instance_to_json_line(const HoiInstance& inst) {
    json j;
    j["feature"] = inst.feature;
    j["object"] = inst.object;
    std::vector<int> active;
    for (int t = 0; t < static_cast<int>(inst.verbs.size()); ++t)
        if (inst.verbs[t]) active.push_back(t);
    j["verbs"] = active;
    j["human_box"] = box_to_json(inst.human_box);
    j["object_box"] = box_to_json(inst.object_box);
    j["human_score"] = inst.human_score ? json(*inst.human_score) : json(nullptr);
    j["object_score"] = inst.object_score ? json(*inst.object_score) : json(nullptr);
    j["split"] = inst.split == Split::train ? "train" : "test";
    return j.dump();
}

HoiInstance instance_from_json_line(const std::string& line, const Vocabulary& vocab) {
    json j = json::parse(line);
    HoiInstance inst;
    inst.feature = j.at("feature").get<std::vector<double>>();
    if (static_cast<int>(inst.feature.size()) != vocab.feature_dim)
        throw std::invalid_argument("feature dimension mismatch");
    inst.object = j.at("object").get<int>();
    if (inst.object < 0 || inst.object >= vocab.num_objects())
        throw std::invalid_argument("unknown object: index " + std::to_string(inst.object));

    inst.verbs.assign(vocab.num_verbs(), 0);
    for (const auto& v : j.at("verbs")) {
        const int t = v.get<int>();
        if (t < 0 || t >= vocab.num_verbs())
            throw std::invalid_argument("unknown verb: index " + std::to_string(t));
        if (inst.verbs[t]) throw std::invalid_argument("duplicate verb index " + std::to_string(t));
        inst.verbs[t] = 1;
    }

    inst.human_box = box_from_json(j.at("human_box"));
    inst.object_box = box_from_json(j.at("object_box"));
    if (!j.at("human_score").is_null()) {
        inst.human_score = j.at("human_score").get<double>();
        if (*inst.human_score < 0.0 || *inst.human_score > 1.0)
            throw std::invalid_argument("human_score outside [0,1]");
    }
    if (!j.at("object_score").is_null()) {
        inst.object_score = j.at("object_score").get<double>();
        if (*inst.object_score < 0.0 || *inst.object_score > 1.0)
            throw std::invalid_argument("object_score outside [0,1]");
    }

    const std::string split = j.at("split").get<std::string>();
    if (split == "train")
        inst.split = Split::train;
    else if (split == "test")
        inst.split = Split::test;
    else
        throw std::invalid_argument("split must be 'train' or 'test'");
    return inst;
}

void save_instances(const std::string& path, const std::vector<HoiInstance>& instances,
                    const Vocabulary& vocab) {
    auto out = open_out(path);
    for (const auto& inst : instances) {
        if (static_cast<int>(inst.verbs.size()) != vocab.num_verbs())
            throw std::invalid_argument("save_instances: label length mismatch");
        out << instance_to_json_line(inst) << "\n";
    }
}

std::vector<HoiInstance> load_instances(const std::string& path, const Vocabulary& vocab) {
    auto in = open_in(path);
    std::vector<HoiInstance> instances;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            instances.push_back(instance_from_json_line(line, vocab));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return instances;
}

}  // namespace odm
