#include "odm/eval.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <stdexcept>

#include "odm/text.hpp"

namespace odm {

double iou(const Box& a, const Box& b) {
    if (!a.valid() || !b.valid()) throw std::invalid_argument("iou: degenerate box");
    const double ix = std::max(0.0, std::min(a.x2, b.x2) - std::max(a.x1, b.x1));
    const double iy = std::max(0.0, std::min(a.y2, b.y2) - std::max(a.y1, b.y1));
    const double inter = ix * iy;
    const double uni = a.area() + b.area() - inter;
    return inter / uni;
}

double match_and_ap(const std::vector<ScoredPrediction>& predictions,
                    const std::vector<GroundTruthPair>& ground_truth, double iou_threshold) {
    if (ground_truth.empty())
        throw std::invalid_argument("match_and_ap: class has no ground-truth positives");
    for (const auto& p : predictions)
        if (p.object != predictions.front().object || p.verb != predictions.front().verb)
            throw std::invalid_argument("match_and_ap: mixed interaction classes");

    std::vector<std::size_t> order(predictions.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
        return predictions[a].score > predictions[b].score;
    });

    std::vector<bool> matched(ground_truth.size(), false);
    std::vector<bool> is_tp(order.size(), false);
    for (std::size_t rank = 0; rank < order.size(); ++rank) {
        const auto& pred = predictions[order[rank]];
        int best = -1;
        double best_quality = iou_threshold;  // must strictly exceed
        for (std::size_t g = 0; g < ground_truth.size(); ++g) {
            if (matched[g]) continue;
            const double quality = std::min(iou(pred.human_box, ground_truth[g].human_box),
                                            iou(pred.object_box, ground_truth[g].object_box));
            if (quality > best_quality) {
                best = static_cast<int>(g);
                best_quality = quality;
            }
        }
        if (best >= 0) {
            matched[best] = true;
            is_tp[rank] = true;
        }
    }

    // precision envelope over recall, all-point interpolation
    const std::size_t n = order.size();
    std::vector<double> precision(n);
    long long tp = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (is_tp[k]) ++tp;
        precision[k] = static_cast<double>(tp) / static_cast<double>(k + 1);
    }
    for (std::size_t k = n; k-- > 1;) precision[k - 1] = std::max(precision[k - 1], precision[k]);

    double ap = 0.0;
    double prev_recall = 0.0;
    long long tp_count = 0;
    for (std::size_t k = 0; k < n; ++k) {
        if (!is_tp[k]) continue;
        ++tp_count;
        const double recall =
            static_cast<double>(tp_count) / static_cast<double>(ground_truth.size());
        ap += (recall - prev_recall) * precision[k];
        prev_recall = recall;
    }
    return ap;
}

std::vector<ScoredPrediction> generate_predictions(const DualClassifier& clf,
                                                   const std::vector<HoiInstance>& instances) {
    std::vector<ScoredPrediction> preds;
    preds.reserve(instances.size() * static_cast<std::size_t>(clf.num_verbs));
    for (std::size_t i = 0; i < instances.size(); ++i) {
        const auto& inst = instances[i];
        if (!inst.human_box || !inst.object_box)
            throw std::invalid_argument("generate_predictions: instance without boxes");
        const auto verb_scores = predict(clf, inst.feature);
        const double sh = inst.human_score.value_or(1.0);
        const double so = inst.object_score.value_or(1.0);
        for (int t = 0; t < clf.num_verbs; ++t) {
            ScoredPrediction p;
            p.instance_id = static_cast<int>(i);
            p.object = inst.object;
            p.verb = t;
            p.score = compose_triplet_score(verb_scores[t], sh, so);
            p.human_box = *inst.human_box;
            p.object_box = *inst.object_box;
            preds.push_back(p);
        }
    }
    return preds;
}

std::vector<ClassAp> per_class_aps(const std::vector<ScoredPrediction>& predictions,
                                   const std::vector<HoiInstance>& test_set,
                                   const DatasetStats& train_stats,
                                   const EvalProtocol& protocol,
                                   std::vector<std::pair<int, int>>* excluded) {
    const int c = train_stats.num_verbs();

    std::map<std::pair<int, int>, std::vector<GroundTruthPair>> gt_by_class;
    for (const auto& inst : test_set) {
        if (!inst.interactive()) continue;
        if (!inst.human_box || !inst.object_box)
            throw std::invalid_argument("per_class_aps: ground-truth instance without boxes");
        for (int t = 0; t < c; ++t)
            if (inst.verbs[t])
                gt_by_class[{inst.object, t}].push_back(
                    GroundTruthPair{*inst.human_box, *inst.object_box});
    }

    std::map<std::pair<int, int>, std::vector<ScoredPrediction>> preds_by_class;
    for (const auto& p : predictions) preds_by_class[{p.object, p.verb}].push_back(p);

    std::vector<ClassAp> table;
    for (const auto& [key, gts] : gt_by_class) {
        const auto [o, t] = key;
        ClassAp entry;
        entry.object = o;
        entry.verb = t;
        entry.train_count = train_stats.pair_count(o, t);
        entry.test_positives = static_cast<long long>(gts.size());
        entry.rare = entry.train_count < protocol.rare_cutoff;
        // test-only classes have zero train share, hence object-rare
        entry.object_rare =
            train_stats.object_count(o) > 0 &&
            static_cast<double>(entry.train_count) /
                    static_cast<double>(train_stats.object_count(o)) <
                protocol.alpha;
        const auto it = preds_by_class.find(key);
        entry.ap = it == preds_by_class.end()
                       ? 0.0
                       : match_and_ap(it->second, gts, protocol.iou_threshold);
        table.push_back(entry);
    }

    if (excluded) {
        excluded->clear();
        for (int o = 0; o < train_stats.num_objects(); ++o)
            for (int t : train_stats.feasible(o))
                if (!gt_by_class.count({o, t})) excluded->push_back({o, t});
    }
    return table;
}

StandardResult standard_eval(const std::vector<ClassAp>& table, const EvalProtocol& protocol) {
    (void)protocol;  // the table already carries the rare flags
    if (table.empty()) throw std::invalid_argument("standard_eval: no evaluable classes");
    StandardResult r;
    double sum_full = 0.0, sum_rare = 0.0, sum_nonrare = 0.0;
    long long n_rare = 0, n_nonrare = 0;
    for (const auto& entry : table) {
        sum_full += entry.ap;
        if (entry.rare) {
            sum_rare += entry.ap;
            ++n_rare;
        } else {
            sum_nonrare += entry.ap;
            ++n_nonrare;
        }
    }
    r.num_classes = static_cast<long long>(table.size());
    r.num_rare = n_rare;
    r.map_full = sum_full / static_cast<double>(table.size());
    r.rare_defined = n_rare > 0;
    r.nonrare_defined = n_nonrare > 0;
    if (r.rare_defined) r.map_rare = sum_rare / static_cast<double>(n_rare);
    if (r.nonrare_defined) r.map_nonrare = sum_nonrare / static_cast<double>(n_nonrare);
    return r;
}

ObjectBiasResult object_bias_eval(const std::vector<ClassAp>& table, int num_objects) {
    if (table.empty()) throw std::invalid_argument("object_bias_eval: no evaluable classes");
    std::vector<double> rare_sum(num_objects, 0.0), nonrare_sum(num_objects, 0.0);
    std::vector<long long> rare_n(num_objects, 0), nonrare_n(num_objects, 0);
    for (const auto& entry : table) {
        if (entry.object_rare) {
            rare_sum[entry.object] += entry.ap;
            ++rare_n[entry.object];
        } else {
            nonrare_sum[entry.object] += entry.ap;
            ++nonrare_n[entry.object];
        }
    }

    ObjectBiasResult r;
    double or_total = 0.0, onr_total = 0.0;
    for (int o = 0; o < num_objects; ++o) {
        if (rare_n[o] > 0) {
            or_total += rare_sum[o] / static_cast<double>(rare_n[o]);
            ++r.objects_with_rare;
        }
        if (nonrare_n[o] > 0) {
            onr_total += nonrare_sum[o] / static_cast<double>(nonrare_n[o]);
            ++r.objects_with_nonrare;
        }
    }
    r.or_defined = r.objects_with_rare > 0;
    r.onr_defined = r.objects_with_nonrare > 0;
    if (r.or_defined) r.object_rare_map = or_total / static_cast<double>(r.objects_with_rare);
    if (r.onr_defined)
        r.object_nonrare_map = onr_total / static_cast<double>(r.objects_with_nonrare);
    if (r.or_defined && r.onr_defined)
        r.ave = 0.5 * (r.object_rare_map + r.object_nonrare_map);
    return r;
}

EvalReport evaluate(const std::vector<ScoredPrediction>& predictions,
                    const std::vector<HoiInstance>& test_set, const DatasetStats& train_stats,
                    const EvalProtocol& protocol) {
    EvalReport report;
    report.protocol = protocol;
    report.per_class = per_class_aps(predictions, test_set, train_stats, protocol,
                                     &report.excluded);
    report.standard = standard_eval(report.per_class, protocol);
    report.object_bias = object_bias_eval(report.per_class, train_stats.num_objects());
    return report;
}

nlohmann::json eval_report_to_json(const EvalReport& report) {
    nlohmann::json per_class = nlohmann::json::array();
    for (const auto& e : report.per_class)
        per_class.push_back({{"object", e.object},
                             {"verb", e.verb},
                             {"ap", e.ap},
                             {"train_count", e.train_count},
                             {"test_positives", e.test_positives},
                             {"rare", e.rare},
                             {"object_rare", e.object_rare}});
    nlohmann::json excluded = nlohmann::json::array();
    for (const auto& [o, t] : report.excluded)
        excluded.push_back({{"object", o}, {"verb", t}});

    return {{"protocol",
             {{"alpha", report.protocol.alpha},
              {"iou_threshold", report.protocol.iou_threshold},
              {"rare_cutoff", report.protocol.rare_cutoff}}},
            {"standard",
             {{"map_full", report.standard.map_full},
              {"map_rare", report.standard.map_rare},
              {"map_nonrare", report.standard.map_nonrare},
              {"rare_defined", report.standard.rare_defined},
              {"nonrare_defined", report.standard.nonrare_defined},
              {"num_classes", report.standard.num_classes},
              {"num_rare", report.standard.num_rare}}},
            {"object_bias",
             {{"or", report.object_bias.object_rare_map},
              {"onr", report.object_bias.object_nonrare_map},
              {"ave", report.object_bias.ave},
              {"or_defined", report.object_bias.or_defined},
              {"onr_defined", report.object_bias.onr_defined},
              {"objects_with_rare", report.object_bias.objects_with_rare},
              {"objects_with_nonrare", report.object_bias.objects_with_nonrare}}},
            {"per_class", per_class},
            {"excluded", excluded},
            {"vocab_hash", report.vocab_hash}};
}

EvalReport eval_report_from_json(const nlohmann::json& j) {
    EvalReport report;
    report.protocol.alpha = j.at("protocol").at("alpha").get<double>();
    report.protocol.iou_threshold = j.at("protocol").at("iou_threshold").get<double>();
    report.protocol.rare_cutoff = j.at("protocol").at("rare_cutoff").get<long long>();
    const auto& s = j.at("standard");
    report.standard.map_full = s.at("map_full").get<double>();
    report.standard.map_rare = s.at("map_rare").get<double>();
    report.standard.map_nonrare = s.at("map_nonrare").get<double>();
    report.standard.rare_defined = s.at("rare_defined").get<bool>();
    report.standard.nonrare_defined = s.at("nonrare_defined").get<bool>();
    report.standard.num_classes = s.at("num_classes").get<long long>();
    report.standard.num_rare = s.at("num_rare").get<long long>();
    const auto& ob = j.at("object_bias");
    report.object_bias.object_rare_map = ob.at("or").get<double>();
    report.object_bias.object_nonrare_map = ob.at("onr").get<double>();
    report.object_bias.ave = ob.at("ave").get<double>();
    report.object_bias.or_defined = ob.at("or_defined").get<bool>();
    report.object_bias.onr_defined = ob.at("onr_defined").get<bool>();
    report.object_bias.objects_with_rare = ob.at("objects_with_rare").get<long long>();
    report.object_bias.objects_with_nonrare = ob.at("objects_with_nonrare").get<long long>();
    for (const auto& e : j.at("per_class")) {
        ClassAp entry;
        entry.object = e.at("object").get<int>();
        entry.verb = e.at("verb").get<int>();
        entry.ap = e.at("ap").get<double>();
        entry.train_count = e.at("train_count").get<long long>();
        entry.test_positives = e.at("test_positives").get<long long>();
        entry.rare = e.at("rare").get<bool>();
        entry.object_rare = e.at("object_rare").get<bool>();
        report.per_class.push_back(entry);
    }
    for (const auto& e : j.at("excluded"))
        report.excluded.push_back({e.at("object").get<int>(), e.at("verb").get<int>()});
    report.vocab_hash = j.value("vocab_hash", "");
    return report;
}

std::string per_class_csv(const EvalReport& report, const DatasetStats& train_stats) {
    std::string csv =
        "object,verb,ap,train_count,test_positives,rare,object_rare,train_object_count\n";
    for (const auto& e : report.per_class) {
        csv += std::to_string(e.object) + "," + std::to_string(e.verb) + "," +
               format_double(e.ap) + "," + std::to_string(e.train_count) + "," +
               std::to_string(e.test_positives) + "," + std::to_string(e.rare ? 1 : 0) + "," +
               std::to_string(e.object_rare ? 1 : 0) + "," +
               std::to_string(train_stats.object_count(e.object)) + "\n";
    }
    return csv;
}

void save_predictions(const std::string& path, const std::vector<ScoredPrediction>& preds) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("cannot open for writing: " + path);
    for (const auto& p : preds) {
        nlohmann::json j{{"instance_id", p.instance_id},
                         {"object", p.object},
                         {"verb", p.verb},
                         {"score", p.score},
                         {"human_box", {p.human_box.x1, p.human_box.y1, p.human_box.x2,
                                        p.human_box.y2}},
                         {"object_box", {p.object_box.x1, p.object_box.y1, p.object_box.x2,
                                         p.object_box.y2}}};
        out << j.dump() << "\n";
    }
}

std::vector<ScoredPrediction> load_predictions(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open for reading: " + path);
    std::vector<ScoredPrediction> preds;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            nlohmann::json j = nlohmann::json::parse(line);
            ScoredPrediction p;
            p.instance_id = j.at("instance_id").get<int>();
            p.object = j.at("object").get<int>();
            p.verb = j.at("verb").get<int>();
            p.score = j.at("score").get<double>();
            if (p.score < 0.0 || p.score > 1.0)
                throw std::invalid_argument("score outside [0,1]");
            const auto& hb = j.at("human_box");
            const auto& ob = j.at("object_box");
            p.human_box = Box{hb[0].get<double>(), hb[1].get<double>(), hb[2].get<double>(),
                              hb[3].get<double>()};
            p.object_box = Box{ob[0].get<double>(), ob[1].get<double>(), ob[2].get<double>(),
                               ob[3].get<double>()};
            preds.push_back(p);
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return preds;
}

}  // namespace odm
