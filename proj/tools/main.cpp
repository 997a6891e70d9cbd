#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "odm/bias.hpp"
#include "odm/dataset_io.hpp"
#include "odm/eval.hpp"
#include "odm/hash.hpp"
#include "odm/memory.hpp"
#include "odm/synth.hpp"
#include "odm/text.hpp"
#include "odm/trainer.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kVersion = "0.1.0";

/// Configuration and input problems exit with code 2; other failures with 1.
struct UsageError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

void require_input_file(const std::string& path) {
    if (!fs::exists(path)) throw UsageError("missing input file: " + path);
}

std::string hash_file(const std::string& path) { return odm::fnv1a64_hex(odm::read_text_file(path)); }

/// Loads a config JSON; a manifest is accepted too (its "config" section is
/// used), so any run can be reproduced from the manifest it wrote.
json load_config_file(const std::string& path) {
    require_input_file(path);
    json j = json::parse(odm::read_text_file(path));
    if (j.contains("config") && j.contains("command")) return j.at("config");
    return j;
}

struct ManifestWriter {
    std::string command;
    std::uint64_t seed = 0;
    json config;
    std::vector<std::string> inputs;
    std::vector<std::string> outputs;

    void write(const std::string& out_dir) const {
        json inputs_j = json::object();
        for (const auto& p : inputs) inputs_j[p] = hash_file(p);
        json outputs_j = json::object();
        for (const auto& p : outputs) outputs_j[fs::path(p).filename().string()] = hash_file(p);
        json manifest{{"tool", "odm"},      {"version", kVersion}, {"command", command},
                      {"seed", seed},       {"config", config},    {"inputs", inputs_j},
                      {"outputs", outputs_j}};
        odm::write_text_file(out_dir + "/" + command + "_manifest.json", manifest.dump(2) + "\n");
    }
};

void ensure_out_dir(const std::string& out_dir) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw UsageError("cannot create output directory: " + out_dir);
}

struct LoadedData {
    odm::Vocabulary vocab;
    std::vector<odm::HoiInstance> train;
    std::vector<odm::HoiInstance> test;
};

LoadedData load_data_dir(const std::string& data_dir, bool need_train, bool need_test) {
    LoadedData data;
    const std::string vocab_path = data_dir + "/vocab.json";
    require_input_file(vocab_path);
    data.vocab = odm::load_vocabulary(vocab_path);
    if (need_train) {
        require_input_file(data_dir + "/train.jsonl");
        data.train = odm::load_instances(data_dir + "/train.jsonl", data.vocab);
    }
    if (need_test) {
        require_input_file(data_dir + "/test.jsonl");
        data.test = odm::load_instances(data_dir + "/test.jsonl", data.vocab);
    }
    return data;
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

odm::SynthConfig synth_config_from_json(const json& j) {
    odm::SynthConfig cfg;
    cfg.num_objects = j.value("num_objects", cfg.num_objects);
    cfg.num_verbs = j.value("num_verbs", cfg.num_verbs);
    cfg.feature_dim = j.value("feature_dim", cfg.feature_dim);
    cfg.train_size = j.value("train_size", cfg.train_size);
    cfg.test_size = j.value("test_size", cfg.test_size);
    cfg.skew = j.value("skew", cfg.skew);
    cfg.feasible_min = j.value("feasible_min", cfg.feasible_min);
    cfg.feasible_max = j.value("feasible_max", cfg.feasible_max);
    cfg.max_active_verbs = j.value("max_active_verbs", cfg.max_active_verbs);
    cfg.noise_sigma = j.value("noise_sigma", cfg.noise_sigma);
    cfg.seed = j.value("seed", cfg.seed);
    cfg.perturb_detections = j.value("perturb_detections", cfg.perturb_detections);
    return cfg;
}

json synth_config_to_json(const odm::SynthConfig& cfg) {
    return {{"num_objects", cfg.num_objects},
            {"num_verbs", cfg.num_verbs},
            {"feature_dim", cfg.feature_dim},
            {"train_size", cfg.train_size},
            {"test_size", cfg.test_size},
            {"skew", cfg.skew},
            {"feasible_min", cfg.feasible_min},
            {"feasible_max", cfg.feasible_max},
            {"max_active_verbs", cfg.max_active_verbs},
            {"noise_sigma", cfg.noise_sigma},
            {"seed", cfg.seed},
            {"perturb_detections", cfg.perturb_detections}};
}

int cmd_gen(const odm::SynthConfig& cfg, const std::string& out_dir) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    ensure_out_dir(out_dir);

    const odm::SynthDataset data = odm::generate(cfg);
    odm::save_vocabulary(out_dir + "/vocab.json", data.vocab);
    odm::save_instances(out_dir + "/train.jsonl", data.train, data.vocab);
    odm::save_instances(out_dir + "/test.jsonl", data.test, data.vocab);

    ManifestWriter manifest{"gen", cfg.seed, synth_config_to_json(cfg), {},
                            {out_dir + "/vocab.json", out_dir + "/train.jsonl",
                             out_dir + "/test.jsonl"}};
    manifest.write(out_dir);
    std::cout << "wrote " << data.train.size() << " train / " << data.test.size()
              << " test instances to " << out_dir << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// analyze
// ---------------------------------------------------------------------------

std::string distribution_svg(const odm::ObjectDistributionRecord& rec,
                             const std::string& object_name) {
    constexpr double kBarW = 18.0, kGap = 6.0, kScale = 200.0, kBase = 230.0;
    const double width = 40.0 + (2.0 * kBarW + kGap + 8.0) * rec.verbs.size();
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      odm::format_double(std::max(width, 320.0)) + "\" height=\"300\">\n";
    svg += "  <text x=\"10\" y=\"20\">p(v|o) vs p_o(v) for " + object_name + "</text>\n";
    double x = 20.0;
    for (std::size_t i = 0; i < rec.verbs.size(); ++i) {
        const double h_cond = rec.p_train_cond[i] * kScale;
        const double h_glob = rec.p_train_global[i] * kScale;
        svg += "  <rect x=\"" + odm::format_double(x) + "\" y=\"" +
               odm::format_double(kBase - h_cond) + "\" width=\"" + odm::format_double(kBarW) +
               "\" height=\"" + odm::format_double(h_cond) +
               "\" fill=\"#4682b4\" data-series=\"p_train_cond\" data-verb=\"" +
               std::to_string(rec.verbs[i]) + "\" data-value=\"" +
               odm::format_double(rec.p_train_cond[i]) + "\"/>\n";
        svg += "  <rect x=\"" + odm::format_double(x + kBarW) + "\" y=\"" +
               odm::format_double(kBase - h_glob) + "\" width=\"" + odm::format_double(kBarW) +
               "\" height=\"" + odm::format_double(h_glob) +
               "\" fill=\"#e88a2a\" data-series=\"p_train_global\" data-verb=\"" +
               std::to_string(rec.verbs[i]) + "\" data-value=\"" +
               odm::format_double(rec.p_train_global[i]) + "\"/>\n";
        svg += "  <text x=\"" + odm::format_double(x) + "\" y=\"250\" font-size=\"9\">v" +
               std::to_string(rec.verbs[i]) + "</text>\n";
        x += 2.0 * kBarW + kGap + 8.0;
    }
    svg += "</svg>\n";
    return svg;
}

int cmd_analyze(const std::string& data_dir, const std::string& model_path,
                const std::string& out_dir) {
    const LoadedData data = load_data_dir(data_dir, true, true);
    ensure_out_dir(out_dir);

    odm::DistributionReport report;
    std::vector<std::string> inputs{data_dir + "/vocab.json", data_dir + "/train.jsonl",
                                    data_dir + "/test.jsonl"};
    if (!model_path.empty()) {
        require_input_file(model_path);
        inputs.push_back(model_path);
        const odm::LoadedModel model = odm::load_model(model_path);
        if (!model.clf.vocab_hash.empty() &&
            model.clf.vocab_hash != odm::vocabulary_hash(data.vocab))
            throw UsageError("vocabulary hash mismatch between model and dataset");
        report = odm::bias_report(model.clf, data.train, data.test, data.vocab);
    } else {
        report = odm::distribution_report(data.train, data.test, data.vocab.num_objects(),
                                          data.vocab.num_verbs());
    }

    odm::write_text_file(out_dir + "/bias_report.json",
                         odm::report_to_json(report).dump(2) + "\n");
    odm::write_text_file(out_dir + "/distributions.csv", odm::report_to_csv(report));

    std::string jsd_csv = report.has_model
                              ? "object,skew_ratio,jsd_cond_vs_global,jsd_train_cond,"
                                "jsd_train_global,jsd_test_cond\n"
                              : "object,skew_ratio,jsd_cond_vs_global\n";
    for (const auto& rec : report.objects) {
        jsd_csv += std::to_string(rec.object) + "," + odm::format_double(rec.skew_ratio) + "," +
                   odm::format_double(rec.jsd_cond_vs_global);
        if (report.has_model)
            jsd_csv += "," + odm::format_double(rec.jsd_train_cond) + "," +
                       odm::format_double(rec.jsd_train_global) + "," +
                       odm::format_double(rec.jsd_test_cond);
        jsd_csv += "\n";
    }
    odm::write_text_file(out_dir + "/jsd.csv", jsd_csv);

    std::vector<std::string> outputs{out_dir + "/bias_report.json",
                                     out_dir + "/distributions.csv", out_dir + "/jsd.csv"};
    for (const auto& rec : report.objects) {
        const std::string path = out_dir + "/dist_object_" + std::to_string(rec.object) + ".svg";
        odm::write_text_file(path,
                             distribution_svg(rec, data.vocab.object_names[rec.object]));
        outputs.push_back(path);
    }

    ManifestWriter manifest{"analyze", 0, json{{"model", model_path}}, inputs, outputs};
    manifest.write(out_dir);
    std::cout << "analyzed " << report.objects.size() << " objects ("
              << report.missing.size() << " skipped)\n";
    return 0;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

odm::TrainConfig train_config_from_json(const json& j) {
    odm::TrainConfig cfg;
    cfg.epochs = j.value("epochs", cfg.epochs);
    cfg.fm_start_epoch = j.value("fm_start_epoch", cfg.fm_start_epoch);
    cfg.learning_rate = j.value("learning_rate", cfg.learning_rate);
    cfg.batch_size = j.value("batch_size", cfg.batch_size);
    cfg.seed = j.value("seed", cfg.seed);
    if (j.contains("mode")) cfg.mode = odm::parse_train_mode(j.at("mode").get<std::string>());
    cfg.lambda = j.value("lambda", cfg.lambda);
    cfg.odm.capacity = j.value("capacity", cfg.odm.capacity);
    cfg.odm.read_count = j.value("read_count", cfg.odm.read_count);
    cfg.snapshot_every = j.value("snapshot_every", cfg.snapshot_every);
    return cfg;
}

json train_config_to_json(const odm::TrainConfig& cfg) {
    return {{"epochs", cfg.epochs},
            {"fm_start_epoch", cfg.fm_start_epoch},
            {"learning_rate", cfg.learning_rate},
            {"batch_size", cfg.batch_size},
            {"seed", cfg.seed},
            {"mode", odm::train_mode_name(cfg.mode)},
            {"lambda", cfg.lambda},
            {"capacity", cfg.odm.capacity},
            {"read_count", cfg.odm.read_count},
            {"snapshot_every", cfg.snapshot_every}};
}

/// Sampling-evolution chart for one object: the raw stream distribution on
/// the left, then the accumulated sampled distribution at successive
/// snapshots.
std::string sampling_svg(const odm::TrainingLog& log, const odm::DatasetStats& stats, int o,
                         const std::string& object_name) {
    const auto& verbs = stats.feasible(o);

    std::vector<const odm::SamplingSnapshot*> picks;
    std::vector<const odm::SamplingSnapshot*> with_samples;
    for (const auto& snap : log.snapshots) {
        long long total = 0;
        for (int t : verbs) total += snap.sampled[o][t];
        if (total > 0) with_samples.push_back(&snap);
    }
    if (with_samples.empty()) return "";
    for (std::size_t idx : {std::size_t{0}, with_samples.size() / 2, with_samples.size() - 1}) {
        const auto* snap = with_samples[idx];
        if (picks.empty() || picks.back() != snap) picks.push_back(snap);
    }

    constexpr double kBarW = 10.0, kScale = 100.0, kBase = 130.0, kGroupPad = 24.0;
    auto shares = [&](const std::vector<long long>& counts) {
        long long total = 0;
        for (int t : verbs) total += counts[t];
        std::vector<double> p;
        for (int t : verbs)
            p.push_back(total > 0 ? static_cast<double>(counts[t]) / total : 0.0);
        return p;
    };

    std::vector<std::pair<std::string, std::vector<double>>> groups;
    groups.push_back({"stream", shares(picks.back()->stream[o])});
    for (const auto* snap : picks)
        groups.push_back({"iter " + std::to_string(snap->iteration), shares(snap->sampled[o])});

    const double group_w = kBarW * verbs.size() + kGroupPad;
    std::string svg = "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" +
                      odm::format_double(std::max(320.0, 20.0 + group_w * groups.size())) +
                      "\" height=\"170\">\n";
    svg += "  <text x=\"10\" y=\"16\" font-size=\"11\">sampled verb distribution for " +
           object_name + "</text>\n";
    double x = 16.0;
    for (const auto& [label, p] : groups) {
        for (std::size_t i = 0; i < verbs.size(); ++i) {
            const double h = p[i] * kScale;
            svg += "  <rect x=\"" + odm::format_double(x + kBarW * i) + "\" y=\"" +
                   odm::format_double(kBase - h) + "\" width=\"" + odm::format_double(kBarW) +
                   "\" height=\"" + odm::format_double(h) +
                   "\" fill=\"" + std::string(label == "stream" ? "#888888" : "#4682b4") +
                   "\" data-group=\"" + label + "\" data-verb=\"" + std::to_string(verbs[i]) +
                   "\" data-value=\"" + odm::format_double(p[i]) + "\"/>\n";
        }
        svg += "  <text x=\"" + odm::format_double(x) + "\" y=\"148\" font-size=\"9\">" + label +
               "</text>\n";
        x += group_w;
    }
    svg += "</svg>\n";
    return svg;
}

int cmd_train(const std::string& data_dir, odm::TrainConfig cfg, const std::string& out_dir) {
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw UsageError(e.what());
    }
    const LoadedData data = load_data_dir(data_dir, true, false);
    ensure_out_dir(out_dir);

    const odm::DatasetStats stats =
        odm::build_stats(data.train, data.vocab.num_objects(), data.vocab.num_verbs());

    std::optional<odm::OdmMemory> memory;
    if (cfg.mode == odm::TrainMode::odm) {
        cfg.odm = odm::make_odm_config(stats, data.vocab.feature_dim, cfg.odm.capacity,
                                       cfg.odm.read_count);
        memory.emplace(cfg.odm);
    }

    odm::TrainResult result =
        odm::train(data.train, stats, cfg, memory ? &*memory : nullptr);
    result.clf.vocab_hash = odm::vocabulary_hash(data.vocab);

    const std::string model_path = out_dir + "/model.json";
    odm::save_model(model_path, result.clf, train_config_to_json(cfg));
    odm::write_text_file(out_dir + "/losses.csv", odm::losses_to_csv(result.log));
    odm::write_text_file(out_dir + "/sampling.csv", odm::sampling_to_csv(result.log, stats));

    std::vector<std::string> outputs{model_path, out_dir + "/losses.csv",
                                     out_dir + "/sampling.csv"};
    if (memory) {
        odm::write_text_file(out_dir + "/memory_snapshot.json",
                             memory->snapshot().dump(2) + "\n");
        outputs.push_back(out_dir + "/memory_snapshot.json");
        for (int o = 0; o < stats.num_objects(); ++o) {
            const std::string svg =
                sampling_svg(result.log, stats, o, data.vocab.object_names[o]);
            if (svg.empty()) continue;
            const std::string path = out_dir + "/sampling_object_" + std::to_string(o) + ".svg";
            odm::write_text_file(path, svg);
            outputs.push_back(path);
        }
    }

    ManifestWriter manifest{"train",
                            cfg.seed,
                            train_config_to_json(cfg),
                            {data_dir + "/vocab.json", data_dir + "/train.jsonl"},
                            outputs};
    manifest.write(out_dir);
    std::cout << "trained " << odm::train_mode_name(cfg.mode) << " model ("
              << result.log.losses.size() << " iterations) -> " << model_path << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// eval
// ---------------------------------------------------------------------------

odm::EvalProtocol protocol_from_json(const json& j) {
    odm::EvalProtocol protocol;
    protocol.alpha = j.value("alpha", protocol.alpha);
    protocol.iou_threshold = j.value("iou_threshold", protocol.iou_threshold);
    protocol.rare_cutoff = j.value("rare_cutoff", protocol.rare_cutoff);
    return protocol;
}

json protocol_to_json(const odm::EvalProtocol& protocol) {
    return {{"alpha", protocol.alpha},
            {"iou_threshold", protocol.iou_threshold},
            {"rare_cutoff", protocol.rare_cutoff}};
}

int cmd_eval(const std::string& model_path, const std::string& predictions_path,
             const std::string& data_dir, const odm::EvalProtocol& protocol,
             bool dump_predictions, const std::string& out_dir) {
    if (!(protocol.alpha >= 0.0 && protocol.alpha < 1.0))
        throw UsageError("alpha must be in [0,1)");
    if (model_path.empty() && predictions_path.empty())
        throw UsageError("either --model or --predictions is required");

    const LoadedData data = load_data_dir(data_dir, true, true);
    ensure_out_dir(out_dir);
    const odm::DatasetStats stats =
        odm::build_stats(data.train, data.vocab.num_objects(), data.vocab.num_verbs());

    std::vector<std::string> inputs{data_dir + "/vocab.json", data_dir + "/train.jsonl",
                                    data_dir + "/test.jsonl"};
    std::vector<odm::ScoredPrediction> preds;
    if (!predictions_path.empty()) {
        require_input_file(predictions_path);
        inputs.push_back(predictions_path);
        preds = odm::load_predictions(predictions_path);
    } else {
        require_input_file(model_path);
        inputs.push_back(model_path);
        const odm::LoadedModel model = odm::load_model(model_path);
        if (model.clf.vocab_hash != odm::vocabulary_hash(data.vocab))
            throw UsageError("vocabulary hash mismatch between model and dataset");
        preds = odm::generate_predictions(model.clf, data.test);
    }

    odm::EvalReport report = odm::evaluate(preds, data.test, stats, protocol);
    report.vocab_hash = odm::vocabulary_hash(data.vocab);

    odm::write_text_file(out_dir + "/eval_report.json",
                         odm::eval_report_to_json(report).dump(2) + "\n");
    odm::write_text_file(out_dir + "/per_class_ap.csv", odm::per_class_csv(report, stats));
    std::vector<std::string> outputs{out_dir + "/eval_report.json",
                                     out_dir + "/per_class_ap.csv"};
    if (dump_predictions) {
        odm::save_predictions(out_dir + "/predictions.jsonl", preds);
        outputs.push_back(out_dir + "/predictions.jsonl");
    }

    ManifestWriter manifest{"eval", 0, protocol_to_json(protocol), inputs, outputs};
    manifest.write(out_dir);

    const auto& s = report.standard;
    const auto& ob = report.object_bias;
    std::cout << "mAP full " << s.map_full;
    if (s.rare_defined) std::cout << "  rare " << s.map_rare;
    if (s.nonrare_defined) std::cout << "  non-rare " << s.map_nonrare;
    std::cout << "\n";
    if (ob.or_defined) std::cout << "OR " << ob.object_rare_map;
    if (ob.onr_defined) std::cout << "  ONR " << ob.object_nonrare_map;
    if (ob.or_defined && ob.onr_defined) std::cout << "  AVE " << ob.ave;
    std::cout << "\n";
    return 0;
}

// ---------------------------------------------------------------------------
// compare
// ---------------------------------------------------------------------------

int cmd_compare(const std::string& path_a, const std::string& path_b,
                const std::string& out_dir) {
    require_input_file(path_a);
    require_input_file(path_b);
    const odm::EvalReport a =
        odm::eval_report_from_json(json::parse(odm::read_text_file(path_a)));
    const odm::EvalReport b =
        odm::eval_report_from_json(json::parse(odm::read_text_file(path_b)));

    if (a.protocol.alpha != b.protocol.alpha ||
        a.protocol.iou_threshold != b.protocol.iou_threshold ||
        a.protocol.rare_cutoff != b.protocol.rare_cutoff)
        throw UsageError("compare: protocol parameters differ between reports");

    struct Row {
        const char* metric;
        double a, b;
        bool defined;
    };
    const std::vector<Row> rows{
        {"map_full", a.standard.map_full, b.standard.map_full, true},
        {"map_rare", a.standard.map_rare, b.standard.map_rare,
         a.standard.rare_defined && b.standard.rare_defined},
        {"map_nonrare", a.standard.map_nonrare, b.standard.map_nonrare,
         a.standard.nonrare_defined && b.standard.nonrare_defined},
        {"or", a.object_bias.object_rare_map, b.object_bias.object_rare_map,
         a.object_bias.or_defined && b.object_bias.or_defined},
        {"onr", a.object_bias.object_nonrare_map, b.object_bias.object_nonrare_map,
         a.object_bias.onr_defined && b.object_bias.onr_defined},
        {"ave", a.object_bias.ave, b.object_bias.ave,
         a.object_bias.or_defined && b.object_bias.or_defined &&
             a.object_bias.onr_defined && b.object_bias.onr_defined},
    };

    std::string csv = "metric,a,b,delta\n";
    for (const auto& row : rows) {
        if (!row.defined) {
            std::cout << row.metric << ": undefined in at least one report\n";
            csv += std::string(row.metric) + ",,,\n";
            continue;
        }
        const double delta = row.b - row.a;
        std::cout << row.metric << ": " << row.a << " -> " << row.b << "  delta "
                  << (delta >= 0 ? "+" : "") << delta << "\n";
        csv += std::string(row.metric) + "," + odm::format_double(row.a) + "," +
               odm::format_double(row.b) + "," + odm::format_double(delta) + "\n";
    }

    if (!out_dir.empty()) {
        ensure_out_dir(out_dir);
        odm::write_text_file(out_dir + "/compare.csv", csv);
        ManifestWriter manifest{"compare", 0, json::object(), {path_a, path_b},
                                {out_dir + "/compare.csv"}};
        manifest.write(out_dir);
    }
    return 0;
}

void emit_error(bool json_errors, const char* kind, const std::string& message) {
    if (json_errors)
        std::cerr << json{{"error", {{"kind", kind}, {"message", message}}}}.dump() << "\n";
    else
        std::cerr << "error: " << message << "\n";
}

/// Finds the --config value ahead of CLI11 so file values become flag
/// defaults and explicit flags still win.
std::optional<std::string> prescan_config(int argc, char** argv) {
    for (int i = 1; i < argc - 1; ++i)
        if (std::string(argv[i]) == "--config") return std::string(argv[i + 1]);
    return std::nullopt;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"object-conditional debiasing laboratory"};
    app.require_subcommand(1);
    bool json_errors = false;
    app.add_flag("--json", json_errors, "machine-readable errors on stderr");

    json file_config = json::object();
    try {
        if (auto cfg_path = prescan_config(argc, argv)) file_config = load_config_file(*cfg_path);
    } catch (const std::exception& e) {
        emit_error(json_errors, "usage", e.what());
        return 2;
    }
    std::string config_path_sink;

    // gen ------------------------------------------------------------------
    auto* gen = app.add_subcommand("gen", "generate a synthetic dataset");
    auto gen_cfg = synth_config_from_json(file_config);
    std::string gen_out;
    gen->add_option("--out", gen_out, "output directory")->required();
    gen->add_option("--config", config_path_sink, "config or manifest JSON");
    gen->add_option("--seed", gen_cfg.seed, "generator seed");
    gen->add_option("--objects", gen_cfg.num_objects, "object classes");
    gen->add_option("--verbs", gen_cfg.num_verbs, "verb classes");
    gen->add_option("--dim", gen_cfg.feature_dim, "feature dimension");
    gen->add_option("--train-size", gen_cfg.train_size, "training instances");
    gen->add_option("--test-size", gen_cfg.test_size, "test instances");
    gen->add_option("--skew", gen_cfg.skew, "Zipf exponent of conditional distributions");
    gen->add_option("--feasible-min", gen_cfg.feasible_min, "min feasible verbs per object");
    gen->add_option("--feasible-max", gen_cfg.feasible_max, "max feasible verbs per object");
    gen->add_option("--max-active", gen_cfg.max_active_verbs, "max active verbs per instance");
    gen->add_option("--noise", gen_cfg.noise_sigma, "feature noise sigma");
    gen->add_flag("--perturb-detections", gen_cfg.perturb_detections,
                  "randomize boxes and detection scores");

    // analyze ---------------------------------------------------------------
    auto* analyze = app.add_subcommand("analyze", "distribution skew and model bias report");
    std::string analyze_data, analyze_model, analyze_out;
    analyze->add_option("--data", analyze_data, "dataset directory")->required();
    analyze->add_option("--model", analyze_model, "optional model JSON");
    analyze->add_option("--out", analyze_out, "output directory")->required();
    analyze->add_option("--config", config_path_sink, "config or manifest JSON");

    // train ------------------------------------------------------------------
    auto* train = app.add_subcommand("train", "train a verb classifier");
    auto train_cfg = train_config_from_json(file_config);
    std::string train_data, train_out;
    std::string train_mode = odm::train_mode_name(train_cfg.mode);
    train->add_option("--data", train_data, "dataset directory")->required();
    train->add_option("--out", train_out, "output directory")->required();
    train->add_option("--config", config_path_sink, "config or manifest JSON");
    train->add_option("--mode", train_mode, "baseline | odm | reweight");
    train->add_option("--seed", train_cfg.seed, "training seed");
    train->add_option("--epochs", train_cfg.epochs, "epochs");
    train->add_option("--fm-start", train_cfg.fm_start_epoch, "first epoch training f_m");
    train->add_option("--lr", train_cfg.learning_rate, "SGD learning rate");
    train->add_option("--batch", train_cfg.batch_size, "batch size");
    train->add_option("--lambda", train_cfg.lambda, "inference blend weight for f_b");
    train->add_option("--capacity", train_cfg.odm.capacity, "memory cell capacity");
    train->add_option("--read-k", train_cfg.odm.read_count, "entries read per instance");
    train->add_option("--snapshot-every", train_cfg.snapshot_every,
                      "sampling snapshot period (iterations)");

    // eval -------------------------------------------------------------------
    auto* eval = app.add_subcommand("eval", "standard and object-bias evaluation");
    auto protocol = protocol_from_json(file_config);
    std::string eval_model, eval_preds, eval_data, eval_out;
    bool dump_predictions = false;
    eval->add_option("--model", eval_model, "model JSON");
    eval->add_option("--predictions", eval_preds, "predictions JSONL (instead of a model)");
    eval->add_option("--data", eval_data, "dataset directory")->required();
    eval->add_option("--out", eval_out, "output directory")->required();
    eval->add_option("--config", config_path_sink, "config or manifest JSON");
    eval->add_option("--alpha", protocol.alpha, "object-rare boundary");
    eval->add_option("--iou-thresh", protocol.iou_threshold, "IoU matching threshold");
    eval->add_option("--rare-cutoff", protocol.rare_cutoff,
                     "standard-protocol rare boundary (training instances)");
    eval->add_flag("--dump-predictions", dump_predictions, "write predictions.jsonl");

    // compare ----------------------------------------------------------------
    auto* compare = app.add_subcommand("compare", "delta table between two eval reports");
    std::string cmp_a, cmp_b, cmp_out;
    compare->add_option("--a", cmp_a, "first eval report JSON")->required();
    compare->add_option("--b", cmp_b, "second eval report JSON")->required();
    compare->add_option("--out", cmp_out, "optional output directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        emit_error(json_errors, "usage", e.what());
        return 2;
    }

    try {
        if (gen->parsed()) return cmd_gen(gen_cfg, gen_out);
        if (analyze->parsed()) return cmd_analyze(analyze_data, analyze_model, analyze_out);
        if (train->parsed()) {
            try {
                train_cfg.mode = odm::parse_train_mode(train_mode);
            } catch (const std::exception& e) {
                throw UsageError(e.what());
            }
            // the default start epoch tracks short runs unless set explicitly
            if (train->count("--fm-start") == 0 && !file_config.contains("fm_start_epoch") &&
                train_cfg.fm_start_epoch > train_cfg.epochs)
                train_cfg.fm_start_epoch = train_cfg.epochs;
            return cmd_train(train_data, train_cfg, train_out);
        }
        if (eval->parsed())
            return cmd_eval(eval_model, eval_preds, eval_data, protocol, dump_predictions,
                            eval_out);
        if (compare->parsed()) return cmd_compare(cmp_a, cmp_b, cmp_out);
    } catch (const UsageError& e) {
        emit_error(json_errors, "usage", e.what());
        return 2;
    } catch (const std::exception& e) {
        emit_error(json_errors, "runtime", e.what());
        return 1;
    }
    return 0;
}
