#include "odm/synth.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>

#include "odm/rng.hpp"

namespace odm {

void SynthConfig::validate() const {
    if (num_objects < 1) throw std::invalid_argument("synth config: num_objects must be >= 1");
    if (num_verbs < 1) throw std::invalid_argument("synth config: num_verbs must be >= 1");
    if (feature_dim < 2) throw std::invalid_argument("synth config: feature_dim must be >= 2");
    if (train_size < 1 || test_size < 1)
        throw std::invalid_argument("synth config: split sizes must be >= 1");
    if (skew < 0.0) throw std::invalid_argument("synth config: skew must be >= 0");
    if (feasible_min < 1 || feasible_min > feasible_max || feasible_max > num_verbs)
        throw std::invalid_argument("synth config: requires 1 <= feasible_min <= feasible_max <= num_verbs");
    if (max_active_verbs < 1)
        throw std::invalid_argument("synth config: max_active_verbs must be >= 1");
    if (noise_sigma < 0.0) throw std::invalid_argument("synth config: noise_sigma must be >= 0");
}

SynthConfig default_config() { return SynthConfig{}; }

namespace {

std::vector<double> unit_direction(int dim, Rng& rng) {
    std::vector<double> v(dim);
    double norm_sq = 0.0;
    for (double& x : v) {
        x = rng.normal();
        norm_sq += x * x;
    }
    const double norm = std::sqrt(norm_sq);
    if (norm < 1e-12) return unit_direction(dim, rng);
    for (double& x : v) x /= norm;
    return v;
}

}  // namespace

SynthPlan make_plan(const SynthConfig& config) {
    config.validate();
    SynthPlan plan;

    Rng dir_rng = Rng::substream(config.seed, "synth.directions");
    for (int o = 0; o < config.num_objects; ++o)
        plan.object_dirs.push_back(unit_direction(config.feature_dim, dir_rng));
    for (int t = 0; t < config.num_verbs; ++t)
        plan.verb_dirs.push_back(unit_direction(config.feature_dim, dir_rng));

    Rng feas_rng = Rng::substream(config.seed, "synth.feasible");
    for (int o = 0; o < config.num_objects; ++o) {
        const int size = config.feasible_min +
                         static_cast<int>(feas_rng.uniform_int(
                             static_cast<std::uint64_t>(config.feasible_max - config.feasible_min + 1)));
        std::vector<int> all(config.num_verbs);
        std::iota(all.begin(), all.end(), 0);
        feas_rng.shuffle(all);
        std::vector<int> verbs(all.begin(), all.begin() + size);

        // Zipf mass over a fresh permutation so conditional and global
        // frequency orders decouple across objects.
        std::vector<int> ranks(verbs.begin(), verbs.end());
        feas_rng.shuffle(ranks);
        std::vector<double> mass(config.num_verbs, 0.0);
        double total = 0.0;
        for (std::size_t r = 0; r < ranks.size(); ++r) {
            const double m = std::pow(static_cast<double>(r + 1), -config.skew);
            mass[ranks[r]] = m;
            total += m;
        }

        std::sort(verbs.begin(), verbs.end());
        std::vector<double> probs(verbs.size());
        for (std::size_t i = 0; i < verbs.size(); ++i) probs[i] = mass[verbs[i]] / total;
        plan.feasible.push_back(std::move(verbs));
        plan.cond_probs.push_back(std::move(probs));
    }
    return plan;
}

namespace {

std::vector<HoiInstance> generate_split(const SynthConfig& config, const SynthPlan& plan,
                                        Split split, int size, Rng& rng) {
    std::vector<HoiInstance> instances;
    instances.reserve(size);

    for (int i = 0; i < size; ++i) {
        HoiInstance inst;
        inst.split = split;
        inst.object = static_cast<int>(rng.uniform_int(config.num_objects));
        inst.verbs.assign(config.num_verbs, 0);
        inst.feature = plan.object_dirs[inst.object];

        const bool negative = (i % 10) == 9;
        if (!negative) {
            const auto& verbs = plan.feasible[inst.object];
            const auto& probs = plan.cond_probs[inst.object];
            const int max_active =
                std::min<int>(config.max_active_verbs, static_cast<int>(verbs.size()));
            const int active = 1 + static_cast<int>(rng.uniform_int(max_active));

            std::vector<double> remaining = probs;
            for (int a = 0; a < active; ++a) {
                const std::size_t pick = rng.weighted_index(remaining);
                remaining[pick] = 0.0;
                const int verb = verbs[pick];
                inst.verbs[verb] = 1;
                for (int dimn = 0; dimn < config.feature_dim; ++dimn)
                    inst.feature[dimn] += plan.verb_dirs[verb][dimn];
            }
        }

        if (config.noise_sigma > 0.0)
            for (double& x : inst.feature) x += config.noise_sigma * rng.normal();

        if (config.perturb_detections) {
            auto jittered_box = [&rng]() {
                const double x1 = rng.uniform() * 50.0;
                const double y1 = rng.uniform() * 50.0;
                return Box{x1, y1, x1 + 50.0 + rng.uniform() * 50.0,
                           y1 + 50.0 + rng.uniform() * 50.0};
            };
            inst.human_box = jittered_box();
            inst.object_box = jittered_box();
            inst.human_score = 0.5 + 0.5 * rng.uniform();
            inst.object_score = 0.5 + 0.5 * rng.uniform();
        } else {
            // Oracle-detection analogue: unit confidences and a fixed,
            // per-instance tile so IoU matching pairs a prediction with its
            // own ground truth and nothing else.
            const double x0 = static_cast<double>(i % 1000) * 200.0;
            const double y0 = static_cast<double>(i / 1000) * 200.0;
            inst.human_box = Box{x0, y0, x0 + 100.0, y0 + 100.0};
            inst.object_box = Box{x0 + 40.0, y0 + 40.0, x0 + 140.0, y0 + 140.0};
            inst.human_score = 1.0;
            inst.object_score = 1.0;
        }
        instances.push_back(std::move(inst));
    }
    return instances;
}

std::string padded_name(const char* prefix, int index, int total) {
    int digits = 1;
    for (int v = total - 1; v >= 10; v /= 10) ++digits;
    std::string num = std::to_string(index);
    return std::string(prefix) + "_" + std::string(digits - num.size(), '0') + num;
}

}  // namespace

SynthDataset generate(const SynthConfig& config) {
    const SynthPlan plan = make_plan(config);

    SynthDataset data;
    data.vocab.feature_dim = config.feature_dim;
    for (int t = 0; t < config.num_verbs; ++t)
        data.vocab.verb_names.push_back(padded_name("verb", t, config.num_verbs));
    for (int o = 0; o < config.num_objects; ++o)
        data.vocab.object_names.push_back(padded_name("object", o, config.num_objects));

    Rng train_rng = Rng::substream(config.seed, "synth.train");
    Rng test_rng = Rng::substream(config.seed, "synth.test");
    data.train = generate_split(config, plan, Split::train, config.train_size, train_rng);
    data.test = generate_split(config, plan, Split::test, config.test_size, test_rng);
    return data;
}

}  // namespace odm
