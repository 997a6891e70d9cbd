#pragma once

#include <cstdint>
#include <vector>

#include "odm/instance.hpp"
#include "odm/vocabulary.hpp"

namespace odm {

/// Generator settings for object-conditionally skewed multi-label data.
/// `skew` is the Zipf exponent of each object's conditional verb
/// distribution; the Zipf ranks are assigned over a random permutation of the
/// object's feasible verbs, so globally frequent verbs are not automatically
/// conditionally frequent.
struct SynthConfig {
    int num_objects = 10;
    int num_verbs = 20;
    int feature_dim = 32;
    int train_size = 20000;
    int test_size = 5000;
    double skew = 1.5;
    int feasible_min = 6;
    int feasible_max = 10;
    int max_active_verbs = 3;
    double noise_sigma = 0.3;
    std::uint64_t seed = 42;
    bool perturb_detections = false;

    void validate() const;
};

SynthConfig default_config();

/// The deterministic blueprint behind a config: latent directions, feasible
/// verb sets and per-object conditional distributions (aligned with
/// `feasible`, ascending verb index).
struct SynthPlan {
    std::vector<std::vector<double>> object_dirs;
    std::vector<std::vector<double>> verb_dirs;
    std::vector<std::vector<int>> feasible;
    std::vector<std::vector<double>> cond_probs;
};

SynthPlan make_plan(const SynthConfig& config);

struct SynthDataset {
    std::vector<HoiInstance> train;
    std::vector<HoiInstance> test;
    Vocabulary vocab;
};

/// Deterministic in the seed: same config gives byte-identical datasets.
/// Every 10th instance is a negative pair. Features compose additively:
/// object direction + active verb directions + Gaussian noise.
SynthDataset generate(const SynthConfig& config);

}  // namespace odm
