#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tnvqc/data.hpp"
#include "tnvqc/features.hpp"
#include "tnvqc/mps.hpp"
#include "tnvqc/vqc.hpp"

namespace tnvqc {

enum class Mode { PcaVqc, MpsClassifier, MpsVqc };
enum class OptimizerKind { Adam, RmsProp };

std::string to_string(Mode mode);
std::string to_string(OptimizerKind opt);
Mode mode_from_string(const std::string& s);
OptimizerKind optimizer_from_string(const std::string& s);

// Fully resolved run configuration. defaults_for() fills the per-mode
// hyperparameters: pca-vqc -> RMSProp lr 0.01, mps-classifier -> Adam lr 1e-3,
// mps-vqc -> Adam lr 1e-4, all with batch 100 and 30 epochs.
struct TrainConfig {
    Mode mode = Mode::MpsVqc;
    std::size_t chi = 1;
    OptimizerKind optimizer = OptimizerKind::Adam;
    double learning_rate = 1e-4;
    double rmsprop_alpha = 0.99;
    double rmsprop_eps = 1e-8;
    double adam_beta1 = 0.9;
    double adam_beta2 = 0.999;
    double adam_eps = 1e-8;
    std::size_t batch_size = 100;
    std::size_t epochs = 30;
    std::uint64_t seed = 0;
    std::size_t workers = 1;
    std::size_t output_site = 391;  // middle of the 784-site chain
    double init_noise = 1e-2;
    double vqc_init_sigma = 0.1;
    // Scale each site's identity core by the inverse geometric mean of its
    // training-set feature factor, so initial contractions are O(1) instead
    // of exp(~22) and the arctan encoders start in their responsive range.
    bool calibrated_init = true;

    static TrainConfig defaults_for(Mode mode);
    void validate() const;
};

struct EpochMetrics {
    int epoch = 0;  // 1-based
    double train_loss = 0, train_acc = 0, test_loss = 0, test_acc = 0;
};

struct LossGrad {
    double loss;
    std::array<double, 2> grad;
};

// Softmax cross-entropy over two class scores, max-subtracted for stability.
LossGrad softmax_cross_entropy(const std::array<double, 2>& scores, int label);

struct AdamState {
    std::vector<double> m, v;
    std::uint64_t t = 0;
};
void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               double lr, double beta1, double beta2, double eps);

struct RmsPropState {
    std::vector<double> v;
};
void rmsprop_step(RmsPropState& state, std::span<double> params, std::span<const double> grads,
                  double lr, double alpha, double eps);

// Everything a trained pipeline consists of; which parts are present depends
// on the mode.
struct ModelBundle {
    Mode mode = Mode::MpsVqc;
    std::optional<MpsModel> mps;
    std::optional<VqcParams> vqc;
    std::optional<PcaModel> pca;
};

// Class scores for one image under the bundle's pipeline.
std::array<double, 2> model_scores(const ModelBundle& bundle, const ImageVector& img);

// Mean loss and accuracy over a split; argmax prediction, ties to class 0.
std::pair<double, double> evaluate(const ModelBundle& bundle, const LabeledDataset& split,
                                   std::size_t workers = 1);

struct TrainResult {
    std::vector<EpochMetrics> curve;
    ModelBundle model;
    double wall_seconds = 0;
    double best_test_acc = 0;
    int best_epoch = 0;  // 1-based epoch achieving best_test_acc
};

// Mini-batch training of the configured pipeline: shuffled epochs, mean batch
// gradients, one optimizer step per batch, full train/test evaluation per
// epoch. In mps-vqc mode the VQC input gradient flows into the MPS backward
// sweep and both parameter blocks update in the same step.
TrainResult train(const TrainConfig& config, const LabeledDataset& train_split,
                  const LabeledDataset& test_split,
                  const std::function<void(const EpochMetrics&)>& on_epoch = {});

void write_metrics_csv(const std::filesystem::path& path, std::span<const EpochMetrics> curve);
void write_summary_json(const std::filesystem::path& path, const TrainConfig& config,
                        const TrainResult& result);

}  // namespace tnvqc
