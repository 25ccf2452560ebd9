#include "tnvqc/training.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <thread>

#include <json.hpp>

namespace tnvqc {

namespace {

constexpr std::uint64_t kShuffleSeedOffset = 0x9E3779B97F4A7C15ULL;

void format_double(std::string& out, double v) {
    char buf[32];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    out += buf;
}

// fn(worker_id, begin, end) over contiguous chunks of [0, count).
template <typename Fn>
void parallel_chunks(std::size_t count, std::size_t workers, const Fn& fn) {
    if (workers <= 1 || count <= 1) {
        fn(std::size_t{0}, std::size_t{0}, count);
        return;
    }
    const std::size_t w = std::min(workers, count);
    const std::size_t chunk = (count + w - 1) / w;
    std::vector<std::thread> threads;
    threads.reserve(w);
    for (std::size_t id = 0; id < w; ++id) {
        const std::size_t begin = id * chunk;
        const std::size_t end = std::min(count, begin + chunk);
        if (begin >= end) break;
        threads.emplace_back([&, id, begin, end] { fn(id, begin, end); });
    }
    for (auto& t : threads) t.join();
}

// Inverse geometric mean of the per-site feature factor sum over the
// training embeddings; used to scale the identity cores at init.
std::vector<double> calibration_scales(std::span<const ProductState> embeddings) {
    if (embeddings.empty()) return {};
    const std::size_t n = embeddings.front().size();
    std::vector<double> mean_log(n, 0.0);
    for (const auto& emb : embeddings) {
        for (std::size_t i = 0; i < n; ++i) {
            const auto& s = emb.site(i);
            mean_log[i] += std::log(s[0] + s[1]);
        }
    }
    std::vector<double> scales(n);
    for (std::size_t i = 0; i < n; ++i) {
        scales[i] = std::exp(-mean_log[i] / static_cast<double>(embeddings.size()));
    }
    return scales;
}

struct ParamLayout {
    std::vector<std::size_t> site_offsets;
    std::size_t vqc_offset = static_cast<std::size_t>(-1);
    std::size_t total = 0;

    static ParamLayout describe(const ModelBundle& bundle) {
        ParamLayout layout;
        std::size_t off = 0;
        if (bundle.mps) {
            layout.site_offsets.reserve(bundle.mps->n_sites());
            for (const auto& site : bundle.mps->sites) {
                layout.site_offsets.push_back(off);
                off += site.size();
            }
        }
        if (bundle.vqc) {
            layout.vqc_offset = off;
            off += 12;
        }
        layout.total = off;
        return layout;
    }
};

void gather_params(const ModelBundle& bundle, const ParamLayout& layout,
                   std::span<double> out) {
    if (bundle.mps) {
        for (std::size_t i = 0; i < bundle.mps->n_sites(); ++i) {
            const auto d = bundle.mps->sites[i].data();
            std::copy(d.begin(), d.end(), out.begin() + layout.site_offsets[i]);
        }
    }
    if (bundle.vqc) {
        const auto f = bundle.vqc->flat();
        std::copy(f.begin(), f.end(), out.begin() + layout.vqc_offset);
    }
}

void scatter_params(ModelBundle& bundle, const ParamLayout& layout,
                    std::span<const double> in) {
    if (bundle.mps) {
        for (std::size_t i = 0; i < bundle.mps->n_sites(); ++i) {
            auto d = bundle.mps->sites[i].data();
            std::copy_n(in.begin() + layout.site_offsets[i], d.size(), d.begin());
        }
        bundle.mps->touch();
    }
    if (bundle.vqc) {
        auto f = bundle.vqc->flat();
        std::copy_n(in.begin() + layout.vqc_offset, f.size(), f.begin());
    }
}

struct Workspace {
    ContractionTrace trace;
    MpsGradient mps_grad;
    std::vector<double> flat;
};

std::array<double, 2> scores_for_embedded(const ModelBundle& bundle, const ProductState& emb,
                                          ContractionTrace& trace) {
    const auto out = mps_forward(*bundle.mps, emb, trace);
    if (bundle.mode == Mode::MpsClassifier) {
        return {out[0], out[1]};
    }
    FeatureInput fi{{out[0], out[1], out[2], out[3]}};
    return vqc_forward(fi, *bundle.vqc);
}

}  // namespace

std::string to_string(Mode mode) {
    switch (mode) {
        case Mode::PcaVqc: return "pca-vqc";
        case Mode::MpsClassifier: return "mps-classifier";
        case Mode::MpsVqc: return "mps-vqc";
    }
    return "?";
}

std::string to_string(OptimizerKind opt) {
    return opt == OptimizerKind::Adam ? "adam" : "rmsprop";
}

Mode mode_from_string(const std::string& s) {
    if (s == "pca-vqc") return Mode::PcaVqc;
    if (s == "mps-classifier") return Mode::MpsClassifier;
    if (s == "mps-vqc") return Mode::MpsVqc;
    throw InputError("unknown mode '" + s + "'");
}

OptimizerKind optimizer_from_string(const std::string& s) {
    if (s == "adam") return OptimizerKind::Adam;
    if (s == "rmsprop") return OptimizerKind::RmsProp;
    throw InputError("unknown optimizer '" + s + "'");
}

TrainConfig TrainConfig::defaults_for(Mode mode) {
    TrainConfig c;
    c.mode = mode;
    switch (mode) {
        case Mode::PcaVqc:
            c.optimizer = OptimizerKind::RmsProp;
            c.learning_rate = 0.01;
            break;
        case Mode::MpsClassifier:
            c.optimizer = OptimizerKind::Adam;
            c.learning_rate = 1e-3;
            break;
        case Mode::MpsVqc:
            c.optimizer = OptimizerKind::Adam;
            c.learning_rate = 1e-4;
            break;
    }
    return c;
}

void TrainConfig::validate() const {
    if (!(learning_rate > 0)) throw InputError("learning_rate must be positive");
    if (batch_size < 1) throw InputError("batch_size must be at least 1");
    if (epochs < 1) throw InputError("epochs must be at least 1");
    if (chi < 1) throw InputError("chi must be at least 1");
    if (workers < 1) throw InputError("workers must be at least 1");
    if (mode != Mode::PcaVqc && output_site >= kImagePixels) {
        throw InputError("output_site out of range");
    }
    if (!(init_noise >= 0) || !std::isfinite(init_noise)) {
        throw InputError("init_noise must be finite and non-negative");
    }
}

LossGrad softmax_cross_entropy(const std::array<double, 2>& scores, int label) {
    if (!std::isfinite(scores[0]) || !std::isfinite(scores[1])) {
        throw NumericError("non-finite class scores in loss");
    }
    if (label != 0 && label != 1) throw InputError("label must be 0 or 1");
    const double m = std::max(scores[0], scores[1]);
    const double z0 = std::exp(scores[0] - m);
    const double z1 = std::exp(scores[1] - m);
    const double sum = z0 + z1;
    const double p0 = z0 / sum;
    const double p1 = z1 / sum;
    const double loss = std::log(sum) - (scores[label] - m);
    return {loss, {p0 - (label == 0 ? 1.0 : 0.0), p1 - (label == 1 ? 1.0 : 0.0)}};
}

void adam_step(AdamState& state, std::span<double> params, std::span<const double> grads,
               double lr, double beta1, double beta2, double eps) {
    if (params.size() != grads.size()) {
        throw UsageError("adam_step: params and grads differ in length");
    }
    if (state.m.empty()) {
        state.m.assign(params.size(), 0.0);
        state.v.assign(params.size(), 0.0);
    }
    if (state.m.size() != params.size()) {
        throw UsageError("adam_step: optimizer state bound to a different parameter count");
    }
    state.t += 1;
    const double bc1 = 1.0 - std::pow(beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(beta2, static_cast<double>(state.t));
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.m[i] = beta1 * state.m[i] + (1.0 - beta1) * grads[i];
        state.v[i] = beta2 * state.v[i] + (1.0 - beta2) * grads[i] * grads[i];
        const double mhat = state.m[i] / bc1;
        const double vhat = state.v[i] / bc2;
        params[i] -= lr * mhat / (std::sqrt(vhat) + eps);
    }
}

void rmsprop_step(RmsPropState& state, std::span<double> params, std::span<const double> grads,
                  double lr, double alpha, double eps) {
    if (params.size() != grads.size()) {
        throw UsageError("rmsprop_step: params and grads differ in length");
    }
    if (state.v.empty()) state.v.assign(params.size(), 0.0);
    if (state.v.size() != params.size()) {
        throw UsageError("rmsprop_step: optimizer state bound to a different parameter count");
    }
    for (std::size_t i = 0; i < params.size(); ++i) {
        state.v[i] = alpha * state.v[i] + (1.0 - alpha) * grads[i] * grads[i];
        params[i] -= lr * grads[i] / (std::sqrt(state.v[i]) + eps);
    }
}

std::array<double, 2> model_scores(const ModelBundle& bundle, const ImageVector& img) {
    if (bundle.mode == Mode::PcaVqc) {
        const auto proj = pca_project(*bundle.pca, img);
        return vqc_forward(FeatureInput{proj}, *bundle.vqc);
    }
    ContractionTrace trace;
    return scores_for_embedded(bundle, embed_image(img), trace);
}

std::pair<double, double> evaluate(const ModelBundle& bundle, const LabeledDataset& split,
                                   std::size_t workers) {
    if (split.size() == 0) throw InputError("evaluate: empty split");
    std::vector<double> losses(split.size());
    std::vector<std::uint8_t> correct(split.size());
    parallel_chunks(split.size(), workers, [&](std::size_t, std::size_t begin, std::size_t end) {
        for (std::size_t i = begin; i < end; ++i) {
            const auto scores = model_scores(bundle, split.images[i]);
            const auto lg = softmax_cross_entropy(scores, split.labels[i]);
            losses[i] = lg.loss;
            const int pred = scores[1] > scores[0] ? 1 : 0;
            correct[i] = pred == split.labels[i];
        }
    });
    double loss_sum = 0.0;
    std::size_t n_correct = 0;
    for (std::size_t i = 0; i < split.size(); ++i) {
        loss_sum += losses[i];
        n_correct += correct[i];
    }
    return {loss_sum / static_cast<double>(split.size()),
            static_cast<double>(n_correct) / static_cast<double>(split.size())};
}

TrainResult train(const TrainConfig& config, const LabeledDataset& train_split,
                  const LabeledDataset& test_split,
                  const std::function<void(const EpochMetrics&)>& on_epoch) {
    config.validate();
    if (train_split.size() == 0) throw InputError("train: empty training split");
    if (test_split.size() == 0) throw InputError("train: empty test split");
    const auto t0 = std::chrono::steady_clock::now();

    const bool use_mps = config.mode != Mode::PcaVqc;
    const bool use_vqc = config.mode != Mode::MpsClassifier;
    const std::size_t n_train = train_split.size();

    // Fixed per-sample inputs: product-state embeddings for the MPS modes,
    // PCA projections for the baseline. Computed once, reused every epoch.
    std::vector<ProductState> emb_train, emb_test;
    std::vector<std::array<double, 4>> proj_train, proj_test;

    TrainResult result;
    ModelBundle& bundle = result.model;
    bundle.mode = config.mode;
    if (use_mps) {
        emb_train.reserve(n_train);
        for (const auto& img : train_split.images) emb_train.push_back(embed_image(img));
        emb_test.reserve(test_split.size());
        for (const auto& img : test_split.images) emb_test.push_back(embed_image(img));
        std::vector<double> scales;
        if (config.calibrated_init) scales = calibration_scales(emb_train);
        bundle.mps = init_mps(kImagePixels, config.chi, use_vqc ? 4 : 2, config.output_site,
                              config.seed, config.init_noise, scales);
    } else {
        bundle.pca = fit_pca(train_split.images);
        proj_train.reserve(n_train);
        for (const auto& img : train_split.images) {
            proj_train.push_back(pca_project(*bundle.pca, img));
        }
        proj_test.reserve(test_split.size());
        for (const auto& img : test_split.images) {
            proj_test.push_back(pca_project(*bundle.pca, img));
        }
    }
    if (use_vqc) bundle.vqc = VqcParams::random(config.seed + 1, config.vqc_init_sigma);

    const ParamLayout layout = ParamLayout::describe(bundle);
    std::vector<double> params(layout.total);
    gather_params(bundle, layout, params);

    AdamState adam;
    RmsPropState rms;
    std::mt19937_64 shuffle_rng(config.seed + kShuffleSeedOffset);

    std::vector<std::size_t> order(n_train);
    std::iota(order.begin(), order.end(), 0);

    const std::size_t workers = config.workers;
    std::vector<Workspace> ws(workers);
    std::vector<double> grad_acc(layout.total);
    // Per-sample gradient slots, only needed for deterministic multi-worker
    // reduction in batch order.
    std::vector<std::vector<double>> slots;
    if (workers > 1) slots.assign(config.batch_size, std::vector<double>(layout.total));

    // Forward + backward for one training sample, writing the flat gradient.
    const auto sample_grad = [&](std::size_t data_idx, Workspace& w) {
        const int label = train_split.labels[data_idx];
        if (config.mode == Mode::PcaVqc) {
            const FeatureInput fi{proj_train[data_idx]};
            const auto scores = vqc_forward(fi, *bundle.vqc);
            const auto lg = softmax_cross_entropy(scores, label);
            const auto vg = vqc_backward(fi, *bundle.vqc, lg.grad);
            std::copy(vg.params.begin(), vg.params.end(), w.flat.begin() + layout.vqc_offset);
            return;
        }
        const auto out = mps_forward(*bundle.mps, emb_train[data_idx], w.trace);
        if (config.mode == Mode::MpsClassifier) {
            const auto lg = softmax_cross_entropy({out[0], out[1]}, label);
            mps_backward(*bundle.mps, w.trace, lg.grad, w.mps_grad);
        } else {
            const FeatureInput fi{{out[0], out[1], out[2], out[3]}};
            const auto scores = vqc_forward(fi, *bundle.vqc);
            const auto lg = softmax_cross_entropy(scores, label);
            const auto vg = vqc_backward(fi, *bundle.vqc, lg.grad);
            std::copy(vg.params.begin(), vg.params.end(), w.flat.begin() + layout.vqc_offset);
            mps_backward(*bundle.mps, w.trace, vg.input, w.mps_grad);
        }
        for (std::size_t i = 0; i < bundle.mps->n_sites(); ++i) {
            const auto d = w.mps_grad.sites[i].data();
            std::copy(d.begin(), d.end(), w.flat.begin() + layout.site_offsets[i]);
        }
    };

    const auto eval_cached = [&](const LabeledDataset& split,
                                 const std::vector<ProductState>& embs,
                                 const std::vector<std::array<double, 4>>& projs) {
        std::vector<double> losses(split.size());
        std::vector<std::uint8_t> correct(split.size());
        parallel_chunks(split.size(), workers,
                        [&](std::size_t wid, std::size_t begin, std::size_t end) {
                            for (std::size_t i = begin; i < end; ++i) {
                                std::array<double, 2> scores;
                                if (config.mode == Mode::PcaVqc) {
                                    scores = vqc_forward(FeatureInput{projs[i]}, *bundle.vqc);
                                } else {
                                    scores = scores_for_embedded(bundle, embs[i], ws[wid].trace);
                                }
                                const auto lg = softmax_cross_entropy(scores, split.labels[i]);
                                losses[i] = lg.loss;
                                correct[i] = (scores[1] > scores[0] ? 1 : 0) == split.labels[i];
                            }
                        });
        double loss_sum = 0.0;
        std::size_t n_correct = 0;
        for (std::size_t i = 0; i < split.size(); ++i) {
            loss_sum += losses[i];
            n_correct += correct[i];
        }
        return std::pair<double, double>{loss_sum / static_cast<double>(split.size()),
                                         static_cast<double>(n_correct) /
                                             static_cast<double>(split.size())};
    };

    for (std::size_t epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t batch_start = 0; batch_start < n_train;
             batch_start += config.batch_size) {
            const std::size_t batch_end = std::min(n_train, batch_start + config.batch_size);
            const std::size_t batch_n = batch_end - batch_start;
            std::fill(grad_acc.begin(), grad_acc.end(), 0.0);

            if (workers == 1) {
                auto& w = ws[0];
                w.flat.assign(layout.total, 0.0);
                for (std::size_t s = 0; s < batch_n; ++s) {
                    sample_grad(order[batch_start + s], w);
                    for (std::size_t i = 0; i < layout.total; ++i) grad_acc[i] += w.flat[i];
                }
            } else {
                parallel_chunks(batch_n, workers,
                                [&](std::size_t wid, std::size_t begin, std::size_t end) {
                                    auto& w = ws[wid];
                                    for (std::size_t s = begin; s < end; ++s) {
                                        w.flat.assign(layout.total, 0.0);
                                        sample_grad(order[batch_start + s], w);
                                        slots[s] = w.flat;
                                    }
                                });
                for (std::size_t s = 0; s < batch_n; ++s) {
                    for (std::size_t i = 0; i < layout.total; ++i) grad_acc[i] += slots[s][i];
                }
            }
            const double inv = 1.0 / static_cast<double>(batch_n);
            for (double& g : grad_acc) g *= inv;

            if (config.optimizer == OptimizerKind::Adam) {
                adam_step(adam, params, grad_acc, config.learning_rate, config.adam_beta1,
                          config.adam_beta2, config.adam_eps);
            } else {
                rmsprop_step(rms, params, grad_acc, config.learning_rate, config.rmsprop_alpha,
                             config.rmsprop_eps);
            }
            scatter_params(bundle, layout, params);
        }

        EpochMetrics m;
        m.epoch = static_cast<int>(epoch);
        std::tie(m.train_loss, m.train_acc) = eval_cached(train_split, emb_train, proj_train);
        std::tie(m.test_loss, m.test_acc) = eval_cached(test_split, emb_test, proj_test);
        result.curve.push_back(m);
        if (on_epoch) on_epoch(m);
    }

    result.best_test_acc = 0;
    result.best_epoch = 0;
    for (const auto& m : result.curve) {
        if (m.test_acc > result.best_test_acc) {
            result.best_test_acc = m.test_acc;
            result.best_epoch = m.epoch;
        }
    }
    result.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return result;
}

void write_metrics_csv(const std::filesystem::path& path, std::span<const EpochMetrics> curve) {
    std::string out = "epoch,train_loss,train_acc,test_loss,test_acc\n";
    for (const auto& m : curve) {
        out += std::to_string(m.epoch);
        out += ',';
        format_double(out, m.train_loss);
        out += ',';
        format_double(out, m.train_acc);
        out += ',';
        format_double(out, m.test_loss);
        out += ',';
        format_double(out, m.test_acc);
        out += '\n';
    }
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path.string());
    f << out;
}

namespace {
nlohmann::json config_to_json(const TrainConfig& c) {
    return nlohmann::json{{"mode", to_string(c.mode)},
                          {"chi", c.chi},
                          {"optimizer", to_string(c.optimizer)},
                          {"learning_rate", c.learning_rate},
                          {"rmsprop_alpha", c.rmsprop_alpha},
                          {"rmsprop_eps", c.rmsprop_eps},
                          {"adam_beta1", c.adam_beta1},
                          {"adam_beta2", c.adam_beta2},
                          {"adam_eps", c.adam_eps},
                          {"batch_size", c.batch_size},
                          {"epochs", c.epochs},
                          {"seed", c.seed},
                          {"workers", c.workers},
                          {"output_site", c.output_site},
                          {"init_noise", c.init_noise},
                          {"vqc_init_sigma", c.vqc_init_sigma},
                          {"calibrated_init", c.calibrated_init}};
}
}  // namespace

void write_summary_json(const std::filesystem::path& path, const TrainConfig& config,
                        const TrainResult& result) {
    const auto& last = result.curve.back();
    nlohmann::json j{{"config", config_to_json(config)},
                     {"final_metrics",
                      {{"epoch", last.epoch},
                       {"train_loss", last.train_loss},
                       {"train_acc", last.train_acc},
                       {"test_loss", last.test_loss},
                       {"test_acc", last.test_acc}}},
                     {"best_test_acc", result.best_test_acc},
                     {"wall_seconds", result.wall_seconds}};
    std::ofstream f(path);
    if (!f) throw InputError("cannot write " + path.string());
    f << j.dump(2) << '\n';
}

}  // namespace tnvqc
