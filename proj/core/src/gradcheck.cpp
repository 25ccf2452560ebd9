#include "tnvqc/gradcheck.hpp"

#include <cmath>
#include <numbers>
#include <random>
#include <vector>

#include "tnvqc/mps.hpp"
#include "tnvqc/training.hpp"
#include "tnvqc/vqc.hpp"

namespace tnvqc {

namespace {

constexpr double kFdStep = 1e-6;
// Relative-error denominator floor; below this scale central differences are
// dominated by roundoff, not by the gradient under test.
constexpr double kRelFloor = 1e-4;

double rel_err(double analytic, double numeric) {
    const double denom = std::max({std::abs(analytic), std::abs(numeric), kRelFloor});
    return std::abs(analytic - numeric) / denom;
}

struct Worst {
    double value = 0;
    std::string path;

    void consider(double err, const std::string& p) {
        if (err > value) {
            value = err;
            path = p;
        }
    }
};

ProductState random_product_state(std::size_t n, std::mt19937_64& gen) {
    std::uniform_real_distribution<double> pixel(0.0, 1.0);
    std::vector<std::array<double, 2>> sites(n);
    for (auto& s : sites) s = local_feature_map(pixel(gen));
    return ProductState::unchecked(std::move(sites));
}

MpsModel random_mps(std::size_t n, std::size_t chi, std::size_t d_out, std::mt19937_64& gen) {
    MpsModel model = init_mps(n, chi, d_out, n / 2, gen());
    std::normal_distribution<double> entry(0.0, 0.6);
    for (auto& site : model.sites) {
        for (double& v : site.data()) v = entry(gen);
    }
    model.touch();
    return model;
}

double weighted_output(const MpsModel& model, const ProductState& input,
                       std::span<const double> upstream) {
    ContractionTrace trace;
    const auto out = mps_forward(model, input, trace);
    double j = 0.0;
    for (std::size_t o = 0; o < out.size(); ++o) j += upstream[o] * out[o];
    return j;
}

void check_mps_instance(std::size_t trial, std::mt19937_64& gen, Worst& worst) {
    std::uniform_int_distribution<std::size_t> n_dist(4, 8), chi_dist(1, 3);
    const std::size_t n = n_dist(gen);
    const std::size_t chi = chi_dist(gen);
    const std::size_t d_out = gen() % 2 == 0 ? 2 : 4;
    MpsModel model = random_mps(n, chi, d_out, gen);
    const ProductState input = random_product_state(n, gen);
    std::normal_distribution<double> updist(0.0, 1.0);
    std::vector<double> upstream(d_out);
    for (double& u : upstream) u = updist(gen);

    ContractionTrace trace;
    mps_forward(model, input, trace);
    MpsGradient grad;
    std::vector<std::array<double, 2>> input_grad;
    mps_backward(model, trace, upstream, grad, &input_grad);

    for (std::size_t i = 0; i < n; ++i) {
        auto data = model.sites[i].data();
        for (std::size_t j = 0; j < data.size(); ++j) {
            const double keep = data[j];
            data[j] = keep + kFdStep;
            model.touch();
            const double jp = weighted_output(model, input, upstream);
            data[j] = keep - kFdStep;
            model.touch();
            const double jm = weighted_output(model, input, upstream);
            data[j] = keep;
            model.touch();
            const double fd = (jp - jm) / (2 * kFdStep);
            worst.consider(rel_err(grad.sites[i].data()[j], fd),
                           "mps trial " + std::to_string(trial) + " site " + std::to_string(i) +
                               " entry " + std::to_string(j));
        }
    }
    // Product-state entry gradients, perturbing the raw 2-vectors.
    std::vector<std::array<double, 2>> sites(input.sites().begin(), input.sites().end());
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t s = 0; s < 2; ++s) {
            auto bump = [&](double h) {
                auto copy = sites;
                copy[i][s] += h;
                return weighted_output(model, ProductState::unchecked(copy), upstream);
            };
            const double fd = (bump(kFdStep) - bump(-kFdStep)) / (2 * kFdStep);
            worst.consider(rel_err(input_grad[i][s], fd),
                           "mps trial " + std::to_string(trial) + " input site " +
                               std::to_string(i) + " component " + std::to_string(s));
        }
    }
}

double vqc_weighted(const FeatureInput& x, const VqcParams& p,
                    const std::array<double, 2>& upstream) {
    const auto f = vqc_forward(x, p);
    return upstream[0] * f[0] + upstream[1] * f[1];
}

void check_vqc_instance(std::size_t trial, std::mt19937_64& gen, Worst& shift_worst,
                        Worst& fd_worst) {
    std::normal_distribution<double> angle(0.0, 1.5), feat(0.0, 2.0), updist(0.0, 1.0);
    VqcParams params;
    for (auto& t : params.angles) {
        for (double& a : t) a = angle(gen);
    }
    FeatureInput x;
    for (double& v : x.x) v = feat(gen);
    const std::array<double, 2> upstream{updist(gen), updist(gen)};

    const VqcGradient grad = vqc_backward(x, params, upstream);

    // Parameter-shift: exact +-pi/2 evaluations per variational angle.
    for (int q = 1; q <= kNumQubits; ++q) {
        for (int j = 0; j < 3; ++j) {
            VqcParams shifted = params;
            shifted.angle(q, j) += std::numbers::pi / 2;
            const double jp = vqc_weighted(x, shifted, upstream);
            shifted.angle(q, j) -= std::numbers::pi;
            const double jm = vqc_weighted(x, shifted, upstream);
            const double ps = (jp - jm) / 2.0;
            shift_worst.consider(std::abs(grad.params[3 * (q - 1) + j] - ps),
                                 "vqc trial " + std::to_string(trial) + " qubit " +
                                     std::to_string(q) + " angle " + std::to_string(j));
        }
    }
    // Central differences on both angles and features.
    for (int q = 1; q <= kNumQubits; ++q) {
        for (int j = 0; j < 3; ++j) {
            VqcParams p = params;
            p.angle(q, j) += kFdStep;
            const double jp = vqc_weighted(x, p, upstream);
            p.angle(q, j) -= 2 * kFdStep;
            const double jm = vqc_weighted(x, p, upstream);
            const double fd = (jp - jm) / (2 * kFdStep);
            fd_worst.consider(rel_err(grad.params[3 * (q - 1) + j], fd),
                              "vqc trial " + std::to_string(trial) + " qubit " +
                                  std::to_string(q) + " angle fd " + std::to_string(j));
        }
    }
    for (int i = 0; i < 4; ++i) {
        FeatureInput xp = x;
        xp.x[i] += kFdStep;
        const double jp = vqc_weighted(xp, params, upstream);
        xp.x[i] -= 2 * kFdStep;
        const double jm = vqc_weighted(xp, params, upstream);
        const double fd = (jp - jm) / (2 * kFdStep);
        fd_worst.consider(rel_err(grad.input[i], fd), "vqc trial " + std::to_string(trial) +
                                                          " feature " + std::to_string(i));
    }
}

// One full-pipeline probe: random calibrated-ish chi=2 extractor over 784
// sites, random input, loss at a random label, finite difference on one
// randomly chosen parameter (MPS site entry or VQC angle).
void check_end_to_end(std::size_t trial, std::mt19937_64& gen, Worst& worst) {
    std::uniform_real_distribution<double> pixel(0.0, 1.0);
    std::vector<double> values(kImagePixels);
    for (double& v : values) v = pixel(gen);
    const ImageVector img{values};
    const ProductState emb = embed_image(img);

    // Scale identity cores so the random-input contraction stays O(1).
    std::vector<double> scales(kImagePixels);
    for (std::size_t i = 0; i < kImagePixels; ++i) {
        const auto& s = emb.site(i);
        scales[i] = 1.0 / (s[0] + s[1]);
    }
    MpsModel mps = init_mps(kImagePixels, 2, 4, 391, gen(), 1e-2, scales);
    VqcParams vqc = VqcParams::random(gen(), 0.4);
    const int label = static_cast<int>(gen() % 2);

    const auto pipeline_loss = [&]() {
        ContractionTrace trace;
        const auto f = mps_forward(mps, emb, trace);
        const FeatureInput fi{{f[0], f[1], f[2], f[3]}};
        return softmax_cross_entropy(vqc_forward(fi, vqc), label).loss;
    };

    // Analytic gradient through the full chain.
    ContractionTrace trace;
    const auto f = mps_forward(mps, emb, trace);
    const FeatureInput fi{{f[0], f[1], f[2], f[3]}};
    const auto lg = softmax_cross_entropy(vqc_forward(fi, vqc), label);
    const VqcGradient vg = vqc_backward(fi, vqc, lg.grad);
    MpsGradient mg;
    mps_backward(mps, trace, vg.input, mg);

    const std::size_t total_mps = mps.parameter_count();
    const std::size_t idx = gen() % (total_mps + 12);
    double analytic;
    double* slot;
    std::string path;
    if (idx < total_mps) {
        std::size_t site = 0, off = idx;
        while (off >= mps.sites[site].size()) {
            off -= mps.sites[site].size();
            ++site;
        }
        analytic = mg.sites[site].data()[off];
        slot = &mps.sites[site].data()[off];
        path = "e2e trial " + std::to_string(trial) + " mps site " + std::to_string(site) +
               " entry " + std::to_string(off);
    } else {
        analytic = vg.params[idx - total_mps];
        slot = &vqc.flat()[idx - total_mps];
        path = "e2e trial " + std::to_string(trial) + " vqc angle " +
               std::to_string(idx - total_mps);
    }

    const double keep = *slot;
    *slot = keep + kFdStep;
    mps.touch();
    const double jp = pipeline_loss();
    *slot = keep - kFdStep;
    mps.touch();
    const double jm = pipeline_loss();
    *slot = keep;
    mps.touch();
    worst.consider(rel_err(analytic, (jp - jm) / (2 * kFdStep)), path);
}

}  // namespace

GradCheckReport run_gradient_checks(std::size_t trials, std::uint64_t seed) {
    if (trials == 0) throw InputError("gradient check needs at least one trial");
    GradCheckReport report;
    report.trials = trials;
    std::mt19937_64 gen(seed);

    Worst mps_worst, shift_worst, vqc_fd_worst, e2e_worst;
    for (std::size_t t = 0; t < trials; ++t) check_mps_instance(t, gen, mps_worst);
    for (std::size_t t = 0; t < trials; ++t) check_vqc_instance(t, gen, shift_worst, vqc_fd_worst);
    for (std::size_t t = 0; t < trials; ++t) check_end_to_end(t, gen, e2e_worst);

    report.mps_vs_fd = mps_worst.value;
    report.vqc_adjoint_vs_shift = shift_worst.value;
    report.vqc_vs_fd = vqc_fd_worst.value;
    report.end_to_end_vs_fd = e2e_worst.value;

    Worst overall;
    overall.consider(mps_worst.value / kMpsFdTol, mps_worst.path);
    overall.consider(shift_worst.value / kVqcShiftTol, shift_worst.path);
    overall.consider(vqc_fd_worst.value / kVqcFdTol, vqc_fd_worst.path);
    overall.consider(e2e_worst.value / kEndToEndFdTol, e2e_worst.path);
    report.worst_path = overall.path;
    return report;
}

}  // namespace tnvqc
