#include "tnvqc/mps.hpp"

#include <cmath>
#include <random>

namespace tnvqc {

namespace {

thread_local std::uint64_t g_kernel_calls = 0;

inline void tick() { ++g_kernel_calls; }

// Partial environments must stay inside a sane dynamic range; exact zeros
// (an annihilating input factor) are legitimate and pass through.
inline void guard_range(std::span<const double> v) {
    double peak = 0.0;
    for (double x : v) peak = std::max(peak, std::abs(x));
    if (peak > 1e100) {
        throw NumericError("contraction sweep overflow: partial environment exceeds 1e100");
    }
    if (peak != 0.0 && peak < 1e-100) {
        throw NumericError("contraction sweep underflow: partial environment below 1e-100");
    }
    if (std::isnan(peak)) {
        throw NumericError("contraction sweep produced NaN");
    }
}

// m[a,b] = sum_s A[a,s,b] * x[s], A row-major (l,2,r).
void bond_matrix(std::span<const double> site, const std::array<double, 2>& x, std::size_t l,
                 std::size_t r, std::vector<double>& m) {
    tick();
    m.assign(l * r, 0.0);
    for (std::size_t a = 0; a < l; ++a) {
        const double* row0 = site.data() + (a * 2) * r;
        const double* row1 = row0 + r;
        double* out = m.data() + a * r;
        for (std::size_t b = 0; b < r; ++b) out[b] = x[0] * row0[b] + x[1] * row1[b];
    }
}

// F[a,b,o] = sum_s A[a,s,b,o] * x[s], A row-major (l,2,r,d).
void output_fold(std::span<const double> site, const std::array<double, 2>& x, std::size_t l,
                 std::size_t r, std::size_t d, std::vector<double>& f) {
    tick();
    f.assign(l * r * d, 0.0);
    for (std::size_t a = 0; a < l; ++a) {
        const double* s0 = site.data() + (a * 2) * r * d;
        const double* s1 = s0 + r * d;
        double* out = f.data() + a * r * d;
        for (std::size_t j = 0; j < r * d; ++j) out[j] = x[0] * s0[j] + x[1] * s1[j];
    }
}

// out = v * m with v a row vector of length l, m an (l x r) matrix.
void row_times_mat(std::span<const double> v, std::span<const double> m, std::size_t l,
                   std::size_t r, std::vector<double>& out) {
    tick();
    out.assign(r, 0.0);
    for (std::size_t a = 0; a < l; ++a) {
        const double va = v[a];
        const double* row = m.data() + a * r;
        for (std::size_t b = 0; b < r; ++b) out[b] += va * row[b];
    }
}

// out = m * v with m an (l x r) matrix, v a column vector of length r.
void mat_times_col(std::span<const double> m, std::span<const double> v, std::size_t l,
                   std::size_t r, std::vector<double>& out) {
    tick();
    out.assign(l, 0.0);
    for (std::size_t a = 0; a < l; ++a) {
        const double* row = m.data() + a * r;
        double acc = 0.0;
        for (std::size_t b = 0; b < r; ++b) acc += row[b] * v[b];
        out[a] = acc;
    }
}

// f[o] = sum_{a,b} L[a] * F[a,b,o] * R[b].
void bilinear_output(std::span<const double> left, std::span<const double> fold,
                     std::span<const double> right, std::size_t l, std::size_t r, std::size_t d,
                     std::vector<double>& f) {
    tick();
    f.assign(d, 0.0);
    for (std::size_t a = 0; a < l; ++a) {
        for (std::size_t b = 0; b < r; ++b) {
            const double w = left[a] * right[b];
            const double* fo = fold.data() + (a * r + b) * d;
            for (std::size_t o = 0; o < d; ++o) f[o] += w * fo[o];
        }
    }
}

// gu[a,b] = sum_o F[a,b,o] * u[o].
void fold_with_upstream(std::span<const double> fold, std::span<const double> u, std::size_t l,
                        std::size_t r, std::size_t d, std::vector<double>& gu) {
    tick();
    gu.assign(l * r, 0.0);
    for (std::size_t ab = 0; ab < l * r; ++ab) {
        const double* fo = fold.data() + ab * d;
        double acc = 0.0;
        for (std::size_t o = 0; o < d; ++o) acc += fo[o] * u[o];
        gu[ab] = acc;
    }
}

// grad[a,s,b] = L[a] x[s] R[b]; also gx[s] = sum_{a,b} L[a] A[a,s,b] R[b].
// Fused single pass over the site tensor.
void site_gradient(std::span<const double> site, std::span<const double> lv,
                   std::span<const double> rv, const std::array<double, 2>& x, std::size_t l,
                   std::size_t r, std::span<double> grad, std::array<double, 2>& gx) {
    tick();
    gx = {0.0, 0.0};
    for (std::size_t a = 0; a < l; ++a) {
        for (std::size_t s = 0; s < 2; ++s) {
            const double ls = lv[a] * x[s];
            const double* arow = site.data() + (a * 2 + s) * r;
            double* grow = grad.data() + (a * 2 + s) * r;
            double acc = 0.0;
            for (std::size_t b = 0; b < r; ++b) {
                grow[b] = ls * rv[b];
                acc += arow[b] * rv[b];
            }
            gx[s] += lv[a] * acc;
        }
    }
}

// Output-site variant with the extra upstream leg.
void output_site_gradient(std::span<const double> site, std::span<const double> lv,
                          std::span<const double> rv, std::span<const double> u,
                          const std::array<double, 2>& x, std::size_t l, std::size_t r,
                          std::size_t d, std::span<double> grad, std::array<double, 2>& gx) {
    tick();
    gx = {0.0, 0.0};
    for (std::size_t a = 0; a < l; ++a) {
        for (std::size_t s = 0; s < 2; ++s) {
            const double ls = lv[a] * x[s];
            double acc = 0.0;
            for (std::size_t b = 0; b < r; ++b) {
                const double* ao = site.data() + ((a * 2 + s) * r + b) * d;
                double* go = grad.data() + ((a * 2 + s) * r + b) * d;
                const double w = ls * rv[b];
                double dot = 0.0;
                for (std::size_t o = 0; o < d; ++o) {
                    go[o] = w * u[o];
                    dot += ao[o] * u[o];
                }
                acc += rv[b] * dot;
            }
            gx[s] += lv[a] * acc;
        }
    }
}

Shape site_shape(const MpsModel& model, std::size_t i) {
    if (i == model.output_site) {
        return {model.left_bond(i), 2, model.right_bond(i), model.output_dim};
    }
    return {model.left_bond(i), 2, model.right_bond(i)};
}

}  // namespace

std::uint64_t sweep_kernel_calls() { return g_kernel_calls; }
void reset_sweep_kernel_calls() { g_kernel_calls = 0; }

std::size_t MpsModel::parameter_count() const {
    std::size_t total = 0;
    for (const auto& s : sites) total += s.size();
    return total;
}

MpsGradient MpsGradient::zeros_like(const MpsModel& model) {
    MpsGradient g;
    g.ensure_like(model);
    return g;
}

void MpsGradient::ensure_like(const MpsModel& model) {
    sites.resize(model.n_sites());
    for (std::size_t i = 0; i < model.n_sites(); ++i) {
        if (sites[i].shape() != model.sites[i].shape()) {
            sites[i] = RealTensor(model.sites[i].shape());
        }
    }
}

MpsModel init_mps(std::size_t n_sites, std::size_t chi, std::size_t d_out,
                  std::size_t output_site, std::uint64_t seed, double noise_sigma,
                  std::span<const double> site_scales) {
    if (n_sites == 0) throw InputError("init_mps: n_sites must be positive");
    if (chi == 0) throw InputError("init_mps: bond dimension must be at least 1");
    if (d_out != 2 && d_out != 4) {
        throw InputError("init_mps: output dimension must be 2 or 4, got " +
                         std::to_string(d_out));
    }
    if (output_site >= n_sites) {
        throw InputError("init_mps: output site " + std::to_string(output_site) +
                         " out of range for " + std::to_string(n_sites) + " sites");
    }
    if (!site_scales.empty() && site_scales.size() != n_sites) {
        throw InputError("init_mps: site_scales length must equal n_sites");
    }
    if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
        throw InputError("init_mps: noise sigma must be finite and non-negative");
    }

    MpsModel model;
    model.bond_dim = chi;
    model.output_dim = d_out;
    model.output_site = output_site;
    model.sites.reserve(n_sites);

    std::mt19937_64 gen(seed);
    std::normal_distribution<double> noise(0.0, noise_sigma > 0.0 ? noise_sigma : 1.0);
    const auto draw = [&] { return noise_sigma > 0.0 ? noise(gen) : 0.0; };

    for (std::size_t i = 0; i < n_sites; ++i) {
        const std::size_t l = i == 0 ? 1 : chi;
        const std::size_t r = i + 1 == n_sites ? 1 : chi;
        const double scale = site_scales.empty() ? 1.0 : site_scales[i];
        if (i == output_site) {
            RealTensor t(Shape{l, 2, r, d_out});
            for (double& v : t.data()) v = draw();
            model.sites.push_back(std::move(t));
        } else {
            RealTensor t(Shape{l, 2, r});
            auto data = t.data();
            for (std::size_t a = 0; a < l; ++a) {
                for (std::size_t s = 0; s < 2; ++s) {
                    for (std::size_t b = 0; b < r; ++b) {
                        data[(a * 2 + s) * r + b] = (a == b ? scale : 0.0) + draw();
                    }
                }
            }
            model.sites.push_back(std::move(t));
        }
    }
    return model;
}

std::vector<double> mps_forward(const MpsModel& model, const ProductState& input,
                                ContractionTrace& trace) {
    const std::size_t n = model.n_sites();
    if (input.size() != n) {
        throw InputError("mps_forward: input has " + std::to_string(input.size()) +
                         " sites, model has " + std::to_string(n));
    }
    const std::size_t k = model.output_site;
    const std::size_t d = model.output_dim;

    trace.model_ = &model;
    trace.revision_ = model.revision;
    trace.input_.assign(input.sites().begin(), input.sites().end());
    trace.bond.resize(n);
    trace.left.resize(n + 1);
    trace.right.resize(n + 1);

    for (std::size_t i = 0; i < n; ++i) {
        if (i == k) continue;
        bond_matrix(model.sites[i].data(), input.site(i), model.left_bond(i),
                    model.right_bond(i), trace.bond[i]);
    }
    output_fold(model.sites[k].data(), input.site(k), model.left_bond(k), model.right_bond(k), d,
                trace.out_fold);

    trace.left[0].assign(1, 1.0);
    for (std::size_t i = 0; i < k; ++i) {
        row_times_mat(trace.left[i], trace.bond[i], model.left_bond(i), model.right_bond(i),
                      trace.left[i + 1]);
        guard_range(trace.left[i + 1]);
    }
    trace.right[n].assign(1, 1.0);
    for (std::size_t i = n; i-- > k + 1;) {
        mat_times_col(trace.bond[i], trace.right[i + 1], model.left_bond(i), model.right_bond(i),
                      trace.right[i]);
        guard_range(trace.right[i]);
    }

    bilinear_output(trace.left[k], trace.out_fold, trace.right[k + 1], model.left_bond(k),
                    model.right_bond(k), d, trace.output_);
    return trace.output_;
}

std::pair<std::vector<double>, ContractionTrace> mps_forward(const MpsModel& model,
                                                             const ProductState& input) {
    ContractionTrace trace;
    auto out = mps_forward(model, input, trace);
    return {std::move(out), std::move(trace)};
}

void mps_backward(const MpsModel& model, const ContractionTrace& trace,
                  std::span<const double> upstream, MpsGradient& grad,
                  std::vector<std::array<double, 2>>* input_grad) {
    if (!trace.valid_for(model)) {
        throw UsageError("mps_backward: trace is stale or belongs to a different model");
    }
    const std::size_t n = model.n_sites();
    const std::size_t k = model.output_site;
    const std::size_t d = model.output_dim;
    if (upstream.size() != d) {
        throw DimensionError("mps_backward: upstream gradient has length " +
                             std::to_string(upstream.size()) + ", output dimension is " +
                             std::to_string(d));
    }
    grad.ensure_like(model);
    if (input_grad) input_grad->assign(n, {0.0, 0.0});

    // gu = output fold contracted with the upstream vector.
    std::vector<double> gu;
    fold_with_upstream(trace.out_fold, upstream, model.left_bond(k), model.right_bond(k), d, gu);

    // Right contexts for sites left of the output: rbar[i] carries everything
    // to the right of site i including the upstream-contracted output leg.
    std::vector<std::vector<double>> rbar(k);
    if (k > 0) {
        mat_times_col(gu, trace.right[k + 1], model.left_bond(k), model.right_bond(k),
                      rbar[k - 1]);
        guard_range(rbar[k - 1]);
        for (std::size_t i = k - 1; i-- > 0;) {
            mat_times_col(trace.bond[i + 1], rbar[i + 1], model.left_bond(i + 1),
                          model.right_bond(i + 1), rbar[i]);
            guard_range(rbar[i]);
        }
    }
    // Left contexts for sites right of the output.
    std::vector<std::vector<double>> lbar(n);
    if (k + 1 < n) {
        row_times_mat(trace.left[k], gu, model.left_bond(k), model.right_bond(k), lbar[k + 1]);
        guard_range(lbar[k + 1]);
        for (std::size_t i = k + 2; i < n; ++i) {
            row_times_mat(lbar[i - 1], trace.bond[i - 1], model.left_bond(i - 1),
                          model.right_bond(i - 1), lbar[i]);
            guard_range(lbar[i]);
        }
    }

    std::array<double, 2> gx{};
    for (std::size_t i = 0; i < n; ++i) {
        const std::size_t l = model.left_bond(i);
        const std::size_t r = model.right_bond(i);
        if (i < k) {
            site_gradient(model.sites[i].data(), trace.left[i], rbar[i], trace.input_[i], l, r,
                          grad.sites[i].data(), gx);
        } else if (i > k) {
            site_gradient(model.sites[i].data(), lbar[i], trace.right[i + 1], trace.input_[i], l,
                          r, grad.sites[i].data(), gx);
        } else {
            output_site_gradient(model.sites[k].data(), trace.left[k], trace.right[k + 1],
                                 upstream, trace.input_[k], l, r, d, grad.sites[k].data(), gx);
        }
        if (input_grad) (*input_grad)[i] = gx;
    }
}

std::array<double, 2> mps_classify_logits(const MpsModel& model, const ProductState& input) {
    if (model.output_dim != 2) {
        throw ConfigError("mps_classify_logits: model output dimension is " +
                          std::to_string(model.output_dim) + ", expected 2");
    }
    ContractionTrace trace;
    const auto out = mps_forward(model, input, trace);
    return {out[0], out[1]};
}

}  // namespace tnvqc
