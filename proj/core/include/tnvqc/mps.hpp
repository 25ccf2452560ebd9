#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "tnvqc/features.hpp"
#include "tnvqc/tensor.hpp"

namespace tnvqc {

// Open-boundary matrix product state over n sites with physical dimension 2.
// Site i holds a (chi_left, 2, chi_right) tensor; the designated output site
// carries a trailing output leg, (chi_left, 2, chi_right, output_dim).
// Boundary bonds have extent 1, interior bonds extent bond_dim.
struct MpsModel {
    std::vector<RealTensor> sites;
    std::size_t bond_dim = 1;
    std::size_t output_dim = 2;
    std::size_t output_site = 0;
    // Bumped whenever site data is mutated; lets cached traces detect staleness.
    std::uint64_t revision = 0;

    std::size_t n_sites() const { return sites.size(); }
    std::size_t left_bond(std::size_t i) const { return i == 0 ? 1 : bond_dim; }
    std::size_t right_bond(std::size_t i) const { return i + 1 == sites.size() ? 1 : bond_dim; }
    std::size_t parameter_count() const;
    void touch() { ++revision; }
};

// One tensor per site, shape-matched to the model.
struct MpsGradient {
    std::vector<RealTensor> sites;

    static MpsGradient zeros_like(const MpsModel& model);
    // Reshape to match the model, reusing allocations where shapes already agree.
    void ensure_like(const MpsModel& model);
};

// Environments cached by a forward sweep: per-site bond matrices, the
// output-site fold, and left/right partial products. A trace is bound to the
// (model, revision) it was computed from and can be reused across samples to
// avoid reallocation.
class ContractionTrace {
  public:
    ContractionTrace() = default;

    bool valid_for(const MpsModel& model) const {
        return model_ == &model && revision_ == model.revision;
    }
    std::span<const double> output() const { return output_; }

  private:
    friend std::vector<double> mps_forward(const MpsModel&, const ProductState&,
                                           ContractionTrace&);
    friend void mps_backward(const MpsModel&, const ContractionTrace&, std::span<const double>,
                             MpsGradient&, std::vector<std::array<double, 2>>*);

    const MpsModel* model_ = nullptr;
    std::uint64_t revision_ = 0;
    std::vector<std::vector<double>> bond;   // site i != k: chi_l x chi_r
    std::vector<double> out_fold;            // chi_l x chi_r x d_out at the output site
    std::vector<std::vector<double>> left;   // left[i]: partial product of sites [0, i)
    std::vector<std::vector<double>> right;  // right[i]: partial product of sites (i, n)
    std::vector<std::array<double, 2>> input_;
    std::vector<double> output_;
};

// Identity-plus-noise initialization. Each non-output site starts as
// scale_i * I (per physical index value) plus N(0, noise_sigma) noise; the
// output site is pure noise. site_scales, when given, must have n_sites
// entries (empty means all ones).
MpsModel init_mps(std::size_t n_sites, std::size_t chi, std::size_t d_out,
                  std::size_t output_site, std::uint64_t seed, double noise_sigma = 1e-2,
                  std::span<const double> site_scales = {});

// Left-to-right sweep contraction of the model with a product state.
// Returns the output_dim-vector on the output leg and fills the trace with
// every environment the backward pass needs.
std::vector<double> mps_forward(const MpsModel& model, const ProductState& input,
                                ContractionTrace& trace);
std::pair<std::vector<double>, ContractionTrace> mps_forward(const MpsModel& model,
                                                             const ProductState& input);

// Gradient of <upstream, forward_output> with respect to every site tensor,
// and optionally with respect to the product-state entries. One reverse
// sweep over the cached environments.
void mps_backward(const MpsModel& model, const ContractionTrace& trace,
                  std::span<const double> upstream, MpsGradient& grad,
                  std::vector<std::array<double, 2>>* input_grad = nullptr);

// Forward output of a d_out = 2 model read as class scores.
std::array<double, 2> mps_classify_logits(const MpsModel& model, const ProductState& input);

// Count of contraction-kernel invocations on this thread; tests use it to
// pin the sweep cost at O(n).
std::uint64_t sweep_kernel_calls();
void reset_sweep_kernel_calls();

}  // namespace tnvqc
