#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

#include "tnvqc/errors.hpp"

namespace tnvqc {

inline constexpr std::size_t kImagePixels = 784;  // 28 x 28
inline constexpr std::size_t kPcaComponents = 4;

// A 28x28 grayscale image flattened to 784 reals in [0,1].
class ImageVector {
  public:
    explicit ImageVector(std::vector<double> values);

    double operator[](std::size_t i) const { return values_[i]; }
    std::span<const double> values() const { return values_; }
    std::size_t size() const { return values_.size(); }

  private:
    std::vector<double> values_;
};

// Per-site 2-vectors (cos, sin entries). Produced by embed_image the sites
// are unit-norm; the unchecked factory exists so tests can build
// deliberately non-normalized states.
class ProductState {
  public:
    explicit ProductState(std::vector<std::array<double, 2>> sites);
    static ProductState unchecked(std::vector<std::array<double, 2>> sites);

    const std::array<double, 2>& site(std::size_t i) const { return sites_[i]; }
    std::span<const std::array<double, 2>> sites() const { return sites_; }
    std::size_t size() const { return sites_.size(); }

  private:
    ProductState() = default;
    std::vector<std::array<double, 2>> sites_;
};

// Mean and the four leading principal directions of a training set.
struct PcaModel {
    std::vector<double> mean;                                  // 784
    std::array<std::vector<double>, kPcaComponents> components;  // rows, each 784
    std::array<double, kPcaComponents> explained_variances;
};

// raw bytes 0..255 -> reals raw/255.
ImageVector normalize_pixels(std::span<const std::uint8_t> raw);

// x in [0,1] -> (cos(pi x / 2), sin(pi x / 2)).
std::array<double, 2> local_feature_map(double x);

// Site-wise feature map over the whole image.
ProductState embed_image(const ImageVector& img);

// Covariance eigendecomposition, top four components, unit-norm rows with
// the largest-magnitude entry made positive. Needs at least 5 images.
PcaModel fit_pca(std::span<const ImageVector> train_images);

// components * (img - mean).
std::array<double, kPcaComponents> pca_project(const PcaModel& model, const ImageVector& img);

}  // namespace tnvqc
