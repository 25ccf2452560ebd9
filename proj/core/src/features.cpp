#include "tnvqc/features.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <numbers>

namespace tnvqc {

ImageVector::ImageVector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.size() != kImagePixels) {
        throw InputError("ImageVector needs exactly " + std::to_string(kImagePixels) +
                         " values, got " + std::to_string(values_.size()));
    }
    for (double v : values_) {
        if (!(v >= 0.0 && v <= 1.0)) {
            throw InputError("ImageVector component outside [0,1]: " + std::to_string(v));
        }
    }
}

ProductState::ProductState(std::vector<std::array<double, 2>> sites) {
    for (const auto& s : sites) {
        const double norm2 = s[0] * s[0] + s[1] * s[1];
        if (std::abs(norm2 - 1.0) > 1e-12) {
            throw InputError("product-state site is not unit-norm");
        }
    }
    sites_ = std::move(sites);
}

ProductState ProductState::unchecked(std::vector<std::array<double, 2>> sites) {
    ProductState p;
    p.sites_ = std::move(sites);
    return p;
}

ImageVector normalize_pixels(std::span<const std::uint8_t> raw) {
    if (raw.size() != kImagePixels) {
        throw InputError("expected " + std::to_string(kImagePixels) + " pixels, got " +
                         std::to_string(raw.size()));
    }
    std::vector<double> values(raw.size());
    for (std::size_t i = 0; i < raw.size(); ++i) values[i] = raw[i] / 255.0;
    return ImageVector(std::move(values));
}

std::array<double, 2> local_feature_map(double x) {
    if (!(x >= 0.0 && x <= 1.0)) {
        throw InputError("feature-map input outside [0,1]: " + std::to_string(x));
    }
    const double t = std::numbers::pi / 2.0 * x;
    return {std::cos(t), std::sin(t)};
}

ProductState embed_image(const ImageVector& img) {
    std::vector<std::array<double, 2>> sites(img.size());
    for (std::size_t i = 0; i < img.size(); ++i) sites[i] = local_feature_map(img[i]);
    return ProductState::unchecked(std::move(sites));
}

PcaModel fit_pca(std::span<const ImageVector> train_images) {
    const std::size_t n = train_images.size();
    if (n < 5) {
        throw InputError("fit_pca needs at least 5 images, got " + std::to_string(n));
    }
    const auto d = static_cast<Eigen::Index>(kImagePixels);

    Eigen::VectorXd mean = Eigen::VectorXd::Zero(d);
    for (const auto& img : train_images) {
        mean += Eigen::Map<const Eigen::VectorXd>(img.values().data(), d);
    }
    mean /= static_cast<double>(n);

    Eigen::MatrixXd centered(static_cast<Eigen::Index>(n), d);
    for (std::size_t i = 0; i < n; ++i) {
        centered.row(static_cast<Eigen::Index>(i)) =
            Eigen::Map<const Eigen::VectorXd>(train_images[i].values().data(), d).transpose() -
            mean.transpose();
    }
    Eigen::MatrixXd cov = (centered.transpose() * centered) / static_cast<double>(n - 1);

    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
    if (solver.info() != Eigen::Success) {
        throw NumericError("covariance eigendecomposition failed");
    }

    PcaModel model;
    model.mean.assign(mean.data(), mean.data() + d);
    // Eigen sorts eigenvalues ascending; take the top four, largest first.
    for (std::size_t c = 0; c < kPcaComponents; ++c) {
        const Eigen::Index col = d - 1 - static_cast<Eigen::Index>(c);
        Eigen::VectorXd v = solver.eigenvectors().col(col);
        // Deterministic sign: make the largest-magnitude entry positive.
        Eigen::Index argmax = 0;
        v.cwiseAbs().maxCoeff(&argmax);
        if (v[argmax] < 0.0) v = -v;
        model.components[c].assign(v.data(), v.data() + d);
        model.explained_variances[c] = std::max(0.0, solver.eigenvalues()[col]);
    }
    return model;
}

std::array<double, kPcaComponents> pca_project(const PcaModel& model, const ImageVector& img) {
    if (model.mean.size() != kImagePixels) {
        throw InputError("PcaModel mean has wrong length");
    }
    std::array<double, kPcaComponents> out{};
    for (std::size_t c = 0; c < kPcaComponents; ++c) {
        const auto& comp = model.components[c];
        if (comp.size() != kImagePixels) {
            throw InputError("PcaModel component has wrong length");
        }
        double acc = 0.0;
        for (std::size_t i = 0; i < kImagePixels; ++i) {
            acc += comp[i] * (img[i] - model.mean[i]);
        }
        out[c] = acc;
    }
    return out;
}

}  // namespace tnvqc
