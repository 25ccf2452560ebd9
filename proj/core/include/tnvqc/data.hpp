#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "tnvqc/features.hpp"

namespace tnvqc {

// Raw 28x28 unsigned-byte images as stored in an IDX file.
struct RawImages {
    std::size_t count = 0;
    std::size_t rows = 0;
    std::size_t cols = 0;
    std::vector<std::uint8_t> pixels;  // count * rows * cols, image-major

    std::span<const std::uint8_t> image(std::size_t i) const {
        return std::span<const std::uint8_t>(pixels).subspan(i * rows * cols, rows * cols);
    }
};

// Binary-labeled split with pixel values normalized to [0,1].
struct LabeledDataset {
    std::vector<ImageVector> images;
    std::vector<int> labels;  // 0 or 1
    std::string split_name;
    std::pair<int, int> source_digits{3, 6};

    std::size_t size() const { return images.size(); }
};

// IDX readers: big-endian magic 0x00000803 (images, 28x28) and 0x00000801
// (labels), unsigned-byte payload. Malformed input raises FormatError with
// the offending byte offset.
RawImages load_idx_images(const std::filesystem::path& path);
std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path);

// IDX writers, used for fixtures and round-trip checks.
void save_idx_images(const std::filesystem::path& path, const RawImages& images);
void save_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels);

// Keep only digit_a/digit_b samples in file order, mapping digit_a -> 0 and
// digit_b -> 1, with pixels normalized.
LabeledDataset filter_binary(const RawImages& images, std::span<const std::uint8_t> labels,
                             int digit_a = 3, int digit_b = 6,
                             const std::string& split_name = "train");

// Convenience: the standard MNIST file names under a data directory.
struct MnistPaths {
    std::filesystem::path train_images, train_labels, test_images, test_labels;
};
MnistPaths mnist_paths(const std::filesystem::path& data_dir);

}  // namespace tnvqc
