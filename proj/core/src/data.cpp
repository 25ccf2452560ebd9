#include "tnvqc/data.hpp"

#include <fstream>

#include "tnvqc/errors.hpp"

namespace tnvqc {

namespace {

constexpr std::uint32_t kImagesMagic = 0x00000803;
constexpr std::uint32_t kLabelsMagic = 0x00000801;

std::vector<std::uint8_t> read_all(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    return bytes;
}

std::uint32_t read_be32(std::span<const std::uint8_t> bytes, std::size_t offset) {
    if (offset + 4 > bytes.size()) {
        throw FormatError("truncated IDX header", offset);
    }
    return (std::uint32_t(bytes[offset]) << 24) | (std::uint32_t(bytes[offset + 1]) << 16) |
           (std::uint32_t(bytes[offset + 2]) << 8) | std::uint32_t(bytes[offset + 3]);
}

void write_be32(std::ofstream& out, std::uint32_t v) {
    const char b[4] = {char(v >> 24), char(v >> 16), char(v >> 8), char(v)};
    out.write(b, 4);
}

}  // namespace

RawImages load_idx_images(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kImagesMagic) {
        throw FormatError("bad IDX image magic 0x" + std::to_string(magic), 0);
    }
    RawImages out;
    out.count = read_be32(bytes, 4);
    out.rows = read_be32(bytes, 8);
    out.cols = read_be32(bytes, 12);
    if (out.rows != 28 || out.cols != 28) {
        throw FormatError("expected 28x28 images, got " + std::to_string(out.rows) + "x" +
                          std::to_string(out.cols), 8);
    }
    const std::size_t expected = 16 + out.count * out.rows * out.cols;
    if (bytes.size() != expected) {
        throw FormatError("IDX image payload has " + std::to_string(bytes.size() - 16) +
                          " bytes, header promises " + std::to_string(expected - 16),
                          std::min(bytes.size(), expected));
    }
    out.pixels.assign(bytes.begin() + 16, bytes.end());
    return out;
}

std::vector<std::uint8_t> load_idx_labels(const std::filesystem::path& path) {
    const auto bytes = read_all(path);
    const std::uint32_t magic = read_be32(bytes, 0);
    if (magic != kLabelsMagic) {
        throw FormatError("bad IDX label magic 0x" + std::to_string(magic), 0);
    }
    const std::size_t count = read_be32(bytes, 4);
    if (bytes.size() != 8 + count) {
        throw FormatError("IDX label payload has " + std::to_string(bytes.size() - 8) +
                          " bytes, header promises " + std::to_string(count),
                          std::min(bytes.size(), 8 + count));
    }
    return std::vector<std::uint8_t>(bytes.begin() + 8, bytes.end());
}

void save_idx_images(const std::filesystem::path& path, const RawImages& images) {
    if (images.pixels.size() != images.count * images.rows * images.cols) {
        throw InputError("RawImages pixel buffer does not match count*rows*cols");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    write_be32(out, kImagesMagic);
    write_be32(out, static_cast<std::uint32_t>(images.count));
    write_be32(out, static_cast<std::uint32_t>(images.rows));
    write_be32(out, static_cast<std::uint32_t>(images.cols));
    out.write(reinterpret_cast<const char*>(images.pixels.data()),
              static_cast<std::streamsize>(images.pixels.size()));
}

void save_idx_labels(const std::filesystem::path& path, std::span<const std::uint8_t> labels) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    write_be32(out, kLabelsMagic);
    write_be32(out, static_cast<std::uint32_t>(labels.size()));
    out.write(reinterpret_cast<const char*>(labels.data()),
              static_cast<std::streamsize>(labels.size()));
}

LabeledDataset filter_binary(const RawImages& images, std::span<const std::uint8_t> labels,
                             int digit_a, int digit_b, const std::string& split_name) {
    if (digit_a == digit_b) throw InputError("filter_binary: digits must differ");
    if (images.count != labels.size()) {
        throw InputError("filter_binary: " + std::to_string(images.count) + " images vs " +
                         std::to_string(labels.size()) + " labels");
    }
    LabeledDataset out;
    out.split_name = split_name;
    out.source_digits = {digit_a, digit_b};
    for (std::size_t i = 0; i < images.count; ++i) {
        const int lab = labels[i];
        if (lab != digit_a && lab != digit_b) continue;
        out.images.push_back(normalize_pixels(images.image(i)));
        out.labels.push_back(lab == digit_a ? 0 : 1);
    }
    if (out.images.empty()) {
        throw InputError("filter_binary: no samples labeled " + std::to_string(digit_a) + " or " +
                         std::to_string(digit_b));
    }
    return out;
}

MnistPaths mnist_paths(const std::filesystem::path& data_dir) {
    return {data_dir / "train-images-idx3-ubyte", data_dir / "train-labels-idx1-ubyte",
            data_dir / "t10k-images-idx3-ubyte", data_dir / "t10k-labels-idx1-ubyte"};
}

}  // namespace tnvqc
