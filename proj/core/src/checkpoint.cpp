#include "tnvqc/checkpoint.hpp"

#include <bit>
#include <cstring>
#include <fstream>

namespace tnvqc {

namespace {

constexpr char kMagic[8] = {'T', 'N', 'V', 'Q', 'C', 'K', 'P', '1'};
constexpr std::uint32_t kHasMps = 1, kHasVqc = 2, kHasPca = 4;

struct Writer {
    std::vector<std::uint8_t> bytes;

    void u32(std::uint32_t v) {
        for (int i = 0; i < 4; ++i) bytes.push_back(std::uint8_t(v >> (8 * i)));
    }
    void f64(double v) {
        const auto u = std::bit_cast<std::uint64_t>(v);
        for (int i = 0; i < 8; ++i) bytes.push_back(std::uint8_t(u >> (8 * i)));
    }
    void f64_span(std::span<const double> vs) {
        for (double v : vs) f64(v);
    }
};

struct Reader {
    std::span<const std::uint8_t> bytes;
    std::size_t pos = 0;

    void need(std::size_t n, const char* what) {
        if (pos + n > bytes.size()) {
            throw FormatError(std::string("checkpoint truncated while reading ") + what, pos);
        }
    }
    std::uint32_t u32(const char* what) {
        need(4, what);
        std::uint32_t v = 0;
        for (int i = 0; i < 4; ++i) v |= std::uint32_t(bytes[pos + i]) << (8 * i);
        pos += 4;
        return v;
    }
    double f64(const char* what) {
        need(8, what);
        std::uint64_t v = 0;
        for (int i = 0; i < 8; ++i) v |= std::uint64_t(bytes[pos + i]) << (8 * i);
        pos += 8;
        return std::bit_cast<double>(v);
    }
    void f64_span(std::span<double> out, const char* what) {
        for (double& v : out) v = f64(what);
    }
};

std::uint32_t mode_code(Mode mode) {
    switch (mode) {
        case Mode::PcaVqc: return 0;
        case Mode::MpsClassifier: return 1;
        case Mode::MpsVqc: return 2;
    }
    return 0;
}

}  // namespace

void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle) {
    Writer w;
    w.bytes.insert(w.bytes.end(), std::begin(kMagic), std::end(kMagic));
    w.u32(mode_code(bundle.mode));
    std::uint32_t flags = 0;
    if (bundle.mps) flags |= kHasMps;
    if (bundle.vqc) flags |= kHasVqc;
    if (bundle.pca) flags |= kHasPca;
    w.u32(flags);

    if (bundle.mps) {
        const auto& mps = *bundle.mps;
        w.u32(static_cast<std::uint32_t>(mps.n_sites()));
        w.u32(static_cast<std::uint32_t>(mps.bond_dim));
        w.u32(static_cast<std::uint32_t>(mps.output_dim));
        w.u32(static_cast<std::uint32_t>(mps.output_site));
        for (const auto& site : mps.sites) w.f64_span(site.data());
    }
    if (bundle.vqc) w.f64_span(bundle.vqc->flat());
    if (bundle.pca) {
        const auto& pca = *bundle.pca;
        if (pca.mean.size() != kImagePixels) throw InputError("PCA model has wrong mean length");
        w.f64_span(pca.mean);
        for (const auto& comp : pca.components) {
            if (comp.size() != kImagePixels) {
                throw InputError("PCA model has wrong component length");
            }
            w.f64_span(comp);
        }
        w.f64_span(pca.explained_variances);
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw InputError("cannot write " + path.string());
    out.write(reinterpret_cast<const char*>(w.bytes.data()),
              static_cast<std::streamsize>(w.bytes.size()));
}

ModelBundle load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw InputError("cannot open " + path.string());
    std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                    std::istreambuf_iterator<char>());
    Reader r{bytes};

    r.need(8, "magic");
    if (std::memcmp(bytes.data(), kMagic, 8) != 0) {
        throw FormatError("bad checkpoint magic", 0);
    }
    r.pos = 8;

    ModelBundle bundle;
    const std::uint32_t mode = r.u32("mode");
    switch (mode) {
        case 0: bundle.mode = Mode::PcaVqc; break;
        case 1: bundle.mode = Mode::MpsClassifier; break;
        case 2: bundle.mode = Mode::MpsVqc; break;
        default: throw FormatError("unknown checkpoint mode " + std::to_string(mode), r.pos - 4);
    }
    const std::uint32_t flags = r.u32("flags");

    if (flags & kHasMps) {
        const std::size_t mps_header = r.pos;
        MpsModel mps;
        const std::uint32_t n = r.u32("n_sites");
        const std::uint32_t chi = r.u32("chi");
        const std::uint32_t d_out = r.u32("d_out");
        const std::uint32_t k = r.u32("output_site");
        if (n == 0 || chi == 0 || (d_out != 2 && d_out != 4) || k >= n) {
            throw FormatError("checkpoint MPS header has impossible dimensions", mps_header);
        }
        mps.bond_dim = chi;
        mps.output_dim = d_out;
        mps.output_site = k;
        mps.sites.reserve(n);
        for (std::uint32_t i = 0; i < n; ++i) {
            const std::size_t l = i == 0 ? 1 : chi;
            const std::size_t rr = i + 1 == n ? 1 : chi;
            Shape shape = i == k ? Shape{l, 2, rr, d_out} : Shape{l, 2, rr};
            RealTensor t(shape);
            r.f64_span(t.data(), "site tensor");
            mps.sites.push_back(std::move(t));
        }
        bundle.mps = std::move(mps);
    }
    if (flags & kHasVqc) {
        VqcParams vqc;
        r.f64_span(vqc.flat(), "VQC parameters");
        bundle.vqc = vqc;
    }
    if (flags & kHasPca) {
        PcaModel pca;
        pca.mean.resize(kImagePixels);
        r.f64_span(pca.mean, "PCA mean");
        for (auto& comp : pca.components) {
            comp.resize(kImagePixels);
            r.f64_span(comp, "PCA component");
        }
        r.f64_span(pca.explained_variances, "PCA variances");
        bundle.pca = std::move(pca);
    }
    if (r.pos != bytes.size()) {
        throw FormatError("checkpoint has trailing bytes", r.pos);
    }

    // The blocks must match the declared pipeline.
    const bool ok = (bundle.mode == Mode::PcaVqc && !bundle.mps && bundle.vqc && bundle.pca) ||
                    (bundle.mode == Mode::MpsClassifier && bundle.mps && !bundle.vqc &&
                     !bundle.pca && bundle.mps->output_dim == 2) ||
                    (bundle.mode == Mode::MpsVqc && bundle.mps && bundle.vqc && !bundle.pca &&
                     bundle.mps->output_dim == 4);
    if (!ok) {
        throw FormatError("checkpoint blocks do not match its mode", 12);
    }
    return bundle;
}

}  // namespace tnvqc
