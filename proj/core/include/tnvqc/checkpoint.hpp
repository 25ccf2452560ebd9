#pragma once

#include <filesystem>

#include "tnvqc/training.hpp"

namespace tnvqc {

// Flat binary model container. Layout, all integers and floats little-endian:
//
//   magic   8 bytes  "TNVQCKP1"
//   mode    u32      0 = pca-vqc, 1 = mps-classifier, 2 = mps-vqc
//   flags   u32      bit 0 MPS block, bit 1 VQC block, bit 2 PCA block
//   [MPS]   u32 n_sites, u32 chi, u32 d_out, u32 output_site (0-based),
//           then site tensors in site order, row-major f64; site shapes are
//           implied: boundary bonds 1, interior bonds chi, the output site
//           carrying a trailing d_out leg
//   [VQC]   12 f64: (alpha_1, beta_1, gamma_1, alpha_2, ...)
//   [PCA]   784 f64 mean, 4x784 f64 component rows, 4 f64 variances
//
// Malformed input (bad magic, truncation, impossible dimensions) raises
// FormatError with the failing byte offset.
void save_checkpoint(const std::filesystem::path& path, const ModelBundle& bundle);
ModelBundle load_checkpoint(const std::filesystem::path& path);

}  // namespace tnvqc
