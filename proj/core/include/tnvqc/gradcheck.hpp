#pragma once

#include <cstdint>
#include <string>

namespace tnvqc {

// Tolerances for the gradient validation suites.
inline constexpr double kMpsFdTol = 1e-5;         // mps_backward vs central differences
inline constexpr double kVqcShiftTol = 1e-10;     // adjoint vs parameter-shift, absolute
inline constexpr double kVqcFdTol = 1e-5;         // adjoint vs central differences
inline constexpr double kEndToEndFdTol = 1e-4;    // full pipeline vs central differences

struct GradCheckReport {
    std::size_t trials = 0;
    double mps_vs_fd = 0;             // max relative error
    double vqc_adjoint_vs_shift = 0;  // max absolute error
    double vqc_vs_fd = 0;             // max relative error
    double end_to_end_vs_fd = 0;      // max relative error
    std::string worst_path;           // parameter location of the worst deviation

    bool within_tolerance() const {
        return mps_vs_fd < kMpsFdTol && vqc_adjoint_vs_shift < kVqcShiftTol &&
               vqc_vs_fd < kVqcFdTol && end_to_end_vs_fd < kEndToEndFdTol;
    }
};

// Runs all four suites with seeded randomness: small random MPS instances
// against finite differences (site tensors and product-state entries), the
// VQC adjoint against the parameter-shift rule and finite differences, and
// random full MPS->VQC->loss pipelines against finite differences on mixed
// parameter probes.
GradCheckReport run_gradient_checks(std::size_t trials, std::uint64_t seed);

}  // namespace tnvqc
