#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>

#include "tnvqc/errors.hpp"

namespace tnvqc {

inline constexpr int kNumQubits = 4;
inline constexpr std::size_t kStateDim = 16;

using Complex = std::complex<double>;
using Mat2 = std::array<Complex, 4>;     // row-major 2x2
using Mat4x4 = std::array<Complex, 16>;  // row-major 4x4

// 16 complex amplitudes; qubit 1 is the most significant bit of the basis
// index, so |1000> is amplitude 8.
struct StateVector {
    std::array<Complex, kStateDim> amp{};

    static StateVector zero_state() {
        StateVector s;
        s.amp[0] = 1.0;
        return s;
    }
    double norm_sq() const {
        double n = 0.0;
        for (const auto& a : amp) n += std::norm(a);
        return n;
    }
};

// Twelve variational angles, a (alpha, beta, gamma) triple per qubit.
struct VqcParams {
    std::array<std::array<double, 3>, kNumQubits> angles{};

    double& angle(int qubit, int j) { return angles[qubit - 1][j]; }
    double angle(int qubit, int j) const { return angles[qubit - 1][j]; }

    std::span<double, 12> flat() { return std::span<double, 12>(angles[0].data(), 12); }
    std::span<const double, 12> flat() const {
        return std::span<const double, 12>(angles[0].data(), 12);
    }

    static VqcParams random(std::uint64_t seed, double sigma);
};

// Four unbounded real features entering the encoding rotations.
struct FeatureInput {
    std::array<double, 4> x{};
};

Mat2 hadamard();
Mat2 ry(double theta);
Mat2 rz(double theta);
// General single-qubit rotation rz(gamma) * ry(beta) * rz(alpha); rz(alpha)
// acts first.
Mat2 rot(double alpha, double beta, double gamma);
Mat4x4 cnot();

StateVector apply_single(const StateVector& state, const Mat2& gate, int qubit);
StateVector apply_cnot(const StateVector& state, int control, int target);

// |0000> -> H on every qubit, then Ry(arctan x_i) and Rz(arctan x_i^2) on
// qubit i.
StateVector encode(const FeatureInput& input);

// CNOT ring (1->2), (2->3), (3->4), (4->1), then rot(alpha_i, beta_i,
// gamma_i) on each qubit.
StateVector variational_block(const StateVector& state, const VqcParams& params);

// Exact <Z_qubit>; the state must be normalized to 1e-8.
double measure_z(const StateVector& state, int qubit);

// (<Z_1>, <Z_2>) of the full encode + variational circuit.
std::array<double, 2> vqc_forward(const FeatureInput& input, const VqcParams& params);

struct VqcGradient {
    std::array<double, 12> params{};  // (alpha_1, beta_1, gamma_1, alpha_2, ...)
    std::array<double, 4> input{};
};

// Exact gradient of <upstream, vqc_forward> by adjoint reverse sweep through
// the statevector. Input gradients include the arctan chain factors.
VqcGradient vqc_backward(const FeatureInput& input, const VqcParams& params,
                         const std::array<double, 2>& upstream);

}  // namespace tnvqc
