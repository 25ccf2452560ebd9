#include "tnvqc/vqc.hpp"

#include <cmath>
#include <random>

namespace tnvqc {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

void require_finite(double v, const char* what) {
    if (!std::isfinite(v)) throw InputError(std::string(what) + " is not finite");
}

int bit_of(int qubit) {
    if (qubit < 1 || qubit > kNumQubits) {
        throw IndexError("qubit index " + std::to_string(qubit) + " out of range 1..4");
    }
    return kNumQubits - qubit;  // qubit 1 = MSB
}

Mat2 dagger(const Mat2& m) {
    return {std::conj(m[0]), std::conj(m[2]), std::conj(m[1]), std::conj(m[3])};
}

Complex inner(const StateVector& a, const StateVector& b) {
    Complex acc = 0.0;
    for (std::size_t i = 0; i < kStateDim; ++i) acc += std::conj(a.amp[i]) * b.amp[i];
    return acc;
}

// Pauli generator applied to one qubit, for adjoint rotation gradients.
StateVector apply_pauli_y(const StateVector& state, int qubit) {
    const int mask = 1 << bit_of(qubit);
    StateVector out;
    for (std::size_t i = 0; i < kStateDim; ++i) {
        if ((i & mask) == 0) {
            const Complex a0 = state.amp[i];
            const Complex a1 = state.amp[i | mask];
            out.amp[i] = Complex(0, -1) * a1;
            out.amp[i | mask] = Complex(0, 1) * a0;
        }
    }
    return out;
}

StateVector apply_pauli_z(const StateVector& state, int qubit) {
    const int mask = 1 << bit_of(qubit);
    StateVector out = state;
    for (std::size_t i = 0; i < kStateDim; ++i) {
        if (i & mask) out.amp[i] = -out.amp[i];
    }
    return out;
}

enum class ParamKind { None, EncodeRy, EncodeRz, VarAlpha, VarBeta, VarGamma };

struct GateOp {
    Mat2 mat{};
    int qubit = 0;
    int cnot_control = 0;  // 0 when not a CNOT
    int cnot_target = 0;
    ParamKind kind = ParamKind::None;
    char generator = ' ';  // 'Y' or 'Z' for parametrized rotations
};

// The fixed 28-gate sequence: 4 Hadamards, 8 encoding rotations, 4 ring
// CNOTs, 12 variational rotations.
std::array<GateOp, 28> circuit_gates(const FeatureInput& input, const VqcParams& params) {
    std::array<GateOp, 28> ops;
    std::size_t n = 0;
    for (int q = 1; q <= kNumQubits; ++q) {
        ops[n++] = {hadamard(), q, 0, 0, ParamKind::None, ' '};
    }
    for (int q = 1; q <= kNumQubits; ++q) {
        const double x = input.x[q - 1];
        ops[n++] = {ry(std::atan(x)), q, 0, 0, ParamKind::EncodeRy, 'Y'};
        ops[n++] = {rz(std::atan(x * x)), q, 0, 0, ParamKind::EncodeRz, 'Z'};
    }
    constexpr std::array<std::pair<int, int>, 4> ring{{{1, 2}, {2, 3}, {3, 4}, {4, 1}}};
    for (const auto& [c, t] : ring) {
        GateOp op;
        op.cnot_control = c;
        op.cnot_target = t;
        ops[n++] = op;
    }
    for (int q = 1; q <= kNumQubits; ++q) {
        ops[n++] = {rz(params.angle(q, 0)), q, 0, 0, ParamKind::VarAlpha, 'Z'};
        ops[n++] = {ry(params.angle(q, 1)), q, 0, 0, ParamKind::VarBeta, 'Y'};
        ops[n++] = {rz(params.angle(q, 2)), q, 0, 0, ParamKind::VarGamma, 'Z'};
    }
    return ops;
}

StateVector apply_op(const StateVector& state, const GateOp& op, bool inverse = false) {
    if (op.cnot_control != 0) {
        return apply_cnot(state, op.cnot_control, op.cnot_target);  // self-inverse
    }
    return apply_single(state, inverse ? dagger(op.mat) : op.mat, op.qubit);
}

}  // namespace

VqcParams VqcParams::random(std::uint64_t seed, double sigma) {
    std::mt19937_64 gen(seed);
    std::normal_distribution<double> dist(0.0, sigma);
    VqcParams p;
    for (auto& triple : p.angles) {
        for (double& a : triple) a = dist(gen);
    }
    return p;
}

Mat2 hadamard() {
    return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2};
}

Mat2 ry(double theta) {
    require_finite(theta, "ry angle");
    const double c = std::cos(theta / 2), s = std::sin(theta / 2);
    return {c, -s, s, c};
}

Mat2 rz(double theta) {
    require_finite(theta, "rz angle");
    return {std::polar(1.0, -theta / 2), 0.0, 0.0, std::polar(1.0, theta / 2)};
}

Mat2 rot(double alpha, double beta, double gamma) {
    const Mat2 a = rz(alpha), b = ry(beta), g = rz(gamma);
    const auto mul = [](const Mat2& m, const Mat2& n) -> Mat2 {
        return {m[0] * n[0] + m[1] * n[2], m[0] * n[1] + m[1] * n[3],
                m[2] * n[0] + m[3] * n[2], m[2] * n[1] + m[3] * n[3]};
    };
    return mul(g, mul(b, a));
}

Mat4x4 cnot() {
    Mat4x4 m{};
    m[0 * 4 + 0] = 1.0;
    m[1 * 4 + 1] = 1.0;
    m[2 * 4 + 3] = 1.0;
    m[3 * 4 + 2] = 1.0;
    return m;
}

StateVector apply_single(const StateVector& state, const Mat2& gate, int qubit) {
    const int mask = 1 << bit_of(qubit);
    StateVector out;
    for (std::size_t i = 0; i < kStateDim; ++i) {
        if ((i & mask) == 0) {
            const Complex a0 = state.amp[i];
            const Complex a1 = state.amp[i | mask];
            out.amp[i] = gate[0] * a0 + gate[1] * a1;
            out.amp[i | mask] = gate[2] * a0 + gate[3] * a1;
        }
    }
    return out;
}

StateVector apply_cnot(const StateVector& state, int control, int target) {
    if (control == target) throw InputError("apply_cnot: control equals target");
    const int cmask = 1 << bit_of(control);
    const int tmask = 1 << bit_of(target);
    StateVector out;
    for (std::size_t i = 0; i < kStateDim; ++i) {
        out.amp[i] = state.amp[(i & cmask) ? (i ^ tmask) : i];
    }
    return out;
}

StateVector encode(const FeatureInput& input) {
    for (double v : input.x) require_finite(v, "feature input");
    StateVector state = StateVector::zero_state();
    const Mat2 h = hadamard();
    for (int q = 1; q <= kNumQubits; ++q) state = apply_single(state, h, q);
    for (int q = 1; q <= kNumQubits; ++q) {
        const double x = input.x[q - 1];
        state = apply_single(state, ry(std::atan(x)), q);
        state = apply_single(state, rz(std::atan(x * x)), q);
    }
    return state;
}

StateVector variational_block(const StateVector& state, const VqcParams& params) {
    StateVector s = state;
    s = apply_cnot(s, 1, 2);
    s = apply_cnot(s, 2, 3);
    s = apply_cnot(s, 3, 4);
    s = apply_cnot(s, 4, 1);
    for (int q = 1; q <= kNumQubits; ++q) {
        s = apply_single(s, rot(params.angle(q, 0), params.angle(q, 1), params.angle(q, 2)), q);
    }
    return s;
}

double measure_z(const StateVector& state, int qubit) {
    const int mask = 1 << bit_of(qubit);
    double expectation = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < kStateDim; ++i) {
        const double p = std::norm(state.amp[i]);
        norm += p;
        expectation += (i & mask) ? -p : p;
    }
    if (std::abs(norm - 1.0) > 1e-8) {
        throw NumericError("measure_z: state norm deviates from 1 by " +
                           std::to_string(std::abs(norm - 1.0)));
    }
    return expectation;
}

std::array<double, 2> vqc_forward(const FeatureInput& input, const VqcParams& params) {
    const StateVector s = variational_block(encode(input), params);
    return {measure_z(s, 1), measure_z(s, 2)};
}

VqcGradient vqc_backward(const FeatureInput& input, const VqcParams& params,
                         const std::array<double, 2>& upstream) {
    for (double v : input.x) require_finite(v, "feature input");
    const auto ops = circuit_gates(input, params);

    StateVector psi = StateVector::zero_state();
    for (const auto& op : ops) psi = apply_op(psi, op);

    // lambda = (u1 Z1 + u2 Z2) |psi>, a diagonal observable application.
    StateVector lambda;
    for (std::size_t i = 0; i < kStateDim; ++i) {
        const double w1 = (i & (1 << bit_of(1))) ? -1.0 : 1.0;
        const double w2 = (i & (1 << bit_of(2))) ? -1.0 : 1.0;
        lambda.amp[i] = (upstream[0] * w1 + upstream[1] * w2) * psi.amp[i];
    }

    // Reverse sweep: for each rotation gate G = exp(-i theta P / 2),
    // dJ/dtheta = Im <lambda | P | psi_after_gate>.
    std::array<double, 8> encode_grads{};  // (ry_1, rz_1, ry_2, rz_2, ...)
    VqcGradient grad;
    for (std::size_t j = ops.size(); j-- > 0;) {
        const auto& op = ops[j];
        if (op.kind != ParamKind::None) {
            const StateVector p_psi =
                op.generator == 'Y' ? apply_pauli_y(psi, op.qubit) : apply_pauli_z(psi, op.qubit);
            const double g = inner(lambda, p_psi).imag();
            const int q = op.qubit - 1;
            switch (op.kind) {
                case ParamKind::EncodeRy: encode_grads[2 * q] = g; break;
                case ParamKind::EncodeRz: encode_grads[2 * q + 1] = g; break;
                case ParamKind::VarAlpha: grad.params[3 * q + 0] = g; break;
                case ParamKind::VarBeta: grad.params[3 * q + 1] = g; break;
                case ParamKind::VarGamma: grad.params[3 * q + 2] = g; break;
                default: break;
            }
        }
        psi = apply_op(psi, op, /*inverse=*/true);
        lambda = apply_op(lambda, op, /*inverse=*/true);
    }

    // Chain through the arctan feature encodings.
    for (int q = 0; q < kNumQubits; ++q) {
        const double x = input.x[q];
        grad.input[q] = encode_grads[2 * q] / (1.0 + x * x) +
                        encode_grads[2 * q + 1] * 2.0 * x / (1.0 + x * x * x * x);
    }
    return grad;
}

}  // namespace tnvqc
