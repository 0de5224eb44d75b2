#include "wqm/dense_state.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wqm/error.hpp"

namespace wqm {

namespace {

void check_size(std::size_t n) {
    if (n == 0 || n > kMaxDenseQubits) {
        throw Error(ErrorCode::InvalidArgument,
                    "dense backend supports 1.." + std::to_string(kMaxDenseQubits) +
                        " qubits, got " + std::to_string(n));
    }
}

std::vector<Amplitude> kron(std::span<const SingleQubitVector> factors) {
    std::vector<Amplitude> out{1.0};
    for (const auto& f : factors) {
        std::vector<Amplitude> next(out.size() * 2);
        for (std::size_t k = 0; k < out.size(); ++k) {
            next[2 * k] = out[k] * f.a0;
            next[2 * k + 1] = out[k] * f.a1;
        }
        out = std::move(next);
    }
    return out;
}

}  // namespace

DenseState::DenseState(std::size_t num_qubits, std::vector<Amplitude> amplitudes)
    : num_qubits_(num_qubits), amplitudes_(std::move(amplitudes)) {
    check_size(num_qubits_);
    if (amplitudes_.size() != (std::size_t{1} << num_qubits_)) {
        throw Error(ErrorCode::InvalidArgument, "amplitude count must be 2^n");
    }
}

DenseState DenseState::product(std::span<const QubitSymbol> symbols) {
    check_size(symbols.size());
    std::vector<SingleQubitVector> factors;
    for (auto s : symbols) factors.push_back(symbol_amplitudes(s));
    return DenseState(symbols.size(), kron(factors));
}

std::size_t DenseState::mask(std::size_t qubit) const {
    if (qubit >= num_qubits_) {
        throw Error(ErrorCode::InvalidArgument, "qubit index out of range");
    }
    return std::size_t{1} << (num_qubits_ - 1 - qubit);
}

double DenseState::norm_squared() const noexcept {
    double acc = 0.0;
    for (const auto& a : amplitudes_) acc += std::norm(a);
    return acc;
}

void DenseState::renormalize() {
    double n2 = norm_squared();
    if (!(n2 > 0.0)) throw Error(ErrorCode::InternalConsistency, "zero dense state");
    double scale = 1.0 / std::sqrt(n2);
    for (auto& a : amplitudes_) a *= scale;
}

void DenseState::apply_pauli_x(std::size_t qubit) {
    apply_single_qubit_unitary(qubit, pauli_x_matrix());
}

void DenseState::apply_single_qubit_unitary(std::size_t qubit, const Matrix2& u) {
    const std::size_t m = mask(qubit);
    if (!is_unitary(u)) throw Error(ErrorCode::NonUnitary, "matrix is not unitary");
    for (std::size_t idx = 0; idx < amplitudes_.size(); ++idx) {
        if (idx & m) continue;
        Amplitude lo = amplitudes_[idx];
        Amplitude hi = amplitudes_[idx | m];
        amplitudes_[idx] = u[0] * lo + u[1] * hi;
        amplitudes_[idx | m] = u[2] * lo + u[3] * hi;
    }
}

int DenseState::measure_qubit(std::size_t qubit, Basis basis, double draw) {
    const std::size_t m = mask(qubit);
    // Rotate into the computational basis, measure, rotate back.
    const bool rotate = basis == Basis::X;
    if (rotate) apply_single_qubit_unitary(qubit, hadamard_matrix());

    double p0 = 0.0;
    for (std::size_t idx = 0; idx < amplitudes_.size(); ++idx) {
        if (!(idx & m)) p0 += std::norm(amplitudes_[idx]);
    }
    p0 = clamp_probability(p0);
    const int bit = draw < p0 ? 0 : 1;
    for (std::size_t idx = 0; idx < amplitudes_.size(); ++idx) {
        const int idx_bit = (idx & m) ? 1 : 0;
        if (idx_bit != bit) amplitudes_[idx] = 0.0;
    }
    renormalize();

    if (rotate) apply_single_qubit_unitary(qubit, hadamard_matrix());
    return bit;
}

VerifyOutcome DenseState::measure_projector_onto(std::span<const QubitSymbol> target,
                                                 double draw) {
    if (target.size() != num_qubits_) {
        throw Error(ErrorCode::DimensionMismatch, "target dimension mismatch");
    }
    const DenseState t = product(target);
    const Amplitude c = inner_product(t, *this);
    const double p = clamp_probability(std::norm(c));
    if (draw < p) {
        amplitudes_ = t.amplitudes_;
        return VerifyOutcome::Valid;
    }
    if (p > 0.0) {
        for (std::size_t idx = 0; idx < amplitudes_.size(); ++idx) {
            amplitudes_[idx] -= c * t.amplitudes_[idx];
        }
        renormalize();
    }
    return VerifyOutcome::Invalid;
}

Amplitude inner_product(const DenseState& a, const DenseState& b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw Error(ErrorCode::DimensionMismatch, "states have different qubit counts");
    }
    Amplitude acc{};
    auto aa = a.amplitudes();
    auto bb = b.amplitudes();
    for (std::size_t i = 0; i < aa.size(); ++i) acc += std::conj(aa[i]) * bb[i];
    return acc;
}

double fidelity(const DenseState& a, const DenseState& b) {
    return std::clamp(std::norm(inner_product(a, b)), 0.0, 1.0);
}

DenseState to_dense(const SumOfProductsState& state) {
    check_size(state.num_qubits());
    std::vector<Amplitude> acc(std::size_t{1} << state.num_qubits());
    for (const auto& term : state.terms()) {
        auto expanded = kron(term.factors);
        for (std::size_t i = 0; i < acc.size(); ++i) acc[i] += term.coefficient * expanded[i];
    }
    return DenseState(state.num_qubits(), std::move(acc));
}

}  // namespace wqm
