#pragma once

// Full state-vector backend. Exponential in the qubit count; serves as the
// reference oracle for SumOfProductsState. Qubit 0 is the most significant
// bit of the amplitude index.

#include <cstddef>
#include <span>
#include <vector>

#include "wqm/qstate.hpp"

namespace wqm {

inline constexpr std::size_t kMaxDenseQubits = 20;

class DenseState {
public:
    // Throws InvalidArgument for n == 0 or n > kMaxDenseQubits, or if the
    // amplitude count is not 2^n.
    DenseState(std::size_t num_qubits, std::vector<Amplitude> amplitudes);

    static DenseState product(std::span<const QubitSymbol> symbols);

    std::size_t num_qubits() const noexcept { return num_qubits_; }
    std::span<const Amplitude> amplitudes() const noexcept { return amplitudes_; }

    double norm_squared() const noexcept;

    void apply_pauli_x(std::size_t qubit);
    void apply_single_qubit_unitary(std::size_t qubit, const Matrix2& u);
    int measure_qubit(std::size_t qubit, Basis basis, double draw);
    VerifyOutcome measure_projector_onto(std::span<const QubitSymbol> target, double draw);

private:
    std::size_t mask(std::size_t qubit) const;
    void renormalize();

    std::size_t num_qubits_;
    std::vector<Amplitude> amplitudes_;
};

Amplitude inner_product(const DenseState& a, const DenseState& b);
double fidelity(const DenseState& a, const DenseState& b);

// Expands every product term. Throws InvalidArgument when n > kMaxDenseQubits.
DenseState to_dense(const SumOfProductsState& state);

}  // namespace wqm
