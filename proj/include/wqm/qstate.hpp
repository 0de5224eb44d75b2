// Quantum states for the money simulator.
//
// SumOfProductsState stores a state as a short linear combination of product
// terms. Every state reachable in this protocol (product bills, X flips,
// single-qubit measurements and projections onto product states) stays a sum
// of at most k+1 terms after k projector measurements, so the representation
// is exact and scales linearly in the qubit count.

#pragma once

#include <array>
#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace wqm {

using Amplitude = std::complex<double>;

inline constexpr double kNormTolerance = 1e-9;
inline constexpr double kProbabilityClamp = 1e-9;
inline constexpr double kPruneThreshold = 1e-12;
inline constexpr double kMergeTolerance = 1e-9;

enum class Basis { Z, X };

enum class QubitSymbol { Zero, One, Plus, Minus };

enum class VerifyOutcome { Valid, Invalid };

constexpr Basis basis_of(QubitSymbol s) noexcept {
    return (s == QubitSymbol::Zero || s == QubitSymbol::One) ? Basis::Z : Basis::X;
}

// Zero/Plus -> 0, One/Minus -> 1.
constexpr int bit_of(QubitSymbol s) noexcept {
    return (s == QubitSymbol::One || s == QubitSymbol::Minus) ? 1 : 0;
}

constexpr QubitSymbol symbol_for(Basis b, int bit) noexcept {
    if (b == Basis::Z) return bit == 0 ? QubitSymbol::Zero : QubitSymbol::One;
    return bit == 0 ? QubitSymbol::Plus : QubitSymbol::Minus;
}

char symbol_char(QubitSymbol s) noexcept;
std::string format_symbols(std::span<const QubitSymbol> symbols);
// Parses a string over {0,1,+,-}. Throws Error(ParseError) naming the
// offending character and its position.
std::vector<QubitSymbol> parse_symbols(std::string_view text);

std::string_view outcome_name(VerifyOutcome o) noexcept;  // "VALID" / "INVALID"

struct SingleQubitVector {
    Amplitude a0;
    Amplitude a1;

    double norm_squared() const noexcept { return std::norm(a0) + std::norm(a1); }
};

// <lhs|rhs>
inline Amplitude overlap(const SingleQubitVector& lhs, const SingleQubitVector& rhs) noexcept {
    return std::conj(lhs.a0) * rhs.a0 + std::conj(lhs.a1) * rhs.a1;
}

SingleQubitVector symbol_amplitudes(QubitSymbol s) noexcept;

// Row-major 2x2 complex matrix: {u00, u01, u10, u11}.
using Matrix2 = std::array<Amplitude, 4>;

Matrix2 pauli_x_matrix() noexcept;
Matrix2 hadamard_matrix() noexcept;
bool is_unitary(const Matrix2& u, double tolerance = kNormTolerance) noexcept;

struct ProductTerm {
    Amplitude coefficient;
    std::vector<SingleQubitVector> factors;
};

class SumOfProductsState {
public:
    // Single-term product state of the given symbols. Throws on empty input.
    static SumOfProductsState product(std::span<const QubitSymbol> symbols);

    std::size_t num_qubits() const noexcept { return num_qubits_; }
    const std::vector<ProductTerm>& terms() const noexcept { return terms_; }
    std::size_t term_count() const noexcept { return terms_.size(); }

    double norm_squared() const;

    // Sum over terms of coefficient * prod_i <target_i|factor_i>.
    Amplitude inner_product_with_target(std::span<const QubitSymbol> target) const;

    void apply_pauli_x(std::size_t qubit);
    void apply_single_qubit_unitary(std::size_t qubit, const Matrix2& u);

    // Born-rule measurement of one qubit. Outcome 0 iff draw < p(0).
    // Collapses and renormalizes in place; never adds terms.
    int measure_qubit(std::size_t qubit, Basis basis, double draw);

    // Measures {P, 1-P} with P the projector onto the product state of
    // `target`. VALID iff draw < p. The VALID post-state is the clean target
    // product state; the INVALID post-state is (1-P)|psi> renormalized.
    VerifyOutcome measure_projector_onto(std::span<const QubitSymbol> target, double draw);

    // Drops negligible terms, merges colinear ones, renormalizes.
    void compress();

    // Construction from raw terms, mainly for tests. Factors are normalized
    // into the coefficient; the global state is not renormalized.
    static SumOfProductsState from_terms(std::vector<ProductTerm> terms);

private:
    SumOfProductsState() = default;

    void check_qubit(std::size_t qubit) const;
    void check_target(std::span<const QubitSymbol> target) const;
    void renormalize();

    std::size_t num_qubits_ = 0;
    std::vector<ProductTerm> terms_;
};

// <a|b>
Amplitude inner_product(const SumOfProductsState& a, const SumOfProductsState& b);

// |<a|b>|^2 for normalized states; clamped into [0, 1].
double fidelity(const SumOfProductsState& a, const SumOfProductsState& b);

// Clamps |c|^2 into [0,1], snapping values within kProbabilityClamp of 0 or 1.
double clamp_probability(double p) noexcept;

}  // namespace wqm

namespace wqm {

inline SumOfProductsState make_product_state(std::span<const QubitSymbol> symbols) {
    return SumOfProductsState::product(symbols);
}

}  // namespace wqm
