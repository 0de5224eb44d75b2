#include "wqm/qstate.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "wqm/error.hpp"

namespace wqm {

namespace {

constexpr double kInvSqrt2 = 0.70710678118654752440;

Amplitude term_overlap(const ProductTerm& lhs, const ProductTerm& rhs) {
    Amplitude acc = std::conj(lhs.coefficient) * rhs.coefficient;
    for (std::size_t i = 0; i < lhs.factors.size() && acc != Amplitude{}; ++i) {
        acc *= overlap(lhs.factors[i], rhs.factors[i]);
    }
    return acc;
}

Amplitude sum_overlap(const std::vector<ProductTerm>& a, const std::vector<ProductTerm>& b) {
    Amplitude acc{};
    for (const auto& ta : a) {
        for (const auto& tb : b) acc += term_overlap(ta, tb);
    }
    return acc;
}

void prune_negligible(std::vector<ProductTerm>& terms) {
    std::erase_if(terms, [](const ProductTerm& t) {
        return std::abs(t.coefficient) < kPruneThreshold;
    });
}

}  // namespace

char symbol_char(QubitSymbol s) noexcept {
    switch (s) {
        case QubitSymbol::Zero: return '0';
        case QubitSymbol::One: return '1';
        case QubitSymbol::Plus: return '+';
        case QubitSymbol::Minus: return '-';
    }
    return '?';
}

std::string format_symbols(std::span<const QubitSymbol> symbols) {
    std::string out;
    out.reserve(symbols.size());
    for (auto s : symbols) out.push_back(symbol_char(s));
    return out;
}

std::vector<QubitSymbol> parse_symbols(std::string_view text) {
    std::vector<QubitSymbol> out;
    out.reserve(text.size());
    for (std::size_t i = 0; i < text.size(); ++i) {
        switch (text[i]) {
            case '0': out.push_back(QubitSymbol::Zero); break;
            case '1': out.push_back(QubitSymbol::One); break;
            case '+': out.push_back(QubitSymbol::Plus); break;
            case '-': out.push_back(QubitSymbol::Minus); break;
            default:
                throw Error(ErrorCode::ParseError,
                            "invalid symbol character '" + std::string(1, text[i]) +
                                "' at position " + std::to_string(i) +
                                " (expected one of 0,1,+,-)");
        }
    }
    return out;
}

std::string_view outcome_name(VerifyOutcome o) noexcept {
    return o == VerifyOutcome::Valid ? "VALID" : "INVALID";
}

SingleQubitVector symbol_amplitudes(QubitSymbol s) noexcept {
    switch (s) {
        case QubitSymbol::Zero: return {1.0, 0.0};
        case QubitSymbol::One: return {0.0, 1.0};
        case QubitSymbol::Plus: return {kInvSqrt2, kInvSqrt2};
        case QubitSymbol::Minus: return {kInvSqrt2, -kInvSqrt2};
    }
    return {};
}

Matrix2 pauli_x_matrix() noexcept { return {0.0, 1.0, 1.0, 0.0}; }

Matrix2 hadamard_matrix() noexcept { return {kInvSqrt2, kInvSqrt2, kInvSqrt2, -kInvSqrt2}; }

bool is_unitary(const Matrix2& u, double tolerance) noexcept {
    for (const auto& v : u) {
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) return false;
    }
    // Columns of U must be orthonormal: (U^dagger U)_{jk} = delta_jk.
    for (int j = 0; j < 2; ++j) {
        for (int k = 0; k < 2; ++k) {
            Amplitude entry = std::conj(u[j]) * u[k] + std::conj(u[2 + j]) * u[2 + k];
            Amplitude expected = (j == k) ? Amplitude{1.0} : Amplitude{};
            if (std::abs(entry - expected) > tolerance) return false;
        }
    }
    return true;
}

double clamp_probability(double p) noexcept {
    if (!(p > kProbabilityClamp)) return 0.0;
    if (p >= 1.0 - kProbabilityClamp) return 1.0;
    return p;
}

SumOfProductsState SumOfProductsState::product(std::span<const QubitSymbol> symbols) {
    if (symbols.empty()) {
        throw Error(ErrorCode::InvalidArgument, "product state needs at least one qubit");
    }
    SumOfProductsState state;
    state.num_qubits_ = symbols.size();
    ProductTerm term{1.0, {}};
    term.factors.reserve(symbols.size());
    for (auto s : symbols) term.factors.push_back(symbol_amplitudes(s));
    state.terms_.push_back(std::move(term));
    return state;
}

SumOfProductsState SumOfProductsState::from_terms(std::vector<ProductTerm> terms) {
    if (terms.empty() || terms.front().factors.empty()) {
        throw Error(ErrorCode::InvalidArgument, "state needs at least one term and one qubit");
    }
    SumOfProductsState state;
    state.num_qubits_ = terms.front().factors.size();
    for (auto& term : terms) {
        if (term.factors.size() != state.num_qubits_) {
            throw Error(ErrorCode::DimensionMismatch, "terms disagree on qubit count");
        }
        for (auto& f : term.factors) {
            double norm = std::sqrt(f.norm_squared());
            if (norm == 0.0) {
                throw Error(ErrorCode::InvalidArgument, "zero factor in product term");
            }
            f.a0 /= norm;
            f.a1 /= norm;
            term.coefficient *= norm;
        }
    }
    state.terms_ = std::move(terms);
    return state;
}

double SumOfProductsState::norm_squared() const { return sum_overlap(terms_, terms_).real(); }

void SumOfProductsState::check_qubit(std::size_t qubit) const {
    if (qubit >= num_qubits_) {
        throw Error(ErrorCode::InvalidArgument, "qubit index " + std::to_string(qubit) +
                                                    " out of range for " +
                                                    std::to_string(num_qubits_) + " qubits");
    }
}

void SumOfProductsState::check_target(std::span<const QubitSymbol> target) const {
    if (target.size() != num_qubits_) {
        throw Error(ErrorCode::DimensionMismatch,
                    "target has " + std::to_string(target.size()) + " qubits, state has " +
                        std::to_string(num_qubits_));
    }
}

void SumOfProductsState::renormalize() {
    double n2 = norm_squared();
    if (!(n2 > 0.0) || !std::isfinite(n2)) {
        throw Error(ErrorCode::InternalConsistency, "cannot renormalize a zero state");
    }
    double scale = 1.0 / std::sqrt(n2);
    for (auto& t : terms_) t.coefficient *= scale;
}

Amplitude SumOfProductsState::inner_product_with_target(std::span<const QubitSymbol> target) const {
    check_target(target);
    std::vector<SingleQubitVector> bras;
    bras.reserve(target.size());
    for (auto s : target) bras.push_back(symbol_amplitudes(s));

    Amplitude acc{};
    for (const auto& term : terms_) {
        Amplitude prod = term.coefficient;
        for (std::size_t i = 0; i < num_qubits_ && prod != Amplitude{}; ++i) {
            prod *= overlap(bras[i], term.factors[i]);
        }
        acc += prod;
    }
    return acc;
}

void SumOfProductsState::apply_pauli_x(std::size_t qubit) {
    check_qubit(qubit);
    for (auto& term : terms_) {
        auto& f = term.factors[qubit];
        std::swap(f.a0, f.a1);
    }
}

void SumOfProductsState::apply_single_qubit_unitary(std::size_t qubit, const Matrix2& u) {
    check_qubit(qubit);
    if (!is_unitary(u)) throw Error(ErrorCode::NonUnitary, "matrix is not unitary");
    for (auto& term : terms_) {
        auto& f = term.factors[qubit];
        SingleQubitVector g{u[0] * f.a0 + u[1] * f.a1, u[2] * f.a0 + u[3] * f.a1};
        f = g;
    }
}

int SumOfProductsState::measure_qubit(std::size_t qubit, Basis basis, double draw) {
    check_qubit(qubit);
    auto project = [&](int bit) {
        const SingleQubitVector b = symbol_amplitudes(symbol_for(basis, bit));
        std::vector<ProductTerm> out = terms_;
        for (auto& term : out) {
            term.coefficient *= overlap(b, term.factors[qubit]);
            term.factors[qubit] = b;
        }
        return out;
    };

    auto zero_branch = project(0);
    double p0 = clamp_probability(sum_overlap(zero_branch, zero_branch).real());
    int bit = draw < p0 ? 0 : 1;
    terms_ = bit == 0 ? std::move(zero_branch) : project(1);
    renormalize();
    prune_negligible(terms_);
    return bit;
}

VerifyOutcome SumOfProductsState::measure_projector_onto(std::span<const QubitSymbol> target,
                                                         double draw) {
    const Amplitude c = inner_product_with_target(target);
    const double p = clamp_probability(std::norm(c));
    if (draw < p) {
        *this = product(target);
        return VerifyOutcome::Valid;
    }
    if (p > 0.0) {
        ProductTerm removed{-c, {}};
        removed.factors.reserve(target.size());
        for (auto s : target) removed.factors.push_back(symbol_amplitudes(s));
        terms_.push_back(std::move(removed));
        renormalize();
        prune_negligible(terms_);
    }
    return VerifyOutcome::Invalid;
}

void SumOfProductsState::compress() {
    prune_negligible(terms_);
    std::vector<ProductTerm> merged;
    merged.reserve(terms_.size());
    for (auto& term : terms_) {
        bool absorbed = false;
        for (auto& kept : merged) {
            Amplitude phase = 1.0;
            bool colinear = true;
            for (std::size_t i = 0; i < num_qubits_; ++i) {
                Amplitude ov = overlap(kept.factors[i], term.factors[i]);
                if (std::abs(ov) < 1.0 - kMergeTolerance) {
                    colinear = false;
                    break;
                }
                phase *= ov;
            }
            if (colinear) {
                kept.coefficient += term.coefficient * phase;
                absorbed = true;
                break;
            }
        }
        if (!absorbed) merged.push_back(std::move(term));
    }
    terms_ = std::move(merged);
    prune_negligible(terms_);
    renormalize();
}

Amplitude inner_product(const SumOfProductsState& a, const SumOfProductsState& b) {
    if (a.num_qubits() != b.num_qubits()) {
        throw Error(ErrorCode::DimensionMismatch, "states have different qubit counts");
    }
    return sum_overlap(a.terms(), b.terms());
}

double fidelity(const SumOfProductsState& a, const SumOfProductsState& b) {
    return std::clamp(std::norm(inner_product(a, b)), 0.0, 1.0);
}

}  // namespace wqm
