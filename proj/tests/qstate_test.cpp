#include <gtest/gtest.h>

#include <random>

#include "test_util.hpp"
#include "wqm/dense_state.hpp"
#include "wqm/error.hpp"
#include "wqm/qstate.hpp"

using namespace wqm;
using namespace wqm::testing;

namespace {

void expect_amp(Amplitude got, Amplitude want, double tol = 1e-12) {
    EXPECT_NEAR(got.real(), want.real(), tol);
    EXPECT_NEAR(got.imag(), want.imag(), tol);
}

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    ADD_FAILURE() << "expected wqm::Error";
    return ErrorCode::InternalConsistency;
}

}  // namespace

TEST(Symbols, CanonicalAmplitudes) {
    auto z = symbol_amplitudes(QubitSymbol::Zero);
    expect_amp(z.a0, 1.0);
    expect_amp(z.a1, 0.0);
    auto p = symbol_amplitudes(QubitSymbol::Plus);
    expect_amp(p.a0, kInvSqrt2);
    expect_amp(p.a1, kInvSqrt2);
    auto m = symbol_amplitudes(QubitSymbol::Minus);
    expect_amp(m.a0, kInvSqrt2);
    expect_amp(m.a1, -kInvSqrt2);
}

TEST(Symbols, EigenstructureAndAccessors) {
    for (auto s : {QubitSymbol::Zero, QubitSymbol::One, QubitSymbol::Plus, QubitSymbol::Minus}) {
        auto v = symbol_amplitudes(s);
        EXPECT_NEAR(v.norm_squared(), 1.0, 1e-12);
        EXPECT_EQ(symbol_for(basis_of(s), bit_of(s)), s);
        // X|v> = lambda |v> for the X basis, Z|v> = lambda |v> for the Z basis.
        double lambda = bit_of(s) == 0 ? 1.0 : -1.0;
        if (basis_of(s) == Basis::X) {
            expect_amp(v.a1, lambda * v.a0);
        } else {
            expect_amp(v.a1 * (-1.0), lambda * v.a1);
            expect_amp(v.a0, lambda * v.a0);
        }
    }
    EXPECT_EQ(bit_of(QubitSymbol::Plus), 0);
    EXPECT_EQ(bit_of(QubitSymbol::Minus), 1);
}

TEST(Symbols, ParseRejectsForeignCharacter) {
    EXPECT_EQ(format_symbols(syms("01+-")), "01+-");
    try {
        parse_symbols("01+2");
        FAIL();
    } catch (const Error& e) {
        EXPECT_EQ(e.code(), ErrorCode::ParseError);
        EXPECT_NE(std::string(e.what()).find("'2'"), std::string::npos);
        EXPECT_NE(std::string(e.what()).find("position 3"), std::string::npos);
    }
}

TEST(ProductState, Construction) {
    auto s = state_of("0+");
    ASSERT_EQ(s.term_count(), 1u);
    ASSERT_EQ(s.num_qubits(), 2u);
    expect_amp(s.terms()[0].coefficient, 1.0);
    expect_amp(s.terms()[0].factors[1].a1, kInvSqrt2);
    EXPECT_NEAR(state_of("01+-").norm_squared(), 1.0, 1e-12);
    EXPECT_EQ(code_of([] { make_product_state({}); }), ErrorCode::InvalidArgument);
}

TEST(ProductState, InnerProductWithTarget) {
    expect_amp(state_of("0").inner_product_with_target(syms("0")), 1.0);
    expect_amp(state_of("0").inner_product_with_target(syms("+")), kInvSqrt2);
    expect_amp(state_of("0+").inner_product_with_target(syms("-1")), 0.5);
    EXPECT_EQ(code_of([] { state_of("0+").inner_product_with_target(syms("0")); }),
              ErrorCode::DimensionMismatch);
}

TEST(Gates, PauliX) {
    auto s = state_of("0");
    s.apply_pauli_x(0);
    EXPECT_NEAR(fidelity(s, state_of("1")), 1.0, 1e-12);

    auto plus = state_of("+");
    plus.apply_pauli_x(0);
    EXPECT_NEAR(fidelity(plus, state_of("+")), 1.0, 1e-12);

    auto minus = state_of("-");
    minus.apply_pauli_x(0);
    expect_amp(inner_product(state_of("-"), minus), -1.0);
    EXPECT_NEAR(fidelity(minus, state_of("-")), 1.0, 1e-12);

    EXPECT_EQ(code_of([] { state_of("01").apply_pauli_x(2); }), ErrorCode::InvalidArgument);
}

TEST(Gates, SingleQubitUnitary) {
    auto s = state_of("+0-");
    auto id = s;
    id.apply_single_qubit_unitary(1, {1.0, 0.0, 0.0, 1.0});
    EXPECT_NEAR(fidelity(id, s), 1.0, 1e-15);

    auto via_matrix = state_of("0+1");
    auto via_x = via_matrix;
    via_matrix.apply_single_qubit_unitary(0, pauli_x_matrix());
    via_x.apply_pauli_x(0);
    for (std::size_t q = 0; q < 3; ++q) {
        EXPECT_EQ(via_matrix.terms()[0].factors[q].a0, via_x.terms()[0].factors[q].a0);
        EXPECT_EQ(via_matrix.terms()[0].factors[q].a1, via_x.terms()[0].factors[q].a1);
    }

    auto h = state_of("0");
    h.apply_single_qubit_unitary(0, hadamard_matrix());
    EXPECT_NEAR(std::abs(h.inner_product_with_target(syms("+"))), 1.0, 1e-12);

    EXPECT_EQ(code_of([] { state_of("0").apply_single_qubit_unitary(0, {1.0, 1.0, 0.0, 1.0}); }),
              ErrorCode::NonUnitary);
    EXPECT_EQ(code_of([] { state_of("0").apply_single_qubit_unitary(1, pauli_x_matrix()); }),
              ErrorCode::InvalidArgument);
}

TEST(Measurement, QubitDeterministicCases) {
    auto z = state_of("0");
    EXPECT_EQ(z.measure_qubit(0, Basis::Z, 0.999999), 0);
    EXPECT_NEAR(fidelity(z, state_of("0")), 1.0, 1e-12);

    auto x = state_of("+");
    EXPECT_EQ(x.measure_qubit(0, Basis::X, 0.999999), 0);
    EXPECT_NEAR(fidelity(x, state_of("+")), 1.0, 1e-12);
}

TEST(Measurement, PlusInZBasisMatchesDenseOracle) {
    auto sop = state_of("+");
    auto dense = DenseState::product(syms("+"));
    const double p0_dense = std::norm(dense.amplitudes()[0]);
    EXPECT_NEAR(p0_dense, 0.5, 1e-12);

    EXPECT_EQ(sop.measure_qubit(0, Basis::Z, 0.3), 0);
    EXPECT_EQ(dense.measure_qubit(0, Basis::Z, 0.3), 0);
    EXPECT_NEAR(fidelity(to_dense(sop), dense), 1.0, 1e-12);
    EXPECT_NEAR(fidelity(sop, state_of("0")), 1.0, 1e-12);
}

TEST(Measurement, ProjectorExactMatchIsValid) {
    auto s = state_of("0+");
    EXPECT_EQ(s.measure_projector_onto(syms("0+"), 0.999999), VerifyOutcome::Valid);
    EXPECT_NEAR(fidelity(s, state_of("0+")), 1.0, 1e-12);
}

TEST(Measurement, ProjectorOrthogonalFlipIsInvalidAndUntouched) {
    auto s = state_of("0+");
    s.apply_pauli_x(0);
    const auto before = s;
    EXPECT_EQ(s.measure_projector_onto(syms("0+"), 0.0), VerifyOutcome::Invalid);
    EXPECT_EQ(s.term_count(), 1u);
    EXPECT_NEAR(fidelity(s, state_of("1+")), 1.0, 1e-12);
    EXPECT_NEAR(fidelity(s, before), 1.0, 1e-15);
}

TEST(Measurement, ProjectorPartialOverlapMatchesDenseOracle) {
    // (1 - |0><0|)|+> renormalized, computed on the dense backend.
    auto dense = DenseState::product(syms("+"));
    EXPECT_EQ(dense.measure_projector_onto(syms("0"), 0.9), VerifyOutcome::Invalid);
    EXPECT_NEAR(std::abs(dense.amplitudes()[0]), 0.0, 1e-12);
    EXPECT_NEAR(std::abs(dense.amplitudes()[1]), 1.0, 1e-12);

    auto s = state_of("+");
    EXPECT_EQ(s.measure_projector_onto(syms("0"), 0.9), VerifyOutcome::Invalid);
    EXPECT_LE(s.term_count(), 2u);
    EXPECT_NEAR(fidelity(s, state_of("1")), 1.0, 1e-12);
    EXPECT_NEAR(fidelity(to_dense(s), dense), 1.0, 1e-12);

    auto v = state_of("+");
    EXPECT_EQ(v.measure_projector_onto(syms("0"), 0.49), VerifyOutcome::Valid);
    EXPECT_NEAR(fidelity(v, state_of("0")), 1.0, 1e-12);
}

TEST(Measurement, ProjectorDimensionMismatch) {
    EXPECT_EQ(code_of([] { state_of("0+").measure_projector_onto(syms("0"), 0.1); }),
              ErrorCode::DimensionMismatch);
}

TEST(Dense, Expansion) {
    auto d = to_dense(state_of("0"));
    expect_amp(d.amplitudes()[0], 1.0);
    expect_amp(d.amplitudes()[1], 0.0);

    auto pm = to_dense(state_of("+-"));
    expect_amp(pm.amplitudes()[0], 0.5);
    expect_amp(pm.amplitudes()[1], -0.5);
    expect_amp(pm.amplitudes()[2], 0.5);
    expect_amp(pm.amplitudes()[3], -0.5);

    EXPECT_EQ(code_of([] { to_dense(state_of(std::string(21, '0'))); }), ErrorCode::InvalidArgument);
}

TEST(Dense, RandomStatesStayNormalizedAfterMeasurements) {
    std::mt19937_64 gen(11);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        auto s = state_of(random_symbol_string(gen, 3));
        s.apply_pauli_x(trial % 3);
        s.measure_projector_onto(syms(random_symbol_string(gen, 3)), u(gen));
        s.measure_projector_onto(syms(random_symbol_string(gen, 3)), u(gen));
        EXPECT_NEAR(to_dense(s).norm_squared(), 1.0, 1e-9);
    }
}

TEST(Fidelity, Examples) {
    auto s = state_of("+1-");
    EXPECT_NEAR(fidelity(s, s), 1.0, 1e-12);
    EXPECT_NEAR(fidelity(state_of("0"), state_of("1")), 0.0, 1e-15);
    EXPECT_NEAR(fidelity(state_of("0"), state_of("+")), 0.5, 1e-12);
    EXPECT_EQ(code_of([] { fidelity(state_of("0"), state_of("00")); }), ErrorCode::DimensionMismatch);
}

TEST(Compress, Examples) {
    auto single = state_of("0+");
    single.compress();
    EXPECT_EQ(single.term_count(), 1u);
    EXPECT_NEAR(fidelity(single, state_of("0+")), 1.0, 1e-12);

    auto zero = symbol_amplitudes(QubitSymbol::Zero);
    auto one = symbol_amplitudes(QubitSymbol::One);
    auto tiny = SumOfProductsState::from_terms({{1.0, {zero}}, {1e-15, {one}}});
    tiny.compress();
    EXPECT_EQ(tiny.term_count(), 1u);

    auto dup = SumOfProductsState::from_terms({{kInvSqrt2, {zero}}, {kInvSqrt2, {zero}}});
    dup.compress();
    ASSERT_EQ(dup.term_count(), 1u);
    EXPECT_NEAR(dup.norm_squared(), 1.0, 1e-12);
    EXPECT_NEAR(fidelity(dup, state_of("0")), 1.0, 1e-12);

    // Colinear up to a phase: |-> and -|-> cancel.
    auto minus = symbol_amplitudes(QubitSymbol::Minus);
    SingleQubitVector neg_minus{-minus.a0, -minus.a1};
    auto cancel = SumOfProductsState::from_terms({{1.0, {minus, zero}}, {1.0, {neg_minus, zero}},
                                                  {1.0, {minus, one}}});
    cancel.compress();
    EXPECT_EQ(cancel.term_count(), 1u);
    EXPECT_NEAR(fidelity(cancel, state_of("-1")), 1.0, 1e-12);
}

// --- properties -----------------------------------------------------------

TEST(QStateProperty, NormPreservedAndTermGrowthBounded) {
    std::mt19937_64 gen(2024);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::uniform_int_distribution<int> coin(0, 2);
    for (int trial = 0; trial < 300; ++trial) {
        const std::size_t n = 1 + trial % 12;
        std::uniform_int_distribution<std::size_t> qubit(0, n - 1);
        auto s = state_of(random_symbol_string(gen, n));
        std::size_t projections = 0;
        for (int step = 0; step < 8; ++step) {
            switch (coin(gen)) {
                case 0: s.apply_pauli_x(qubit(gen)); break;
                case 1: s.apply_single_qubit_unitary(qubit(gen), hadamard_matrix()); break;
                default:
                    s.measure_projector_onto(syms(random_symbol_string(gen, n)), u(gen));
                    ++projections;
            }
            ASSERT_NEAR(s.norm_squared(), 1.0, 1e-9);
            ASSERT_LE(s.term_count(), projections + 1);
        }
        const auto before = s;
        s.measure_qubit(qubit(gen), u(gen) < 0.5 ? Basis::Z : Basis::X, u(gen));
        ASSERT_LE(s.term_count(), before.term_count());
        ASSERT_NEAR(s.norm_squared(), 1.0, 1e-9);

        auto c = before;
        c.compress();
        ASSERT_GE(fidelity(c, before), 1.0 - 1e-9);
    }
}

TEST(QStateProperty, BranchProbabilitiesComplete) {
    std::mt19937_64 gen(77);
    for (int trial = 0; trial < 200; ++trial) {
        const std::size_t n = 1 + trial % 6;
        auto s = state_of(random_symbol_string(gen, n));
        const auto target = syms(random_symbol_string(gen, n));
        const double p = clamp_probability(std::norm(s.inner_product_with_target(target)));
        // Unnormalized INVALID branch on the dense backend: (1-P)|psi>.
        auto dense = to_dense(s);
        auto t = DenseState::product(target);
        Amplitude c = inner_product(t, dense);
        double invalid_mass = 0.0;
        for (std::size_t i = 0; i < dense.amplitudes().size(); ++i) {
            invalid_mass += std::norm(dense.amplitudes()[i] - c * t.amplitudes()[i]);
        }
        EXPECT_NEAR(p + invalid_mass, 1.0, 1e-9);
        EXPECT_GE(p, 0.0);
        EXPECT_LE(p, 1.0);
    }
}

TEST(QStateProperty, XOnEigenstateQubitKeepsFidelity) {
    std::mt19937_64 gen(5);
    for (int trial = 0; trial < 100; ++trial) {
        const std::size_t n = 2 + trial % 10;
        auto text = random_symbol_string(gen, n);
        const std::size_t q = trial % n;
        text[q] = (trial % 2) ? '+' : '-';
        auto s = state_of(text);
        auto flipped = s;
        flipped.apply_pauli_x(q);
        EXPECT_NEAR(fidelity(s, flipped), 1.0, 1e-12);
    }
}

TEST(QStateProperty, ClampSnapsNearBoundaries) {
    EXPECT_EQ(clamp_probability(1.0 - 1e-10), 1.0);
    EXPECT_EQ(clamp_probability(1e-10), 0.0);
    EXPECT_EQ(clamp_probability(-1e-12), 0.0);
    EXPECT_EQ(clamp_probability(1.0 + 1e-12), 1.0);
    EXPECT_EQ(clamp_probability(0.25), 0.25);
}
