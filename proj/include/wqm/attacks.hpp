#pragma once

// Counterfeiting strategies.
//
// The adaptive attack talks to the mint and to its own quantum workbench only
// through the MintAccess and QuantumOps capabilities, so the same code runs
// against an in-process mint and against a remote one over the wire.

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "wqm/mint.hpp"
#include "wqm/qstate.hpp"
#include "wqm/registry.hpp"
#include "wqm/rng.hpp"

namespace wqm {

enum class StrategyKind { AdaptiveOracle, GuessRandomSymbols, MeasureRandomBasisCopy };

std::string_view strategy_name(StrategyKind k) noexcept;  // "adaptive", "guess", "measure-copy"
std::optional<StrategyKind> parse_strategy(std::string_view text) noexcept;

struct VerifyReply {
    VerifyOutcome outcome;
    StateHandle handle;  // empty if the mint kept the state
    // Known only for an in-process mint.
    std::optional<double> valid_probability;
};

class MintAccess {
public:
    virtual ~MintAccess() = default;
    // Consumes `bill` on success.
    virtual VerifyReply verify(const Serial& serial, StateHandle& bill) = 0;
};

class QuantumOps {
public:
    virtual ~QuantumOps() = default;
    virtual void apply_x(const StateHandle& h, std::size_t qubit) = 0;
    virtual void apply_unitary(const StateHandle& h, std::size_t qubit, const Matrix2& u) = 0;
    virtual int measure(const StateHandle& h, std::size_t qubit, Basis basis) = 0;
    virtual void release(StateHandle& h) = 0;
};

class LocalMintAccess final : public MintAccess {
public:
    LocalMintAccess(Mint& mint, MintPolicy policy, Rng& rng)
        : mint_(mint), policy_(policy), rng_(rng) {}

    VerifyReply verify(const Serial& serial, StateHandle& bill) override;

private:
    Mint& mint_;
    MintPolicy policy_;
    Rng& rng_;
};

class LocalWorkbench final : public QuantumOps {
public:
    LocalWorkbench(StateRegistry& registry, Rng& rng) : registry_(registry), rng_(rng) {}

    void apply_x(const StateHandle& h, std::size_t qubit) override;
    void apply_unitary(const StateHandle& h, std::size_t qubit, const Matrix2& u) override;
    int measure(const StateHandle& h, std::size_t qubit, Basis basis) override;
    void release(StateHandle& h) override;

private:
    StateRegistry& registry_;
    Rng& rng_;
};

struct AttackRecord {
    std::size_t qubit;
    VerifyOutcome outcome;
    // Unset when the mint destroyed the bill before the qubit could be read.
    std::optional<QubitSymbol> inferred;

    friend bool operator==(const AttackRecord&, const AttackRecord&) = default;
};

struct AttackTranscript {
    Serial serial;
    std::vector<AttackRecord> records;
    std::size_t queries_used = 0;
    // Full secret, indexed by qubit; empty unless every round completed.
    std::vector<QubitSymbol> learned;
    bool bill_recovered = false;

    friend bool operator==(const AttackTranscript&, const AttackTranscript&) = default;
};

std::string transcript_to_json(const AttackTranscript& t);
AttackTranscript transcript_from_json(std::string_view text);

struct AttackResult {
    AttackTranscript transcript;
    // The attacked bill, intact, when bill_recovered.
    StateHandle bill;
};

/// Learns the bill one qubit per query: flip qubit i with X and submit.
/// INVALID means qubit i is a Z eigenstate (flip it back, measure Z); VALID
/// means it is an X eigenstate (measure X). `order` defaults to 0..n-1.
/// Throws InternalConsistency if the mint reports a non-forced branch.
AttackResult adaptive_attack(MintAccess& mint, QuantumOps& ops, const Serial& serial,
                             StateHandle bill, std::size_t n,
                             std::span<const std::size_t> order = {});

std::vector<StateHandle> forge_copies(StateRegistry& registry,
                                      std::span<const QubitSymbol> learned, std::size_t count,
                                      OwnerId owner = kLocalOwner);

struct BaselineForgery {
    StateHandle counterfeit;
    // MeasureRandomBasisCopy only: the measured, damaged genuine bill.
    StateHandle damaged_original;
};

/// GuessRandomSymbols ignores `genuine` and draws n uniform symbols.
/// MeasureRandomBasisCopy measures every qubit of `genuine` in a uniformly
/// random basis and encodes the outcomes in a fresh product state.
BaselineForgery baseline_attack(StrategyKind kind, StateRegistry& registry, StateHandle genuine,
                                std::size_t n, Rng& rng);

/// Per-qubit pass probability by enumeration over true symbol, strategy
/// randomness and measurement outcome, raised to the n-th power.
double analytic_pass_prob(StrategyKind kind, std::size_t n);

}  // namespace wqm
