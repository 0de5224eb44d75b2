#include "wqm/attacks.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "json.hpp"
#include "wqm/error.hpp"

namespace wqm {

namespace {

constexpr std::array<QubitSymbol, 4> kAlphabet = {QubitSymbol::Zero, QubitSymbol::One,
                                                  QubitSymbol::Plus, QubitSymbol::Minus};

double overlap_sq(QubitSymbol a, QubitSymbol b) {
    return std::norm(overlap(symbol_amplitudes(a), symbol_amplitudes(b)));
}

bool is_forced(double p) { return p == 0.0 || p == 1.0; }

}  // namespace

std::string_view strategy_name(StrategyKind k) noexcept {
    switch (k) {
        case StrategyKind::AdaptiveOracle: return "adaptive";
        case StrategyKind::GuessRandomSymbols: return "guess";
        case StrategyKind::MeasureRandomBasisCopy: return "measure-copy";
    }
    return "unknown";
}

std::optional<StrategyKind> parse_strategy(std::string_view text) noexcept {
    if (text == "adaptive") return StrategyKind::AdaptiveOracle;
    if (text == "guess") return StrategyKind::GuessRandomSymbols;
    if (text == "measure-copy") return StrategyKind::MeasureRandomBasisCopy;
    return std::nullopt;
}

VerifyReply LocalMintAccess::verify(const Serial& serial, StateHandle& bill) {
    VerifyResult r = mint_.verify(serial, bill, policy_, rng_);
    return {r.outcome, std::move(r.handle), r.valid_probability};
}

void LocalWorkbench::apply_x(const StateHandle& h, std::size_t qubit) {
    registry_.apply_pauli_x(h, qubit);
}

void LocalWorkbench::apply_unitary(const StateHandle& h, std::size_t qubit, const Matrix2& u) {
    registry_.apply_unitary(h, qubit, u);
}

int LocalWorkbench::measure(const StateHandle& h, std::size_t qubit, Basis basis) {
    return registry_.measure(h, qubit, basis, rng_.uniform());
}

void LocalWorkbench::release(StateHandle& h) { registry_.release(h); }

AttackResult adaptive_attack(MintAccess& mint, QuantumOps& ops, const Serial& serial,
                             StateHandle bill, std::size_t n, std::span<const std::size_t> order) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "attack needs n >= 1");
    std::vector<std::size_t> rounds(n);
    if (order.empty()) {
        std::iota(rounds.begin(), rounds.end(), std::size_t{0});
    } else {
        std::vector<bool> seen(n, false);
        if (order.size() != n) throw Error(ErrorCode::InvalidArgument, "order must cover every qubit");
        for (std::size_t q : order) {
            if (q >= n || seen[q]) throw Error(ErrorCode::InvalidArgument, "order is not a permutation");
            seen[q] = true;
        }
        rounds.assign(order.begin(), order.end());
    }

    AttackResult result{AttackTranscript{serial, {}, 0, {}, false}, StateHandle{}};
    auto& t = result.transcript;
    std::vector<std::optional<QubitSymbol>> known(n);

    for (std::size_t qubit : rounds) {
        ops.apply_x(bill, qubit);
        VerifyReply reply = mint.verify(serial, bill);
        ++t.queries_used;
        if (reply.valid_probability && !is_forced(*reply.valid_probability)) {
            throw Error(ErrorCode::InternalConsistency,
                        "verify of X-flipped bill was not deterministic (p=" +
                            std::to_string(*reply.valid_probability) + ")");
        }
        if (reply.handle.empty()) {
            if (reply.outcome == VerifyOutcome::Valid) {
                throw Error(ErrorCode::InternalConsistency, "mint kept a VALID bill");
            }
            t.records.push_back({qubit, reply.outcome, std::nullopt});
            return result;
        }
        bill = std::move(reply.handle);

        QubitSymbol symbol;
        if (reply.outcome == VerifyOutcome::Invalid) {
            // Z eigenstate: the flip was rejected untouched; undo it, then read Z.
            ops.apply_x(bill, qubit);
            symbol = symbol_for(Basis::Z, ops.measure(bill, qubit, Basis::Z));
        } else {
            // X eigenstate: the bill came back undamaged. Measuring X leaves
            // the qubit in the observed eigenstate, i.e. the secret symbol.
            symbol = symbol_for(Basis::X, ops.measure(bill, qubit, Basis::X));
        }
        t.records.push_back({qubit, reply.outcome, symbol});
        known[qubit] = symbol;
    }

    t.learned.reserve(n);
    for (const auto& s : known) t.learned.push_back(*s);
    t.bill_recovered = true;
    result.bill = std::move(bill);
    return result;
}

std::vector<StateHandle> forge_copies(StateRegistry& registry, std::span<const QubitSymbol> learned,
                                      std::size_t count, OwnerId owner) {
    std::vector<StateHandle> copies;
    copies.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        copies.push_back(registry.insert(make_product_state(learned), owner));
    }
    return copies;
}

BaselineForgery baseline_attack(StrategyKind kind, StateRegistry& registry, StateHandle genuine,
                                std::size_t n, Rng& rng) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "baseline needs n >= 1");
    std::vector<QubitSymbol> symbols;
    symbols.reserve(n);
    switch (kind) {
        case StrategyKind::GuessRandomSymbols:
            for (std::size_t i = 0; i < n; ++i) {
                symbols.push_back(kAlphabet[std::min(static_cast<int>(rng.uniform() * 4.0), 3)]);
            }
            return {registry.insert(make_product_state(symbols)), std::move(genuine)};
        case StrategyKind::MeasureRandomBasisCopy: {
            if (registry.num_qubits(genuine) != n) {
                throw Error(ErrorCode::DimensionMismatch, "genuine bill size differs from n");
            }
            for (std::size_t i = 0; i < n; ++i) {
                Basis basis = rng.uniform() < 0.5 ? Basis::Z : Basis::X;
                int bit = registry.measure(genuine, i, basis, rng.uniform());
                symbols.push_back(symbol_for(basis, bit));
            }
            return {registry.insert(make_product_state(symbols)), std::move(genuine)};
        }
        case StrategyKind::AdaptiveOracle:
            break;
    }
    throw Error(ErrorCode::InvalidArgument, "baseline_attack needs a baseline strategy");
}

double analytic_pass_prob(StrategyKind kind, std::size_t n) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
    double per_qubit = 0.0;
    switch (kind) {
        case StrategyKind::GuessRandomSymbols:
            for (auto truth : kAlphabet) {
                for (auto guess : kAlphabet) per_qubit += overlap_sq(truth, guess) / 16.0;
            }
            break;
        case StrategyKind::MeasureRandomBasisCopy:
            for (auto truth : kAlphabet) {
                for (Basis basis : {Basis::Z, Basis::X}) {
                    for (int bit : {0, 1}) {
                        QubitSymbol copy = symbol_for(basis, bit);
                        double p_outcome = overlap_sq(copy, truth);
                        per_qubit += 0.125 * p_outcome * overlap_sq(truth, copy);
                    }
                }
            }
            break;
        case StrategyKind::AdaptiveOracle:
            throw Error(ErrorCode::InvalidArgument,
                        "adaptive attack has no power-law pass probability");
    }
    return std::pow(per_qubit, static_cast<double>(n));
}

std::string transcript_to_json(const AttackTranscript& t) {
    nlohmann::ordered_json doc;
    doc["serial"] = t.serial.str();
    doc["records"] = nlohmann::ordered_json::array();
    for (const auto& r : t.records) {
        nlohmann::ordered_json row;
        row["qubit"] = r.qubit;
        row["outcome"] = outcome_name(r.outcome);
        if (r.inferred) {
            row["inferred"] = std::string(1, symbol_char(*r.inferred));
        } else {
            row["inferred"] = nullptr;
        }
        doc["records"].push_back(std::move(row));
    }
    doc["queries_used"] = t.queries_used;
    doc["learned"] = format_symbols(t.learned);
    doc["bill_recovered"] = t.bill_recovered;
    return doc.dump(2) + "\n";
}

AttackTranscript transcript_from_json(std::string_view text) {
    try {
        auto doc = nlohmann::json::parse(text);
        AttackTranscript t{Serial::parse(doc.at("serial").get<std::string>()), {}, 0, {}, false};
        for (const auto& row : doc.at("records")) {
            AttackRecord r{row.at("qubit").get<std::size_t>(), VerifyOutcome::Invalid, std::nullopt};
            auto outcome = row.at("outcome").get<std::string>();
            if (outcome == "VALID") {
                r.outcome = VerifyOutcome::Valid;
            } else if (outcome != "INVALID") {
                throw Error(ErrorCode::ParseError, "bad outcome '" + outcome + "'");
            }
            if (!row.at("inferred").is_null()) {
                auto sym = parse_symbols(row.at("inferred").get<std::string>());
                if (sym.size() != 1) throw Error(ErrorCode::ParseError, "inferred must be one symbol");
                r.inferred = sym.front();
            }
            t.records.push_back(r);
        }
        t.queries_used = doc.at("queries_used").get<std::size_t>();
        t.learned = parse_symbols(doc.at("learned").get<std::string>());
        t.bill_recovered = doc.at("bill_recovered").get<bool>();
        return t;
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("transcript: ") + e.what());
    }
}

}  // namespace wqm
