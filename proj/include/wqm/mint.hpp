#pragma once

// The mint: bill issuance, the secret database, and the verification oracle.

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "wqm/qstate.hpp"
#include "wqm/registry.hpp"
#include "wqm/rng.hpp"

namespace wqm {

/// Bill serial number: "WQM-" followed by 32 lowercase hex digits.
class Serial {
public:
    // Throws Error(ParseError) if `text` does not match the format.
    static Serial parse(std::string_view text);
    // 128 random bits, two 64-bit draws from `rng`.
    static Serial random(Rng& rng);

    static bool is_well_formed(std::string_view text) noexcept;

    const std::string& str() const noexcept { return value_; }

    friend bool operator==(const Serial&, const Serial&) = default;
    friend auto operator<=>(const Serial&, const Serial&) = default;

private:
    explicit Serial(std::string value) : value_(std::move(value)) {}
    std::string value_;
};

struct BillSecret {
    Serial serial;
    std::vector<QubitSymbol> symbols;
    std::string denomination;

    friend bool operator==(const BillSecret&, const BillSecret&) = default;
};

enum class MintPolicy { ReturnAlways, DestroyOnInvalid };

std::string_view policy_name(MintPolicy p) noexcept;  // "return-always" / "destroy-on-invalid"
std::optional<MintPolicy> parse_policy(std::string_view text) noexcept;

struct QueryStats {
    std::uint64_t total = 0;
    std::uint64_t valid = 0;
    std::uint64_t invalid = 0;
};

inline constexpr int kDatabaseVersion = 1;

/// Serial -> secret rows, in insertion order. Safe for concurrent use.
class SecretDatabase {
public:
    SecretDatabase() = default;
    SecretDatabase(const SecretDatabase& other);
    SecretDatabase& operator=(const SecretDatabase& other);

    // Throws SerialCollision if the serial is already present.
    void add(BillSecret secret);
    std::optional<BillSecret> find(const Serial& serial) const;
    bool contains(const Serial& serial) const;
    std::vector<BillSecret> bills() const;
    std::size_t size() const;

    // Versioned JSON: {"version": 1, "bills": [{"serial", "denomination", "symbols"}]}
    std::string to_json() const;
    static SecretDatabase from_json(std::string_view text);

    void save(const std::filesystem::path& path) const;
    static SecretDatabase load(const std::filesystem::path& path);

    friend bool operator==(const SecretDatabase& a, const SecretDatabase& b) {
        return a.bills() == b.bills();
    }

private:
    mutable std::mutex mutex_;
    std::vector<BillSecret> rows_;
    std::map<Serial, std::size_t> index_;
};

struct VerifyResult {
    VerifyOutcome outcome;
    // Empty when the policy destroyed the submitted state.
    StateHandle handle;
    // Probability of VALID after clamping. Simulator diagnostic: a physical
    // mint would not reveal it.
    double valid_probability;
};

class Mint {
public:
    Mint() = default;
    explicit Mint(SecretDatabase db) : db_(std::move(db)) {}
    Mint(const Mint&) = delete;
    Mint& operator=(const Mint&) = delete;

    /// Draws n i.i.d. uniform symbols (one uniform draw each), then a fresh
    /// serial, stores the secret and registers the genuine bill state.
    /// Throws InvalidArgument for n == 0; SerialCollision after 3 clashes.
    std::pair<BillSecret, StateHandle> mint_bill(std::size_t n, std::string denomination,
                                                 Rng& rng, OwnerId owner = kLocalOwner);

    /// Registers a fresh genuine state for an existing serial, e.g. a bill
    /// loaded from a database file.
    StateHandle materialize_bill(const Serial& serial, OwnerId owner = kLocalOwner);

    /// Measures the projector onto the stored bill state. Consumes `handle`
    /// on success; on UnknownSerial, HandleConsumed, HandleNotOwned or
    /// DimensionMismatch nothing changes and `handle` keeps its id.
    VerifyResult verify(const Serial& serial, StateHandle& handle, MintPolicy policy, Rng& rng,
                        OwnerId owner = kLocalOwner);

    QueryStats stats(const Serial& serial) const;

    SecretDatabase& database() noexcept { return db_; }
    const SecretDatabase& database() const noexcept { return db_; }
    StateRegistry& registry() noexcept { return registry_; }
    const StateRegistry& registry() const noexcept { return registry_; }

private:
    SecretDatabase db_;
    StateRegistry registry_;
    mutable std::mutex stats_mutex_;
    std::unordered_map<std::string, QueryStats> stats_;
};

}  // namespace wqm
