#include "wqm/mint.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "wqm/error.hpp"

namespace wqm {

namespace {

constexpr std::string_view kSerialPrefix = "WQM-";
constexpr std::size_t kSerialHexDigits = 32;
constexpr int kMaxSerialAttempts = 3;

QubitSymbol draw_symbol(Rng& rng) {
    auto idx = static_cast<int>(rng.uniform() * 4.0);
    switch (std::min(idx, 3)) {
        case 0: return QubitSymbol::Zero;
        case 1: return QubitSymbol::One;
        case 2: return QubitSymbol::Plus;
        default: return QubitSymbol::Minus;
    }
}

}  // namespace

bool Serial::is_well_formed(std::string_view text) noexcept {
    if (text.size() != kSerialPrefix.size() + kSerialHexDigits) return false;
    if (!text.starts_with(kSerialPrefix)) return false;
    return std::all_of(text.begin() + kSerialPrefix.size(), text.end(), [](char c) {
        return (c >= '0' && c <= '9') || (c >= 'a' && c <= 'f');
    });
}

Serial Serial::parse(std::string_view text) {
    if (!is_well_formed(text)) {
        throw Error(ErrorCode::ParseError,
                    "malformed serial '" + std::string(text) + "' (expected WQM- + 32 lowercase hex)");
    }
    return Serial(std::string(text));
}

Serial Serial::random(Rng& rng) {
    char buf[kSerialHexDigits + 1];
    std::snprintf(buf, sizeof buf, "%016llx%016llx",
                  static_cast<unsigned long long>(rng.next_u64()),
                  static_cast<unsigned long long>(rng.next_u64()));
    return Serial(std::string(kSerialPrefix) + buf);
}

std::string_view policy_name(MintPolicy p) noexcept {
    return p == MintPolicy::ReturnAlways ? "return-always" : "destroy-on-invalid";
}

std::optional<MintPolicy> parse_policy(std::string_view text) noexcept {
    if (text == "return-always") return MintPolicy::ReturnAlways;
    if (text == "destroy-on-invalid") return MintPolicy::DestroyOnInvalid;
    return std::nullopt;
}

// --- SecretDatabase ---------------------------------------------------------

SecretDatabase::SecretDatabase(const SecretDatabase& other) {
    std::lock_guard lock(other.mutex_);
    rows_ = other.rows_;
    index_ = other.index_;
}

SecretDatabase& SecretDatabase::operator=(const SecretDatabase& other) {
    if (this == &other) return *this;
    std::scoped_lock lock(mutex_, other.mutex_);
    rows_ = other.rows_;
    index_ = other.index_;
    return *this;
}

void SecretDatabase::add(BillSecret secret) {
    if (secret.symbols.empty()) {
        throw Error(ErrorCode::InvalidArgument, "bill must have at least one qubit");
    }
    std::lock_guard lock(mutex_);
    if (index_.contains(secret.serial)) {
        throw Error(ErrorCode::SerialCollision, "duplicate serial " + secret.serial.str());
    }
    index_.emplace(secret.serial, rows_.size());
    rows_.push_back(std::move(secret));
}

std::optional<BillSecret> SecretDatabase::find(const Serial& serial) const {
    std::lock_guard lock(mutex_);
    auto it = index_.find(serial);
    if (it == index_.end()) return std::nullopt;
    return rows_[it->second];
}

bool SecretDatabase::contains(const Serial& serial) const {
    std::lock_guard lock(mutex_);
    return index_.contains(serial);
}

std::vector<BillSecret> SecretDatabase::bills() const {
    std::lock_guard lock(mutex_);
    return rows_;
}

std::size_t SecretDatabase::size() const {
    std::lock_guard lock(mutex_);
    return rows_.size();
}

std::string SecretDatabase::to_json() const {
    nlohmann::ordered_json doc;
    doc["version"] = kDatabaseVersion;
    doc["bills"] = nlohmann::ordered_json::array();
    for (const auto& bill : bills()) {
        nlohmann::ordered_json row;
        row["serial"] = bill.serial.str();
        row["denomination"] = bill.denomination;
        row["symbols"] = format_symbols(bill.symbols);
        doc["bills"].push_back(std::move(row));
    }
    return doc.dump(2) + "\n";
}

SecretDatabase SecretDatabase::from_json(std::string_view text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw Error(ErrorCode::ParseError, std::string("database is not valid JSON: ") + e.what());
    }
    if (!doc.is_object()) throw Error(ErrorCode::ParseError, "database: top level must be an object");
    if (!doc.contains("version") || !doc["version"].is_number_integer()) {
        throw Error(ErrorCode::ParseError, "database: missing integer field 'version'");
    }
    if (int v = doc["version"].get<int>(); v != kDatabaseVersion) {
        throw Error(ErrorCode::VersionMismatch, "database version " + std::to_string(v) +
                                                    " unsupported (expected " +
                                                    std::to_string(kDatabaseVersion) + ")");
    }
    if (!doc.contains("bills") || !doc["bills"].is_array()) {
        throw Error(ErrorCode::ParseError, "database: missing array field 'bills'");
    }

    SecretDatabase db;
    const auto& bills = doc["bills"];
    for (std::size_t i = 0; i < bills.size(); ++i) {
        const std::string where = "database: bills[" + std::to_string(i) + "]";
        const auto& row = bills[i];
        if (!row.is_object()) throw Error(ErrorCode::ParseError, where + " must be an object");
        auto field = [&](const char* name) -> std::string {
            if (!row.contains(name) || !row[name].is_string()) {
                throw Error(ErrorCode::ParseError, where + "." + name + " must be a string");
            }
            return row[name].get<std::string>();
        };
        std::string serial_text = field("serial");
        std::string denomination = field("denomination");
        std::string symbols_text = field("symbols");

        if (!Serial::is_well_formed(serial_text)) {
            throw Error(ErrorCode::ParseError, where + ".serial: malformed serial '" + serial_text + "'");
        }
        std::vector<QubitSymbol> symbols;
        try {
            symbols = parse_symbols(symbols_text);
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, where + ".symbols: " + e.what());
        }
        if (symbols.empty()) throw Error(ErrorCode::ParseError, where + ".symbols: empty");
        try {
            db.add({Serial::parse(serial_text), std::move(symbols), std::move(denomination)});
        } catch (const Error& e) {
            throw Error(ErrorCode::ParseError, where + ".serial: " + e.what());
        }
    }
    return db;
}

void SecretDatabase::save(const std::filesystem::path& path) const {
    const std::string text = to_json();
    std::filesystem::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw Error(ErrorCode::Io, "cannot write " + tmp.string());
        out << text;
        if (!out.flush()) throw Error(ErrorCode::Io, "write failed for " + tmp.string());
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw Error(ErrorCode::Io, "cannot replace " + path.string() + ": " + ec.message());
}

SecretDatabase SecretDatabase::load(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error(ErrorCode::Io, "cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return from_json(buf.str());
}

// --- Mint -------------------------------------------------------------------

std::pair<BillSecret, StateHandle> Mint::mint_bill(std::size_t n, std::string denomination,
                                                   Rng& rng, OwnerId owner) {
    if (n == 0) throw Error(ErrorCode::InvalidArgument, "bill needs n >= 1 qubits");
    std::vector<QubitSymbol> symbols;
    symbols.reserve(n);
    for (std::size_t i = 0; i < n; ++i) symbols.push_back(draw_symbol(rng));

    for (int attempt = 1;; ++attempt) {
        BillSecret secret{Serial::random(rng), symbols, denomination};
        try {
            db_.add(secret);
        } catch (const Error& e) {
            if (e.code() != ErrorCode::SerialCollision || attempt >= kMaxSerialAttempts) throw;
            continue;
        }
        StateHandle handle = registry_.insert(make_product_state(secret.symbols), owner);
        return {std::move(secret), std::move(handle)};
    }
}

StateHandle Mint::materialize_bill(const Serial& serial, OwnerId owner) {
    auto secret = db_.find(serial);
    if (!secret) throw Error(ErrorCode::UnknownSerial, "unknown serial " + serial.str());
    return registry_.insert(make_product_state(secret->symbols), owner);
}

VerifyResult Mint::verify(const Serial& serial, StateHandle& handle, MintPolicy policy, Rng& rng,
                          OwnerId owner) {
    auto secret = db_.find(serial);
    if (!secret) throw Error(ErrorCode::UnknownSerial, "unknown serial " + serial.str());

    SumOfProductsState state = registry_.take(handle, owner, secret->symbols.size());

    const double p = clamp_probability(std::norm(state.inner_product_with_target(secret->symbols)));
    const VerifyOutcome outcome = state.measure_projector_onto(secret->symbols, rng.uniform());

    VerifyResult result{outcome, StateHandle{}, p};
    if (outcome == VerifyOutcome::Valid || policy == MintPolicy::ReturnAlways) {
        result.handle = registry_.insert(std::move(state), owner);
    }

    std::lock_guard lock(stats_mutex_);
    auto& s = stats_[serial.str()];
    ++s.total;
    ++(outcome == VerifyOutcome::Valid ? s.valid : s.invalid);
    return result;
}

QueryStats Mint::stats(const Serial& serial) const {
    std::lock_guard lock(stats_mutex_);
    auto it = stats_.find(serial.str());
    return it == stats_.end() ? QueryStats{} : it->second;
}

}  // namespace wqm
