#pragma once

// Linearly owned handles to simulated quantum states.
//
// The registry is the only place amplitudes live. Callers hold StateHandle
// values, which are move-only: a handle id moves from live to consumed at
// most once and is never reissued. Nothing in the API copies a live state
// into a second handle.

#include <cstddef>
#include <cstdint>
#include <memory>
#include <mutex>
#include <optional>
#include <unordered_map>
#include <utility>
#include <vector>

#include "wqm/qstate.hpp"

namespace wqm {

using HandleId = std::uint64_t;
using OwnerId = std::uint64_t;

inline constexpr OwnerId kLocalOwner = 0;

class StateHandle {
public:
    StateHandle() = default;
    // Adopts a raw id, e.g. one received over the wire.
    explicit StateHandle(HandleId id) noexcept : id_(id) {}

    StateHandle(const StateHandle&) = delete;
    StateHandle& operator=(const StateHandle&) = delete;
    StateHandle(StateHandle&& other) noexcept : id_(std::exchange(other.id_, 0)) {}
    StateHandle& operator=(StateHandle&& other) noexcept {
        id_ = std::exchange(other.id_, 0);
        return *this;
    }

    HandleId id() const noexcept { return id_; }
    bool empty() const noexcept { return id_ == 0; }
    // Gives up the id without consuming it in the registry.
    HandleId release() noexcept { return std::exchange(id_, 0); }

private:
    HandleId id_ = 0;
};

enum class HandleStatus { Unknown, Live, Consumed };

class StateRegistry {
public:
    StateRegistry() = default;
    StateRegistry(const StateRegistry&) = delete;
    StateRegistry& operator=(const StateRegistry&) = delete;

    StateHandle insert(SumOfProductsState state, OwnerId owner = kLocalOwner);

    // Consumes the handle and hands back its state. `expected_qubits`, when
    // set, is checked before anything is consumed. On any error the registry
    // is unchanged and `handle` keeps its id.
    SumOfProductsState take(StateHandle& handle, OwnerId owner = kLocalOwner,
                            std::optional<std::size_t> expected_qubits = std::nullopt);

    // Consumes the handle and deletes its state.
    void release(StateHandle& handle, OwnerId owner = kLocalOwner);

    void apply_pauli_x(const StateHandle& handle, std::size_t qubit, OwnerId owner = kLocalOwner);
    void apply_unitary(const StateHandle& handle, std::size_t qubit, const Matrix2& u,
                       OwnerId owner = kLocalOwner);
    int measure(const StateHandle& handle, std::size_t qubit, Basis basis, double draw,
                OwnerId owner = kLocalOwner);

    // Always throws: NoCloning for a live handle, HandleConsumed or
    // UnknownHandle otherwise. The registry is never modified.
    [[noreturn]] void duplicate_handle_attempt(const StateHandle& handle,
                                               OwnerId owner = kLocalOwner) const;

    HandleStatus status(HandleId id) const;
    std::size_t num_qubits(const StateHandle& handle, OwnerId owner = kLocalOwner) const;

    // Copy of the amplitudes behind a handle. Simulator-side inspection for
    // tests and experiment scoring; never exposed to wire clients.
    SumOfProductsState inspect(const StateHandle& handle) const;

    // Releases every live handle owned by `owner`; returns how many.
    std::size_t release_owned(OwnerId owner);

    std::size_t live_count() const;

    // Checks linearity bookkeeping: live and consumed id sets are disjoint,
    // every live entry has a distinct state object, ids never exceed the
    // issue counter. Returns false on any violation.
    bool audit() const;

private:
    struct Entry {
        std::mutex mutex;
        bool live = true;
        OwnerId owner = kLocalOwner;
        SumOfProductsState state;

        Entry(SumOfProductsState s, OwnerId o) : owner(o), state(std::move(s)) {}
    };

    std::shared_ptr<Entry> find_live(HandleId id, OwnerId owner) const;
    [[noreturn]] void throw_missing(HandleId id, OwnerId owner) const;
    std::shared_ptr<Entry> consume(HandleId id, OwnerId owner,
                                   std::optional<std::size_t> expected_qubits);

    mutable std::mutex mutex_;
    HandleId next_id_ = 1;
    std::unordered_map<HandleId, std::shared_ptr<Entry>> live_;
    std::unordered_map<HandleId, OwnerId> consumed_;
};

}  // namespace wqm
