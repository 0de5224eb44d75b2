#include "wqm/registry.hpp"

#include <string>
#include <unordered_set>

#include "wqm/error.hpp"

namespace wqm {

StateHandle StateRegistry::insert(SumOfProductsState state, OwnerId owner) {
    auto entry = std::make_shared<Entry>(std::move(state), owner);
    std::lock_guard lock(mutex_);
    HandleId id = next_id_++;
    live_.emplace(id, std::move(entry));
    return StateHandle(id);
}

void StateRegistry::throw_missing(HandleId id, OwnerId owner) const {
    if (auto it = consumed_.find(id); it != consumed_.end()) {
        if (it->second != owner) {
            throw Error(ErrorCode::HandleNotOwned, "handle " + std::to_string(id) + " not owned");
        }
        throw Error(ErrorCode::HandleConsumed, "handle " + std::to_string(id) + " already consumed");
    }
    throw Error(ErrorCode::UnknownHandle, "unknown handle " + std::to_string(id));
}

std::shared_ptr<StateRegistry::Entry> StateRegistry::find_live(HandleId id, OwnerId owner) const {
    std::lock_guard lock(mutex_);
    auto it = live_.find(id);
    if (it == live_.end()) throw_missing(id, owner);
    if (it->second->owner != owner) {
        throw Error(ErrorCode::HandleNotOwned, "handle " + std::to_string(id) + " not owned");
    }
    return it->second;
}

std::shared_ptr<StateRegistry::Entry> StateRegistry::consume(
    HandleId id, OwnerId owner, std::optional<std::size_t> expected_qubits) {
    std::shared_ptr<Entry> entry;
    {
        std::lock_guard lock(mutex_);
        auto it = live_.find(id);
        if (it == live_.end()) throw_missing(id, owner);
        if (it->second->owner != owner) {
            throw Error(ErrorCode::HandleNotOwned, "handle " + std::to_string(id) + " not owned");
        }
        // Qubit count is fixed for the lifetime of an entry.
        const std::size_t n = it->second->state.num_qubits();
        if (expected_qubits && *expected_qubits != n) {
            throw Error(ErrorCode::DimensionMismatch,
                        "handle holds " + std::to_string(n) + " qubits, expected " +
                            std::to_string(*expected_qubits));
        }
        entry = std::move(it->second);
        live_.erase(it);
        consumed_.emplace(id, owner);
    }
    // Waits for any in-flight operation on this entry.
    std::lock_guard entry_lock(entry->mutex);
    entry->live = false;
    return entry;
}

SumOfProductsState StateRegistry::take(StateHandle& handle, OwnerId owner,
                                       std::optional<std::size_t> expected_qubits) {
    auto entry = consume(handle.id(), owner, expected_qubits);
    handle.release();
    return std::move(entry->state);
}

void StateRegistry::release(StateHandle& handle, OwnerId owner) {
    consume(handle.id(), owner, std::nullopt);
    handle.release();
}

void StateRegistry::apply_pauli_x(const StateHandle& handle, std::size_t qubit, OwnerId owner) {
    auto entry = find_live(handle.id(), owner);
    std::lock_guard lock(entry->mutex);
    if (!entry->live) throw_missing(handle.id(), owner);
    entry->state.apply_pauli_x(qubit);
}

void StateRegistry::apply_unitary(const StateHandle& handle, std::size_t qubit, const Matrix2& u,
                                  OwnerId owner) {
    auto entry = find_live(handle.id(), owner);
    std::lock_guard lock(entry->mutex);
    if (!entry->live) throw_missing(handle.id(), owner);
    entry->state.apply_single_qubit_unitary(qubit, u);
}

int StateRegistry::measure(const StateHandle& handle, std::size_t qubit, Basis basis, double draw,
                           OwnerId owner) {
    auto entry = find_live(handle.id(), owner);
    std::lock_guard lock(entry->mutex);
    if (!entry->live) throw_missing(handle.id(), owner);
    return entry->state.measure_qubit(qubit, basis, draw);
}

void StateRegistry::duplicate_handle_attempt(const StateHandle& handle, OwnerId owner) const {
    find_live(handle.id(), owner);
    throw Error(ErrorCode::NoCloning,
                "handle " + std::to_string(handle.id()) + " cannot be duplicated (no-cloning)");
}

HandleStatus StateRegistry::status(HandleId id) const {
    std::lock_guard lock(mutex_);
    if (live_.contains(id)) return HandleStatus::Live;
    if (consumed_.contains(id)) return HandleStatus::Consumed;
    return HandleStatus::Unknown;
}

std::size_t StateRegistry::num_qubits(const StateHandle& handle, OwnerId owner) const {
    return find_live(handle.id(), owner)->state.num_qubits();
}

SumOfProductsState StateRegistry::inspect(const StateHandle& handle) const {
    std::shared_ptr<Entry> entry;
    {
        std::lock_guard lock(mutex_);
        auto it = live_.find(handle.id());
        if (it == live_.end()) throw_missing(handle.id(), kLocalOwner);
        entry = it->second;
    }
    std::lock_guard lock(entry->mutex);
    return entry->state;
}

std::size_t StateRegistry::release_owned(OwnerId owner) {
    std::vector<HandleId> ids;
    {
        std::lock_guard lock(mutex_);
        for (const auto& [id, entry] : live_) {
            if (entry->owner == owner) ids.push_back(id);
        }
    }
    std::size_t released = 0;
    for (HandleId id : ids) {
        StateHandle h(id);
        try {
            release(h, owner);
            ++released;
        } catch (const Error&) {
            // Consumed concurrently by the owner itself.
        }
    }
    return released;
}

std::size_t StateRegistry::live_count() const {
    std::lock_guard lock(mutex_);
    return live_.size();
}

bool StateRegistry::audit() const {
    std::lock_guard lock(mutex_);
    std::unordered_set<const Entry*> seen;
    for (const auto& [id, entry] : live_) {
        if (id == 0 || id >= next_id_) return false;
        if (consumed_.contains(id)) return false;
        if (!entry || !seen.insert(entry.get()).second) return false;
    }
    for (const auto& [id, owner] : consumed_) {
        if (id == 0 || id >= next_id_) return false;
    }
    return true;
}

}  // namespace wqm
