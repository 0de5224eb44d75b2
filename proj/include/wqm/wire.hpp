#pragma once

// Line-delimited JSON protocol for a networked mint.
//
// Every request is one JSON object on one line carrying "v" (protocol
// version) and "type". The server owns all states; a client only ever sees
// handle ids, and only the session that owns a handle may use it.
//
//   {"v":1,"type":"mint","n":N}                      -> {"type":"minted","serial":S,"handle":H}
//   {"v":1,"type":"verify","serial":S,"handle":H}    -> {"type":"verified","result":R,"handle":H'|null}
//   {"v":1,"type":"apply_x","handle":H,"qubit":i}    -> {"type":"ok","handle":H}
//   {"v":1,"type":"apply_u","handle":H,"qubit":i,"u":[[re,im],x4]} -> {"type":"ok","handle":H}
//   {"v":1,"type":"measure","handle":H,"qubit":i,"basis":"Z"|"X"}
//                                                    -> {"type":"measured","bit":b,"handle":H}
//   {"v":1,"type":"release","handle":H}              -> {"type":"ok","handle":H}
//   failure                                          -> {"type":"error","code":C,"detail":D}

#include <atomic>
#include <cstddef>
#include <cstdint>
#include <list>
#include <mutex>
#include <stdexcept>
#include <string>
#include <string_view>
#include <thread>

#include "wqm/attacks.hpp"
#include "wqm/error.hpp"
#include "wqm/mint.hpp"
#include "wqm/rng.hpp"

namespace wqm {

inline constexpr int kProtocolVersion = 1;
inline constexpr std::size_t kMaxWireQubits = 4096;
inline constexpr std::size_t kMaxLineBytes = 1 << 20;

// Wire error code for a library error, e.g. UnknownHandle -> "HANDLE_NOT_OWNED".
std::string_view wire_error_code(ErrorCode code) noexcept;

struct Address {
    std::string host;
    std::uint16_t port = 0;
};

// "host:port"; throws InvalidArgument.
Address parse_address(std::string_view text);

/// Network failure, as opposed to an error response from the server.
class TransportError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class WireServer {
public:
    WireServer(Mint& mint, MintPolicy policy, std::uint64_t seed);
    ~WireServer();
    WireServer(const WireServer&) = delete;
    WireServer& operator=(const WireServer&) = delete;

    // Binds and starts accepting. Port 0 picks an ephemeral port.
    void start(const Address& address);
    void stop();
    std::uint16_t port() const noexcept { return port_; }

    // Protocol core: one request line in, one response line out (no '\n').
    std::string handle_line(OwnerId session, std::string_view line);

    OwnerId open_session() noexcept { return next_session_++; }
    // Releases every handle the session still owns.
    void close_session(OwnerId session);

    std::uint64_t verify_messages() const noexcept { return verify_messages_; }
    Mint& mint() noexcept { return mint_; }

private:
    struct Connection {
        int fd = -1;
        std::atomic<bool> done{false};
        std::thread thread;
    };

    void accept_loop();
    void reap_finished();
    void serve_connection(Connection& conn);

    Mint& mint_;
    MintPolicy policy_;
    std::mutex rng_mutex_;
    Rng rng_;
    std::atomic<OwnerId> next_session_{1};
    std::atomic<std::uint64_t> verify_messages_{0};

    int listen_fd_ = -1;
    std::uint16_t port_ = 0;
    std::atomic<bool> running_{false};
    std::thread accept_thread_;
    std::mutex connections_mutex_;
    std::list<Connection> connections_;
};

/// One session with a remote mint. Usable both as the mint capability and as
/// the quantum workbench for adaptive_attack.
class WireClient final : public MintAccess, public QuantumOps {
public:
    explicit WireClient(const Address& address);
    ~WireClient() override;
    WireClient(const WireClient&) = delete;
    WireClient& operator=(const WireClient&) = delete;

    // Sends one raw line, returns the raw response line.
    std::string request(std::string_view line);

    std::pair<Serial, StateHandle> mint(std::size_t n);
    VerifyReply verify(const Serial& serial, StateHandle& bill) override;
    void apply_x(const StateHandle& h, std::size_t qubit) override;
    void apply_unitary(const StateHandle& h, std::size_t qubit, const Matrix2& u) override;
    int measure(const StateHandle& h, std::size_t qubit, Basis basis) override;
    void release(StateHandle& h) override;

    std::size_t verify_messages_sent() const noexcept { return verify_sent_; }

private:
    int fd_ = -1;
    std::string buffer_;
    std::size_t verify_sent_ = 0;
};

/// Runs the adaptive attack purely through protocol messages.
AttackResult remote_adaptive_attack(WireClient& client, const Serial& serial, StateHandle bill,
                                    std::size_t n);

}  // namespace wqm
