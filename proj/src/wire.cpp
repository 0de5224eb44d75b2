#include "wqm/wire.hpp"

#include <arpa/inet.h>
#include <netdb.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "json.hpp"
#include "wqm/error.hpp"

namespace wqm {

namespace {

using ojson = nlohmann::ordered_json;

constexpr ErrorCode kWireCodes[] = {
    ErrorCode::UnknownSerial,   ErrorCode::HandleNotOwned, ErrorCode::HandleConsumed,
    ErrorCode::DimensionMismatch, ErrorCode::NonUnitary,   ErrorCode::BadRequest,
    ErrorCode::UnsupportedVersion, ErrorCode::InternalConsistency,
};

ErrorCode error_code_from_wire(std::string_view name) {
    for (auto c : kWireCodes) {
        if (wire_error_code(c) == name) return c;
    }
    return ErrorCode::BadRequest;
}

std::string error_response(std::string_view code, const std::string& detail) {
    ojson r;
    r["type"] = "error";
    r["code"] = code;
    r["detail"] = detail;
    return r.dump();
}

bool send_all(int fd, std::string_view data) {
    while (!data.empty()) {
        ssize_t n = ::send(fd, data.data(), data.size(), MSG_NOSIGNAL);
        if (n < 0) {
            if (errno == EINTR) continue;
            return false;
        }
        data.remove_prefix(static_cast<std::size_t>(n));
    }
    return true;
}

// Reads until a full line is buffered. Returns false on EOF or error.
bool read_line(int fd, std::string& buffer, std::string& line) {
    for (;;) {
        if (auto pos = buffer.find('\n'); pos != std::string::npos) {
            line = buffer.substr(0, pos);
            buffer.erase(0, pos + 1);
            if (!line.empty() && line.back() == '\r') line.pop_back();
            return true;
        }
        if (buffer.size() > kMaxLineBytes) {
            line = std::move(buffer);
            buffer.clear();
            return true;
        }
        char chunk[4096];
        ssize_t n = ::recv(fd, chunk, sizeof chunk, 0);
        if (n < 0 && errno == EINTR) continue;
        if (n <= 0) return false;
        buffer.append(chunk, static_cast<std::size_t>(n));
    }
}

std::uint64_t require_uint(const nlohmann::json& req, const char* field) {
    if (!req.contains(field) || !req[field].is_number_unsigned()) {
        throw Error(ErrorCode::BadRequest, std::string("field '") + field + "' must be a non-negative integer");
    }
    return req[field].get<std::uint64_t>();
}

std::string require_string(const nlohmann::json& req, const char* field) {
    if (!req.contains(field) || !req[field].is_string()) {
        throw Error(ErrorCode::BadRequest, std::string("field '") + field + "' must be a string");
    }
    return req[field].get<std::string>();
}

Matrix2 require_matrix(const nlohmann::json& req) {
    if (!req.contains("u") || !req["u"].is_array() || req["u"].size() != 4) {
        throw Error(ErrorCode::BadRequest, "field 'u' must be an array of 4 [re,im] pairs");
    }
    Matrix2 u;
    for (std::size_t k = 0; k < 4; ++k) {
        const auto& e = req["u"][k];
        if (!e.is_array() || e.size() != 2 || !e[0].is_number() || !e[1].is_number()) {
            throw Error(ErrorCode::BadRequest, "field 'u' must be an array of 4 [re,im] pairs");
        }
        u[k] = Amplitude(e[0].get<double>(), e[1].get<double>());
    }
    return u;
}

ojson ok_response(std::uint64_t handle) {
    ojson r;
    r["type"] = "ok";
    r["handle"] = handle;
    return r;
}

}  // namespace

std::string_view wire_error_code(ErrorCode code) noexcept {
    switch (code) {
        case ErrorCode::UnknownHandle:
        case ErrorCode::HandleNotOwned: return "HANDLE_NOT_OWNED";
        case ErrorCode::InvalidArgument:
        case ErrorCode::ParseError:
        case ErrorCode::BadRequest: return "BAD_REQUEST";
        default: return error_code_name(code);
    }
}

Address parse_address(std::string_view text) {
    auto colon = text.rfind(':');
    if (colon == std::string_view::npos || colon == 0 || colon + 1 == text.size()) {
        throw Error(ErrorCode::InvalidArgument, "address must be host:port");
    }
    unsigned long port = 0;
    try {
        std::size_t used = 0;
        std::string p(text.substr(colon + 1));
        port = std::stoul(p, &used);
        if (used != p.size() || port > 65535) throw std::out_of_range("port");
    } catch (const std::exception&) {
        throw Error(ErrorCode::InvalidArgument, "bad port in '" + std::string(text) + "'");
    }
    return {std::string(text.substr(0, colon)), static_cast<std::uint16_t>(port)};
}

// --- server -----------------------------------------------------------------

WireServer::WireServer(Mint& mint, MintPolicy policy, std::uint64_t seed)
    : mint_(mint), policy_(policy), rng_(seed) {}

WireServer::~WireServer() { stop(); }

std::string WireServer::handle_line(OwnerId session, std::string_view line) {
    nlohmann::json req;
    try {
        req = nlohmann::json::parse(line);
    } catch (const nlohmann::json::exception&) {
        return error_response("BAD_REQUEST", "line is not valid JSON");
    }
    if (!req.is_object()) return error_response("BAD_REQUEST", "request must be a JSON object");
    if (!req.contains("v") || !req["v"].is_number_integer()) {
        return error_response("BAD_REQUEST", "missing integer field 'v'");
    }
    if (req["v"].get<std::int64_t>() != kProtocolVersion) {
        return error_response("UNSUPPORTED_VERSION",
                              "protocol version " + req["v"].dump() + " not supported");
    }
    if (!req.contains("type") || !req["type"].is_string()) {
        return error_response("BAD_REQUEST", "missing string field 'type'");
    }
    const std::string type = req["type"].get<std::string>();

    try {
        if (type == "mint") {
            std::uint64_t n = require_uint(req, "n");
            if (n == 0 || n > kMaxWireQubits) {
                throw Error(ErrorCode::BadRequest, "n must be in 1.." + std::to_string(kMaxWireQubits));
            }
            std::lock_guard lock(rng_mutex_);
            auto [secret, handle] = mint_.mint_bill(n, "$20", rng_, session);
            ojson r;
            r["type"] = "minted";
            r["serial"] = secret.serial.str();
            r["handle"] = handle.release();
            return r.dump();
        }
        if (type == "verify") {
            const std::string serial_text = require_string(req, "serial");
            StateHandle handle(require_uint(req, "handle"));
            if (!Serial::is_well_formed(serial_text)) {
                throw Error(ErrorCode::UnknownSerial, "unknown serial " + serial_text);
            }
            ++verify_messages_;
            VerifyResult v = [&] {
                std::lock_guard lock(rng_mutex_);
                return mint_.verify(Serial::parse(serial_text), handle, policy_, rng_, session);
            }();
            ojson r;
            r["type"] = "verified";
            r["result"] = outcome_name(v.outcome);
            if (v.handle.empty()) {
                r["handle"] = nullptr;
            } else {
                r["handle"] = v.handle.release();
            }
            return r.dump();
        }
        if (type == "apply_x") {
            StateHandle handle(require_uint(req, "handle"));
            mint_.registry().apply_pauli_x(handle, require_uint(req, "qubit"), session);
            return ok_response(handle.release()).dump();
        }
        if (type == "apply_u") {
            StateHandle handle(require_uint(req, "handle"));
            std::uint64_t qubit = require_uint(req, "qubit");
            mint_.registry().apply_unitary(handle, qubit, require_matrix(req), session);
            return ok_response(handle.release()).dump();
        }
        if (type == "measure") {
            StateHandle handle(require_uint(req, "handle"));
            std::uint64_t qubit = require_uint(req, "qubit");
            std::string basis_text = require_string(req, "basis");
            if (basis_text != "Z" && basis_text != "X") {
                throw Error(ErrorCode::BadRequest, "basis must be \"Z\" or \"X\"");
            }
            double draw = [&] {
                std::lock_guard lock(rng_mutex_);
                return rng_.uniform();
            }();
            int bit = mint_.registry().measure(handle, qubit,
                                               basis_text == "Z" ? Basis::Z : Basis::X, draw, session);
            ojson r;
            r["type"] = "measured";
            r["bit"] = bit;
            r["handle"] = handle.release();
            return r.dump();
        }
        if (type == "release") {
            StateHandle handle(require_uint(req, "handle"));
            const HandleId id = handle.id();
            mint_.registry().release(handle, session);
            return ok_response(id).dump();
        }
        return error_response("BAD_REQUEST", "unknown type '" + type + "'");
    } catch (const Error& e) {
        return error_response(wire_error_code(e.code()), e.what());
    } catch (const std::exception& e) {
        return error_response("BAD_REQUEST", e.what());
    }
}

void WireServer::close_session(OwnerId session) { mint_.registry().release_owned(session); }

void WireServer::start(const Address& address) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    hints.ai_flags = AI_PASSIVE;
    addrinfo* res = nullptr;
    std::string port = std::to_string(address.port);
    const char* host = address.host.empty() ? nullptr : address.host.c_str();
    if (int rc = ::getaddrinfo(host, port.c_str(), &hints, &res); rc != 0) {
        throw Error(ErrorCode::Io, std::string("cannot resolve bind address: ") + gai_strerror(rc));
    }
    int fd = ::socket(res->ai_family, res->ai_socktype, res->ai_protocol);
    if (fd < 0) {
        ::freeaddrinfo(res);
        throw Error(ErrorCode::Io, std::string("socket: ") + std::strerror(errno));
    }
    int one = 1;
    ::setsockopt(fd, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
    if (::bind(fd, res->ai_addr, res->ai_addrlen) < 0 || ::listen(fd, 64) < 0) {
        int err = errno;
        ::freeaddrinfo(res);
        ::close(fd);
        throw Error(ErrorCode::Io, std::string("bind/listen: ") + std::strerror(err));
    }
    ::freeaddrinfo(res);

    sockaddr_in bound{};
    socklen_t len = sizeof bound;
    ::getsockname(fd, reinterpret_cast<sockaddr*>(&bound), &len);
    port_ = ntohs(bound.sin_port);
    listen_fd_ = fd;
    running_ = true;
    accept_thread_ = std::thread([this] { accept_loop(); });
}

void WireServer::accept_loop() {
    while (running_) {
        int fd = ::accept(listen_fd_, nullptr, nullptr);
        if (fd < 0) {
            if (errno == EINTR) continue;
            break;
        }
        int one = 1;
        ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
        reap_finished();
        std::lock_guard lock(connections_mutex_);
        if (!running_) {
            ::close(fd);
            break;
        }
        Connection& conn = connections_.emplace_back();
        conn.fd = fd;
        conn.thread = std::thread([this, &conn] { serve_connection(conn); });
    }
}

void WireServer::reap_finished() {
    std::lock_guard lock(connections_mutex_);
    for (auto it = connections_.begin(); it != connections_.end();) {
        if (it->done) {
            it->thread.join();
            ::close(it->fd);
            it = connections_.erase(it);
        } else {
            ++it;
        }
    }
}

void WireServer::serve_connection(Connection& conn) {
    const int fd = conn.fd;
    const OwnerId session = open_session();
    std::string buffer;
    std::string line;
    while (read_line(fd, buffer, line)) {
        std::string response = line.size() > kMaxLineBytes
                                   ? error_response("BAD_REQUEST", "line too long")
                                   : handle_line(session, line);
        response += '\n';
        if (!send_all(fd, response)) break;
    }
    close_session(session);
    conn.done = true;
}

void WireServer::stop() {
    if (!running_.exchange(false)) return;
    ::shutdown(listen_fd_, SHUT_RDWR);
    ::close(listen_fd_);
    if (accept_thread_.joinable()) accept_thread_.join();
    std::list<Connection> conns;
    {
        std::lock_guard lock(connections_mutex_);
        conns.swap(connections_);
    }
    for (auto& c : conns) ::shutdown(c.fd, SHUT_RDWR);
    for (auto& c : conns) {
        if (c.thread.joinable()) c.thread.join();
        ::close(c.fd);
    }
    listen_fd_ = -1;
}

// --- client -----------------------------------------------------------------

WireClient::WireClient(const Address& address) {
    addrinfo hints{};
    hints.ai_family = AF_INET;
    hints.ai_socktype = SOCK_STREAM;
    addrinfo* res = nullptr;
    std::string port = std::to_string(address.port);
    if (int rc = ::getaddrinfo(address.host.c_str(), port.c_str(), &hints, &res); rc != 0) {
        throw TransportError(std::string("cannot resolve ") + address.host + ": " + gai_strerror(rc));
    }
    for (addrinfo* ai = res; ai; ai = ai->ai_next) {
        int fd = ::socket(ai->ai_family, ai->ai_socktype, ai->ai_protocol);
        if (fd < 0) continue;
        if (::connect(fd, ai->ai_addr, ai->ai_addrlen) == 0) {
            fd_ = fd;
            break;
        }
        ::close(fd);
    }
    ::freeaddrinfo(res);
    if (fd_ < 0) {
        throw TransportError("cannot connect to " + address.host + ":" + port);
    }
    int one = 1;
    ::setsockopt(fd_, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
}

WireClient::~WireClient() {
    if (fd_ >= 0) ::close(fd_);
}

std::string WireClient::request(std::string_view line) {
    std::string out(line);
    out += '\n';
    if (!send_all(fd_, out)) throw TransportError("send failed: " + std::string(std::strerror(errno)));
    std::string response;
    if (!read_line(fd_, buffer_, response)) throw TransportError("connection closed by server");
    return response;
}

namespace {

nlohmann::json checked(const std::string& raw, std::string_view expected_type) {
    nlohmann::json r;
    try {
        r = nlohmann::json::parse(raw);
    } catch (const nlohmann::json::exception&) {
        throw TransportError("server sent a malformed line");
    }
    const std::string type = r.value("type", "");
    if (type == "error") {
        const std::string code = r.value("code", "BAD_REQUEST");
        throw Error(error_code_from_wire(code), code + ": " + r.value("detail", ""));
    }
    if (type != expected_type) {
        throw TransportError("unexpected response type '" + type + "'");
    }
    return r;
}

ojson base_request(std::string_view type) {
    ojson r;
    r["v"] = kProtocolVersion;
    r["type"] = type;
    return r;
}

}  // namespace

std::pair<Serial, StateHandle> WireClient::mint(std::size_t n) {
    ojson req = base_request("mint");
    req["n"] = n;
    auto r = checked(request(req.dump()), "minted");
    return {Serial::parse(r.at("serial").get<std::string>()), StateHandle(r.at("handle").get<HandleId>())};
}

VerifyReply WireClient::verify(const Serial& serial, StateHandle& bill) {
    ojson req = base_request("verify");
    req["serial"] = serial.str();
    req["handle"] = bill.id();
    ++verify_sent_;
    auto r = checked(request(req.dump()), "verified");
    bill.release();
    VerifyReply reply{r.at("result").get<std::string>() == "VALID" ? VerifyOutcome::Valid
                                                                    : VerifyOutcome::Invalid,
                      StateHandle{}, std::nullopt};
    if (!r.at("handle").is_null()) reply.handle = StateHandle(r.at("handle").get<HandleId>());
    return reply;
}

void WireClient::apply_x(const StateHandle& h, std::size_t qubit) {
    ojson req = base_request("apply_x");
    req["handle"] = h.id();
    req["qubit"] = qubit;
    checked(request(req.dump()), "ok");
}

void WireClient::apply_unitary(const StateHandle& h, std::size_t qubit, const Matrix2& u) {
    ojson req = base_request("apply_u");
    req["handle"] = h.id();
    req["qubit"] = qubit;
    req["u"] = ojson::array();
    for (const auto& e : u) req["u"].push_back({e.real(), e.imag()});
    checked(request(req.dump()), "ok");
}

int WireClient::measure(const StateHandle& h, std::size_t qubit, Basis basis) {
    ojson req = base_request("measure");
    req["handle"] = h.id();
    req["qubit"] = qubit;
    req["basis"] = basis == Basis::Z ? "Z" : "X";
    return checked(request(req.dump()), "measured").at("bit").get<int>();
}

void WireClient::release(StateHandle& h) {
    ojson req = base_request("release");
    req["handle"] = h.id();
    checked(request(req.dump()), "ok");
    h.release();
}

AttackResult remote_adaptive_attack(WireClient& client, const Serial& serial, StateHandle bill,
                                    std::size_t n) {
    return adaptive_attack(client, client, serial, std::move(bill), n);
}

}  // namespace wqm
