#include <gtest/gtest.h>

#include <chrono>
#include <random>
#include <thread>

#include "json.hpp"
#include "test_util.hpp"
#include "wqm/error.hpp"
#include "wqm/wire.hpp"

using namespace wqm;
using namespace wqm::testing;
using nlohmann::json;

namespace {

struct Lab {
    Mint mint;
    WireServer server;
    explicit Lab(MintPolicy policy = MintPolicy::ReturnAlways, std::uint64_t seed = 1)
        : server(mint, policy, seed) {}

    json call(OwnerId session, const std::string& line) { return json::parse(server.handle_line(session, line)); }
};

std::string req(const json& body) {
    json r = body;
    r["v"] = 1;
    return r.dump();
}

}  // namespace

TEST(WireProtocol, MintThenVerifyGenuine) {
    Lab lab;
    auto s = lab.server.open_session();
    const std::string raw = lab.server.handle_line(s, R"({"v":1,"type":"mint","n":4})");
    EXPECT_EQ(raw.rfind(R"({"type":"minted","serial":"WQM-)", 0), 0u) << raw;
    auto minted = json::parse(raw);
    const auto handle = minted["handle"].get<std::uint64_t>();

    auto v = lab.call(s, req({{"type", "verify"}, {"serial", minted["serial"]}, {"handle", handle}}));
    EXPECT_EQ(v["type"], "verified");
    EXPECT_EQ(v["result"], "VALID");
    ASSERT_TRUE(v["handle"].is_number_unsigned());
    EXPECT_NE(v["handle"].get<std::uint64_t>(), handle);
    EXPECT_EQ(lab.server.verify_messages(), 1u);
}

TEST(WireProtocol, OneAttackRoundOnZQubit) {
    Lab lab;
    auto s = lab.server.open_session();
    // Find a bill whose first symbol is a Z eigenstate.
    json minted;
    std::vector<QubitSymbol> secret;
    do {
        minted = lab.call(s, R"({"v":1,"type":"mint","n":3})");
        secret = lab.mint.database().find(Serial::parse(minted["serial"].get<std::string>()))->symbols;
    } while (basis_of(secret[0]) != Basis::Z);

    auto h = minted["handle"];
    EXPECT_EQ(lab.call(s, req({{"type", "apply_x"}, {"handle", h}, {"qubit", 0}}))["type"], "ok");
    auto v = lab.call(s, req({{"type", "verify"}, {"serial", minted["serial"]}, {"handle", h}}));
    EXPECT_EQ(v["result"], "INVALID");
    ASSERT_FALSE(v["handle"].is_null());
    auto h2 = v["handle"];
    lab.call(s, req({{"type", "apply_x"}, {"handle", h2}, {"qubit", 0}}));
    auto m = lab.call(s, req({{"type", "measure"}, {"handle", h2}, {"qubit", 0}, {"basis", "Z"}}));
    EXPECT_EQ(m["type"], "measured");
    EXPECT_EQ(m["bit"].get<int>(), bit_of(secret[0]));
    EXPECT_EQ(m["handle"], h2);
}

TEST(WireProtocol, DestroyPolicyReturnsNullHandle) {
    Lab lab(MintPolicy::DestroyOnInvalid);
    auto s = lab.server.open_session();
    json minted;
    std::vector<QubitSymbol> secret;
    do {
        minted = lab.call(s, R"({"v":1,"type":"mint","n":2})");
        secret = lab.mint.database().find(Serial::parse(minted["serial"].get<std::string>()))->symbols;
    } while (basis_of(secret[1]) != Basis::Z);

    auto h = minted["handle"];
    lab.call(s, req({{"type", "apply_x"}, {"handle", h}, {"qubit", 1}}));
    auto v = lab.call(s, req({{"type", "verify"}, {"serial", minted["serial"]}, {"handle", h}}));
    EXPECT_EQ(v["result"], "INVALID");
    EXPECT_TRUE(v["handle"].is_null());
    EXPECT_EQ(lab.call(s, req({{"type", "release"}, {"handle", h}}))["code"], "HANDLE_CONSUMED");
}

TEST(WireProtocol, OwnershipAndErrors) {
    Lab lab;
    auto alice = lab.server.open_session();
    auto mallory = lab.server.open_session();
    auto minted = lab.call(alice, R"({"v":1,"type":"mint","n":4})");
    auto h = minted["handle"];
    auto serial = minted["serial"];

    auto stolen = lab.call(mallory, req({{"type", "verify"}, {"serial", serial}, {"handle", h}}));
    EXPECT_EQ(stolen["type"], "error");
    EXPECT_EQ(stolen["code"], "HANDLE_NOT_OWNED");
    EXPECT_TRUE(stolen.contains("detail"));
    EXPECT_EQ(lab.mint.registry().status(h.get<std::uint64_t>()), HandleStatus::Live);
    EXPECT_EQ(lab.call(mallory, req({{"type", "apply_x"}, {"handle", h}, {"qubit", 0}}))["code"],
              "HANDLE_NOT_OWNED");

    EXPECT_EQ(lab.call(alice, R"({"v":2,"type":"mint","n":4})")["code"], "UNSUPPORTED_VERSION");
    EXPECT_EQ(lab.call(alice, R"({"type":"mint","n":4})")["code"], "BAD_REQUEST");
    EXPECT_EQ(lab.call(alice, R"({"v":1,"type":"teleport"})")["code"], "BAD_REQUEST");
    EXPECT_EQ(lab.call(alice, "not json")["code"], "BAD_REQUEST");
    EXPECT_EQ(lab.call(alice, "[1,2]")["code"], "BAD_REQUEST");
    EXPECT_EQ(lab.call(alice, R"({"v":1,"type":"mint","n":0})")["code"], "BAD_REQUEST");
    EXPECT_EQ(lab.call(alice, req({{"type", "apply_x"}, {"handle", h}, {"qubit", 9}}))["code"], "BAD_REQUEST");
    EXPECT_EQ(lab.call(alice, req({{"type", "measure"}, {"handle", h}, {"qubit", 0}, {"basis", "Y"}}))["code"],
              "BAD_REQUEST");
    EXPECT_EQ(lab.call(alice, req({{"type", "apply_u"}, {"handle", h}, {"qubit", 0},
                                   {"u", {{1, 0}, {1, 0}, {0, 0}, {1, 0}}}}))["code"],
              "NON_UNITARY");
    EXPECT_EQ(lab.call(alice, req({{"type", "apply_u"}, {"handle", h}, {"qubit", 0},
                                   {"u", {{0, 0}, {1, 0}, {1, 0}, {0, 0}}}}))["type"],
              "ok");
    EXPECT_EQ(lab.call(alice, req({{"type", "verify"}, {"serial", "WQM-0123456789abcdef0123456789abcdef"},
                                   {"handle", h}}))["code"],
              "UNKNOWN_SERIAL");

    auto small = lab.call(alice, R"({"v":1,"type":"mint","n":2})");
    EXPECT_EQ(lab.call(alice, req({{"type", "verify"}, {"serial", serial}, {"handle", small["handle"]}}))["code"],
              "DIMENSION_MISMATCH");
    EXPECT_EQ(lab.mint.registry().status(small["handle"].get<std::uint64_t>()), HandleStatus::Live);

    EXPECT_EQ(lab.call(alice, req({{"type", "release"}, {"handle", h}}))["type"], "ok");
    EXPECT_EQ(lab.call(alice, req({{"type", "apply_x"}, {"handle", h}, {"qubit", 0}}))["code"], "HANDLE_CONSUMED");
    EXPECT_EQ(lab.call(alice, req({{"type", "release"}, {"handle", h}}))["code"], "HANDLE_CONSUMED");
}

TEST(WireProtocol, GarbageLinesAlwaysGetOneErrorResponse) {
    Lab lab;
    auto s = lab.server.open_session();
    std::mt19937_64 gen(3);
    std::uniform_int_distribution<int> byte(1, 255), len(0, 80);
    const std::vector<std::string> seeds = {R"({"v":1,"type":"mint","n":3})",
                                            R"({"v":1,"type":"measure","handle":1,"qubit":0,"basis":"X"})",
                                            R"({"v":1,"type":"apply_u","handle":1,"qubit":0,"u":[[1,0],[0,0],[0,0],[1,0]]})"};
    for (int i = 0; i < 3000; ++i) {
        std::string line = seeds[i % seeds.size()];
        for (int k = len(gen) % 6; k > 0; --k) {
            line[std::uniform_int_distribution<std::size_t>(0, line.size() - 1)(gen)] = static_cast<char>(byte(gen));
        }
        if (i % 7 == 0) line.resize(len(gen) % (line.size() + 1));
        std::string response = lab.server.handle_line(s, line);
        ASSERT_EQ(response.find('\n'), std::string::npos);
        auto parsed = json::parse(response);
        ASSERT_TRUE(parsed.contains("type"));
    }
}

TEST(WireSocket, RemoteAttackRecoversSecret) {
    Lab lab(MintPolicy::ReturnAlways, 11);
    lab.server.start({"127.0.0.1", 0});
    WireClient client({"127.0.0.1", lab.server.port()});
    auto [serial, handle] = client.mint(8);
    auto r = remote_adaptive_attack(client, serial, std::move(handle), 8);
    EXPECT_TRUE(r.transcript.bill_recovered);
    EXPECT_EQ(r.transcript.learned, lab.mint.database().find(serial)->symbols);
    EXPECT_EQ(client.verify_messages_sent(), 8u);
    EXPECT_EQ(lab.server.verify_messages(), 8u);
    EXPECT_EQ(lab.mint.stats(serial).total, 8u);
}

TEST(WireSocket, RemoteTranscriptEqualsLocal) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
        Lab lab(MintPolicy::ReturnAlways, seed);
        lab.server.start({"127.0.0.1", 0});
        WireClient client({"127.0.0.1", lab.server.port()});
        auto [serial, handle] = client.mint(16);
        auto remote = remote_adaptive_attack(client, serial, std::move(handle), 16);

        Mint local;
        Rng rng(seed);
        auto [secret, bill] = local.mint_bill(16, "$20", rng);
        ASSERT_EQ(secret.serial, serial);
        LocalMintAccess access(local, MintPolicy::ReturnAlways, rng);
        LocalWorkbench bench(local.registry(), rng);
        auto local_result = adaptive_attack(access, bench, secret.serial, std::move(bill), 16);
        EXPECT_EQ(remote.transcript, local_result.transcript);
    }
}

TEST(WireSocket, DestroyServerEndsAttackAtFirstInvalid) {
    Lab lab(MintPolicy::DestroyOnInvalid, 5);
    lab.server.start({"127.0.0.1", 0});
    WireClient client({"127.0.0.1", lab.server.port()});
    for (int attempt = 0; attempt < 20; ++attempt) {
        auto [serial, handle] = client.mint(6);
        auto symbols = lab.mint.database().find(serial)->symbols;
        auto r = remote_adaptive_attack(client, serial, std::move(handle), 6);
        std::size_t first_z = 0;
        while (first_z < 6 && basis_of(symbols[first_z]) == Basis::X) ++first_z;
        if (first_z == 6) {
            EXPECT_TRUE(r.transcript.bill_recovered);
        } else {
            EXPECT_FALSE(r.transcript.bill_recovered);
            EXPECT_EQ(r.transcript.queries_used, first_z + 1);
        }
    }
}

TEST(WireSocket, SessionCloseReleasesHandlesAndMalformedLinesKeepConnection) {
    Lab lab;
    lab.server.start({"127.0.0.1", 0});
    {
        WireClient client({"127.0.0.1", lab.server.port()});
        client.mint(3);
        client.mint(3);
        auto bad = json::parse(client.request("{{{"));
        EXPECT_EQ(bad["code"], "BAD_REQUEST");
        auto ok = json::parse(client.request(R"({"v":1,"type":"mint","n":1})"));
        EXPECT_EQ(ok["type"], "minted");
        EXPECT_EQ(lab.mint.registry().live_count(), 3u);
    }
    for (int i = 0; i < 200 && lab.mint.registry().live_count() != 0; ++i) {
        std::this_thread::sleep_for(std::chrono::milliseconds(5));
    }
    EXPECT_EQ(lab.mint.registry().live_count(), 0u);
}

TEST(WireSocket, ClientSurfacesProtocolAndTransportErrorsDistinctly) {
    Lab lab;
    lab.server.start({"127.0.0.1", 0});
    const auto port = lab.server.port();
    {
        WireClient client({"127.0.0.1", port});
        StateHandle bogus(12345);
        try {
            client.apply_x(bogus, 0);
            FAIL();
        } catch (const Error& e) {
            EXPECT_EQ(e.code(), ErrorCode::HandleNotOwned);
        }
    }
    lab.server.stop();
    EXPECT_THROW(WireClient({"127.0.0.1", port}), TransportError);
}

TEST(Address, Parsing) {
    auto a = parse_address("127.0.0.1:8080");
    EXPECT_EQ(a.host, "127.0.0.1");
    EXPECT_EQ(a.port, 8080);
    EXPECT_THROW(parse_address("localhost"), Error);
    EXPECT_THROW(parse_address("localhost:99999"), Error);
    EXPECT_THROW(parse_address(":80"), Error);
}
