#include <gtest/gtest.h>

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "json.hpp"
#include "wqm/mint.hpp"

namespace {

struct Run {
    int exit_code;
    std::string out;
};

Run run(const std::string& args) {
    std::string cmd = std::string(WQM_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = ::popen(cmd.c_str(), "r");
    std::string out;
    char buf[4096];
    while (std::size_t n = std::fread(buf, 1, sizeof buf, pipe)) out.append(buf, n);
    int status = ::pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

std::string slurp(const std::filesystem::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

class CliTest : public ::testing::Test {
protected:
    void SetUp() override {
        dir_ = std::filesystem::temp_directory_path() /
               ("wqm_cli_" + std::to_string(::getpid()) + "_" +
                ::testing::UnitTest::GetInstance()->current_test_info()->name());
        std::filesystem::create_directories(dir_);
    }
    void TearDown() override { std::filesystem::remove_all(dir_); }
    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::filesystem::path dir_;
};

}  // namespace

TEST_F(CliTest, MintThenAdaptiveAttack) {
    auto minted = run("mint new --n 8 --count 1 --db " + path("m.json") + " --seed 7");
    ASSERT_EQ(minted.exit_code, 0);
    const std::string serial = minted.out.substr(0, minted.out.find('\n'));
    EXPECT_TRUE(wqm::Serial::is_well_formed(serial));

    auto attack = run("attack adaptive --db " + path("m.json") + " --serial " + serial +
                      " --seed 7 --transcript " + path("t.json"));
    EXPECT_EQ(attack.exit_code, 0);
    EXPECT_NE(attack.out.find("queries  8"), std::string::npos) << attack.out;

    auto t = nlohmann::json::parse(slurp(path("t.json")));
    EXPECT_EQ(t["queries_used"], 8);
    EXPECT_EQ(t["bill_recovered"], true);
    EXPECT_EQ(t["serial"], serial);
    auto db = wqm::SecretDatabase::load(path("m.json"));
    EXPECT_EQ(t["learned"], wqm::format_symbols(db.find(wqm::Serial::parse(serial))->symbols));
    EXPECT_EQ(t["records"].size(), 8u);
}

TEST_F(CliTest, DestroyPolicyExitCodeTracksZQubits) {
    auto minted = run("mint new --n 3 --count 12 --db " + path("m.json") + " --seed 21");
    ASSERT_EQ(minted.exit_code, 0);
    auto db = wqm::SecretDatabase::load(path("m.json"));
    ASSERT_EQ(db.size(), 12u);
    for (const auto& bill : db.bills()) {
        bool any_z = false;
        for (auto s : bill.symbols) any_z |= wqm::basis_of(s) == wqm::Basis::Z;
        auto r = run("attack adaptive --db " + path("m.json") + " --serial " + bill.serial.str() +
                     " --policy destroy-on-invalid --seed 1");
        EXPECT_EQ(r.exit_code, any_z ? 3 : 0) << wqm::format_symbols(bill.symbols);
    }
}

TEST_F(CliTest, MintAppendsToExistingDatabase) {
    ASSERT_EQ(run("mint new --n 2 --count 2 --db " + path("m.json") + " --seed 1").exit_code, 0);
    ASSERT_EQ(run("mint new --n 5 --count 1 --db " + path("m.json") + " --seed 2 --denomination '$5'").exit_code, 0);
    auto db = wqm::SecretDatabase::load(path("m.json"));
    ASSERT_EQ(db.size(), 3u);
    EXPECT_EQ(db.bills()[2].denomination, "$5");
}

TEST_F(CliTest, SweepIsByteReproducible) {
    const std::string args = "experiment sweep --n 1,2,4 --trials 1000 --strategy guess --seed 1 --out ";
    ASSERT_EQ(run(args + path("a.csv")).exit_code, 0);
    ASSERT_EQ(run(args + path("b.csv") + " --threads 3").exit_code, 0);
    EXPECT_EQ(slurp(path("a.csv")), slurp(path("b.csv")));
    EXPECT_EQ(slurp(path("a.csv")).rfind("n,strategy,policy,trials,successes,success_rate,mean_queries,std_error,analytic_rate,seed\n", 0), 0u);

    ASSERT_EQ(run(args + path("c.json") + " --format json").exit_code, 0);
    EXPECT_TRUE(nlohmann::json::parse(slurp(path("c.json"))).is_array());
}

TEST_F(CliTest, BaselinePrintsBothRates) {
    auto r = run("attack baseline --strategy measure-copy --n 4 --trials 2000 --seed 3");
    EXPECT_EQ(r.exit_code, 0);
    EXPECT_NE(r.out.find("empirical"), std::string::npos);
    EXPECT_NE(r.out.find("analytic   0.31640625"), std::string::npos) << r.out;
}

TEST_F(CliTest, UsageErrorsExitTwo) {
    EXPECT_EQ(run("").exit_code, 2);
    EXPECT_EQ(run("frobnicate").exit_code, 2);
    EXPECT_EQ(run("mint new --n 3 --db x.json --bogus").exit_code, 2);
    EXPECT_EQ(run("attack baseline --strategy adaptive --n 2 --trials 5 --seed 1").exit_code, 2);
    EXPECT_EQ(run("experiment sweep --n 1,x --trials 5 --strategy guess --seed 1 --out " + path("z.csv")).exit_code, 2);
    EXPECT_EQ(run("--help").exit_code, 0);
}

TEST_F(CliTest, OperationalErrorsExitOne) {
    EXPECT_EQ(run("attack adaptive --db " + path("missing.json") + " --serial WQM-0123456789abcdef0123456789abcdef").exit_code, 1);
    EXPECT_EQ(run("attack remote --addr 127.0.0.1:1").exit_code, 1);
    EXPECT_EQ(run("attack remote --addr 127.0.0.1:1 --serial WQM-0123456789abcdef0123456789abcdef").exit_code, 1);
}
