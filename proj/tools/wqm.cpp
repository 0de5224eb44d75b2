// wqm: command-line front end for the quantum money laboratory.
//
// Exit codes: 0 success, 1 operational failure (I/O, network, unknown
// serial), 2 usage error, 3 attack failed (bill lost or secret not learned).

#include <csignal>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "wqm/attacks.hpp"
#include "wqm/error.hpp"
#include "wqm/harness.hpp"
#include "wqm/mint.hpp"
#include "wqm/wire.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;
constexpr int kExitAttackFailed = 3;

std::uint64_t resolve_seed(const std::optional<std::uint64_t>& seed) {
    if (seed) return *seed;
    std::random_device rd;
    return (static_cast<std::uint64_t>(rd()) << 32) ^ rd();
}

std::vector<std::size_t> parse_n_list(const std::string& text) {
    std::vector<std::size_t> out;
    std::stringstream in(text);
    std::string item;
    while (std::getline(in, item, ',')) {
        std::size_t used = 0;
        unsigned long long v = 0;
        try {
            v = std::stoull(item, &used);
        } catch (const std::exception&) {
            used = 0;
        }
        if (used == 0 || used != item.size() || v == 0) {
            throw CLI::ValidationError("--n", "expected a comma-separated list of positive integers");
        }
        out.push_back(static_cast<std::size_t>(v));
    }
    if (out.empty()) throw CLI::ValidationError("--n", "empty list");
    return out;
}

void write_text(const std::filesystem::path& path, const std::string& text) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out || !(out << text) || !out.flush()) {
        throw wqm::Error(wqm::ErrorCode::Io, "cannot write " + path.string());
    }
}

void print_transcript(const wqm::AttackTranscript& t) {
    std::cout << "serial   " << t.serial.str() << "\n";
    std::cout << "round  qubit  outcome  inferred\n";
    for (std::size_t r = 0; r < t.records.size(); ++r) {
        const auto& rec = t.records[r];
        std::cout << std::setw(5) << r + 1 << "  " << std::setw(5) << rec.qubit << "  "
                  << std::setw(7) << wqm::outcome_name(rec.outcome) << "  "
                  << (rec.inferred ? std::string(1, wqm::symbol_char(*rec.inferred)) : "?") << "\n";
    }
    std::cout << "queries  " << t.queries_used << "\n";
    std::cout << "learned  " << (t.learned.empty() ? "-" : wqm::format_symbols(t.learned)) << "\n";
    std::cout << "recovered " << (t.bill_recovered ? "yes" : "no") << "\n";
}

void print_rows(const std::vector<wqm::ResultRow>& rows) {
    std::cout << std::setw(5) << "n" << std::setw(14) << "strategy" << std::setw(20) << "policy"
              << std::setw(10) << "trials" << std::setw(10) << "successes" << std::setw(14)
              << "rate" << std::setw(12) << "std_err" << std::setw(14) << "analytic"
              << std::setw(10) << "queries" << "\n";
    for (const auto& r : rows) {
        std::ostringstream analytic;
        if (r.analytic_rate) {
            analytic << std::setprecision(6) << *r.analytic_rate;
        } else {
            analytic << "-";
        }
        std::cout << std::setw(5) << r.n << std::setw(14) << wqm::strategy_name(r.strategy)
                  << std::setw(20) << wqm::policy_name(r.policy) << std::setw(10) << r.trials
                  << std::setw(10) << r.successes << std::setw(14) << std::setprecision(6)
                  << r.success_rate << std::setw(12) << std::setprecision(4) << r.std_error
                  << std::setw(14) << analytic.str() << std::setw(10) << std::setprecision(6)
                  << r.mean_queries << "\n";
    }
}

// --- subcommands ----------------------------------------------------------

struct MintNewArgs {
    std::size_t n = 0;
    std::size_t count = 1;
    std::string db;
    std::string denomination = "$20";
    std::optional<std::uint64_t> seed;
};

int run_mint_new(const MintNewArgs& a) {
    wqm::SecretDatabase db;
    if (std::filesystem::exists(a.db)) db = wqm::SecretDatabase::load(a.db);
    wqm::Mint mint(std::move(db));
    wqm::Rng rng(resolve_seed(a.seed));
    for (std::size_t i = 0; i < a.count; ++i) {
        auto [secret, handle] = mint.mint_bill(a.n, a.denomination, rng);
        std::cout << secret.serial.str() << "\n";
    }
    mint.database().save(a.db);
    return kExitOk;
}

struct AttackAdaptiveArgs {
    std::string db;
    std::string serial;
    std::string policy = "return-always";
    std::optional<std::uint64_t> seed;
    std::string transcript;
};

int run_attack_adaptive(const AttackAdaptiveArgs& a) {
    wqm::Mint mint(wqm::SecretDatabase::load(a.db));
    const wqm::Serial serial = wqm::Serial::parse(a.serial);
    auto secret = mint.database().find(serial);
    if (!secret) throw wqm::Error(wqm::ErrorCode::UnknownSerial, "unknown serial " + a.serial);
    const auto policy = *wqm::parse_policy(a.policy);
    const std::size_t n = secret->symbols.size();

    wqm::Rng rng(resolve_seed(a.seed));
    wqm::LocalMintAccess access(mint, policy, rng);
    wqm::LocalWorkbench bench(mint.registry(), rng);
    wqm::AttackResult result =
        wqm::adaptive_attack(access, bench, serial, mint.materialize_bill(serial), n);

    print_transcript(result.transcript);
    if (!a.transcript.empty()) write_text(a.transcript, wqm::transcript_to_json(result.transcript));

    const bool success = result.transcript.bill_recovered && result.transcript.learned == secret->symbols;
    if (success) {
        auto copies = wqm::forge_copies(mint.registry(), result.transcript.learned, 1);
        auto v = mint.verify(serial, copies.front(), policy, rng);
        std::cout << "forged copy " << wqm::outcome_name(v.outcome) << "\n";
    }
    return success ? kExitOk : kExitAttackFailed;
}

struct AttackBaselineArgs {
    std::string strategy;
    std::size_t n = 0;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
};

int run_attack_baseline(const AttackBaselineArgs& a) {
    wqm::ExperimentConfig config;
    config.strategy = *wqm::parse_strategy(a.strategy);
    config.n_values = {a.n};
    config.trials = a.trials;
    config.seed = a.seed;
    auto rows = wqm::run_experiment(config);
    const auto& r = rows.front();
    std::cout << "strategy   " << wqm::strategy_name(r.strategy) << "\n"
              << "n          " << r.n << "\n"
              << "trials     " << r.trials << "\n"
              << std::setprecision(8) << "empirical  " << r.success_rate << "\n"
              << "std_error  " << r.std_error << "\n"
              << "analytic   " << *r.analytic_rate << "\n";
    return kExitOk;
}

struct SweepArgs {
    std::string strategy;
    std::string policy = "return-always";
    std::string n_list;
    std::size_t trials = 0;
    std::uint64_t seed = 0;
    std::string out;
    std::string format = "csv";
    unsigned threads = 0;
};

int run_sweep(const SweepArgs& a) {
    wqm::ExperimentConfig config;
    config.strategy = *wqm::parse_strategy(a.strategy);
    config.policy = *wqm::parse_policy(a.policy);
    config.n_values = parse_n_list(a.n_list);
    config.trials = a.trials;
    config.seed = a.seed;
    config.threads = a.threads;
    auto rows = wqm::run_experiment(config);
    print_rows(rows);
    wqm::write_results(rows, a.out, a.format == "json" ? wqm::ResultFormat::Json : wqm::ResultFormat::Csv);
    return kExitOk;
}

struct ServeArgs {
    std::string addr;
    std::string db;
    std::string policy = "return-always";
    std::optional<std::uint64_t> seed;
};

int run_serve(const ServeArgs& a) {
    wqm::SecretDatabase db;
    if (std::filesystem::exists(a.db)) db = wqm::SecretDatabase::load(a.db);
    wqm::Mint mint(std::move(db));

    sigset_t signals;
    sigemptyset(&signals);
    sigaddset(&signals, SIGINT);
    sigaddset(&signals, SIGTERM);
    pthread_sigmask(SIG_BLOCK, &signals, nullptr);

    wqm::WireServer server(mint, *wqm::parse_policy(a.policy), resolve_seed(a.seed));
    auto address = wqm::parse_address(a.addr);
    server.start(address);
    std::cout << "listening on " << address.host << ":" << server.port() << " policy "
              << a.policy << std::endl;

    int sig = 0;
    sigwait(&signals, &sig);
    server.stop();
    mint.database().save(a.db);
    std::cout << "saved " << mint.database().size() << " bills to " << a.db << std::endl;
    return kExitOk;
}

struct RemoteArgs {
    std::string addr;
    std::size_t n = 8;
    std::string serial;
    std::string transcript;
};

int run_attack_remote(const RemoteArgs& a) {
    // Handles die with their session, so a client can only attack a bill it
    // minted on the same connection.
    if (!a.serial.empty()) {
        throw wqm::Error(wqm::ErrorCode::InvalidArgument,
                         "no handle for " + a.serial +
                             " is held by this session; omit --serial to mint and attack a bill in-session");
    }
    wqm::WireClient client(wqm::parse_address(a.addr));
    auto [serial, handle] = client.mint(a.n);
    wqm::AttackResult result = wqm::remote_adaptive_attack(client, serial, std::move(handle), a.n);
    print_transcript(result.transcript);
    std::cout << "verify messages " << client.verify_messages_sent() << "\n";
    if (!a.transcript.empty()) write_text(a.transcript, wqm::transcript_to_json(result.transcript));
    return result.transcript.bill_recovered ? kExitOk : kExitAttackFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Wiesner quantum money laboratory"};
    app.require_subcommand(1);

    const std::vector<std::string> policies = {"return-always", "destroy-on-invalid"};
    const std::vector<std::string> baselines = {"guess", "measure-copy"};
    const std::vector<std::string> strategies = {"adaptive", "guess", "measure-copy"};

    std::function<int()> action;

    auto* mint_cmd = app.add_subcommand("mint", "Manage bills");
    mint_cmd->require_subcommand(1);
    MintNewArgs mint_new;
    auto* mint_new_cmd = mint_cmd->add_subcommand("new", "Issue new bills into a database");
    mint_new_cmd->add_option("--n", mint_new.n, "Qubits per bill")->required()->check(CLI::PositiveNumber);
    mint_new_cmd->add_option("--count", mint_new.count, "Number of bills")->check(CLI::NonNegativeNumber);
    mint_new_cmd->add_option("--db", mint_new.db, "Secret database path")->required();
    mint_new_cmd->add_option("--denomination", mint_new.denomination, "Informational label");
    mint_new_cmd->add_option("--seed", mint_new.seed, "RNG seed");
    mint_new_cmd->callback([&] { action = [&] { return run_mint_new(mint_new); }; });

    auto* attack_cmd = app.add_subcommand("attack", "Run a counterfeiting attack");
    attack_cmd->require_subcommand(1);

    AttackAdaptiveArgs adaptive;
    auto* adaptive_cmd = attack_cmd->add_subcommand("adaptive", "Oracle attack against a local mint");
    adaptive_cmd->add_option("--db", adaptive.db, "Secret database path")->required();
    adaptive_cmd->add_option("--serial", adaptive.serial, "Bill serial")->required();
    adaptive_cmd->add_option("--policy", adaptive.policy, "Mint policy")->check(CLI::IsMember(policies));
    adaptive_cmd->add_option("--seed", adaptive.seed, "RNG seed");
    adaptive_cmd->add_option("--transcript", adaptive.transcript, "Write transcript JSON here");
    adaptive_cmd->callback([&] { action = [&] { return run_attack_adaptive(adaptive); }; });

    AttackBaselineArgs baseline;
    auto* baseline_cmd = attack_cmd->add_subcommand("baseline", "Monte Carlo of a no-oracle strategy");
    baseline_cmd->add_option("--strategy", baseline.strategy, "guess|measure-copy")
        ->required()->check(CLI::IsMember(baselines));
    baseline_cmd->add_option("--n", baseline.n, "Qubits per bill")->required()->check(CLI::PositiveNumber);
    baseline_cmd->add_option("--trials", baseline.trials, "Trials")->required()->check(CLI::PositiveNumber);
    baseline_cmd->add_option("--seed", baseline.seed, "RNG seed")->required();
    baseline_cmd->callback([&] { action = [&] { return run_attack_baseline(baseline); }; });

    RemoteArgs remote;
    auto* remote_cmd = attack_cmd->add_subcommand("remote", "Oracle attack over the wire protocol");
    remote_cmd->add_option("--addr", remote.addr, "host:port")->required();
    remote_cmd->add_option("--n", remote.n, "Qubits in the bill to mint and attack")->check(CLI::PositiveNumber);
    remote_cmd->add_option("--serial", remote.serial, "Existing serial (not reachable from a new session)");
    remote_cmd->add_option("--transcript", remote.transcript, "Write transcript JSON here");
    remote_cmd->callback([&] { action = [&] { return run_attack_remote(remote); }; });

    auto* experiment_cmd = app.add_subcommand("experiment", "Monte Carlo experiments");
    experiment_cmd->require_subcommand(1);
    SweepArgs sweep;
    auto* sweep_cmd = experiment_cmd->add_subcommand("sweep", "Sweep bill sizes");
    sweep_cmd->add_option("--strategy", sweep.strategy, "adaptive|guess|measure-copy")
        ->required()->check(CLI::IsMember(strategies));
    sweep_cmd->add_option("--policy", sweep.policy, "Mint policy")->check(CLI::IsMember(policies));
    sweep_cmd->add_option("--n", sweep.n_list, "Comma-separated bill sizes")->required();
    sweep_cmd->add_option("--trials", sweep.trials, "Trials per size")->required()->check(CLI::PositiveNumber);
    sweep_cmd->add_option("--seed", sweep.seed, "RNG seed")->required();
    sweep_cmd->add_option("--out", sweep.out, "Output file")->required();
    sweep_cmd->add_option("--format", sweep.format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
    sweep_cmd->add_option("--threads", sweep.threads, "Worker threads (0 = all cores)");
    sweep_cmd->callback([&] { action = [&] { return run_sweep(sweep); }; });

    ServeArgs serve;
    auto* serve_cmd = app.add_subcommand("serve", "Run the networked mint");
    serve_cmd->add_option("--addr", serve.addr, "host:port to bind")->required();
    serve_cmd->add_option("--db", serve.db, "Secret database path")->required();
    serve_cmd->add_option("--policy", serve.policy, "Mint policy")->check(CLI::IsMember(policies));
    serve_cmd->add_option("--seed", serve.seed, "RNG seed");
    serve_cmd->callback([&] { action = [&] { return run_serve(serve); }; });

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e, std::cerr, std::cerr);
        std::cerr << app.help();
        return kExitUsage;
    }

    try {
        return action();
    } catch (const CLI::ValidationError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const wqm::TransportError& e) {
        std::cerr << "transport error: " << e.what() << "\n";
        return kExitFailure;
    } catch (const wqm::Error& e) {
        std::cerr << "error [" << wqm::error_code_name(e.code()) << "]: " << e.what() << "\n";
        return kExitFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFailure;
    }
}
