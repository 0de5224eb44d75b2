#include "wqm/harness.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "wqm/error.hpp"

namespace wqm {

namespace {

const std::string kDenomination = "$20";

// Shortest round-trip representation.
std::string format_double(double v) {
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, end);
}

double parse_double(std::string_view s) {
    double v = 0.0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, "bad number '" + std::string(s) + "'");
    }
    return v;
}

template <typename Int>
Int parse_int(std::string_view s) {
    Int v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size()) {
        throw Error(ErrorCode::ParseError, "bad integer '" + std::string(s) + "'");
    }
    return v;
}

struct Tally {
    std::size_t successes = 0;
    std::size_t queries = 0;
};

Tally run_range(const ExperimentConfig& config, std::size_t n, std::size_t begin, std::size_t end) {
    Tally tally;
    for (std::size_t trial = begin; trial < end; ++trial) {
        Rng rng(derive_stream_seed(config.seed, n, trial));
        TrialOutcome o = run_trial(config.strategy, config.policy, n, rng);
        tally.successes += o.success ? 1 : 0;
        tally.queries += o.queries;
    }
    return tally;
}

}  // namespace

TrialOutcome run_trial(StrategyKind strategy, MintPolicy policy, std::size_t n, Rng& rng) {
    Mint mint;
    auto [secret, bill] = mint.mint_bill(n, kDenomination, rng);

    if (strategy == StrategyKind::AdaptiveOracle) {
        LocalMintAccess access(mint, policy, rng);
        LocalWorkbench bench(mint.registry(), rng);
        AttackResult r = adaptive_attack(access, bench, secret.serial, std::move(bill), n);
        bool success = r.transcript.bill_recovered && r.transcript.learned == secret.symbols;
        return {success, r.transcript.queries_used};
    }

    BaselineForgery forgery = baseline_attack(strategy, mint.registry(), std::move(bill), n, rng);
    VerifyResult v = mint.verify(secret.serial, forgery.counterfeit, policy, rng);
    return {v.outcome == VerifyOutcome::Valid, 1};
}

std::optional<double> analytic_success_rate(StrategyKind strategy, MintPolicy policy,
                                            std::size_t n) {
    if (strategy != StrategyKind::AdaptiveOracle) return analytic_pass_prob(strategy, n);
    // Under destroy-on-invalid the attack survives only if every qubit is an
    // X eigenstate.
    if (policy == MintPolicy::ReturnAlways) return 1.0;
    return std::pow(0.5, static_cast<double>(n));
}

std::vector<ResultRow> run_experiment(const ExperimentConfig& config) {
    if (config.n_values.empty()) throw Error(ErrorCode::InvalidArgument, "n_values is empty");
    if (config.trials == 0) throw Error(ErrorCode::InvalidArgument, "trials must be >= 1");
    for (auto n : config.n_values) {
        if (n == 0) throw Error(ErrorCode::InvalidArgument, "n values must be >= 1");
    }

    unsigned threads = config.threads ? config.threads : std::max(1u, std::thread::hardware_concurrency());
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, config.trials));

    std::vector<ResultRow> rows;
    for (std::size_t n : config.n_values) {
        std::vector<Tally> tallies(threads);
        std::vector<std::exception_ptr> errors(threads);
        auto chunk = [&](unsigned w) {
            std::size_t begin = config.trials * w / threads;
            std::size_t end = config.trials * (w + 1) / threads;
            try {
                tallies[w] = run_range(config, n, begin, end);
            } catch (...) {
                errors[w] = std::current_exception();
            }
        };
        if (threads == 1) {
            chunk(0);
        } else {
            std::vector<std::jthread> pool;
            for (unsigned w = 0; w < threads; ++w) pool.emplace_back(chunk, w);
        }
        for (auto& e : errors) {
            if (e) std::rethrow_exception(e);
        }

        Tally total;
        for (const auto& t : tallies) {
            total.successes += t.successes;
            total.queries += t.queries;
        }
        ResultRow row;
        row.n = n;
        row.strategy = config.strategy;
        row.policy = config.policy;
        row.trials = config.trials;
        row.successes = total.successes;
        row.success_rate = static_cast<double>(total.successes) / static_cast<double>(config.trials);
        row.mean_queries = static_cast<double>(total.queries) / static_cast<double>(config.trials);
        row.std_error = std::sqrt(row.success_rate * (1.0 - row.success_rate) /
                                  static_cast<double>(config.trials));
        row.analytic_rate = analytic_success_rate(config.strategy, config.policy, n);
        row.seed = config.seed;
        rows.push_back(row);
    }
    return rows;
}

std::string format_results(const std::vector<ResultRow>& rows, ResultFormat format) {
    if (format == ResultFormat::Csv) {
        std::string out(kCsvHeader);
        out += '\n';
        for (const auto& r : rows) {
            out += std::to_string(r.n) + ',' + std::string(strategy_name(r.strategy)) + ',' +
                   std::string(policy_name(r.policy)) + ',' + std::to_string(r.trials) + ',' +
                   std::to_string(r.successes) + ',' + format_double(r.success_rate) + ',' +
                   format_double(r.mean_queries) + ',' + format_double(r.std_error) + ',' +
                   (r.analytic_rate ? format_double(*r.analytic_rate) : std::string()) + ',' +
                   std::to_string(r.seed) + '\n';
        }
        return out;
    }

    nlohmann::ordered_json doc = nlohmann::ordered_json::array();
    for (const auto& r : rows) {
        nlohmann::ordered_json o;
        o["n"] = r.n;
        o["strategy"] = strategy_name(r.strategy);
        o["policy"] = policy_name(r.policy);
        o["trials"] = r.trials;
        o["successes"] = r.successes;
        o["success_rate"] = r.success_rate;
        o["mean_queries"] = r.mean_queries;
        o["std_error"] = r.std_error;
        if (r.analytic_rate) {
            o["analytic_rate"] = *r.analytic_rate;
        } else {
            o["analytic_rate"] = nullptr;
        }
        o["seed"] = r.seed;
        doc.push_back(std::move(o));
    }
    return doc.dump(2) + "\n";
}

std::vector<ResultRow> parse_results(std::string_view text, ResultFormat format) {
    std::vector<ResultRow> rows;
    auto strategy_of = [](std::string_view s) {
        auto k = parse_strategy(s);
        if (!k) throw Error(ErrorCode::ParseError, "unknown strategy '" + std::string(s) + "'");
        return *k;
    };
    auto policy_of = [](std::string_view s) {
        auto p = parse_policy(s);
        if (!p) throw Error(ErrorCode::ParseError, "unknown policy '" + std::string(s) + "'");
        return *p;
    };

    if (format == ResultFormat::Csv) {
        std::istringstream in{std::string(text)};
        std::string line;
        if (!std::getline(in, line) || line != kCsvHeader) {
            throw Error(ErrorCode::ParseError, "CSV header mismatch");
        }
        std::size_t lineno = 1;
        while (std::getline(in, line)) {
            ++lineno;
            std::vector<std::string> f;
            std::size_t start = 0;
            for (std::size_t pos; (pos = line.find(',', start)) != std::string::npos; start = pos + 1) {
                f.push_back(line.substr(start, pos - start));
            }
            f.push_back(line.substr(start));
            if (f.size() != 10) {
                throw Error(ErrorCode::ParseError, "line " + std::to_string(lineno) + ": expected 10 fields");
            }
            ResultRow r;
            r.n = parse_int<std::size_t>(f[0]);
            r.strategy = strategy_of(f[1]);
            r.policy = policy_of(f[2]);
            r.trials = parse_int<std::size_t>(f[3]);
            r.successes = parse_int<std::size_t>(f[4]);
            r.success_rate = parse_double(f[5]);
            r.mean_queries = parse_double(f[6]);
            r.std_error = parse_double(f[7]);
            if (!f[8].empty()) r.analytic_rate = parse_double(f[8]);
            r.seed = parse_int<std::uint64_t>(f[9]);
            rows.push_back(r);
        }
        return rows;
    }

    try {
        for (const auto& o : nlohmann::json::parse(text)) {
            ResultRow r;
            r.n = o.at("n").get<std::size_t>();
            r.strategy = strategy_of(o.at("strategy").get<std::string>());
            r.policy = policy_of(o.at("policy").get<std::string>());
            r.trials = o.at("trials").get<std::size_t>();
            r.successes = o.at("successes").get<std::size_t>();
            r.success_rate = o.at("success_rate").get<double>();
            r.mean_queries = o.at("mean_queries").get<double>();
            r.std_error = o.at("std_error").get<double>();
            if (!o.at("analytic_rate").is_null()) r.analytic_rate = o.at("analytic_rate").get<double>();
            r.seed = o.at("seed").get<std::uint64_t>();
            rows.push_back(r);
        }
    } catch (const nlohmann::json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("results JSON: ") + e.what());
    }
    return rows;
}

void write_results(const std::vector<ResultRow>& rows, const std::filesystem::path& path,
                   ResultFormat format) {
    if (rows.empty()) throw Error(ErrorCode::InvalidArgument, "no rows to write");
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error(ErrorCode::Io, "cannot write " + path.string());
    out << format_results(rows, format);
    if (!out.flush()) throw Error(ErrorCode::Io, "write failed for " + path.string());
}

}  // namespace wqm
