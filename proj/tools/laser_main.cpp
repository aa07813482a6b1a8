#include <CLI11.hpp>

#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <string>

#include "laser/adversaries.hpp"
#include "laser/analysis.hpp"
#include "laser/blake2s.hpp"
#include "laser/config.hpp"
#include "laser/scenarios.hpp"
#include "laser/simnet.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitInternal = 1;
constexpr int kExitUsage = 2;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<double> gamma;
    std::string out_dir = "out";
};

std::string file_digest(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    std::ostringstream buf;
    buf << in.rdbuf();
    const std::string content = buf.str();
    return laser::sim::Medium::digest8(std::span(
        reinterpret_cast<const std::uint8_t*>(content.data()), content.size()));
}

laser::sim::SimConfig make_config(const CommonOpts& opts, std::string& digest) {
    laser::sim::SimConfig cfg;
    if (!opts.config_path.empty()) {
        cfg = laser::load_sim_config_file(opts.config_path);
        digest = file_digest(opts.config_path);
    } else {
        digest = "default";
    }
    if (opts.seed) {
        cfg.seed = *opts.seed;
    } else if (!cfg.seed_explicit) {
        cfg.seed = std::random_device{}();  // printed in the report for replay
    }
    if (opts.gamma) cfg.gamma_ms = *opts.gamma;
    cfg.validate();
    return cfg;
}

void print_header(const std::string& scenario, const laser::sim::SimConfig& cfg,
                  const std::string& digest) {
    std::cout << "scenario: " << scenario << "\n";
    std::cout << "seed: " << cfg.seed << "\n";
    std::cout << "config_digest: " << digest << "\n";
    std::cout << "hop: period_ms=" << cfg.hop.period_ms << " channels=" << cfg.hop.channel_count
              << " base_mhz=" << cfg.hop.base_frequency_mhz
              << " spacing_mhz=" << cfg.hop.spacing_mhz << "\n";
}

fs::path write_text(const fs::path& dir, const std::string& name, const std::string& content) {
    fs::create_directories(dir);
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    out << content;
    return path;
}

void print_stats(const std::string& system, const laser::LatencyStats& stats) {
    std::cout << "stats_header: system,t_max,t_min,t_avg,t_Q3\n";
    std::cout << "stats_row: ";
    laser::write_stats_csv_row(std::cout, system, stats);
}

int cmd_simulate(const std::string& system, const CommonOpts& opts, int trials) {
    std::string digest;
    const auto cfg = make_config(opts, digest);
    const auto result = system == "rke" ? laser::scenario::run_rke_measurement(cfg, trials)
                                        : laser::scenario::run_prke_measurement(cfg, trials);

    std::ostringstream dataset;
    laser::write_latency_csv(dataset, result.latencies_ms);
    const auto dataset_path = write_text(opts.out_dir, system + "_latency.csv", dataset.str());
    const auto trace_path = write_text(opts.out_dir, system + "_trace.csv", result.trace_csv);

    print_header("simulate-" + system, cfg, digest);
    std::cout << "trials: " << trials << "\n";
    std::cout << "accepted: " << result.latencies_ms.size() << "\n";
    std::cout << "dataset: " << dataset_path.string() << "\n";
    std::cout << "trace: " << trace_path.string() << "\n";

    // dataset lands on disk before this precondition can fire
    const auto stats = laser::estimate_threshold(result.latencies_ms);
    print_stats(system == "rke" ? "RKE" : "PRKE", stats);
    std::cout << "gamma_q3: " << stats.t_q3 << "\n";
    return kExitOk;
}

void print_attack_outcome(const laser::attack::AttackOutcome& outcome, const CommonOpts& opts) {
    std::size_t accepts = 0;
    std::size_t sync_sents = 0;
    std::size_t rejects = 0;
    for (const auto& v : outcome.verdicts) {
        switch (v.kind) {
            case laser::VerdictKind::accept: ++accepts; break;
            case laser::VerdictKind::sync_sent: ++sync_sents; break;
            default: ++rejects; break;
        }
    }
    const auto trace_path = write_text(opts.out_dir, outcome.kind + "_trace.csv",
                                       outcome.trace_csv);
    std::cout << "summary: " << outcome.kind << "," << (outcome.succeeded ? 1 : 0) << ","
              << outcome.frames_captured << "," << accepts << "," << sync_sents << ","
              << rejects << "\n";
    std::cout << "succeeded: " << (outcome.succeeded ? "true" : "false") << "\n";
    std::cout << "frames_captured: " << outcome.frames_captured << "\n";
    if (!outcome.timing_breakdown.empty()) {
        std::cout << "timing:";
        for (const auto& [leg, ms] : outcome.timing_breakdown) {
            std::cout << " " << leg << "=" << ms;
        }
        std::cout << "\n";
    }
    std::cout << "trace: " << trace_path.string() << "\n";
}

std::set<std::uint32_t> parse_jam_channels(const std::string& text, std::uint32_t channel_count) {
    std::set<std::uint32_t> out;
    if (text == "all") {
        for (std::uint32_t ch = 0; ch < channel_count; ++ch) out.insert(ch);
        return out;
    }
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto dash = item.find('-');
        try {
            if (dash == std::string::npos) {
                out.insert(static_cast<std::uint32_t>(std::stoul(item)));
            } else {
                const auto lo = std::stoul(item.substr(0, dash));
                const auto hi = std::stoul(item.substr(dash + 1));
                for (auto ch = lo; ch <= hi; ++ch) out.insert(static_cast<std::uint32_t>(ch));
            }
        } catch (const std::exception&) {
            throw std::invalid_argument("bad --jam-channels entry '" + item + "'");
        }
    }
    return out;
}

int cmd_attack(const std::string& kind, const CommonOpts& opts, std::uint64_t replay_delay_ms,
               double bridge_latency_ms, const std::string& jam_channels, int presses,
               std::optional<double> honest_leg_ms, std::optional<double> attacker_leg_ms) {
    std::string digest;
    const auto cfg = make_config(opts, digest);
    print_header("attack-" + kind, cfg, digest);

    if (kind == "replay") {
        const auto outcome =
            laser::attack::run_jam_replay(cfg, {.replay_delay_ms = replay_delay_ms});
        std::cout << "replay_delay_ms: " << replay_delay_ms << "\n";
        print_attack_outcome(outcome, opts);
    } else if (kind == "relay-rke") {
        const auto outcome = laser::attack::run_relay_rke(cfg, {.bridge_latency_ms = bridge_latency_ms,
                                                                .fob_leg_ms = honest_leg_ms,
                                                                .a2_leg_ms = attacker_leg_ms});
        std::cout << "bridge_latency_ms: " << bridge_latency_ms << "\n";
        print_attack_outcome(outcome, opts);
    } else if (kind == "relay-prke") {
        const auto outcome =
            laser::attack::run_relay_prke(cfg, {.bridge_latency_ms = bridge_latency_ms,
                                                .honest_roundtrip_ms = honest_leg_ms,
                                                .a1_leg_ms = attacker_leg_ms,
                                                .a2_leg_ms = attacker_leg_ms});
        std::cout << "bridge_latency_ms: " << bridge_latency_ms << "\n";
        print_attack_outcome(outcome, opts);
    } else {  // dos
        const auto channels = parse_jam_channels(jam_channels, cfg.hop.channel_count);
        const auto outcome = laser::attack::run_dos(cfg, channels, presses);
        const auto trace_path = write_text(opts.out_dir, "dos_trace.csv", outcome.trace_csv);
        std::cout << "summary: dos," << outcome.presses << "," << outcome.blocked << ","
                  << outcome.blocked_fraction << "\n";
        std::cout << "presses: " << outcome.presses << "\n";
        std::cout << "blocked: " << outcome.blocked << "\n";
        std::cout << "blocked_fraction: " << outcome.blocked_fraction << "\n";
        std::cout << "trace: " << trace_path.string() << "\n";
    }
    return kExitOk;  // attack success is data, not an error
}

int cmd_estimate(const std::string& dataset_path, const std::string& policy) {
    std::ifstream in(dataset_path);
    if (!in) throw std::runtime_error("cannot open dataset: " + dataset_path);
    const auto samples = laser::load_latency_csv(in);
    const auto stats = laser::estimate_threshold(samples);
    std::cout << "scenario: estimate\n";
    std::cout << "dataset: " << dataset_path << "\n";
    std::cout << "samples: " << stats.sample_count << "\n";
    print_stats("dataset", stats);
    const double gamma = policy == "q3" ? stats.t_q3 : policy == "avg" ? stats.t_avg
                                                                       : stats.t_max;
    std::cout << "gamma_policy: " << policy << "\n";
    std::cout << "gamma: " << gamma << "\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"LASER keyless-entry protocol simulator and attack bench"};
    app.require_subcommand(1);

    CommonOpts opts;
    std::string system = "rke";
    std::string kind;
    std::string dataset_path;
    std::string gamma_policy = "q3";
    std::string jam_channels = "0";
    int trials = 1000;
    int presses = 1000;
    std::uint64_t replay_delay_ms = 5000;
    double bridge_latency_ms = 10.5;
    std::optional<double> honest_leg_ms;
    std::optional<double> attacker_leg_ms;

    auto add_common = [&](CLI::App* sub) {
        sub->add_option("--config", opts.config_path, "scenario config file (key = value)");
        sub->add_option("--seed", opts.seed, "RNG seed (omitted: drawn and reported)");
        sub->add_option("--gamma", opts.gamma, "acceptance threshold override, ms");
        sub->add_option("--out-dir", opts.out_dir, "directory for CSV artifacts");
    };

    auto* simulate = app.add_subcommand("simulate", "run legitimate presses / handle pulls");
    simulate->add_option("system", system, "rke or prke")
        ->check(CLI::IsMember({"rke", "prke"}))
        ->required();
    simulate->add_option("--trials", trials, "number of command attempts")
        ->check(CLI::PositiveNumber);
    add_common(simulate);

    auto* attack = app.add_subcommand("attack", "run an attack scenario");
    attack->add_option("kind", kind, "replay, relay-rke, relay-prke or dos")
        ->check(CLI::IsMember({"replay", "relay-rke", "relay-prke", "dos"}))
        ->required();
    attack->add_option("--replay-delay-ms", replay_delay_ms, "delay before re-airing captures");
    attack->add_option("--bridge-latency-ms", bridge_latency_ms, "relay bridge cost per crossing");
    attack->add_option("--honest-leg-ms", honest_leg_ms,
                       "force the honest leg (relay-rke: fob leg; relay-prke: round trip)");
    attack->add_option("--attacker-leg-ms", attacker_leg_ms,
                       "force each attacker radio leg instead of sampling");
    attack->add_option("--jam-channels", jam_channels, "channels to jam: list, a-b, or 'all'");
    attack->add_option("--presses", presses, "victim presses for dos")->check(CLI::PositiveNumber);
    add_common(attack);

    auto* estimate = app.add_subcommand("estimate", "summarize a latency dataset");
    estimate->add_option("--dataset", dataset_path, "single-column latency CSV")->required();
    estimate->add_option("--gamma-policy", gamma_policy, "q3, avg or max")
        ->check(CLI::IsMember({"q3", "avg", "max"}));

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kExitOk : kExitUsage;
    }

    try {
        if (simulate->parsed()) return cmd_simulate(system, opts, trials);
        if (attack->parsed()) {
            return cmd_attack(kind, opts, replay_delay_ms, bridge_latency_ms, jam_channels,
                              presses, honest_leg_ms, attacker_leg_ms);
        }
        return cmd_estimate(dataset_path, gamma_policy);
    } catch (const laser::ConfigError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::runtime_error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return kExitInternal;
    }
}
