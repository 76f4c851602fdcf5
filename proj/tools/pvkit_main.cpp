#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "pvkit/attack_suite.hpp"
#include "pvkit/errors.hpp"
#include "pvkit/harness.hpp"
#include "pvkit/scenario_text.hpp"
#include "pvkit/sodium_suite.hpp"

namespace {

namespace fs = std::filesystem;

// --out wins, then PVKIT_OUT; exit codes are the machine contract
// (0 pass, 1 failed assertions or IO, 2 unusable scenario/usage).

std::optional<std::string> resolve_out(const std::string& flag_value) {
    if (!flag_value.empty()) return flag_value;
    if (const char* env = std::getenv("PVKIT_OUT"); env && *env) return std::string(env);
    return std::nullopt;
}

int write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary);
    if (!out || !(out << content) || !out.flush()) {
        std::cerr << "error: cannot write " << path << '\n';
        return 1;
    }
    return 0;
}

int cmd_provision(const std::string& out_flag, std::uint64_t seed) {
    std::string dir = resolve_out(out_flag).value_or("provision");
    std::error_code ec;
    fs::create_directories(dir, ec);
    if (ec) {
        std::cerr << "error: cannot create " << dir << ": " << ec.message() << '\n';
        return 1;
    }

    pvkit::SimWorld world(seed);
    world.add_ca("rootca");
    world.add_hn("HN1");
    world.add_fn("FN1");
    world.add_fn("FN2");
    world.add_mu("alice", "HN1");
    world.register_mu("alice");

    std::vector<std::pair<std::string, std::string>> files;
    files.emplace_back("rootca.pub.hex", pvkit::to_hex(world.ca_public_key()));
    for (const std::string& id : {std::string("HN1")}) {
        const auto& hn = world.hn(id);
        files.emplace_back(id + ".cert.hex", pvkit::to_hex(hn.certificate().encode()));
        files.emplace_back(id + ".pub.hex", pvkit::to_hex(hn.public_key()));
        files.emplace_back(id + ".key.hex", pvkit::to_hex(hn.keys().private_key));
    }
    for (const std::string& id : world.fn_ids()) {
        const auto& fn = world.fn(id);
        files.emplace_back(id + ".cert.hex", pvkit::to_hex(fn.certificate().encode()));
        files.emplace_back(id + ".pub.hex", pvkit::to_hex(fn.public_key()));
        files.emplace_back(id + ".key.hex", pvkit::to_hex(fn.keys().private_key));
    }

    std::string card_path = dir + "/alice.card";
    for (const auto& [name, _] : files) {
        if (fs::exists(dir + "/" + name)) {
            std::cerr << "error: refusing to overwrite " << dir << "/" << name << '\n';
            return 1;
        }
    }
    if (fs::exists(card_path)) {
        std::cerr << "error: refusing to overwrite " << card_path << '\n';
        return 1;
    }

    for (const auto& [name, hex] : files) {
        if (int rc = write_text_file(dir + "/" + name, hex + "\n"); rc != 0) return rc;
        std::cout << "wrote " << dir << "/" << name << '\n';
    }
    try {
        pvkit::save_smart_card(card_path, world.mu("alice").smart_card());
    } catch (const pvkit::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    std::cout << "wrote " << card_path << '\n';
    return 0;
}

int run_or_dump(const std::string& scenario_path, std::optional<std::uint64_t> seed,
                const std::string& out_flag, bool print_trace,
                std::vector<std::string>* failures_out = nullptr) {
    pvkit::Scenario scenario;
    try {
        scenario = pvkit::parse_scenario_file(scenario_path);
    } catch (const pvkit::ScenarioParseError& e) {
        std::cerr << "scenario error: " << scenario_path << ": " << e.what() << '\n';
        return 2;
    } catch (const pvkit::IoError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }

    pvkit::RunResult result;
    try {
        result = pvkit::run_scenario(scenario, seed);
    } catch (const pvkit::ScenarioError& e) {
        std::cerr << "scenario error: " << scenario_path << ": " << e.what() << '\n';
        return 2;
    }

    if (auto out = resolve_out(out_flag)) {
        if (int rc = write_text_file(*out, result.trace.to_text()); rc != 0) return rc;
    }
    if (print_trace) std::cout << result.trace.to_text();

    for (const std::string& f : result.failures) std::cerr << "failed: " << f << '\n';
    if (failures_out) *failures_out = result.failures;

    if (result.ok()) {
        std::cout << "ok: " << scenario.steps.size() << " steps, " << result.trace.entries.size()
                  << " trace entries\n";
        return 0;
    }
    std::cerr << result.failures.size() << " assertion(s) failed\n";
    return 1;
}

int cmd_attack_suite(std::uint64_t seed, bool weak_sym) {
    static const pvkit::UnauthenticatedSymSuite weak;
    const pvkit::CryptoSuite& suite =
        weak_sym ? static_cast<const pvkit::CryptoSuite&>(weak) : pvkit::default_suite();
    pvkit::AttackReport report = pvkit::run_attack_suite(seed, suite);
    std::cout << report.to_text();
    if (report.all_upheld()) {
        std::cout << "all " << report.claims.size() << " claims upheld\n";
        return 0;
    }
    std::cerr << "attack suite found violated claims\n";
    return 1;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"passport/visa roaming authentication simulation kit"};
    app.require_subcommand(1);

    bool verbose = false;
    app.add_flag("-v,--verbose", verbose, "print the full annotated trace");

    std::string scenario_path;
    std::string out_flag;
    std::optional<std::uint64_t> seed_override;
    std::uint64_t fixed_seed = 0;
    bool weak_sym = false;

    auto* provision = app.add_subcommand("provision", "generate a CA, one HN, two FNs and a "
                                                      "provisioned mobile user");
    provision->add_option("--out", out_flag, "output directory (or $PVKIT_OUT)");
    provision->add_option("--seed", fixed_seed, "deterministic seed");

    auto* run = app.add_subcommand("run", "execute a scenario file");
    run->add_option("--scenario", scenario_path, "scenario file")->required();
    run->add_option("--seed", seed_override, "seed override (wins over the scenario's seed line)");
    run->add_option("--out", out_flag, "write the trace to this file (or $PVKIT_OUT)");

    auto* dump = app.add_subcommand("dump", "execute a scenario and print the full trace");
    dump->add_option("--scenario", scenario_path, "scenario file")->required();
    dump->add_option("--seed", seed_override, "seed override");
    dump->add_option("--out", out_flag, "write the trace to this file (or $PVKIT_OUT)");

    auto* attack = app.add_subcommand("attack-suite", "run the adversarial claim battery");
    attack->add_option("--seed", fixed_seed, "deterministic seed");
    attack->add_flag("--weak-sym", weak_sym,
                     "swap in unauthenticated symmetric encryption (negative control)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (provision->parsed()) return cmd_provision(out_flag, fixed_seed);
        if (run->parsed()) return run_or_dump(scenario_path, seed_override, out_flag, verbose);
        if (dump->parsed()) return run_or_dump(scenario_path, seed_override, out_flag, true);
        if (attack->parsed()) return cmd_attack_suite(fixed_seed, weak_sym);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 1;
    }
    return 2;
}
