// uavshare: run scenario files, benchmark operation counts, run the acceptance suite.
//
// Exit status: 0 success, 1 assertion or criterion failure, 2 usage or parse error.
#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "uavshare/acceptance.hpp"
#include "uavshare/errors.hpp"
#include "uavshare/scenario.hpp"

namespace {

using namespace uavshare;

constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;

int emit(const std::string& text, const std::string& out_path) {
    if (out_path.empty()) {
        std::cout << text;
        return 0;
    }
    std::ofstream f(out_path, std::ios::binary);
    if (!f) {
        std::cerr << "cannot write " << out_path << '\n';
        return kExitUsage;
    }
    f << text;
    return 0;
}

int cmd_run(const std::string& path, std::optional<std::uint64_t> seed, const std::string& out_path) {
    scenario::Scenario s;
    try {
        s = scenario::load(path);
    } catch (const ProtocolError& e) {
        std::cerr << e.what() << '\n';
        return kExitUsage;
    }
    if (seed) s.seed = *seed;
    auto result = scenario::run(s);
    if (int rc = emit(result.render(), out_path)) return rc;
    if (!out_path.empty()) std::cout << "result=" << (result.pass() ? "pass" : "fail") << '\n';
    return result.pass() ? 0 : kExitFail;
}

std::string counts_text(const CostCounts& c) {
    std::ostringstream o;
    o << c.scalar_mults << " T_m, " << c.modexps << " T_e, " << c.sym_cipher_calls << " T_AES";
    return o.str();
}

int cmd_bench(const std::string& proto, std::size_t n, std::size_t trials, std::uint64_t size, std::uint64_t seed,
              const std::string& out_path) {
    report::Protocol p;
    if (proto == "segds") {
        p = report::Protocol::Segds;
    } else if (proto == "sedds") {
        p = report::Protocol::Sedds;
        n = 1;
    } else {
        std::cerr << "unknown protocol " << proto << '\n';
        return kExitUsage;
    }
    if (size == 0) size = p == report::Protocol::Segds ? 65'536 : 16'384;

    std::ostringstream out;
    auto first = scenario::run(scenario::honest(p, n, size, seed));
    bool deterministic = true;
    for (std::size_t t = 1; t < trials; ++t)
        deterministic &= scenario::run(scenario::honest(p, n, size, seed + t)).costs.measured == first.costs.measured;
    out << first.costs.render();
    out << "\ntrials=" << trials << " deterministic=" << (deterministic ? "yes" : "no") << '\n';

    if (p == report::Protocol::Segds) {
        out << "\n  N  measured                      formula                      ratio T_m\n";
        for (std::size_t k = 2; k <= 10; ++k) {
            auto r = scenario::run(scenario::honest(p, k, size, seed));
            const auto& m = r.costs.measured;
            auto f = report::segds_formula(k);
            out << std::setw(3) << k << "  " << std::left << std::setw(30) << counts_text(m) << std::setw(29)
                << f.text() << std::right << std::fixed << std::setprecision(2)
                << static_cast<double>(m.scalar_mults) / static_cast<double>(f.tm) << '\n';
        }
    }
    if (int rc = emit(out.str(), out_path)) return rc;
    return first.costs.pass() && deterministic ? 0 : kExitFail;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"uavshare: secure UAV data sharing protocols on a simulated network"};
    app.require_subcommand(1);

    auto* run = app.add_subcommand("run", "Run a scenario file and check its expectations");
    std::string scenario_path, run_out;
    std::optional<std::uint64_t> run_seed;
    run->add_option("scenario", scenario_path, "Scenario file")->required();
    run->add_option("--seed", run_seed, "Override the scenario seed");
    run->add_option("--out", run_out, "Write the report here instead of stdout");

    auto* bench = app.add_subcommand("bench", "Measure operation counts on honest runs");
    std::string proto = "segds", bench_out;
    std::size_t n = 5, trials = 10;
    std::uint64_t size = 0, bench_seed = 1;
    bench->add_option("--protocol", proto, "segds or sedds")->check(CLI::IsMember({"segds", "sedds"}));
    bench->add_option("--n", n, "Group size (segds)")->check(CLI::Range(1, 64));
    bench->add_option("--trials", trials, "Number of seeds")->check(CLI::Range(1, 1000));
    bench->add_option("--size", size, "Content size in bytes");
    bench->add_option("--seed", bench_seed, "First seed");
    bench->add_option("--out", bench_out, "Write the report here instead of stdout");

    auto* accept = app.add_subcommand("accept", "Run the acceptance suite");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        if (*run) return cmd_run(scenario_path, run_seed, run_out);
        if (*bench) return cmd_bench(proto, n, trials, size, bench_seed, bench_out);
        if (*accept) return acceptance::all_pass(acceptance::run_all(std::cout)) ? 0 : kExitFail;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitFail;
    }
    return kExitUsage;
}
