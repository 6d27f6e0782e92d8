#include <CLI11.hpp>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>

#include "writeleak/errors.hpp"
#include "writeleak/scenario.hpp"

namespace {

using namespace writeleak;

struct CommonOpts {
    std::string config_path;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> victim;
    std::optional<std::string> key_hex;
    std::optional<int> oversampling;
    std::optional<int> decoys;
    std::optional<std::size_t> memory_size, block_size, key_bits, modulus_bits,
        message_bytes, matrix_n;
    bool paper_example = false;
    bool scratch_in_page = false;
    bool json = false;
};

void add_common(CLI::App* cmd, CommonOpts& o) {
    cmd->add_option("--config", o.config_path, "key=value scenario file");
    cmd->add_option("--seed", o.seed, "RNG seed (beats WRITELEAK_SEED)");
    cmd->add_option("--victim", o.victim, "ladder|square_multiply|gauss_jordan");
    cmd->add_option("--key-hex", o.key_hex, "plant a specific key (hex bytes)");
    cmd->add_option("--oversampling", o.oversampling, "snapshots per victim event");
    cmd->add_option("--decoys", o.decoys, "background decoy writers");
    cmd->add_option("--memory-size", o.memory_size, "simulated DRAM bytes");
    cmd->add_option("--block-size", o.block_size, "initial scan block bytes");
    cmd->add_option("--key-bits", o.key_bits, "secret exponent width");
    cmd->add_option("--modulus-bits", o.modulus_bits, "modulus width");
    cmd->add_option("--message-bytes", o.message_bytes, "operand buffer bytes");
    cmd->add_option("--n", o.matrix_n, "matrix dimension (gauss_jordan)");
    cmd->add_flag("--paper-example", o.paper_example,
                  "use the built-in 4x4 worked example matrix");
    cmd->add_flag("--scratch-in-page", o.scratch_in_page,
                  "spill scratch writes inside the observable page");
    cmd->add_flag("--json", o.json, "machine-readable report");
}

ScenarioConfig build_config(const CommonOpts& o) {
    ScenarioConfig cfg;
    if (!o.config_path.empty()) cfg = ScenarioConfig::from_kv_file(o.config_path);
    if (const char* env = std::getenv("WRITELEAK_SEED")) {
        try {
            cfg.seed = std::stoull(env);
        } catch (const std::exception&) {
            throw ConfigError("WRITELEAK_SEED is not a number");
        }
    }
    if (o.seed) cfg.seed = *o.seed;
    if (o.victim) cfg.victim = *o.victim;
    if (o.key_hex) cfg.key_hex = *o.key_hex;
    if (o.oversampling) cfg.oversampling = *o.oversampling;
    if (o.decoys) cfg.decoys = *o.decoys;
    if (o.memory_size) cfg.memory_size = *o.memory_size;
    if (o.block_size) cfg.block_size = *o.block_size;
    if (o.key_bits) cfg.key_bits = *o.key_bits;
    if (o.modulus_bits) cfg.modulus_bits = *o.modulus_bits;
    if (o.message_bytes) cfg.message_bytes = *o.message_bytes;
    if (o.matrix_n) cfg.matrix_n = *o.matrix_n;
    if (o.paper_example) cfg.paper_example = true;
    if (o.scratch_in_page) cfg.scratch_in_page = true;
    cfg.validate();
    return cfg;
}

int cmd_run(const CommonOpts& o) {
    const auto cfg = build_config(o);
    const auto rep = run_attack(cfg);
    std::cout << (o.json ? rep.to_json() : rep.to_text());
    return rep.success ? 0 : 1;
}

int cmd_identify(const CommonOpts& o) {
    auto cfg = build_config(o);
    ExpScenario sc(cfg);
    try {
        auto id = identify_address_space(
            sc.mem(), [&] { for (int i = 0; i < 3; ++i) sc.advance_event(); },
            sc.pattern(), cfg.block_size);
        std::printf("Victim Page Address : 0x%08llx\n",
                    static_cast<unsigned long long>(id.page_addr));
        std::printf("rounds=%llu snapshots=%llu bytes=%llu\n",
                    static_cast<unsigned long long>(id.stats.rounds),
                    static_cast<unsigned long long>(id.stats.snapshots),
                    static_cast<unsigned long long>(id.stats.bytes_scanned));
        return 0;
    } catch (const IdentifyError& e) {
        std::cerr << e.what() << " (" << e.survivors.size() << " survivors)\n";
        return 1;
    }
}

int cmd_histogram(const CommonOpts& o, const std::string& csv_path) {
    const auto cfg = build_config(o);
    const auto csv = capture_histogram_csv(cfg);
    if (csv_path.empty() || csv_path == "-") {
        std::cout << csv;
    } else {
        std::ofstream f(csv_path);
        if (!f) throw ConfigError("cannot write " + csv_path);
        f << csv;
    }
    return 0;
}

int cmd_trace(const CommonOpts& o, const std::string& out_path) {
    const auto cfg = build_config(o);
    const auto jsonl = capture_trace_jsonl(cfg);
    if (out_path.empty() || out_path == "-") {
        std::cout << jsonl;
    } else {
        std::ofstream f(out_path);
        if (!f) throw ConfigError("cannot write " + out_path);
        f << jsonl;
    }
    return 0;
}

std::string one_based_set(const std::vector<std::size_t>& rows) {
    std::string s = "{";
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (i) s += ",";
        s += std::to_string(rows[i] + 1);
    }
    return s + "}";
}

std::string col_braces(const std::vector<std::uint8_t>& col) {
    std::string s = "{";
    for (std::size_t i = 0; i < col.size(); ++i) {
        if (i) s += ",";
        s += col[i] ? "1" : "0";
    }
    return s + "}";
}

int cmd_gf2_demo(const CommonOpts& o) {
    auto cfg = build_config(o);
    cfg.victim = "gauss_jordan";
    std::mt19937_64 rng(cfg.seed);
    const BitMatrix s = cfg.paper_example
                            ? worked_example_matrix()
                            : BitMatrix::random_swap_free(cfg.matrix_n, rng);
    const auto demo = mceliece_decrypt_leak_demo(s);
    const std::size_t n = s.n();

    std::cout << "Planted matrix:\n" << s.to_grid();
    std::cout << "Elimination steps (target rows per pivot step):\n";
    for (std::size_t p = 0; p < n; ++p)
        std::cout << "  step " << p + 1 << ": "
                  << one_based_set(demo.observed.steps[p]) << "\n";
    std::cout << "Inferred pivot columns:\n";
    for (std::size_t p = 0; p < n; ++p)
        std::cout << "  C" << p + 1 << " = " << col_braces(demo.columns.cols[p])
                  << "\n";
    std::cout << "Back-substituted columns:\n";
    for (std::size_t c = 0; c < n; ++c) {
        std::vector<std::uint8_t> col(n);
        for (std::size_t r = 0; r < n; ++r) col[r] = demo.recovered.at(r, c);
        std::cout << "  S" << c + 1 << " = " << col_braces(col) << "\n";
    }
    std::cout << "Recovered matrix:\n" << demo.recovered.to_grid();
    const bool ok = demo.recovered == s && demo.modes_agree;
    std::cout << "planted matrix match: " << (ok ? "yes" : "no") << "\n";
    return ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"write-access-pattern leakage simulator"};
    app.require_subcommand(1);

    CommonOpts run_o, id_o, hist_o, trace_o, gf2_o;
    std::string csv_path, trace_path;

    auto* run = app.add_subcommand("run", "plant a secret, run the attack pipeline");
    add_common(run, run_o);
    auto* identify =
        app.add_subcommand("identify", "address-space identification only");
    add_common(identify, id_o);
    auto* histogram =
        app.add_subcommand("histogram", "per-byte write histogram of one capture");
    add_common(histogram, hist_o);
    histogram->add_option("--csv", csv_path, "output CSV path (- for stdout)");
    auto* trace = app.add_subcommand("trace", "JSON-lines event trace of one capture");
    add_common(trace, trace_o);
    trace->add_option("--out", trace_path, "output path (- for stdout)");
    auto* gf2 = app.add_subcommand("gf2", "binary-matrix leakage demos");
    auto* demo = gf2->add_subcommand("demo", "run the Gauss-Jordan recovery chain");
    add_common(demo, gf2_o);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : 2;
    }

    try {
        if (run->parsed()) return cmd_run(run_o);
        if (identify->parsed()) return cmd_identify(id_o);
        if (histogram->parsed()) return cmd_histogram(hist_o, csv_path);
        if (trace->parsed()) return cmd_trace(trace_o, trace_path);
        if (gf2->parsed() && demo->parsed()) return cmd_gf2_demo(gf2_o);
        std::cerr << "missing subcommand\n";
        return 2;
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
