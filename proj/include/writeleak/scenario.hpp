#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "writeleak/attacker.hpp"
#include "writeleak/gf2.hpp"
#include "writeleak/keybits.hpp"
#include "writeleak/victim.hpp"

namespace writeleak {

// Reproducible run description. Serializes to a flat key=value file; flags
// and the WRITELEAK_SEED environment variable override individual fields.
struct ScenarioConfig {
    std::uint64_t seed = 1;
    std::string victim = "ladder";  // ladder | square_multiply | gauss_jordan
    std::size_t key_bits = 512;
    std::size_t modulus_bits = 1024;
    std::size_t message_bytes = 128;
    std::size_t memory_size = 64ull << 20;
    std::size_t page_size = 4096;
    std::size_t line_size = 64;
    std::size_t block_size = 4ull << 20;
    int oversampling = 2;
    std::size_t cache_sets = 64;
    std::size_t cache_ways = 8;
    std::string cache_policy = "write_through";  // write_through | write_back
    std::size_t matrix_n = 4;
    bool paper_example = false;
    int decoys = 0;
    bool scratch_in_page = false;
    std::optional<std::string> key_hex;  // plant a specific key (no spaces)

    void validate() const;
    std::string to_kv() const;
    static ScenarioConfig from_kv(std::istream& in);
    static ScenarioConfig from_kv_file(const std::string& path);
};

struct PhaseStats {
    std::uint64_t snapshots = 0;
    std::uint64_t bytes = 0;
    std::uint64_t events = 0;
    std::uint64_t rounds = 0;

    bool operator==(const PhaseStats&) const = default;
};

struct AttackReport {
    bool success = false;
    std::string error;

    // Exponentiation pipeline fields.
    std::uint64_t victim_page = 0;
    std::uint64_t planted_page = 0;
    PhaseStats identify, capture;
    std::size_t bits_total = 0;
    std::size_t bits_correct = 0;
    std::string recovered_hex;  // 8-bytes-per-line dump
    std::string planted_hex;

    // Matrix pipeline fields.
    std::string recovered_grid;
    std::string planted_grid;

    std::string to_text() const;
    std::string to_json() const;
};

// The planted exponentiation world: simulated DRAM, cache, a continuously
// encrypting victim at a seed-chosen page, and optional decoy writers.
class ExpScenario {
public:
    explicit ExpScenario(const ScenarioConfig& cfg);

    // One victim update event plus one round of background decoy writes.
    // Always returns true (the victim restarts between encryptions).
    bool advance_event();
    // Finish the in-flight encryption and re-initialize the operands, so a
    // capture window covers exactly one full encryption.
    void begin_fresh_encryption();
    // One event of the current encryption; false once it completes.
    bool step_current();

    SimMemory& mem() { return *mem_; }
    const SimMemory& mem() const { return *mem_; }
    std::uint64_t planted_page() const { return page_; }
    const KeyBits& planted_key() const { return victim_->key(); }
    const OperandLayout& layout() const { return victim_->layout(); }
    RegionPattern pattern() const;
    TraceLog* trace() { return trace_; }
    void set_trace(TraceLog* t);

private:
    ScenarioConfig cfg_;
    std::unique_ptr<SimMemory> mem_;
    std::unique_ptr<CacheModel> cache_;
    std::unique_ptr<MemoryBus> bus_;
    std::unique_ptr<ContinuousVictim> victim_;
    std::vector<DecoyWriter> decoys_;
    std::uint64_t page_ = 0;
    TraceLog* trace_ = nullptr;
};

// Full pipeline: identify -> threshold -> infer, compared against the
// planted ground truth. Attack-level failures are reported (success=false,
// error set), configuration errors propagate as ConfigError.
AttackReport run_exp_attack(const ScenarioConfig& cfg, TraceLog* trace = nullptr);

// Gauss-Jordan leakage pipeline on a planted matrix.
AttackReport run_gf2_attack(const ScenarioConfig& cfg);

AttackReport run_attack(const ScenarioConfig& cfg);

// Histogram of one capture window (CSV per the attacker module).
std::string capture_histogram_csv(const ScenarioConfig& cfg);

// JSON-lines event trace of one capture window.
std::string capture_trace_jsonl(const ScenarioConfig& cfg);

}  // namespace writeleak
