#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <random>
#include <vector>

#include "writeleak/bignat.hpp"
#include "writeleak/keybits.hpp"
#include "writeleak/memsim.hpp"

namespace writeleak {

enum class Operand : std::uint8_t { R0 = 0, R1 = 1 };

struct OperandRegion {
    std::uint64_t base = 0;
    std::size_t len = 0;
    Operand label = Operand::R0;
};

// R0 precedes R1 (declaration order); the gap between them is at least one
// unwritten cache line.
struct OperandLayout {
    OperandRegion r0, r1;

    static OperandLayout at_page(std::uint64_t page_addr, std::size_t operand_bytes,
                                 std::size_t line_size);
    void validate(std::size_t value_bytes, std::size_t line_size) const;
};

// Routes victim stores through the modeled cache into simulated DRAM and
// keeps the shared event log.
struct MemoryBus {
    SimMemory& mem;
    CacheModel& cache;
    TraceLog* trace = nullptr;
    std::vector<EvictionEvent> evictions;

    // One committed region-update event (advances the event clock).
    void store_event(std::uint64_t addr, std::span<const std::uint8_t> data);
    // Secondary store inside the current event (scratch spill traffic).
    void store_within_event(std::uint64_t addr, std::span<const std::uint8_t> data);
    void load(std::uint64_t addr, std::size_t len);
};

// Stepwise exponentiation victim: each step() commits exactly one
// region-update event. prepare() performs the R0/R1 initialization writes;
// callers open the observation window after it.
class ExpVictim {
public:
    virtual ~ExpVictim() = default;
    virtual void prepare(MemoryBus& bus) = 0;
    virtual bool step(MemoryBus& bus) = 0;  // false once the run is complete
    virtual const BigNat& result() const = 0;

    const std::vector<Operand>& write_log() const { return write_log_; }

    // Optional scratch traffic planted inside the observable page: one line
    // rewritten every `period` events.
    void enable_scratch(std::uint64_t addr, std::size_t len, std::size_t period);

protected:
    void commit(MemoryBus& bus, const OperandRegion& region, const BigNat& value);
    std::vector<Operand> write_log_;

private:
    std::optional<std::uint64_t> scratch_addr_;
    std::size_t scratch_len_ = 0, scratch_period_ = 0;
    std::uint64_t scratch_counter_ = 0;
};

class MontgomeryLadderVictim : public ExpVictim {
public:
    MontgomeryLadderVictim(BigNat g, KeyBits k, BigNat n, OperandLayout layout);
    void prepare(MemoryBus& bus) override;
    bool step(MemoryBus& bus) override;
    const BigNat& result() const override { return r0_; }

private:
    BigNat g_, n_, r0_, r1_;
    KeyBits k_;
    OperandLayout layout_;
    std::ptrdiff_t j_;
    int phase_ = 0;  // 0: multiply write, 1: square write
};

class SquareMultiplyVictim : public ExpVictim {
public:
    SquareMultiplyVictim(BigNat g, KeyBits k, BigNat n, OperandLayout layout);
    void prepare(MemoryBus& bus) override;
    bool step(MemoryBus& bus) override;
    const BigNat& result() const override { return r0_; }

private:
    BigNat g_, n_, r0_, r1_;
    KeyBits k_;
    OperandLayout layout_;
    std::ptrdiff_t j_;
    int phase_ = 0;  // 0: square write, 1: conditional multiply write
};

// Keeps one victim encrypting forever: when an encryption finishes, a fresh
// base g is drawn and the operands are re-initialized with the same key.
class ContinuousVictim {
public:
    enum class Kind { ladder, square_multiply };

    ContinuousVictim(Kind kind, KeyBits k, BigNat n, OperandLayout layout,
                     std::uint64_t seed);

    // Advance the current encryption by one event; false when it just finished
    // (call restart() to begin the next one).
    bool step_within(MemoryBus& bus);
    void restart(MemoryBus& bus);
    void run_current_to_end(MemoryBus& bus);

    const OperandLayout& layout() const { return layout_; }
    const KeyBits& key() const { return k_; }
    ExpVictim& current() { return *current_; }
    void set_scratch(std::uint64_t addr, std::size_t len, std::size_t period);

private:
    std::unique_ptr<ExpVictim> make_victim(BigNat g);

    Kind kind_;
    KeyBits k_;
    BigNat n_;
    OperandLayout layout_;
    std::mt19937_64 rng_;
    std::unique_ptr<ExpVictim> current_;
    std::optional<std::tuple<std::uint64_t, std::size_t, std::size_t>> scratch_;
};

// Deterministic stand-in for the concurrent DMA reader. advance_event runs
// one victim update event (plus any background writers); after each event the
// scheduler takes `oversampling` snapshots of `watch` when oversampling >= 2,
// or one snapshot per two events when oversampling == 1 (the under-sampled
// adversary that can no longer separate the two updates of a key bit).
struct InterleaveResult {
    std::vector<Snapshot> snapshots;
    std::uint64_t events = 0;
    std::uint64_t bytes_transferred = 0;
};

InterleaveResult run_interleaved(const std::function<bool()>& advance_event,
                                 const SimMemory& mem, std::uint64_t watch_base,
                                 std::size_t watch_len, const SnapshotBudget& budget,
                                 TraceLog* trace = nullptr);

// Background writer with a deliberately non-matching diff footprint, used to
// stress address-space identification.
class DecoyWriter {
public:
    DecoyWriter(std::uint64_t page_addr, std::size_t lines, std::size_t line_size)
        : addr_(page_addr), lines_(lines), line_(line_size) {}
    void on_event(SimMemory& mem);

private:
    std::uint64_t addr_;
    std::size_t lines_, line_;
    std::uint64_t counter_ = 0;
};

}  // namespace writeleak
