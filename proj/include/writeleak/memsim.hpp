#pragma once

#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

namespace writeleak {

// Byte-addressed simulated DRAM. event_clock counts committed victim
// region-update events, not individual byte stores.
class SimMemory {
public:
    explicit SimMemory(std::size_t size_bytes = 64ull << 20,
                       std::size_t page_size = 4096, std::size_t line_size = 64);

    std::size_t size() const { return bytes_.size(); }
    std::size_t page_size() const { return page_size_; }
    std::size_t line_size() const { return line_size_; }

    void write(std::uint64_t addr, std::span<const std::uint8_t> data);
    void read(std::uint64_t addr, std::span<std::uint8_t> out) const;
    std::uint8_t byte(std::uint64_t addr) const;

    std::uint64_t event_clock = 0;

private:
    void check_range(std::uint64_t addr, std::size_t len) const;
    std::vector<std::uint8_t> bytes_;
    std::size_t page_size_;
    std::size_t line_size_;
};

// Immutable point-in-time copy of a memory region.
struct Snapshot {
    std::uint64_t base = 0;
    std::vector<std::uint8_t> data;
    std::uint64_t taken_at = 0;

    std::size_t len() const { return data.size(); }
    // Raw dump: "WLSNAP01" magic, base u64 LE, len u32 LE, clock u32 LE, data.
    std::vector<std::uint8_t> serialize() const;
    static Snapshot deserialize(std::span<const std::uint8_t> raw);
};

Snapshot take_snapshot(const SimMemory& mem, std::uint64_t base, std::size_t len);

// DMA-channel model: bandwidth is bookkeeping only, oversampling is the
// scheduler contract (snapshots per victim update event).
struct SnapshotBudget {
    std::uint64_t bytes_per_tick = 1ull << 20;
    int oversampling = 2;
};

struct EvictionEvent {
    std::uint64_t addr = 0;  // base address of the evicted line
    bool dirty = false;
    std::uint64_t at = 0;

    bool operator==(const EvictionEvent&) const = default;
};

enum class WritePolicy { write_through, write_back };

// Set-associative cache, LRU replacement, modulus set hash.
// write_through: stores reach SimMemory immediately and do not allocate.
// write_back: stores allocate and dirty lines; SimMemory changes only when a
// dirty line is evicted (or flushed).
class CacheModel {
public:
    CacheModel(std::size_t sets, std::size_t ways, std::size_t line_size,
               WritePolicy policy);

    std::size_t set_index(std::uint64_t addr) const {
        return (addr / line_) % sets_;
    }
    WritePolicy policy() const { return policy_; }
    std::size_t line_size() const { return line_; }

    std::vector<EvictionEvent> store(std::uint64_t addr,
                                     std::span<const std::uint8_t> data,
                                     SimMemory& mem);
    std::vector<EvictionEvent> load(std::uint64_t addr, std::size_t len,
                                    SimMemory& mem);
    // Write back every dirty line and invalidate the whole cache. Clean lines
    // drop silently.
    std::vector<EvictionEvent> flush(SimMemory& mem);

private:
    struct Line {
        std::uint64_t tag = 0;
        bool valid = false;
        bool dirty = false;
        std::uint64_t lru = 0;
        std::vector<std::uint8_t> data;
    };
    Line& touch_line(std::uint64_t line_addr, SimMemory& mem, bool for_write,
                     std::vector<EvictionEvent>& evicted);

    std::size_t sets_, ways_, line_;
    WritePolicy policy_;
    std::vector<Line> lines_;  // sets_ * ways_
    std::uint64_t tick_ = 0;
};

// One committed victim update event: routes the store through the cache and
// advances the event clock exactly once.
std::vector<EvictionEvent> victim_store(std::uint64_t addr,
                                        std::span<const std::uint8_t> data,
                                        CacheModel& cache, SimMemory& mem);

// JSON-lines event log with stable field order, for golden-file tests.
class TraceLog {
public:
    void store(std::uint64_t t, std::uint64_t addr, std::uint32_t len);
    void snapshot(std::uint64_t t, std::uint64_t addr, std::uint32_t len);
    void evict(std::uint64_t t, std::uint64_t addr, std::uint32_t len, bool dirty);

    const std::string& text() const { return text_; }
    std::size_t records() const { return records_; }

private:
    void record(std::uint64_t t, const char* kind, std::uint64_t addr,
                std::uint32_t len, std::optional<bool> dirty);
    std::string text_;
    std::size_t records_ = 0;
};

}  // namespace writeleak
