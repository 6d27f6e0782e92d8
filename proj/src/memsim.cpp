#include "writeleak/memsim.hpp"

#include <algorithm>
#include <cstdio>
#include <cstring>
#include <stdexcept>

#include "writeleak/errors.hpp"

namespace writeleak {

SimMemory::SimMemory(std::size_t size_bytes, std::size_t page_size,
                     std::size_t line_size)
    : bytes_(size_bytes, 0), page_size_(page_size), line_size_(line_size) {
    if (page_size == 0 || line_size == 0 || page_size % line_size != 0 ||
        size_bytes % page_size != 0)
        throw ConfigError("SimMemory: size/page/line must nest evenly");
}

void SimMemory::check_range(std::uint64_t addr, std::size_t len) const {
    if (addr > bytes_.size() || len > bytes_.size() - addr)
        throw std::out_of_range("SimMemory: access outside memory");
}

void SimMemory::write(std::uint64_t addr, std::span<const std::uint8_t> data) {
    check_range(addr, data.size());
    std::memcpy(bytes_.data() + addr, data.data(), data.size());
}

void SimMemory::read(std::uint64_t addr, std::span<std::uint8_t> out) const {
    check_range(addr, out.size());
    std::memcpy(out.data(), bytes_.data() + addr, out.size());
}

std::uint8_t SimMemory::byte(std::uint64_t addr) const {
    check_range(addr, 1);
    return bytes_[addr];
}

Snapshot take_snapshot(const SimMemory& mem, std::uint64_t base, std::size_t len) {
    Snapshot s;
    s.base = base;
    s.data.resize(len);
    mem.read(base, s.data);
    s.taken_at = mem.event_clock;
    return s;
}

namespace {
constexpr char kSnapMagic[8] = {'W', 'L', 'S', 'N', 'A', 'P', '0', '1'};

template <typename T>
void put_le(std::vector<std::uint8_t>& out, std::size_t off, T v) {
    for (std::size_t i = 0; i < sizeof(T); ++i)
        out[off + i] = static_cast<std::uint8_t>(v >> (8 * i));
}

template <typename T>
T get_le(std::span<const std::uint8_t> in, std::size_t off) {
    T v = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i)
        v |= static_cast<T>(in[off + i]) << (8 * i);
    return v;
}
}  // namespace

std::vector<std::uint8_t> Snapshot::serialize() const {
    std::vector<std::uint8_t> out(24 + data.size());
    for (std::size_t i = 0; i < 8; ++i)
        out[i] = static_cast<std::uint8_t>(kSnapMagic[i]);
    put_le<std::uint64_t>(out, 8, base);
    put_le<std::uint32_t>(out, 16, static_cast<std::uint32_t>(data.size()));
    put_le<std::uint32_t>(out, 20, static_cast<std::uint32_t>(taken_at));
    std::copy(data.begin(), data.end(), out.begin() + 24);
    return out;
}

Snapshot Snapshot::deserialize(std::span<const std::uint8_t> raw) {
    if (raw.size() < 24 || std::memcmp(raw.data(), kSnapMagic, 8) != 0)
        throw TraceError("Snapshot::deserialize: bad header");
    Snapshot s;
    s.base = get_le<std::uint64_t>(raw, 8);
    std::uint32_t len = get_le<std::uint32_t>(raw, 16);
    s.taken_at = get_le<std::uint32_t>(raw, 20);
    if (raw.size() != 24u + len)
        throw TraceError("Snapshot::deserialize: length mismatch");
    s.data.assign(raw.begin() + 24, raw.end());
    return s;
}

CacheModel::CacheModel(std::size_t sets, std::size_t ways, std::size_t line_size,
                       WritePolicy policy)
    : sets_(sets), ways_(ways), line_(line_size), policy_(policy),
      lines_(sets * ways) {
    if (sets == 0 || ways == 0 || line_size == 0)
        throw ConfigError("CacheModel: geometry must be nonzero");
}

CacheModel::Line& CacheModel::touch_line(std::uint64_t line_addr, SimMemory& mem,
                                         bool for_write,
                                         std::vector<EvictionEvent>& evicted) {
    const std::size_t set = set_index(line_addr);
    const std::uint64_t tag = line_addr / line_ / sets_;
    Line* slot = &lines_[set * ways_];
    for (std::size_t w = 0; w < ways_; ++w) {
        Line& l = lines_[set * ways_ + w];
        if (l.valid && l.tag == tag) {
            l.lru = ++tick_;
            return l;
        }
        // Prefer an invalid slot, else the least recently used one.
        if (!l.valid) {
            if (slot->valid) slot = &l;
        } else if (slot->valid && l.lru < slot->lru) {
            slot = &l;
        }
    }
    if (slot->valid) {
        const std::uint64_t victim_addr = (slot->tag * sets_ + set) * line_;
        if (slot->dirty) mem.write(victim_addr, slot->data);
        evicted.push_back({victim_addr, slot->dirty, mem.event_clock});
    }
    slot->tag = tag;
    slot->valid = true;
    slot->dirty = false;
    slot->lru = ++tick_;
    slot->data.resize(line_);
    mem.read(line_addr, slot->data);  // fill; for_write overlays below
    (void)for_write;
    return *slot;
}

std::vector<EvictionEvent> CacheModel::store(std::uint64_t addr,
                                             std::span<const std::uint8_t> data,
                                             SimMemory& mem) {
    std::vector<EvictionEvent> evicted;
    if (policy_ == WritePolicy::write_through) {
        // Write-around: memory is updated in place, no allocation, nothing to
        // evict.
        mem.write(addr, data);
        return evicted;
    }
    std::size_t off = 0;
    while (off < data.size()) {
        const std::uint64_t a = addr + off;
        const std::uint64_t line_addr = a / line_ * line_;
        const std::size_t in_line = std::min<std::size_t>(
            data.size() - off, line_ - (a - line_addr));
        Line& l = touch_line(line_addr, mem, true, evicted);
        std::memcpy(l.data.data() + (a - line_addr), data.data() + off, in_line);
        l.dirty = true;
        off += in_line;
    }
    return evicted;
}

std::vector<EvictionEvent> CacheModel::load(std::uint64_t addr, std::size_t len,
                                            SimMemory& mem) {
    std::vector<EvictionEvent> evicted;
    if (policy_ == WritePolicy::write_through) return evicted;  // reads bypass
    const std::uint64_t first = addr / line_ * line_;
    const std::uint64_t last = (addr + len - 1) / line_ * line_;
    for (std::uint64_t a = first; a <= last; a += line_)
        touch_line(a, mem, false, evicted);
    return evicted;
}

std::vector<EvictionEvent> CacheModel::flush(SimMemory& mem) {
    std::vector<EvictionEvent> evicted;
    for (std::size_t set = 0; set < sets_; ++set) {
        for (std::size_t w = 0; w < ways_; ++w) {
            Line& l = lines_[set * ways_ + w];
            if (!l.valid) continue;
            if (l.dirty) {
                const std::uint64_t a = (l.tag * sets_ + set) * line_;
                mem.write(a, l.data);
                evicted.push_back({a, true, mem.event_clock});
            }
            l.valid = false;
            l.dirty = false;
        }
    }
    return evicted;
}

std::vector<EvictionEvent> victim_store(std::uint64_t addr,
                                        std::span<const std::uint8_t> data,
                                        CacheModel& cache, SimMemory& mem) {
    ++mem.event_clock;
    return cache.store(addr, data, mem);
}

void TraceLog::store(std::uint64_t t, std::uint64_t addr, std::uint32_t len) {
    record(t, "store", addr, len, std::nullopt);
}
void TraceLog::snapshot(std::uint64_t t, std::uint64_t addr, std::uint32_t len) {
    record(t, "snapshot", addr, len, std::nullopt);
}
void TraceLog::evict(std::uint64_t t, std::uint64_t addr, std::uint32_t len,
                     bool dirty) {
    record(t, "evict", addr, len, dirty);
}

void TraceLog::record(std::uint64_t t, const char* kind, std::uint64_t addr,
                      std::uint32_t len, std::optional<bool> dirty) {
    char buf[160];
    if (dirty.has_value()) {
        std::snprintf(buf, sizeof buf,
                      "{\"t\":%llu,\"kind\":\"%s\",\"addr\":\"0x%llx\",\"len\":%u,"
                      "\"dirty\":%s}\n",
                      static_cast<unsigned long long>(t), kind,
                      static_cast<unsigned long long>(addr), len,
                      *dirty ? "true" : "false");
    } else {
        std::snprintf(buf, sizeof buf,
                      "{\"t\":%llu,\"kind\":\"%s\",\"addr\":\"0x%llx\",\"len\":%u}\n",
                      static_cast<unsigned long long>(t), kind,
                      static_cast<unsigned long long>(addr), len);
    }
    text_ += buf;
    ++records_;
}

}  // namespace writeleak
