#include "writeleak/victim.hpp"

#include <stdexcept>

#include "writeleak/errors.hpp"

namespace writeleak {

namespace {
std::size_t round_up(std::size_t v, std::size_t to) {
    return (v + to - 1) / to * to;
}
}  // namespace

OperandLayout OperandLayout::at_page(std::uint64_t page_addr,
                                     std::size_t operand_bytes,
                                     std::size_t line_size) {
    const std::size_t region_len = round_up(operand_bytes, line_size);
    OperandLayout l;
    l.r0 = {page_addr, region_len, Operand::R0};
    // One inactive line between the regions.
    l.r1 = {page_addr + region_len + line_size, region_len, Operand::R1};
    return l;
}

void OperandLayout::validate(std::size_t value_bytes, std::size_t line_size) const {
    if (r0.len < value_bytes || r1.len < value_bytes)
        throw ConfigError("OperandLayout: region too small for operand");
    if (r0.base + r0.len + line_size > r1.base)
        throw ConfigError("OperandLayout: regions must be separated by a line");
}

void MemoryBus::store_event(std::uint64_t addr, std::span<const std::uint8_t> data) {
    auto ev = victim_store(addr, data, cache, mem);
    if (trace) {
        trace->store(mem.event_clock, addr, static_cast<std::uint32_t>(data.size()));
        for (const auto& e : ev)
            trace->evict(e.at, e.addr, static_cast<std::uint32_t>(cache.line_size()),
                         e.dirty);
    }
    evictions.insert(evictions.end(), ev.begin(), ev.end());
}

void MemoryBus::store_within_event(std::uint64_t addr,
                                   std::span<const std::uint8_t> data) {
    auto ev = cache.store(addr, data, mem);
    if (trace)
        trace->store(mem.event_clock, addr, static_cast<std::uint32_t>(data.size()));
    evictions.insert(evictions.end(), ev.begin(), ev.end());
}

void MemoryBus::load(std::uint64_t addr, std::size_t len) {
    auto ev = cache.load(addr, len, mem);
    if (trace)
        for (const auto& e : ev)
            trace->evict(e.at, e.addr, static_cast<std::uint32_t>(cache.line_size()),
                         e.dirty);
    evictions.insert(evictions.end(), ev.begin(), ev.end());
}

void ExpVictim::enable_scratch(std::uint64_t addr, std::size_t len,
                               std::size_t period) {
    scratch_addr_ = addr;
    scratch_len_ = len;
    scratch_period_ = period ? period : 1;
}

void ExpVictim::commit(MemoryBus& bus, const OperandRegion& region,
                       const BigNat& value) {
    bus.store_event(region.base, value.to_bytes_le(region.len));
    write_log_.push_back(region.label);
    if (scratch_addr_ && ++scratch_counter_ % scratch_period_ == 0) {
        std::vector<std::uint8_t> spill(scratch_len_);
        for (std::size_t i = 0; i < spill.size(); ++i)
            spill[i] = static_cast<std::uint8_t>(scratch_counter_ + i);
        bus.store_within_event(*scratch_addr_, spill);
    }
}

MontgomeryLadderVictim::MontgomeryLadderVictim(BigNat g, KeyBits k, BigNat n,
                                               OperandLayout layout)
    : g_(std::move(g)), n_(std::move(n)), k_(std::move(k)), layout_(layout),
      j_(static_cast<std::ptrdiff_t>(k_.size()) - 1) {
    layout_.validate((n_.bit_len() + 7) / 8, 1);
    if (!(g_ < n_)) throw ConfigError("exp victim: requires g < n");
    r0_ = BigNat(1);
    r1_ = g_;
}

void MontgomeryLadderVictim::prepare(MemoryBus& bus) {
    commit(bus, layout_.r0, r0_);
    commit(bus, layout_.r1, r1_);
    write_log_.clear();  // initialization is outside the observation window
}

bool MontgomeryLadderVictim::step(MemoryBus& bus) {
    if (j_ < 0) return false;
    const bool kj = k_.bit(static_cast<std::size_t>(j_));
    if (phase_ == 0) {
        if (!kj) {
            r1_ = mod_mul(r0_, r1_, n_);
            commit(bus, layout_.r1, r1_);
        } else {
            r0_ = mod_mul(r0_, r1_, n_);
            commit(bus, layout_.r0, r0_);
        }
        phase_ = 1;
    } else {
        if (!kj) {
            r0_ = mod_mul(r0_, r0_, n_);
            commit(bus, layout_.r0, r0_);
        } else {
            r1_ = mod_mul(r1_, r1_, n_);
            commit(bus, layout_.r1, r1_);
        }
        phase_ = 0;
        --j_;
    }
    return true;
}

SquareMultiplyVictim::SquareMultiplyVictim(BigNat g, KeyBits k, BigNat n,
                                           OperandLayout layout)
    : g_(std::move(g)), n_(std::move(n)), k_(std::move(k)), layout_(layout),
      j_(static_cast<std::ptrdiff_t>(k_.size()) - 1) {
    layout_.validate((n_.bit_len() + 7) / 8, 1);
    if (!(g_ < n_)) throw ConfigError("exp victim: requires g < n");
    r0_ = BigNat(1);
    r1_ = g_;
}

void SquareMultiplyVictim::prepare(MemoryBus& bus) {
    commit(bus, layout_.r0, r0_);
    commit(bus, layout_.r1, r1_);
    write_log_.clear();
}

bool SquareMultiplyVictim::step(MemoryBus& bus) {
    if (j_ < 0) return false;
    const bool kj = k_.bit(static_cast<std::size_t>(j_));
    if (phase_ == 0) {
        r0_ = mod_mul(r0_, r0_, n_);
        commit(bus, layout_.r0, r0_);
        if (kj) {
            phase_ = 1;
        } else {
            --j_;
        }
    } else {
        r0_ = mod_mul(r0_, r1_, n_);
        commit(bus, layout_.r0, r0_);
        phase_ = 0;
        --j_;
    }
    return true;
}

ContinuousVictim::ContinuousVictim(Kind kind, KeyBits k, BigNat n,
                                   OperandLayout layout, std::uint64_t seed)
    : kind_(kind), k_(std::move(k)), n_(std::move(n)), layout_(layout),
      rng_(seed) {
    current_ = make_victim(BigNat::random_below(n_, rng_));
}

std::unique_ptr<ExpVictim> ContinuousVictim::make_victim(BigNat g) {
    std::unique_ptr<ExpVictim> v;
    if (kind_ == Kind::ladder)
        v = std::make_unique<MontgomeryLadderVictim>(std::move(g), k_, n_, layout_);
    else
        v = std::make_unique<SquareMultiplyVictim>(std::move(g), k_, n_, layout_);
    if (scratch_)
        v->enable_scratch(std::get<0>(*scratch_), std::get<1>(*scratch_),
                          std::get<2>(*scratch_));
    return v;
}

void ContinuousVictim::set_scratch(std::uint64_t addr, std::size_t len,
                                   std::size_t period) {
    scratch_ = {addr, len, period};
    current_->enable_scratch(addr, len, period);
}

bool ContinuousVictim::step_within(MemoryBus& bus) {
    return current_->step(bus);
}

void ContinuousVictim::restart(MemoryBus& bus) {
    current_ = make_victim(BigNat::random_below(n_, rng_));
    current_->prepare(bus);
}

void ContinuousVictim::run_current_to_end(MemoryBus& bus) {
    while (current_->step(bus)) {
    }
}

InterleaveResult run_interleaved(const std::function<bool()>& advance_event,
                                 const SimMemory& mem, std::uint64_t watch_base,
                                 std::size_t watch_len, const SnapshotBudget& budget,
                                 TraceLog* trace) {
    if (budget.oversampling < 1)
        throw ConfigError("run_interleaved: oversampling must be >= 1");
    InterleaveResult out;
    auto snap = [&] {
        out.snapshots.push_back(take_snapshot(mem, watch_base, watch_len));
        out.bytes_transferred += watch_len;
        if (trace)
            trace->snapshot(mem.event_clock, watch_base,
                            static_cast<std::uint32_t>(watch_len));
    };
    snap();
    while (advance_event()) {
        ++out.events;
        if (budget.oversampling >= 2) {
            for (int i = 0; i < budget.oversampling; ++i) snap();
        } else if (out.events % 2 == 0) {
            snap();
        }
    }
    return out;
}

void DecoyWriter::on_event(SimMemory& mem) {
    ++counter_;
    std::vector<std::uint8_t> buf(lines_ * line_);
    for (std::size_t i = 0; i < buf.size(); ++i)
        buf[i] = static_cast<std::uint8_t>(counter_ * 131 + i);
    mem.write(addr_, buf);
}

}  // namespace writeleak
