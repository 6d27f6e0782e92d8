#include "writeleak/attacker.hpp"

#include <algorithm>
#include <cstdio>
#include <stdexcept>

#include "writeleak/errors.hpp"

namespace writeleak {

namespace {

std::vector<bool> modified_lines(const Snapshot& s1, const Snapshot& s2,
                                 std::size_t line_size) {
    if (s1.base != s2.base || s1.len() != s2.len())
        throw std::invalid_argument("snapshot diff: mismatched ranges");
    const std::size_t lines = (s1.len() + line_size - 1) / line_size;
    std::vector<bool> mod(lines, false);
    for (std::size_t i = 0; i < s1.len(); ++i)
        if (s1.data[i] != s2.data[i]) mod[i / line_size] = true;
    return mod;
}

struct Run {
    std::size_t start, len;
};

std::vector<Run> runs_of(const std::vector<bool>& mask) {
    std::vector<Run> runs;
    std::size_t i = 0;
    while (i < mask.size()) {
        if (!mask[i]) {
            ++i;
            continue;
        }
        std::size_t j = i;
        while (j < mask.size() && mask[j]) ++j;
        runs.push_back({i, j - i});
        i = j;
    }
    return runs;
}

}  // namespace

bool compare_match(const Snapshot& s1, const Snapshot& s2,
                   const RegionPattern& pattern) {
    const auto mod = modified_lines(s1, s2, pattern.line_size);
    auto runs = runs_of(mod);
    if (pattern.slack_lines == 0)
        return runs.size() == 2 && runs[0].len == pattern.lines_per_operand &&
               runs[1].len == pattern.lines_per_operand;
    // Lenient mode: some pair of exact-length runs with a gap, with at most
    // slack_lines modified lines outside them.
    std::size_t total = 0;
    for (const auto& r : runs) total += r.len;
    for (std::size_t a = 0; a < runs.size(); ++a) {
        if (runs[a].len != pattern.lines_per_operand) continue;
        for (std::size_t b = a + 1; b < runs.size(); ++b) {
            if (runs[b].len != pattern.lines_per_operand) continue;
            if (total - 2 * pattern.lines_per_operand <= pattern.slack_lines)
                return true;
        }
    }
    return false;
}

WriteHistogram build_histogram(const std::vector<Snapshot>& v) {
    WriteHistogram h;
    if (v.empty()) return h;
    h.counts.assign(v.front().len(), 0);
    for (std::size_t i = 0; i + 1 < v.size(); ++i) {
        if (v[i].base != v[i + 1].base || v[i].len() != v[i + 1].len())
            throw std::invalid_argument("build_histogram: mismatched ranges");
        for (std::size_t b = 0; b < h.counts.size(); ++b)
            if (v[i].data[b] != v[i + 1].data[b]) ++h.counts[b];
    }
    return h;
}

std::string WriteHistogram::to_csv() const {
    std::string out = "offset,count\n";
    char buf[48];
    for (std::size_t i = 0; i < counts.size(); ++i) {
        std::snprintf(buf, sizeof buf, "%zu,%llu\n", i,
                      static_cast<unsigned long long>(counts[i]));
        out += buf;
    }
    return out;
}

RegionThreshold threshold_from_histogram(const WriteHistogram& h,
                                         double noise_floor) {
    std::uint64_t max_count = 0;
    for (auto c : h.counts) max_count = std::max(max_count, c);
    const auto floor =
        static_cast<std::uint64_t>(noise_floor * static_cast<double>(max_count));
    std::vector<bool> mask(h.counts.size());
    for (std::size_t i = 0; i < h.counts.size(); ++i)
        mask[i] = h.counts[i] > floor && h.counts[i] > 0;
    auto runs = runs_of(mask);
    if (runs.size() < 2)
        throw ThresholdError("compute_threshold: cannot disambiguate variables");
    // Two heaviest clusters; declaration order labels the lower one R0.
    auto mass = [&](const Run& r) {
        std::uint64_t m = 0;
        for (std::size_t i = r.start; i < r.start + r.len; ++i) m += h.counts[i];
        return m;
    };
    std::size_t best = 0, second = 1;
    if (mass(runs[second]) > mass(runs[best])) std::swap(best, second);
    for (std::size_t i = 2; i < runs.size(); ++i) {
        const auto m = mass(runs[i]);
        if (m > mass(runs[best])) {
            second = best;
            best = i;
        } else if (m > mass(runs[second])) {
            second = i;
        }
    }
    const Run& lo = runs[std::min(best, second)];
    const Run& hi = runs[std::max(best, second)];
    RegionThreshold th;
    th.r0_span = {lo.start, lo.start + lo.len};
    th.r1_span = {hi.start, hi.start + hi.len};
    th.boundary_offset = (th.r0_span.second + th.r1_span.first) / 2;
    return th;
}

RegionThreshold compute_threshold(const std::vector<Snapshot>& v,
                                  double noise_floor) {
    if (v.size() < 2)
        throw std::invalid_argument("compute_threshold: need at least 2 snapshots");
    return threshold_from_histogram(build_histogram(v), noise_floor);
}

std::vector<Snapshot> remove_unchanged(const std::vector<Snapshot>& v) {
    std::vector<Snapshot> out;
    for (const auto& s : v) {
        if (!out.empty() && out.back().data == s.data) continue;
        out.push_back(s);
    }
    return out;
}

Operand correlate(const Snapshot& s1, const Snapshot& s2,
                  const RegionThreshold& th) {
    if (s1.base != s2.base || s1.len() != s2.len())
        throw std::invalid_argument("correlate: mismatched ranges");
    bool below = false, at_or_above = false;
    for (std::size_t i = 0; i < s1.len(); ++i) {
        if (s1.data[i] == s2.data[i]) continue;
        (i < th.boundary_offset ? below : at_or_above) = true;
    }
    if (below && at_or_above)
        throw AmbiguousUpdate(
            "correlate: changes on both sides of the threshold; "
            "snapshot rate did not separate two victim updates");
    if (!below && !at_or_above)
        throw std::invalid_argument("correlate: snapshots are identical");
    return below ? Operand::R0 : Operand::R1;
}

std::vector<std::uint8_t> infer_key_bits(const std::vector<Operand>& w) {
    if (w.size() % 2 != 0)
        throw DecodeError("infer_key: odd update sequence length");
    std::vector<std::uint8_t> bits;
    bits.reserve(w.size() / 2);
    for (std::size_t i = 0; i < w.size(); i += 2) {
        if (w[i] == Operand::R0 && w[i + 1] == Operand::R1)
            bits.push_back(1);
        else if (w[i] == Operand::R1 && w[i + 1] == Operand::R0)
            bits.push_back(0);
        else
            throw DecodeError("infer_key: repeated region within an update pair");
    }
    return bits;
}

KeyBits infer_key(const std::vector<Operand>& w, std::size_t key_width) {
    return KeyBits::from_msb_bits(infer_key_bits(w), key_width);
}

IdentifyResult identify_address_space(const SimMemory& mem,
                                      const std::function<void()>& advance,
                                      const RegionPattern& pattern,
                                      std::size_t block_size) {
    if (block_size < mem.page_size() || block_size % mem.page_size() != 0)
        throw ConfigError("identify: block size must be a multiple of the page");
    IdentifyResult res;
    std::vector<std::uint64_t> blocks;
    for (std::uint64_t a = 0; a < mem.size(); a += block_size) blocks.push_back(a);

    for (;;) {
        ++res.stats.rounds;
        std::vector<std::uint64_t> survivors;
        for (auto base : blocks) {
            Snapshot s1 = take_snapshot(mem, base, block_size);
            advance();
            Snapshot s2 = take_snapshot(mem, base, block_size);
            res.stats.snapshots += 2;
            res.stats.bytes_scanned += 2 * block_size;
            if (compare_match(s1, s2, pattern)) survivors.push_back(base);
        }
        if (block_size == mem.page_size()) {
            if (survivors.size() != 1)
                throw IdentifyError("identification failed", survivors);
            res.page_addr = survivors.front();
            return res;
        }
        block_size /= 2;
        blocks.clear();
        for (auto base : survivors) {
            blocks.push_back(base);
            blocks.push_back(base + block_size);
        }
        if (blocks.empty())
            throw IdentifyError("identification failed", {});
    }
}

}  // namespace writeleak
