#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "writeleak/keybits.hpp"
#include "writeleak/memsim.hpp"
#include "writeleak/victim.hpp"

namespace writeleak {

// Diff footprint CompareMatch searches for: a run of exactly
// lines_per_operand modified consecutive cache lines, at least one untouched
// line, a second identical run, and nothing else. `slack_lines` > 0 tolerates
// that many extraneous modified lines (lenient mode).
struct RegionPattern {
    std::size_t line_size = 64;
    std::size_t lines_per_operand = 2;
    std::size_t slack_lines = 0;
};

bool compare_match(const Snapshot& s1, const Snapshot& s2,
                   const RegionPattern& pattern);

// Per-byte-offset tally of changes over all consecutive snapshot pairs.
struct WriteHistogram {
    std::vector<std::uint64_t> counts;

    std::string to_csv() const;  // "offset,count" rows, offset ascending
};

WriteHistogram build_histogram(const std::vector<Snapshot>& v);

struct RegionThreshold {
    std::size_t boundary_offset = 0;
    // Half-open [start, end) byte spans of the two write clusters.
    std::pair<std::size_t, std::size_t> r0_span, r1_span;
};

// Clusters the histogram's above-noise offsets into maximal runs, keeps the
// two heaviest, and places the boundary mid-gap. Offsets with count below
// noise_floor * max are ignored. Throws ThresholdError with fewer than two
// clusters.
RegionThreshold compute_threshold(const std::vector<Snapshot>& v,
                                  double noise_floor = 0.05);
RegionThreshold threshold_from_histogram(const WriteHistogram& h,
                                         double noise_floor = 0.05);

// Drops every snapshot byte-identical to the previously kept one.
std::vector<Snapshot> remove_unchanged(const std::vector<Snapshot>& v);

// Classifies a differing snapshot pair. Throws AmbiguousUpdate when changes
// fall on both sides of the boundary.
Operand correlate(const Snapshot& s1, const Snapshot& s2,
                  const RegionThreshold& th);

// Pairs of (R0,R1) -> 1, (R1,R0) -> 0, execution order = MSB first.
// Returns the MSB-first bit sequence; callers pad to the key width they
// expect (all-leading-zero iterations rewrite identical values and are
// invisible in memory diffs).
std::vector<std::uint8_t> infer_key_bits(const std::vector<Operand>& w);
KeyBits infer_key(const std::vector<Operand>& w, std::size_t key_width);

struct IdentifyStats {
    std::uint64_t snapshots = 0;
    std::uint64_t bytes_scanned = 0;
    std::uint64_t rounds = 0;
};

struct IdentifyResult {
    std::uint64_t page_addr = 0;
    IdentifyStats stats;
};

// Alg. 3 with binary block refinement: scan `mem` in blocks of `block_size`,
// keep blocks whose successive snapshots CompareMatch, halve, repeat down to
// page granularity. `advance` must run the victim between the two snapshots
// of a block (at least one full key-bit iteration). Throws IdentifyError
// unless exactly one page survives.
IdentifyResult identify_address_space(const SimMemory& mem,
                                      const std::function<void()>& advance,
                                      const RegionPattern& pattern,
                                      std::size_t block_size);

}  // namespace writeleak
