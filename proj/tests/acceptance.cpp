// Acceptance suite: one line per criterion, nonzero exit if any fails.
#include <chrono>
#include <cstdio>
#include <random>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "writeleak/attacker.hpp"
#include "writeleak/errors.hpp"
#include "writeleak/gf2.hpp"
#include "writeleak/scenario.hpp"
#include "writeleak/victim.hpp"

using namespace writeleak;

namespace {

int failures = 0;

void report(int idx, const char* name, bool ok) {
    std::printf("criterion %d %-38s %s\n", idx, name, ok ? "PASS" : "FAIL");
    if (!ok) ++failures;
}

// ---- 1: end-to-end 512-bit ladder recovery, stable budgets, < 60 s ----

bool ladder_end_to_end() {
    const auto start = std::chrono::steady_clock::now();
    ScenarioConfig cfg;  // 512-bit key, 1024-bit modulus, 128-byte base, os 2
    std::vector<AttackReport> first;
    for (std::uint64_t seed = 101; seed <= 120; ++seed) {
        cfg.seed = seed;
        const auto rep = run_exp_attack(cfg);
        if (!rep.success || rep.bits_correct != 512 || rep.bits_total != 512) {
            std::fprintf(stderr, "  seed %llu: %zu/512 bits (%s)\n",
                         static_cast<unsigned long long>(seed), rep.bits_correct,
                         rep.error.c_str());
            return false;
        }
        first.push_back(rep);
    }
    const double secs =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    if (secs >= 60.0) {
        std::fprintf(stderr, "  20 trials took %.1f s\n", secs);
        return false;
    }
    // Deterministic event-count budgets: a repeat run reproduces the phase
    // statistics exactly.
    for (std::uint64_t seed : {101ull, 111ull, 120ull}) {
        cfg.seed = seed;
        const auto again = run_exp_attack(cfg);
        const auto& ref = first[seed - 101];
        if (!(again.identify == ref.identify && again.capture == ref.capture))
            return false;
    }
    return true;
}

// ---- 2: regression vector for the published key dump ----

bool regression_key() {
    ScenarioConfig cfg;
    cfg.seed = 2;
    cfg.key_hex =
        "1a4b2841e627d47d72c34079be1f6c35ca3b58b1961704ed22b370e96e0f9ca5"
        "7a2b88214607345dd2a3a0591effcc152a1bb891f6f764cd8293d0c9ceeffc85";
    const auto rep = run_exp_attack(cfg);
    const std::string expected =
        "1a 4b 28 41 e6 27 d4 7d\n"
        "72 c3 40 79 be 1f 6c 35\n"
        "ca 3b 58 b1 96 17 04 ed\n"
        "22 b3 70 e9 6e 0f 9c a5\n"
        "7a 2b 88 21 46 07 34 5d\n"
        "d2 a3 a0 59 1e ff cc 15\n"
        "2a 1b b8 91 f6 f7 64 cd\n"
        "82 93 d0 c9 ce ef fc 85\n";
    if (!rep.success) std::fprintf(stderr, "  %s\n", rep.error.c_str());
    return rep.success && rep.recovered_hex == expected;
}

// ---- 3: worked 4x4 example, exact intermediate values ----

bool worked_example() {
    const auto s = worked_example_matrix();
    const auto demo = mceliece_decrypt_leak_demo(s);
    RowOpTrace steps;
    steps.steps = {{1, 3}, {2}, {0, 1}, {0, 2}};
    const std::vector<std::vector<std::uint8_t>> cols{
        {1, 1, 0, 1}, {0, 1, 1, 0}, {1, 1, 1, 0}, {1, 0, 1, 1}};
    const std::vector<std::vector<std::uint8_t>> back{
        {0, 1, 1, 0}, {1, 0, 0, 1}, {0, 1, 0, 1}};  // S2, S3, S4
    if (!(demo.observed == steps) || demo.columns.cols != cols) return false;
    for (std::size_t c = 1; c < 4; ++c)
        for (std::size_t r = 0; r < 4; ++r)
            if (demo.recovered.at(r, c) != back[c - 1][r]) return false;
    return demo.recovered == s && demo.modes_agree;
}

// ---- 4: exhaustive 3x3 plus random larger matrices ----

bool gf2_recovery() {
    std::size_t swap_free_seen = 0;
    for (unsigned bits = 0; bits < 512; ++bits) {
        BitMatrix m(3);
        oracles::Grid g(3, std::vector<int>(3));
        for (std::size_t r = 0; r < 3; ++r)
            for (std::size_t c = 0; c < 3; ++c) {
                const bool v = (bits >> (r * 3 + c)) & 1;
                m.set(r, c, v);
                g[r][c] = v;
            }
        const auto [invertible, swap_free] = oracles::grid_classify(g);
        if (!invertible || !swap_free) continue;
        ++swap_free_seen;
        const auto demo = mceliece_decrypt_leak_demo(m);
        if (!(demo.recovered == m) || !demo.modes_agree) {
            std::fprintf(stderr, "  3x3 case %u failed\n", bits);
            return false;
        }
    }
    // |L| * |U| = 2^3 * 2^3 unitriangular factor pairs, unique per product.
    if (swap_free_seen != 64) return false;

    std::mt19937_64 rng(404);
    for (std::size_t n : {8, 16, 32, 64})
        for (int i = 0; i < 50; ++i) {
            const auto s = BitMatrix::random_swap_free(n, rng);
            const auto demo = mceliece_decrypt_leak_demo(s);
            if (!(demo.recovered == s) || !demo.modes_agree) {
                std::fprintf(stderr, "  n=%zu trial %d failed\n", n, i);
                return false;
            }
        }
    return true;
}

// ---- 5: arithmetic and cache oracles ----

bool oracle_equivalence() {
    std::mt19937_64 rng(505);
    const std::size_t t = 48;
    SimMemory mem(1 << 16, 4096, 64);
    CacheModel cache(4, 2, 64, WritePolicy::write_through);
    MemoryBus bus{mem, cache, nullptr, {}};
    const auto layout = OperandLayout::at_page(0, 128, 64);

    for (int i = 0; i < 1000; ++i) {
        const BigNat n = [&] {
            BigNat v = BigNat::random_with_top_bit(96, rng);
            return v.is_odd() ? v : v.add(BigNat(1));
        }();
        const KeyBits k = KeyBits::random(t, rng);
        const BigNat g = BigNat::random_below(n, rng);

        MontgomeryLadderVictim ladder(g, k, n, layout);
        ladder.prepare(bus);
        while (ladder.step(bus)) {
        }
        SquareMultiplyVictim sqmul(g, k, n, layout);
        sqmul.prepare(bus);
        while (sqmul.step(bus)) {
        }
        const BigNat want = oracles::modexp(g, k, n);
        if (!(ladder.result() == want) || !(sqmul.result() == want)) {
            std::fprintf(stderr, "  modexp trial %d diverged\n", i);
            return false;
        }
    }

    for (int seq = 0; seq < 1000; ++seq) {
        const std::size_t sets = 1ull << (rng() % 3);
        const std::size_t ways = 1 + rng() % 3;
        SimMemory m2(8192, 4096, 32);
        CacheModel c2(sets, ways, 32, WritePolicy::write_back);
        std::vector<std::uint8_t> init(8192);
        for (auto& b : init) b = static_cast<std::uint8_t>(rng());
        m2.write(0, init);
        oracles::RefCacheSim ref(sets, ways, 32, init);

        std::vector<EvictionEvent> got;
        std::vector<oracles::RefEviction> want;
        for (int op = 0; op < 60; ++op) {
            const std::uint64_t addr = rng() % 8000;
            const std::size_t len = 1 + rng() % 120;
            std::vector<std::uint8_t> data(len);
            for (auto& b : data) b = static_cast<std::uint8_t>(rng());
            auto e1 = c2.store(addr, data, m2);
            got.insert(got.end(), e1.begin(), e1.end());
            auto e2 = ref.store(addr, data);
            want.insert(want.end(), e2.begin(), e2.end());
        }
        if (got.size() != want.size()) return false;
        for (std::size_t i = 0; i < got.size(); ++i)
            if (got[i].addr != want[i].addr || got[i].dirty != want[i].dirty)
                return false;
        c2.flush(m2);
        std::vector<std::uint8_t> mem_final(8192);
        m2.read(0, mem_final);
        if (mem_final != ref.flushed_memory()) return false;
    }
    return true;
}

// ---- 6: property suite ----

bool properties() {
    // Constant write count 2t regardless of Hamming weight.
    const std::size_t t = 64;
    SimMemory mem(1 << 16, 4096, 64);
    CacheModel cache(4, 2, 64, WritePolicy::write_through);
    MemoryBus bus{mem, cache, nullptr, {}};
    const auto layout = OperandLayout::at_page(0, 128, 64);
    std::mt19937_64 rng(606);
    const BigNat n = BigNat::random_with_top_bit(96, rng).add(BigNat(1));
    std::vector<KeyBits> keys{KeyBits(t), KeyBits::random(t, rng)};
    KeyBits ones(t);
    for (std::size_t j = 0; j < t; ++j) ones.set_bit(j, true);
    keys.push_back(ones);
    for (const auto& k : keys) {
        MontgomeryLadderVictim v(BigNat::random_below(n, rng), k, n, layout);
        v.prepare(bus);
        while (v.step(bus)) {
        }
        if (v.write_log().size() != 2 * t) return false;
    }

    // Attacker primitives leave memory and the event clock untouched.
    ScenarioConfig small;
    small.seed = 9;
    small.key_bits = 64;
    small.modulus_bits = 128;
    small.message_bytes = 16;
    small.memory_size = 1 << 20;
    small.block_size = 1 << 18;
    ExpScenario sc(small);
    for (int i = 0; i < 10; ++i) sc.advance_event();
    const auto before = take_snapshot(sc.mem(), 0, sc.mem().size());
    const auto clock_before = sc.mem().event_clock;
    const auto s1 = take_snapshot(sc.mem(), sc.planted_page(), 4096);
    (void)compare_match(s1, s1, sc.pattern());
    (void)build_histogram({s1, s1, s1});
    const auto after = take_snapshot(sc.mem(), 0, sc.mem().size());
    if (after.data != before.data || sc.mem().event_clock != clock_before)
        return false;

    // Oversampling >= 2 never reports ambiguity; 1 always does.
    for (int os : {2, 3}) {
        auto cfg = small;
        cfg.oversampling = os;
        const auto rep = run_exp_attack(cfg);
        if (!rep.success || !rep.error.empty()) return false;
    }
    auto under = small;
    under.oversampling = 1;
    const auto r1 = run_exp_attack(under);
    const auto r2 = run_exp_attack(under);
    return !r1.success && r1.error.find("both sides") != std::string::npos &&
           r2.error == r1.error;
}

// ---- 7: histogram shape for a ladder run ----

bool histogram_shape() {
    ScenarioConfig cfg;  // full-size 512-bit ladder capture
    cfg.seed = 707;
    std::vector<std::uint64_t> counts;
    const std::string csv = capture_histogram_csv(cfg);
    for (std::size_t pos = csv.find('\n') + 1; pos < csv.size();) {
        const std::size_t comma = csv.find(',', pos);
        const std::size_t end = csv.find('\n', comma);
        counts.push_back(std::stoull(csv.substr(comma + 1, end - comma - 1)));
        pos = end + 1;
    }
    if (counts.size() != cfg.page_size) return false;
    std::size_t clusters = 0;
    bool in_run = false;
    for (auto c : counts) {
        if (c && !in_run) ++clusters;
        in_run = c != 0;
    }
    // Exactly two maximal nonzero runs with a zero-mass gap in between; the
    // runs are the two operand regions.
    bool gap_zero = true;
    for (std::size_t i = 128; i < 192; ++i) gap_zero &= counts[i] == 0;
    return clusters == 2 && gap_zero && counts[0] > 0 && counts[192] > 0;
}

// ---- 8: striding eviction demo ----

bool striding_demo() {
    SimMemory mem(1 << 16, 4096, 64);
    CacheModel cache(4, 2, 64, WritePolicy::write_back);
    // A[i] is one line; stride 4 puts A[0], A[4], A[8] all in set 0.
    std::vector<std::uint8_t> elem(64, 0x5a);
    const auto e0 = cache.store(0 * 64, elem, mem);
    const auto e1 = cache.store(4 * 64, elem, mem);
    const auto e2 = cache.store(8 * 64, elem, mem);
    return e0.empty() && e1.empty() && e2.size() == 1 && e2[0].addr == 0 &&
           e2[0].dirty;
}

}  // namespace

int main() {
    report(1, "(ladder end-to-end recovery)", ladder_end_to_end());
    report(2, "(published key regression)", regression_key());
    report(3, "(worked 4x4 example)", worked_example());
    report(4, "(GF(2) recovery sweep)", gf2_recovery());
    report(5, "(oracle equivalence)", oracle_equivalence());
    report(6, "(property suite)", properties());
    report(7, "(histogram shape)", histogram_shape());
    report(8, "(striding eviction demo)", striding_demo());
    if (failures) std::printf("%d criterion(s) FAILED\n", failures);
    return failures == 0 ? 0 : 1;
}
