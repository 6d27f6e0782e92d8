#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "writeleak/memsim.hpp"

namespace writeleak {

// Dense binary matrix. Storage here is row-major for the in-core value; the
// simulated-memory image is column-contiguous with one cache line per
// element (see MatrixLayout).
class BitMatrix {
public:
    BitMatrix() = default;
    explicit BitMatrix(std::size_t n) : n_(n), bits_(n * n, 0) {}
    static BitMatrix identity(std::size_t n);
    static BitMatrix from_rows(const std::vector<std::string>& rows);  // "1010"
    // Random invertible matrix with all leading principal minors nonsingular
    // (lower-unitriangular times upper-unitriangular product), so elimination
    // never needs a row swap.
    static BitMatrix random_swap_free(std::size_t n, std::mt19937_64& rng);

    std::size_t n() const { return n_; }
    bool at(std::size_t r, std::size_t c) const { return bits_[r * n_ + c]; }
    void set(std::size_t r, std::size_t c, bool v) { bits_[r * n_ + c] = v; }

    BitMatrix multiply(const BitMatrix& other) const;
    bool is_identity() const;
    std::string to_grid() const;  // "1 0 1 0\n..." rows of 0/1

    bool operator==(const BitMatrix&) const = default;

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> bits_;
};

// Element (r, c) lives at base + (c*n + r) * line_size: column-contiguous,
// cache-line aligned. With sets == n every element of row r maps to set r.
struct MatrixLayout {
    std::uint64_t base = 0;
    std::size_t n = 0;
    std::size_t line_size = 64;

    std::uint64_t elem_addr(std::size_t r, std::size_t c) const {
        return base + (c * n + r) * line_size;
    }
    std::size_t row_of_line(std::uint64_t line_addr) const {
        return static_cast<std::size_t>((line_addr - base) / line_size % n);
    }
};

// Per pivot step, the target rows that received a pivot-row addition,
// 0-indexed, in operation order.
struct RowOpTrace {
    std::vector<std::vector<std::size_t>> steps;

    bool operator==(const RowOpTrace&) const = default;
};

struct GF2Trace {
    std::vector<EvictionEvent> events;
    // events index at which each pivot step begins (victim-cooperative
    // markers for the strong-adversary mode).
    std::vector<std::size_t> step_marks;
    std::size_t line_size = 64;
};

struct GaussJordanResult {
    BitMatrix inverse;
    GF2Trace trace;
    RowOpTrace ground_truth;  // victim-side modified-row log, for harnesses
};

// Swap-free Gauss-Jordan inversion over GF(2) with the augmented [S | I]
// image routed through the write-back cache. Throws SwapRequired when a zero
// pivot has a nonzero entry below it, SingularMatrix otherwise.
GaussJordanResult gauss_jordan_invert(const BitMatrix& s, CacheModel& cache,
                                      SimMemory& mem, const MatrixLayout& layout);

enum class ObserveMode { heuristic, strong };

// Reconstructs the per-step target rows from the eviction trace. strong mode
// segments by the victim's step markers; heuristic mode attributes each dirty
// eviction to the pivot row whose lines were read-touched most recently.
RowOpTrace observe_row_updates(const GF2Trace& trace, const MatrixLayout& layout,
                               ObserveMode mode = ObserveMode::heuristic);

// C_p[r] = 1 iff row r was a step-p target or r is the pivot itself.
struct ObservedColumns {
    std::vector<std::vector<std::uint8_t>> cols;  // cols[p][r]

    bool operator==(const ObservedColumns&) const = default;
};

ObservedColumns infer_pivot_columns(const RowOpTrace& ops, std::size_t n);

// Re-applies the recorded (self-inverse) row additions of steps i-1 .. 1 to
// each observed column, recovering the original matrix.
BitMatrix back_substitute(const ObservedColumns& cols, const RowOpTrace& ops);

// Full chain: invert under the modeled cache, observe, infer, back-substitute.
// Returns the recovered matrix (equal to s for swap-free inputs).
struct LeakDemoResult {
    BitMatrix recovered;
    BitMatrix inverse;
    RowOpTrace observed;
    ObservedColumns columns;
    bool modes_agree = true;
};

LeakDemoResult mceliece_decrypt_leak_demo(const BitMatrix& s);

// The 4x4 worked-example secret matrix used by the demo CLI.
BitMatrix worked_example_matrix();

}  // namespace writeleak
