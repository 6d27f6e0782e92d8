#include "writeleak/gf2.hpp"

#include <stdexcept>

#include "writeleak/errors.hpp"

namespace writeleak {

BitMatrix BitMatrix::identity(std::size_t n) {
    BitMatrix m(n);
    for (std::size_t i = 0; i < n; ++i) m.set(i, i, true);
    return m;
}

BitMatrix BitMatrix::from_rows(const std::vector<std::string>& rows) {
    BitMatrix m(rows.size());
    for (std::size_t r = 0; r < rows.size(); ++r) {
        if (rows[r].size() != rows.size())
            throw std::invalid_argument("BitMatrix::from_rows: not square");
        for (std::size_t c = 0; c < rows[r].size(); ++c)
            m.set(r, c, rows[r][c] == '1');
    }
    return m;
}

BitMatrix BitMatrix::random_swap_free(std::size_t n, std::mt19937_64& rng) {
    BitMatrix lower = identity(n), upper = identity(n);
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < r; ++c) lower.set(r, c, rng() & 1);
        for (std::size_t c = r + 1; c < n; ++c) upper.set(r, c, rng() & 1);
    }
    return lower.multiply(upper);
}

BitMatrix BitMatrix::multiply(const BitMatrix& other) const {
    if (n_ != other.n_)
        throw std::invalid_argument("BitMatrix::multiply: dimension mismatch");
    BitMatrix out(n_);
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t c = 0; c < n_; ++c) {
            std::uint8_t acc = 0;
            for (std::size_t k = 0; k < n_; ++k)
                acc ^= bits_[r * n_ + k] & other.bits_[k * n_ + c];
            out.bits_[r * n_ + c] = acc;
        }
    return out;
}

bool BitMatrix::is_identity() const {
    for (std::size_t r = 0; r < n_; ++r)
        for (std::size_t c = 0; c < n_; ++c)
            if (at(r, c) != (r == c)) return false;
    return true;
}

std::string BitMatrix::to_grid() const {
    std::string s;
    for (std::size_t r = 0; r < n_; ++r) {
        for (std::size_t c = 0; c < n_; ++c) {
            s.push_back(at(r, c) ? '1' : '0');
            s.push_back(c + 1 == n_ ? '\n' : ' ');
        }
    }
    return s;
}

namespace {

// The augmented [S | I] image: block 0 holds S, block 1 (offset n*n lines)
// holds the running inverse. Both blocks keep the row -> set mapping.
std::uint64_t aug_addr(const MatrixLayout& lay, std::size_t r, std::size_t c) {
    const std::size_t n = lay.n;
    return c < n ? lay.elem_addr(r, c)
                 : lay.base + (n * n + (c - n) * n + r) * lay.line_size;
}

void collect(std::vector<EvictionEvent>& sink, std::vector<EvictionEvent>&& ev) {
    sink.insert(sink.end(), ev.begin(), ev.end());
}

}  // namespace

GaussJordanResult gauss_jordan_invert(const BitMatrix& s, CacheModel& cache,
                                      SimMemory& mem, const MatrixLayout& layout) {
    if (cache.policy() != WritePolicy::write_back)
        throw ConfigError("gauss_jordan_invert: needs a write-back cache");
    const std::size_t n = s.n();
    if (layout.n != n)
        throw ConfigError("gauss_jordan_invert: layout dimension mismatch");

    // Plant the initial [S | I] image without cache traffic.
    auto poke = [&](std::uint64_t addr, std::uint8_t v) {
        mem.write(addr, std::span<const std::uint8_t>(&v, 1));
    };
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < 2 * n; ++c)
            poke(aug_addr(layout, r, c),
                 c < n ? s.at(r, c) : (c - n == r ? 1 : 0));

    // In-core mirror of the augmented matrix.
    std::vector<std::uint8_t> work(n * 2 * n, 0);
    auto W = [&](std::size_t r, std::size_t c) -> std::uint8_t& {
        return work[r * 2 * n + c];
    };
    for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t c = 0; c < n; ++c) W(r, c) = s.at(r, c);
        W(r, n + r) = 1;
    }

    GaussJordanResult res;
    res.trace.line_size = layout.line_size;
    res.ground_truth.steps.resize(n);

    for (std::size_t p = 0; p < n; ++p) {
        if (!W(p, p)) {
            for (std::size_t r = p + 1; r < n; ++r)
                if (W(r, p))
                    throw SwapRequired("gauss_jordan_invert: zero pivot needs a swap");
            throw SingularMatrix("gauss_jordan_invert: matrix is singular");
        }
        res.trace.step_marks.push_back(res.trace.events.size());
        for (std::size_t r = 0; r < n; ++r) {
            if (r == p || !W(r, p)) continue;
            res.ground_truth.steps[p].push_back(r);
            // Row addition target ^= pivot across the augmented row, element
            // by element through the cache.
            for (std::size_t c = 0; c < 2 * n; ++c) {
                collect(res.trace.events,
                        cache.load(aug_addr(layout, p, c), 1, mem));
                collect(res.trace.events,
                        cache.load(aug_addr(layout, r, c), 1, mem));
                W(r, c) ^= W(p, c);
                const std::uint8_t v = W(r, c);
                ++mem.event_clock;
                collect(res.trace.events,
                        cache.store(aug_addr(layout, r, c),
                                    std::span<const std::uint8_t>(&v, 1), mem));
            }
            // The op's working set left two dirty lines behind; drain them so
            // the memory image is whole-row consistent before the next op.
            collect(res.trace.events, cache.flush(mem));
        }
    }

    res.inverse = BitMatrix(n);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < n; ++c) res.inverse.set(r, c, W(r, n + c));
    return res;
}

RowOpTrace observe_row_updates(const GF2Trace& trace, const MatrixLayout& layout,
                               ObserveMode mode) {
    const std::size_t n = layout.n;
    RowOpTrace out;
    out.steps.resize(n);
    auto add_target = [&](std::size_t step, std::size_t row) {
        auto& v = out.steps[step];
        for (auto r : v)
            if (r == row) return;
        v.push_back(row);
    };

    if (mode == ObserveMode::strong) {
        if (trace.step_marks.size() != n)
            throw TraceError("observe_row_updates: missing step markers");
        for (std::size_t p = 0; p < n; ++p) {
            const std::size_t lo = trace.step_marks[p];
            const std::size_t hi =
                p + 1 < n ? trace.step_marks[p + 1] : trace.events.size();
            for (std::size_t i = lo; i < hi; ++i)
                if (trace.events[i].dirty)
                    add_target(p, layout.row_of_line(trace.events[i].addr));
        }
        return out;
    }

    // Heuristic mode: a row addition interleaves reads of the pivot row with
    // writes of the target row, so the clean evictions accompanying each
    // dirty burst sit in the pivot row's set.
    std::size_t last_clean_row = n;  // sentinel: none seen yet
    for (const auto& e : trace.events) {
        const std::size_t row = layout.row_of_line(e.addr);
        if (!e.dirty) {
            last_clean_row = row;
            continue;
        }
        if (last_clean_row >= n)
            throw TraceError("observe_row_updates: dirty eviction with no "
                             "attributable pivot");
        add_target(last_clean_row, row);
    }
    return out;
}

ObservedColumns infer_pivot_columns(const RowOpTrace& ops, std::size_t n) {
    ObservedColumns oc;
    oc.cols.assign(n, std::vector<std::uint8_t>(n, 0));
    for (std::size_t p = 0; p < ops.steps.size() && p < n; ++p) {
        oc.cols[p][p] = 1;
        for (auto r : ops.steps[p]) oc.cols[p][r] = 1;
    }
    for (std::size_t p = ops.steps.size(); p < n; ++p) oc.cols[p][p] = 1;
    return oc;
}

BitMatrix back_substitute(const ObservedColumns& cols, const RowOpTrace& ops) {
    const std::size_t n = cols.cols.size();
    BitMatrix out(n);
    for (std::size_t i = 0; i < n; ++i) {
        std::vector<std::uint8_t> col = cols.cols[i];
        for (std::size_t s = i; s-- > 0;)
            for (auto r : ops.steps[s]) col[r] ^= col[s];
        for (std::size_t r = 0; r < n; ++r) out.set(r, i, col[r]);
    }
    return out;
}

LeakDemoResult mceliece_decrypt_leak_demo(const BitMatrix& s) {
    const std::size_t n = s.n();
    const std::size_t line = 64, page = 4096;
    std::size_t bytes = 2 * n * n * line;
    bytes = (bytes + page - 1) / page * page;
    SimMemory mem(bytes, page, line);
    CacheModel cache(n, 2, line, WritePolicy::write_back);
    MatrixLayout layout{0, n, line};

    auto gj = gauss_jordan_invert(s, cache, mem, layout);
    LeakDemoResult demo;
    demo.inverse = gj.inverse;
    demo.observed = observe_row_updates(gj.trace, layout, ObserveMode::heuristic);
    const auto strong = observe_row_updates(gj.trace, layout, ObserveMode::strong);
    demo.modes_agree = demo.observed == strong;
    demo.columns = infer_pivot_columns(demo.observed, n);
    demo.recovered = back_substitute(demo.columns, demo.observed);
    return demo;
}

BitMatrix worked_example_matrix() {
    return BitMatrix::from_rows({"1010", "1101", "0100", "1011"});
}

}  // namespace writeleak
