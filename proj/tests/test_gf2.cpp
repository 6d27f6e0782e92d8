#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>

#include "oracles.hpp"
#include "writeleak/errors.hpp"
#include "writeleak/gf2.hpp"

using namespace writeleak;

namespace {

oracles::Grid to_grid_ints(const BitMatrix& m) {
    oracles::Grid g(m.n(), std::vector<int>(m.n()));
    for (std::size_t r = 0; r < m.n(); ++r)
        for (std::size_t c = 0; c < m.n(); ++c) g[r][c] = m.at(r, c);
    return g;
}

}  // namespace

TEST_CASE("BitMatrix basics") {
    const auto m = BitMatrix::from_rows({"10", "11"});
    CHECK(m.n() == 2);
    CHECK(m.at(0, 0));
    CHECK_FALSE(m.at(0, 1));
    CHECK(m.to_grid() == "1 0\n1 1\n");
    CHECK(BitMatrix::identity(3).is_identity());
    CHECK_FALSE(m.is_identity());
    CHECK(m.multiply(m).is_identity());  // an involution over GF(2)
    CHECK_THROWS_AS((void)BitMatrix::from_rows({"10", "111"}),
                    std::invalid_argument);
    CHECK_THROWS_AS((void)m.multiply(BitMatrix::identity(3)),
                    std::invalid_argument);
}

TEST_CASE("random_swap_free generates swap-free invertible matrices") {
    std::mt19937_64 rng(5);
    for (int i = 0; i < 50; ++i) {
        const auto m = BitMatrix::random_swap_free(6, rng);
        const auto [invertible, swap_free] = oracles::grid_classify(to_grid_ints(m));
        CHECK(invertible);
        CHECK(swap_free);
    }
}

TEST_CASE("matrix layout is column-contiguous with row-indexed sets") {
    const MatrixLayout lay{4096, 4, 64};
    CHECK(lay.elem_addr(0, 0) == 4096);
    CHECK(lay.elem_addr(1, 0) == 4096 + 64);
    CHECK(lay.elem_addr(0, 1) == 4096 + 4 * 64);
    CHECK(lay.row_of_line(lay.elem_addr(2, 3)) == 2);
    CHECK(lay.row_of_line(lay.elem_addr(3, 0)) == 3);
}

TEST_CASE("gauss_jordan_invert produces the true inverse") {
    std::mt19937_64 rng(9);
    for (int i = 0; i < 10; ++i) {
        const std::size_t n = 4 + (i % 3);
        const auto s = BitMatrix::random_swap_free(n, rng);
        SimMemory mem(1 << 20, 4096, 64);
        CacheModel cache(n, 2, 64, WritePolicy::write_back);
        const auto res = gauss_jordan_invert(s, cache, mem, {0, n, 64});
        CHECK(s.multiply(res.inverse).is_identity());
        CHECK(res.trace.step_marks.size() == n);
    }
}

TEST_CASE("gauss_jordan_invert rejects unusable inputs") {
    SimMemory mem(1 << 20, 4096, 64);
    CacheModel wt(4, 2, 64, WritePolicy::write_through);
    const auto s = worked_example_matrix();
    CHECK_THROWS_AS((void)gauss_jordan_invert(s, wt, mem, {0, 4, 64}),
                    ConfigError);

    CacheModel wb(4, 2, 64, WritePolicy::write_back);
    // Zero pivot with a nonzero entry below: swap territory.
    const auto needs_swap = BitMatrix::from_rows({"01", "10"});
    CacheModel wb2(2, 2, 64, WritePolicy::write_back);
    CHECK_THROWS_AS((void)gauss_jordan_invert(needs_swap, wb2, mem, {0, 2, 64}),
                    SwapRequired);
    const auto singular = BitMatrix::from_rows({"11", "11"});
    CacheModel wb3(2, 2, 64, WritePolicy::write_back);
    CHECK_THROWS_AS((void)gauss_jordan_invert(singular, wb3, mem, {0, 2, 64}),
                    SingularMatrix);
}

TEST_CASE("observers reconstruct the victim's row-operation log") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 20; ++i) {
        const std::size_t n = 3 + (i % 6);
        const auto s = BitMatrix::random_swap_free(n, rng);
        SimMemory mem(1 << 20, 4096, 64);
        CacheModel cache(n, 2, 64, WritePolicy::write_back);
        const auto res = gauss_jordan_invert(s, cache, mem, {0, n, 64});
        const auto strong =
            observe_row_updates(res.trace, {0, n, 64}, ObserveMode::strong);
        const auto heur =
            observe_row_updates(res.trace, {0, n, 64}, ObserveMode::heuristic);
        CHECK(strong == res.ground_truth);
        CHECK(heur == res.ground_truth);
    }
}

TEST_CASE("pivot columns and back substitution recover the matrix") {
    RowOpTrace ops;
    ops.steps = {{1, 3}, {2}, {0, 1}, {0, 2}};
    const auto cols = infer_pivot_columns(ops, 4);
    CHECK(cols.cols[0] == std::vector<std::uint8_t>{1, 1, 0, 1});
    CHECK(cols.cols[1] == std::vector<std::uint8_t>{0, 1, 1, 0});
    CHECK(cols.cols[2] == std::vector<std::uint8_t>{1, 1, 1, 0});
    CHECK(cols.cols[3] == std::vector<std::uint8_t>{1, 0, 1, 1});

    const auto recovered = back_substitute(cols, ops);
    CHECK(recovered == worked_example_matrix());
}

TEST_CASE("leak demo chain recovers planted matrices end to end") {
    const auto demo = mceliece_decrypt_leak_demo(worked_example_matrix());
    CHECK(demo.recovered == worked_example_matrix());
    CHECK(demo.modes_agree);
    CHECK(worked_example_matrix().multiply(demo.inverse).is_identity());
    RowOpTrace expected;
    expected.steps = {{1, 3}, {2}, {0, 1}, {0, 2}};
    CHECK(demo.observed == expected);

    std::mt19937_64 rng(41);
    for (int i = 0; i < 10; ++i) {
        const auto s = BitMatrix::random_swap_free(5 + i, rng);
        const auto d = mceliece_decrypt_leak_demo(s);
        CHECK(d.recovered == s);
        CHECK(d.modes_agree);
    }
}
