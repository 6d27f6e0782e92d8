#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <stdexcept>

#include "oracles.hpp"
#include "writeleak/bignat.hpp"

using writeleak::BigNat;

namespace {

BigNat random_nat(std::size_t max_bits, std::mt19937_64& rng) {
    std::uniform_int_distribution<std::size_t> bits(1, max_bits);
    return BigNat::random_with_top_bit(bits(rng), rng);
}

}  // namespace

TEST_CASE("construction and rendering") {
    CHECK(BigNat().is_zero());
    CHECK(BigNat(0).is_zero());
    CHECK_FALSE(BigNat(1).is_zero());
    CHECK(BigNat(1).is_odd());
    CHECK_FALSE(BigNat(0xfffffffeull).is_odd());

    const BigNat v(0x1234567890abcdefull);
    CHECK(v.to_hex() == "1234567890abcdef");
    CHECK(v.to_u64() == 0x1234567890abcdefull);
    CHECK(BigNat::from_hex("1234567890abcdef") == v);
    CHECK(BigNat::from_hex("0000001") == BigNat(1));
    CHECK(BigNat::from_hex("0") == BigNat());

    CHECK(v.bit_len() == 61);
    CHECK(BigNat(1).bit_len() == 1);
    CHECK(BigNat().bit_len() == 0);
    CHECK(v.bit(0) == 1);
    CHECK(v.bit(4) == 0);
    CHECK(v.bit(60) == 1);
}

TEST_CASE("byte round trips") {
    const std::vector<std::uint8_t> le{0xef, 0xbe, 0xad, 0xde, 0x01};
    const BigNat v = BigNat::from_bytes_le(le);
    CHECK(v.to_u64() == 0x01deadbeefull);
    CHECK(v.to_bytes_le(5) == le);
    // Padding with zero limbs on the wide side.
    auto wide = v.to_bytes_le(8);
    CHECK(wide.size() == 8);
    CHECK(wide[5] == 0);
    CHECK(BigNat::from_bytes_le(wide) == v);
    CHECK_THROWS_AS((void)v.to_bytes_le(4), std::length_error);
    CHECK_THROWS_AS((void)BigNat(1).to_bytes_le(0), std::length_error);
}

TEST_CASE("compare, add, sub small cases") {
    const BigNat a(100), b(42);
    CHECK(a.compare(b) > 0);
    CHECK(b.compare(a) < 0);
    CHECK(a.compare(a) == 0);
    CHECK(b < a);
    CHECK(a.add(b).to_u64() == 142);
    CHECK(a.sub(b).to_u64() == 58);
    CHECK(a.sub(a).is_zero());
    CHECK(a.mul(b).to_u64() == 4200);
    CHECK(a.mul(BigNat()).is_zero());
}

TEST_CASE("carry and borrow propagation across limbs") {
    const BigNat max32(0xffffffffull);
    CHECK(max32.add(BigNat(1)).to_u64() == 0x100000000ull);
    CHECK(BigNat(0x100000000ull).sub(BigNat(1)) == max32);
    const BigNat big = BigNat::from_hex("ffffffffffffffffffffffff");
    CHECK(big.add(BigNat(1)).to_hex() == "1000000000000000000000000");
    CHECK(big.add(BigNat(1)).sub(BigNat(1)) == big);
}

TEST_CASE("arithmetic agrees with digit oracle") {
    std::mt19937_64 rng(7);
    for (int i = 0; i < 300; ++i) {
        const BigNat a = random_nat(320, rng);
        const BigNat b = random_nat(320, rng);
        const auto da = oracles::from_bignat(a);
        const auto db = oracles::from_bignat(b);
        CHECK(oracles::to_bignat(oracles::mul(da, db)) == a.mul(b));
        const BigNat& hi = a < b ? b : a;
        const BigNat& lo = a < b ? a : b;
        CHECK(oracles::to_bignat(oracles::sub(oracles::from_bignat(hi),
                                              oracles::from_bignat(lo))) ==
              hi.sub(lo));
    }
}

TEST_CASE("divmod invariants and oracle agreement") {
    std::mt19937_64 rng(11);
    for (int i = 0; i < 300; ++i) {
        const BigNat a = random_nat(512, rng);
        const BigNat d = random_nat(256, rng);
        const auto [q, r] = a.divmod(d);
        CHECK(r < d);
        CHECK(q.mul(d).add(r) == a);
        CHECK(oracles::to_bignat(oracles::mod(oracles::from_bignat(a),
                                              oracles::from_bignat(d))) ==
              a.mod(d));
    }
    CHECK_THROWS(BigNat(1).divmod(BigNat()));
}

TEST_CASE("divmod qhat correction corner") {
    // Dividend shaped to force the add-back path of the long division.
    const BigNat a = BigNat::from_hex("800000000000000000000003");
    const BigNat d = BigNat::from_hex("200000000000000000000001");
    const auto [q, r] = a.divmod(d);
    CHECK(q.mul(d).add(r) == a);
    CHECK(r < d);
}

TEST_CASE("mod_mul") {
    std::mt19937_64 rng(13);
    for (int i = 0; i < 200; ++i) {
        const BigNat n = random_nat(256, rng).add(BigNat(2));
        const BigNat a = BigNat::random_below(n, rng);
        const BigNat b = BigNat::random_below(n, rng);
        const BigNat got = writeleak::mod_mul(a, b, n);
        CHECK(got < n);
        CHECK(got == oracles::to_bignat(oracles::mod_mul(
                         oracles::from_bignat(a), oracles::from_bignat(b),
                         oracles::from_bignat(n))));
    }
    CHECK_THROWS_AS(writeleak::mod_mul(BigNat(0), BigNat(0), BigNat(1)),
                    std::domain_error);
    CHECK_THROWS_AS(writeleak::mod_mul(BigNat(0), BigNat(0), BigNat(0)),
                    std::domain_error);
}

TEST_CASE("random generators honor their contracts") {
    std::mt19937_64 rng(17);
    for (int i = 0; i < 100; ++i) {
        const std::size_t bits = 1 + static_cast<std::size_t>(rng() % 200);
        CHECK(BigNat::random_with_top_bit(bits, rng).bit_len() == bits);
    }
    const BigNat bound = BigNat::from_hex("10000000000000001");
    for (int i = 0; i < 100; ++i)
        CHECK(BigNat::random_below(bound, rng) < bound);
}
