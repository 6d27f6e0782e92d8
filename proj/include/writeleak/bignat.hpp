#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace writeleak {

// Arbitrary-precision unsigned integer, little-endian 32-bit limbs.
// Canonical form: no leading zero limbs; zero is a single zero limb.
class BigNat {
public:
    BigNat() : limbs_{0} {}
    explicit BigNat(std::uint64_t v);

    static BigNat from_bytes_le(std::span<const std::uint8_t> bytes);
    static BigNat from_hex(const std::string& hex);
    // Uniform value with exactly `bits` significant bits (top bit set).
    static BigNat random_with_top_bit(std::size_t bits, std::mt19937_64& rng);
    // Uniform value in [0, bound).
    static BigNat random_below(const BigNat& bound, std::mt19937_64& rng);

    std::size_t bit_len() const;
    bool is_zero() const { return limbs_.size() == 1 && limbs_[0] == 0; }
    bool is_odd() const { return limbs_[0] & 1; }
    bool bit(std::size_t i) const;

    // Little-endian rendering padded (or checked) to exactly `len` bytes.
    std::vector<std::uint8_t> to_bytes_le(std::size_t len) const;
    std::string to_hex() const;
    std::uint64_t to_u64() const;  // throws if value does not fit

    int compare(const BigNat& other) const;
    bool operator==(const BigNat& o) const { return limbs_ == o.limbs_; }
    bool operator<(const BigNat& o) const { return compare(o) < 0; }

    BigNat add(const BigNat& other) const;
    BigNat sub(const BigNat& other) const;  // requires *this >= other
    BigNat mul(const BigNat& other) const;  // schoolbook
    // Knuth algorithm D; returns (quotient, remainder). Divisor must be nonzero.
    std::pair<BigNat, BigNat> divmod(const BigNat& divisor) const;
    BigNat mod(const BigNat& n) const { return divmod(n).second; }

    const std::vector<std::uint32_t>& limbs() const { return limbs_; }

private:
    std::vector<std::uint32_t> limbs_;
    void trim();
};

// (a * b) mod n for a, b < n, n > 1. Throws std::domain_error for n <= 1.
BigNat mod_mul(const BigNat& a, const BigNat& b, const BigNat& n);

}  // namespace writeleak
