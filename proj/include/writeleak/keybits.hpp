#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <vector>

namespace writeleak {

// Secret exponent k = (k_{t-1}, ..., k_0)_2. bit(j) follows that indexing:
// j = t-1 is the most significant bit.
class KeyBits {
public:
    KeyBits() = default;
    explicit KeyBits(std::size_t t) : bits_(t, 0) {}

    // Big-endian byte dump (the hex-report ordering); t = 8 * bytes.size().
    static KeyBits from_bytes_be(std::span<const std::uint8_t> bytes);
    // MSB-first bit sequence (execution order of the ladder), zero-padded on
    // the most significant side up to width t.
    static KeyBits from_msb_bits(const std::vector<std::uint8_t>& msb_first,
                                 std::size_t t);
    static KeyBits random(std::size_t t, std::mt19937_64& rng);

    std::size_t size() const { return bits_.size(); }
    bool bit(std::size_t j) const { return bits_[j]; }
    void set_bit(std::size_t j, bool v) { bits_[j] = v; }
    std::size_t hamming_weight() const;

    // Big-endian byte view; requires size() % 8 == 0.
    std::vector<std::uint8_t> to_bytes_be() const;
    // Space-separated lowercase hex, 8 bytes per line.
    std::string hex_lines() const;

    bool operator==(const KeyBits&) const = default;

private:
    std::vector<std::uint8_t> bits_;  // bits_[j] = k_j, j = 0 least significant
};

}  // namespace writeleak
