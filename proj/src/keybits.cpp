#include "writeleak/keybits.hpp"

#include <stdexcept>

namespace writeleak {

KeyBits KeyBits::from_bytes_be(std::span<const std::uint8_t> bytes) {
    KeyBits k(bytes.size() * 8);
    const std::size_t t = k.size();
    for (std::size_t i = 0; i < bytes.size(); ++i)
        for (int b = 0; b < 8; ++b)
            k.bits_[t - 1 - (i * 8 + b)] = (bytes[i] >> (7 - b)) & 1;
    return k;
}

KeyBits KeyBits::from_msb_bits(const std::vector<std::uint8_t>& msb_first,
                               std::size_t t) {
    if (msb_first.size() > t)
        throw std::length_error("KeyBits::from_msb_bits: more bits than width");
    KeyBits k(t);
    for (std::size_t i = 0; i < msb_first.size(); ++i)
        k.bits_[msb_first.size() - 1 - i] = msb_first[i] ? 1 : 0;
    return k;
}

KeyBits KeyBits::random(std::size_t t, std::mt19937_64& rng) {
    KeyBits k(t);
    for (auto& b : k.bits_) b = rng() & 1;
    return k;
}

std::size_t KeyBits::hamming_weight() const {
    std::size_t w = 0;
    for (auto b : bits_) w += b;
    return w;
}

std::vector<std::uint8_t> KeyBits::to_bytes_be() const {
    if (bits_.size() % 8 != 0)
        throw std::length_error("KeyBits::to_bytes_be: width not byte-aligned");
    std::vector<std::uint8_t> out(bits_.size() / 8, 0);
    const std::size_t t = bits_.size();
    for (std::size_t i = 0; i < out.size(); ++i)
        for (int b = 0; b < 8; ++b)
            out[i] |= bits_[t - 1 - (i * 8 + b)] << (7 - b);
    return out;
}

std::string KeyBits::hex_lines() const {
    static const char* digits = "0123456789abcdef";
    auto bytes = to_bytes_be();
    std::string s;
    for (std::size_t i = 0; i < bytes.size(); ++i) {
        s.push_back(digits[bytes[i] >> 4]);
        s.push_back(digits[bytes[i] & 0xf]);
        if (i + 1 == bytes.size() || (i + 1) % 8 == 0)
            s.push_back('\n');
        else
            s.push_back(' ');
    }
    return s;
}

}  // namespace writeleak
