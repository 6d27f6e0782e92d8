#include "writeleak/bignat.hpp"

#include <algorithm>
#include <cstring>
#include <stdexcept>

namespace writeleak {

namespace {
constexpr std::uint64_t kBase = 1ull << 32;
}

BigNat::BigNat(std::uint64_t v) {
    limbs_.push_back(static_cast<std::uint32_t>(v));
    if (v >> 32) limbs_.push_back(static_cast<std::uint32_t>(v >> 32));
}

void BigNat::trim() {
    while (limbs_.size() > 1 && limbs_.back() == 0) limbs_.pop_back();
}

BigNat BigNat::from_bytes_le(std::span<const std::uint8_t> bytes) {
    BigNat r;
    r.limbs_.assign((bytes.size() + 3) / 4, 0);
    if (r.limbs_.empty()) r.limbs_.push_back(0);
    for (std::size_t i = 0; i < bytes.size(); ++i)
        r.limbs_[i / 4] |= static_cast<std::uint32_t>(bytes[i]) << (8 * (i % 4));
    r.trim();
    return r;
}

BigNat BigNat::from_hex(const std::string& hex) {
    BigNat r;
    r.limbs_.assign((hex.size() + 7) / 8, 0);
    if (r.limbs_.empty()) r.limbs_.push_back(0);
    for (std::size_t i = 0; i < hex.size(); ++i) {
        char c = hex[hex.size() - 1 - i];
        std::uint32_t d;
        if (c >= '0' && c <= '9') d = c - '0';
        else if (c >= 'a' && c <= 'f') d = 10 + c - 'a';
        else if (c >= 'A' && c <= 'F') d = 10 + c - 'A';
        else throw std::invalid_argument("BigNat::from_hex: bad digit");
        r.limbs_[i / 8] |= d << (4 * (i % 8));
    }
    r.trim();
    return r;
}

BigNat BigNat::random_with_top_bit(std::size_t bits, std::mt19937_64& rng) {
    if (bits == 0) return BigNat(0);
    BigNat r;
    r.limbs_.assign((bits + 31) / 32, 0);
    for (auto& l : r.limbs_) l = static_cast<std::uint32_t>(rng());
    std::size_t top = (bits - 1) % 32;
    r.limbs_.back() &= (top == 31) ? 0xffffffffu : ((1u << (top + 1)) - 1);
    r.limbs_.back() |= 1u << top;
    return r;
}

BigNat BigNat::random_below(const BigNat& bound, std::mt19937_64& rng) {
    if (bound.is_zero()) throw std::invalid_argument("random_below: zero bound");
    // Rejection sampling over bit_len(bound)-bit values.
    std::size_t bits = bound.bit_len();
    for (;;) {
        BigNat r;
        r.limbs_.assign((bits + 31) / 32, 0);
        for (auto& l : r.limbs_) l = static_cast<std::uint32_t>(rng());
        std::size_t top = (bits - 1) % 32;
        r.limbs_.back() &= (top == 31) ? 0xffffffffu : ((1u << (top + 1)) - 1);
        r.trim();
        if (r < bound) return r;
    }
}

std::size_t BigNat::bit_len() const {
    if (is_zero()) return 0;
    std::uint32_t top = limbs_.back();
    std::size_t b = 0;
    while (top) { ++b; top >>= 1; }
    return (limbs_.size() - 1) * 32 + b;
}

bool BigNat::bit(std::size_t i) const {
    std::size_t limb = i / 32;
    if (limb >= limbs_.size()) return false;
    return (limbs_[limb] >> (i % 32)) & 1;
}

std::vector<std::uint8_t> BigNat::to_bytes_le(std::size_t len) const {
    std::vector<std::uint8_t> out(len, 0);
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
        for (int b = 0; b < 4; ++b) {
            std::size_t idx = i * 4 + b;
            std::uint8_t byte = static_cast<std::uint8_t>(limbs_[i] >> (8 * b));
            if (idx < len) {
                out[idx] = byte;
            } else if (byte != 0) {
                throw std::length_error("BigNat::to_bytes_le: value too wide");
            }
        }
    }
    return out;
}

std::string BigNat::to_hex() const {
    static const char* digits = "0123456789abcdef";
    std::string s;
    for (auto it = limbs_.rbegin(); it != limbs_.rend(); ++it)
        for (int shift = 28; shift >= 0; shift -= 4)
            s.push_back(digits[(*it >> shift) & 0xf]);
    std::size_t nz = s.find_first_not_of('0');
    return nz == std::string::npos ? "0" : s.substr(nz);
}

std::uint64_t BigNat::to_u64() const {
    if (bit_len() > 64) throw std::length_error("BigNat::to_u64: too wide");
    std::uint64_t v = limbs_[0];
    if (limbs_.size() > 1) v |= static_cast<std::uint64_t>(limbs_[1]) << 32;
    return v;
}

int BigNat::compare(const BigNat& o) const {
    if (limbs_.size() != o.limbs_.size())
        return limbs_.size() < o.limbs_.size() ? -1 : 1;
    for (std::size_t i = limbs_.size(); i-- > 0;)
        if (limbs_[i] != o.limbs_[i]) return limbs_[i] < o.limbs_[i] ? -1 : 1;
    return 0;
}

BigNat BigNat::add(const BigNat& o) const {
    BigNat r;
    r.limbs_.assign(std::max(limbs_.size(), o.limbs_.size()) + 1, 0);
    std::uint64_t carry = 0;
    for (std::size_t i = 0; i < r.limbs_.size(); ++i) {
        std::uint64_t s = carry;
        if (i < limbs_.size()) s += limbs_[i];
        if (i < o.limbs_.size()) s += o.limbs_[i];
        r.limbs_[i] = static_cast<std::uint32_t>(s);
        carry = s >> 32;
    }
    r.trim();
    return r;
}

BigNat BigNat::sub(const BigNat& o) const {
    if (compare(o) < 0) throw std::underflow_error("BigNat::sub: negative result");
    BigNat r;
    r.limbs_.assign(limbs_.size(), 0);
    std::int64_t borrow = 0;
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
        std::int64_t d = static_cast<std::int64_t>(limbs_[i]) - borrow -
                         (i < o.limbs_.size() ? o.limbs_[i] : 0);
        if (d < 0) {
            d += static_cast<std::int64_t>(kBase);
            borrow = 1;
        } else {
            borrow = 0;
        }
        r.limbs_[i] = static_cast<std::uint32_t>(d);
    }
    r.trim();
    return r;
}

BigNat BigNat::mul(const BigNat& o) const {
    BigNat r;
    r.limbs_.assign(limbs_.size() + o.limbs_.size(), 0);
    for (std::size_t i = 0; i < limbs_.size(); ++i) {
        std::uint64_t carry = 0;
        for (std::size_t j = 0; j < o.limbs_.size(); ++j) {
            std::uint64_t cur = static_cast<std::uint64_t>(limbs_[i]) * o.limbs_[j] +
                                r.limbs_[i + j] + carry;
            r.limbs_[i + j] = static_cast<std::uint32_t>(cur);
            carry = cur >> 32;
        }
        r.limbs_[i + o.limbs_.size()] = static_cast<std::uint32_t>(carry);
    }
    r.trim();
    return r;
}

std::pair<BigNat, BigNat> BigNat::divmod(const BigNat& divisor) const {
    if (divisor.is_zero()) throw std::domain_error("BigNat::divmod: divide by zero");
    if (compare(divisor) < 0) return {BigNat(0), *this};

    // Single-limb fast path.
    if (divisor.limbs_.size() == 1) {
        std::uint64_t d = divisor.limbs_[0];
        BigNat q;
        q.limbs_.assign(limbs_.size(), 0);
        std::uint64_t rem = 0;
        for (std::size_t i = limbs_.size(); i-- > 0;) {
            std::uint64_t cur = (rem << 32) | limbs_[i];
            q.limbs_[i] = static_cast<std::uint32_t>(cur / d);
            rem = cur % d;
        }
        q.trim();
        return {q, BigNat(rem)};
    }

    // Knuth algorithm D. Normalize so the divisor's top limb has its high bit set.
    int shift = 0;
    for (std::uint32_t top = divisor.limbs_.back(); !(top & 0x80000000u); top <<= 1)
        ++shift;

    auto shl = [](const std::vector<std::uint32_t>& in, int s) {
        std::vector<std::uint32_t> out(in.size() + 1, 0);
        for (std::size_t i = 0; i < in.size(); ++i) {
            out[i] |= in[i] << s;
            if (s) out[i + 1] = in[i] >> (32 - s);
        }
        return out;
    };

    std::vector<std::uint32_t> u = shl(limbs_, shift);          // m+n+1 limbs
    std::vector<std::uint32_t> v = shl(divisor.limbs_, shift);  // normalized
    while (v.size() > 1 && v.back() == 0) v.pop_back();
    const std::size_t n = v.size();
    const std::size_t m = u.size() - n;

    BigNat q;
    q.limbs_.assign(m, 0);
    for (std::size_t j = m; j-- > 0;) {
        std::uint64_t num = (static_cast<std::uint64_t>(u[j + n]) << 32) | u[j + n - 1];
        std::uint64_t qhat = num / v[n - 1];
        std::uint64_t rhat = num % v[n - 1];
        while (qhat >= kBase ||
               qhat * v[n - 2] > ((rhat << 32) | u[j + n - 2])) {
            --qhat;
            rhat += v[n - 1];
            if (rhat >= kBase) break;
        }
        // Multiply-subtract qhat * v from u[j .. j+n].
        std::int64_t borrow = 0;
        std::uint64_t carry = 0;
        for (std::size_t i = 0; i < n; ++i) {
            std::uint64_t p = qhat * v[i] + carry;
            carry = p >> 32;
            std::int64_t t = static_cast<std::int64_t>(u[i + j]) -
                             static_cast<std::int64_t>(p & 0xffffffffu) - borrow;
            borrow = 0;
            if (t < 0) {
                t += static_cast<std::int64_t>(kBase);
                borrow = 1;
            }
            u[i + j] = static_cast<std::uint32_t>(t);
        }
        std::int64_t t = static_cast<std::int64_t>(u[j + n]) -
                         static_cast<std::int64_t>(carry) - borrow;
        if (t < 0) {
            // qhat was one too large; add back.
            t += static_cast<std::int64_t>(kBase);
            --qhat;
            std::uint64_t c = 0;
            for (std::size_t i = 0; i < n; ++i) {
                std::uint64_t s = static_cast<std::uint64_t>(u[i + j]) + v[i] + c;
                u[i + j] = static_cast<std::uint32_t>(s);
                c = s >> 32;
            }
            t += static_cast<std::int64_t>(c);
            t &= 0xffffffff;
        }
        u[j + n] = static_cast<std::uint32_t>(t);
        q.limbs_[j] = static_cast<std::uint32_t>(qhat);
    }
    q.trim();

    BigNat r;
    r.limbs_.assign(n, 0);
    if (shift) {
        for (std::size_t i = 0; i < n; ++i) {
            r.limbs_[i] = u[i] >> shift;
            if (i + 1 < u.size()) r.limbs_[i] |= u[i + 1] << (32 - shift);
        }
    } else {
        std::copy(u.begin(), u.begin() + n, r.limbs_.begin());
    }
    r.trim();
    return {q, r};
}

BigNat mod_mul(const BigNat& a, const BigNat& b, const BigNat& n) {
    if (n.compare(BigNat(1)) <= 0)
        throw std::domain_error("mod_mul: modulus must exceed 1");
    return a.mul(b).mod(n);
}

}  // namespace writeleak
