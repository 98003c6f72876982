#pragma once
// Finite binary strings and the shortlex enumeration l_1 = "0", l_2 = "1",
// l_3 = "00", ...  Strings are the universal currency here: programs,
// inputs and outputs are all BitStr values.

#include <array>
#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <string_view>

namespace subrec {

/// Desk-scale capacity limit hit (enumeration horizon, representable
/// string length, step-count overflow).  Always explicit, never silent.
struct capacity_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// A structural assumption was violated (e.g. the diagonal recursion
/// guard observed a call on a string that is not strictly shorter).
struct structural_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct decode_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct encode_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/// Immutable-ish fixed-capacity bit string, MSB-first indexing: bit(0) is
/// the first (leftmost) bit.  Capacity is generous for desk scale; longer
/// strings raise capacity_error.
class BitStr {
public:
    static constexpr std::size_t max_bits = 256;

    BitStr() = default;

    static BitStr from_string(std::string_view s) {
        BitStr r;
        for (char c : s) {
            if (c == '0') r.push_back(false);
            else if (c == '1') r.push_back(true);
            else throw decode_error("BitStr::from_string: bad character");
        }
        return r;
    }

    /// Bits of `value` as a string of exactly `len` bits, most significant
    /// first.  Enumerating value = 0..2^len-1 yields lexicographic order.
    static BitStr from_value(std::uint64_t value, unsigned len) {
        if (len > 64) throw capacity_error("BitStr::from_value: len > 64");
        BitStr r;
        for (unsigned i = 0; i < len; ++i)
            r.push_back((value >> (len - 1 - i)) & 1u);
        return r;
    }

    std::size_t size() const { return len_; }
    bool empty() const { return len_ == 0; }

    bool bit(std::size_t i) const {
        return (w_[i >> 6] >> (i & 63u)) & 1u;
    }

    void push_back(bool b) {
        if (len_ >= max_bits) throw capacity_error("BitStr: length limit");
        if (b) w_[len_ >> 6] |= std::uint64_t{1} << (len_ & 63u);
        ++len_;
    }

    BitStr& append(const BitStr& other) {
        for (std::size_t i = 0; i < other.size(); ++i) push_back(other.bit(i));
        return *this;
    }

    BitStr slice(std::size_t pos, std::size_t n) const {
        BitStr r;
        for (std::size_t i = 0; i < n; ++i) r.push_back(bit(pos + i));
        return r;
    }

    /// Numeric value of the bits read MSB-first.  Requires size() <= 63.
    std::uint64_t value() const {
        if (len_ > 63) throw capacity_error("BitStr::value: too long");
        std::uint64_t v = 0;
        for (std::size_t i = 0; i < len_; ++i) v = (v << 1) | (bit(i) ? 1u : 0u);
        return v;
    }

    std::string str() const {
        std::string s;
        s.reserve(len_);
        for (std::size_t i = 0; i < len_; ++i) s.push_back(bit(i) ? '1' : '0');
        return s;
    }

    friend bool operator==(const BitStr& a, const BitStr& b) {
        return a.len_ == b.len_ && a.w_ == b.w_;
    }
    friend bool operator!=(const BitStr& a, const BitStr& b) { return !(a == b); }

    /// Shortlex: shorter first, then lexicographic.
    friend bool shortlex_less(const BitStr& a, const BitStr& b) {
        if (a.len_ != b.len_) return a.len_ < b.len_;
        for (std::size_t i = 0; i < a.len_; ++i)
            if (a.bit(i) != b.bit(i)) return !a.bit(i);
        return false;
    }

    bool is_prefix_of(const BitStr& other) const {
        if (len_ > other.len_) return false;
        for (std::size_t i = 0; i < len_; ++i)
            if (bit(i) != other.bit(i)) return false;
        return true;
    }

    std::size_t hash() const {
        std::uint64_t h = 1469598103934665603ull;
        auto mix = [&h](std::uint64_t v) {
            h ^= v;
            h *= 1099511628211ull;
        };
        mix(len_);
        for (auto w : w_) mix(w);
        return static_cast<std::size_t>(h);
    }

private:
    std::array<std::uint64_t, 4> w_{};
    std::uint32_t len_ = 0;
};

struct BitStrHash {
    std::size_t operator()(const BitStr& s) const { return s.hash(); }
};

/// k-th string of the shortlex enumeration over {0,1}, starting at
/// l_1 = "0".  Bijective and monotone in length.
inline BitStr nth_string(std::uint64_t k) {
    if (k == 0) throw std::domain_error("nth_string: k must be >= 1");
    if (k > (std::uint64_t{1} << 62)) throw capacity_error("nth_string: k too large");
    std::uint64_t m = k + 1;
    unsigned len = 63 - static_cast<unsigned>(__builtin_clzll(m));
    std::uint64_t v = m - (std::uint64_t{1} << len);
    return BitStr::from_value(v, len);
}

/// Inverse of nth_string: index_of(nth_string(k)) == k.
inline std::uint64_t index_of(const BitStr& s) {
    if (s.empty()) throw std::domain_error("index_of: empty string has no index");
    if (s.size() > 62) throw capacity_error("index_of: string too long");
    return (std::uint64_t{1} << s.size()) - 1 + s.value();
}

/// num(l_j) = j - 1, the numeric reading of an enumerated string.
inline std::uint64_t num_of(const BitStr& s) { return index_of(s) - 1; }

} // namespace subrec
