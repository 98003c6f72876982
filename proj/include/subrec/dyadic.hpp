#pragma once
// Exact binary fractions in [0, 1].  All halting-probability sums are
// multiples of 2^-N, so a numerator over a power-of-two denominator is
// exact; comparison and addition never round.  Values are kept possibly
// unnormalized internally and compared by value, because padded and
// unpadded representations of the same real must compare equal.

#include <boost/multiprecision/cpp_int.hpp>

#include <string>

#include "subrec/bitstr.hpp"

namespace subrec {

class Dyadic {
public:
    using Int = boost::multiprecision::cpp_int;

    Dyadic() = default;

    static Dyadic zero() { return Dyadic(); }
    static Dyadic one() { return Dyadic(Int(1), 0); }

    /// 2^-k.
    static Dyadic pow2_inv(unsigned k) { return Dyadic(Int(1), k); }

    /// Value 0.b1 b2 ... bm read from a mantissa bit string.
    static Dyadic from_mantissa(const BitStr& bits) {
        Int n = 0;
        for (std::size_t i = 0; i < bits.size(); ++i) {
            n <<= 1;
            if (bits.bit(i)) n |= 1;
        }
        return Dyadic(n, static_cast<unsigned>(bits.size()));
    }

    bool is_zero() const { return num_ == 0; }

    Dyadic& operator+=(const Dyadic& o) {
        unsigned e = std::max(exp_, o.exp_);
        num_ = (num_ << (e - exp_)) + (o.num_ << (e - o.exp_));
        exp_ = e;
        return *this;
    }
    friend Dyadic operator+(Dyadic a, const Dyadic& b) { return a += b; }

    friend bool operator==(const Dyadic& a, const Dyadic& b) { return cmp(a, b) == 0; }
    friend bool operator!=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) != 0; }
    friend bool operator<(const Dyadic& a, const Dyadic& b) { return cmp(a, b) < 0; }
    friend bool operator<=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) <= 0; }
    friend bool operator>(const Dyadic& a, const Dyadic& b) { return cmp(a, b) > 0; }
    friend bool operator>=(const Dyadic& a, const Dyadic& b) { return cmp(a, b) >= 0; }

    /// Canonical mantissa: the value written as 0.b1...bm with trailing
    /// zeros stripped.  Zero has an empty mantissa.  Requires value < 1.
    BitStr mantissa() const {
        Dyadic c = normalized();
        if (c.num_ >= (Int(1) << c.exp_))
            throw std::domain_error("Dyadic::mantissa: value must be < 1");
        BitStr r;
        for (unsigned i = 0; i < c.exp_; ++i)
            r.push_back(boost::multiprecision::bit_test(c.num_, c.exp_ - 1 - i));
        return r;
    }

    std::size_t mantissa_width() const { return normalized().exp_; }

    unsigned exponent() const { return exp_; }
    const Int& numerator() const { return num_; }

    /// Normalized "n/2^e" rendering; zero prints as "0".
    std::string fraction_str() const {
        Dyadic c = normalized();
        if (c.num_ == 0) return "0";
        return c.num_.str() + "/2^" + std::to_string(c.exp_);
    }

    Dyadic normalized() const {
        Dyadic c = *this;
        if (c.num_ == 0) {
            c.exp_ = 0;
            return c;
        }
        while (c.exp_ > 0 && !boost::multiprecision::bit_test(c.num_, 0)) {
            c.num_ >>= 1;
            --c.exp_;
        }
        return c;
    }

private:
    Dyadic(Int n, unsigned e) : num_(std::move(n)), exp_(e) {}

    static int cmp(const Dyadic& a, const Dyadic& b) {
        unsigned e = std::max(a.exp_, b.exp_);
        Int x = a.num_ << (e - a.exp_);
        Int y = b.num_ << (e - b.exp_);
        return x < y ? -1 : (x == y ? 0 : 1);
    }

    Int num_ = 0;
    unsigned exp_ = 0; // value = num_ / 2^exp_
};

} // namespace subrec
