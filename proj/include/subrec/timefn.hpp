#pragma once
// Total time-bound functions: the builtin poly(c,k) family and its
// diagonal extensions.  A TimeFn is both a value the evaluation engine
// understands and a program term of L (see submachine.hpp for the
// evaluation API).

#include <cstdint>
#include <optional>
#include <string>

#include "subrec/codec.hpp"

namespace subrec {

/// poly(c,k) computes fuel(w) = c*(|w|+1)^k + c, strictly positive and
/// total.  diag_depth > 0 wraps the base in that many diagonal (P**)
/// layers; totality of the wrapped function is the content of the
/// diagonal module's verification suite.
struct TimeFn {
    std::uint64_t c = 1;
    std::uint64_t k = 0;
    unsigned diag_depth = 0;

    static TimeFn poly(std::uint64_t c, std::uint64_t k) { return TimeFn{c, k, 0}; }
    static TimeFn diagonal(const TimeFn& inner) {
        return TimeFn{inner.c, inner.k, inner.diag_depth + 1};
    }

    bool is_diagonal() const { return diag_depth > 0; }
    TimeFn inner() const {
        if (!is_diagonal()) throw std::domain_error("TimeFn::inner: not diagonal");
        return TimeFn{c, k, diag_depth - 1};
    }

    /// Canonical id, also the CLI spec string: "poly:c,k", "diag:poly:c,k".
    std::string id() const {
        std::string s;
        for (unsigned i = 0; i < diag_depth; ++i) s += "diag:";
        s += "poly:" + std::to_string(c) + "," + std::to_string(k);
        return s;
    }

    /// The program term of L computing this time function.
    BitStr program() const {
        BitStr base = codeword_bits(Head::Poly);
        base.append(encode_nat(c - 1));
        base.append(encode_nat(k));
        for (unsigned i = 0; i < diag_depth; ++i) {
            BitStr wrapped = codeword_bits(Head::Apply);
            wrapped.append(codeword_bits(Head::StarStar));
            wrapped.append(base);
            base = wrapped;
        }
        return base;
    }

    friend bool operator==(const TimeFn& a, const TimeFn& b) {
        return a.c == b.c && a.k == b.k && a.diag_depth == b.diag_depth;
    }
};

/// fuel = c*(len+1)^k + c if it is desk-scale representable.
inline bool poly_bound_checked(std::uint64_t c, std::uint64_t k, std::size_t len,
                               std::uint64_t& out) {
    constexpr unsigned __int128 lim = (unsigned __int128)1 << 61;
    unsigned __int128 p = 1;
    for (std::uint64_t i = 0; i < k; ++i) {
        p *= (len + 1);
        if (p > lim) return false;
    }
    unsigned __int128 r = (unsigned __int128)c * p + c;
    if (r > lim) return false;
    out = static_cast<std::uint64_t>(r);
    return true;
}

inline std::uint64_t poly_bound(std::uint64_t c, std::uint64_t k, std::size_t len) {
    std::uint64_t r = 0;
    if (!poly_bound_checked(c, k, len, r)) throw capacity_error("poly_bound: overflow");
    return r;
}

/// Parse "poly:c,k" / "diag:...".  c >= 1.
inline std::optional<TimeFn> parse_time_fn_spec(const std::string& spec) {
    std::string s = spec;
    unsigned depth = 0;
    while (s.rfind("diag:", 0) == 0) {
        ++depth;
        s = s.substr(5);
    }
    if (s.rfind("poly:", 0) != 0) return std::nullopt;
    s = s.substr(5);
    auto comma = s.find(',');
    if (comma == std::string::npos) return std::nullopt;
    try {
        std::size_t end1 = 0, end2 = 0;
        std::string cs = s.substr(0, comma), ks = s.substr(comma + 1);
        std::uint64_t c = std::stoull(cs, &end1);
        std::uint64_t k = std::stoull(ks, &end2);
        if (end1 != cs.size() || end2 != ks.size() || c == 0) return std::nullopt;
        return TimeFn{c, k, depth};
    } catch (...) {
        return std::nullopt;
    }
}

/// Recognize a term of L as a builtin time function:
/// poly(c,k) literal, or apply(p**, tf-term) for a diagonal.
inline std::optional<TimeFn> parse_time_fn_term(const ParsedForm& f) {
    if (f.kind == ParsedForm::Kind::Primitive && f.head == Head::Poly)
        return TimeFn{f.nat, f.nat2, 0};
    if (f.kind == ParsedForm::Kind::Apply && f.args.size() == 1 &&
        f.head_form->kind == ParsedForm::Kind::Primitive &&
        f.head_form->head == Head::StarStar) {
        auto inner = parse_time_fn_term(try_decompose(f.args[0]));
        if (!inner) return std::nullopt;
        return TimeFn::diagonal(*inner);
    }
    return std::nullopt;
}

inline std::optional<TimeFn> parse_time_fn_term(const BitStr& bits) {
    return parse_time_fn_term(try_decompose(bits));
}

} // namespace subrec
