#pragma once
// The concrete prefix-free binary language L.
//
// Every string of L starts with exactly one codeword from a single frozen
// table.  Opcode codewords open a base-machine program (a linear opcode
// stream terminated by its first HALT); marker codewords open literals,
// reserved heads, or an application node.  The table is prefix-free and
// Kraft-complete:
//
//   halt        0             base opcode, also the 1-bit program "0"
//   out         100           pop top of stack, append bit to output
//   apply       101           application node: apply head arg
//   push        1100 b        push literal bit b
//   jnz         1101 nat(d-1) jump back d instructions if stack nonempty
//   nat         11100 nat(n)  literal, runs to l_{n+1}
//   dup         111010        duplicate top of stack
//   drop        111011        pop top of stack
//   rho         111100 block  dyadic literal, block = 0^m 1 mantissa
//   poly        111101 nat(c-1) nat(k)   time-bound program family
//   p**         111110        diagonal time-bound head
//   pi'         1111110       BB+ from a lower Omega approximation
//   t           11111110      computation-time head
//   p_sm        111111110     submachine head
//   p_sum       1111111110    halting-probability partial-sum head
//   p*          1111111111    non-diagonal extension head
//
// Integer payloads use an Elias-delta-class code on n+1 (decode is exact
// inverse).  Published size constants, frozen by a golden test:
//
//   C       = 3   per-argument overhead of apply (one apply codeword)
//   C_apply = 3   same constant under its interface name
//   C'      = 3,  eps = 1:  |encode_nat(n)| <= C' + log2 n + (1+eps) log2 log2 n
//                 for all n >= 2.
//
// Multi-argument application is left-nested, so the bits of
// P o w1 o ... o wk are:  apply^k  P  w1 ... wk, and the whole-string
// size law |P o w1 o ... o wk| = C*k + |P| + sum |wi| holds with equality.

#include <cstdint>
#include <cstdio>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "subrec/bitstr.hpp"
#include "subrec/dyadic.hpp"

namespace subrec {

// Published constants of the language.
inline constexpr unsigned kApplyOverhead = 3; // C and C_apply
inline constexpr unsigned kNatCodeC = 3;      // C'
inline constexpr unsigned kNatCodeEps = 1;    // eps
inline constexpr const char* kCostScheduleVersion = "cost-schedule-v1";
inline constexpr const char* kLanguageVersion = "language-v1";

enum class Op : std::uint8_t { Halt, Out, Push, Jnz, Dup, Drop };

enum class Head : std::uint8_t {
    Apply,
    Nat,
    Rho,
    Poly,
    StarStar, // P**
    Pi,       // pi'_Omega
    T,
    Sm,  // P_SM
    Sum, // P_Sigma
    Star // P*
};

inline const char* codeword(Op op) {
    switch (op) {
    case Op::Halt: return "0";
    case Op::Out: return "100";
    case Op::Push: return "1100";
    case Op::Jnz: return "1101";
    case Op::Dup: return "111010";
    case Op::Drop: return "111011";
    }
    return "";
}

inline const char* codeword(Head h) {
    switch (h) {
    case Head::Apply: return "101";
    case Head::Nat: return "11100";
    case Head::Rho: return "111100";
    case Head::Poly: return "111101";
    case Head::StarStar: return "111110";
    case Head::Pi: return "1111110";
    case Head::T: return "11111110";
    case Head::Sm: return "111111110";
    case Head::Sum: return "1111111110";
    case Head::Star: return "1111111111";
    }
    return "";
}

inline const char* head_name(Head h) {
    switch (h) {
    case Head::Apply: return "apply";
    case Head::Nat: return "nat";
    case Head::Rho: return "rho";
    case Head::Poly: return "poly";
    case Head::StarStar: return "p**";
    case Head::Pi: return "pi'";
    case Head::T: return "t";
    case Head::Sm: return "p_sm";
    case Head::Sum: return "p_sum";
    case Head::Star: return "p*";
    }
    return "?";
}

// ------------------------------------------------------------------
// Integer code (Elias-delta-class on n+1)
// ------------------------------------------------------------------

/// Prefix-free code for n >= 0.  encode_nat(0) == "1".
inline BitStr encode_nat(std::uint64_t n) {
    if (n == std::uint64_t(-1)) throw encode_error("encode_nat: overflow");
    std::uint64_t x = n + 1;
    unsigned L = 64 - static_cast<unsigned>(__builtin_clzll(x));
    unsigned U = 32 - static_cast<unsigned>(__builtin_clz(L));
    BitStr r;
    for (unsigned i = 1; i < U; ++i) r.push_back(false); // U-1 zeros
    for (unsigned i = 0; i < U; ++i) r.push_back((L >> (U - 1 - i)) & 1u);
    for (unsigned i = 1; i < L; ++i) r.push_back((x >> (L - 1 - i)) & 1u);
    return r;
}

namespace detail {

struct Cursor {
    const BitStr* s;
    std::size_t pos = 0;

    bool done() const { return pos >= s->size(); }
    std::size_t left() const { return s->size() - pos; }
    bool next(bool& b) {
        if (done()) return false;
        b = s->bit(pos++);
        return true;
    }
};

inline bool read_nat(Cursor& cur, std::uint64_t& out) {
    unsigned zeros = 0;
    bool b = false;
    for (;;) {
        if (!cur.next(b)) return false;
        if (b) break;
        if (++zeros > 31) return false;
    }
    std::uint64_t L = 1;
    for (unsigned i = 0; i < zeros; ++i) {
        if (!cur.next(b)) return false;
        L = (L << 1) | (b ? 1u : 0u);
    }
    if (L > 63) return false;
    std::uint64_t x = 1;
    for (std::uint64_t i = 1; i < L; ++i) {
        if (!cur.next(b)) return false;
        x = (x << 1) | (b ? 1u : 0u);
    }
    out = x - 1;
    return true;
}

/// Reads the raw block 0^m 1 mantissa.  Returns the mantissa bits.
inline bool read_rho_block(Cursor& cur, BitStr& mantissa) {
    unsigned m = 0;
    bool b = false;
    for (;;) {
        if (!cur.next(b)) return false;
        if (b) break;
        if (++m > BitStr::max_bits) return false;
    }
    mantissa = BitStr();
    for (unsigned i = 0; i < m; ++i) {
        if (!cur.next(b)) return false;
        mantissa.push_back(b);
    }
    return true;
}

enum class Token : std::uint8_t {
    OpHalt, OpOut, OpPush, OpJnz, OpDup, OpDrop,
    Apply, Nat, Rho, Poly, StarStar, Pi, T, Sm, Sum, Star,
    Bad
};

inline Token read_token(Cursor& cur) {
    bool b = false;
    if (!cur.next(b)) return Token::Bad;
    if (!b) return Token::OpHalt; // 0
    if (!cur.next(b)) return Token::Bad;
    if (!b) { // 10
        if (!cur.next(b)) return Token::Bad;
        return b ? Token::Apply : Token::OpOut; // 101 / 100
    }
    if (!cur.next(b)) return Token::Bad;
    if (!b) { // 110
        if (!cur.next(b)) return Token::Bad;
        return b ? Token::OpJnz : Token::OpPush; // 1101 / 1100
    }
    if (!cur.next(b)) return Token::Bad;
    if (!b) { // 1110
        if (!cur.next(b)) return Token::Bad;
        if (!b) return Token::Nat; // 11100
        if (!cur.next(b)) return Token::Bad;
        return b ? Token::OpDrop : Token::OpDup; // 111011 / 111010
    }
    if (!cur.next(b)) return Token::Bad;
    if (!b) { // 11110
        if (!cur.next(b)) return Token::Bad;
        return b ? Token::Poly : Token::Rho; // 111101 / 111100
    }
    if (!cur.next(b)) return Token::Bad;
    if (!b) return Token::StarStar; // 111110
    if (!cur.next(b)) return Token::Bad;
    if (!b) return Token::Pi; // 1111110
    if (!cur.next(b)) return Token::Bad;
    if (!b) return Token::T; // 11111110
    if (!cur.next(b)) return Token::Bad;
    if (!b) return Token::Sm; // 111111110
    if (!cur.next(b)) return Token::Bad;
    return b ? Token::Star : Token::Sum; // 1111111111 / 1111111110
}

} // namespace detail

// ------------------------------------------------------------------
// Parsed forms
// ------------------------------------------------------------------

struct Instr {
    Op op;
    bool push_bit = false;
    std::uint32_t jnz_back = 0; // jump back this many instructions
};

/// Decidable decomposition of a string of L.  Re-encoding a non-Invalid
/// form reproduces the original bits exactly.
struct ParsedForm {
    enum class Kind : std::uint8_t { Invalid, Base, Primitive, Apply };

    Kind kind = Kind::Invalid;
    BitStr bits; // the original encoding

    // Base
    std::vector<Instr> code;

    // Primitive
    Head head = Head::Apply;
    std::uint64_t nat = 0;     // Nat payload; Poly: c
    std::uint64_t nat2 = 0;    // Poly: k
    BitStr rho_mantissa;       // Rho: mantissa bits as written (may be padded)

    // Apply: flattened head o arg1 o ... o argk
    std::shared_ptr<const ParsedForm> head_form;
    std::vector<BitStr> args;

    bool valid() const { return kind != Kind::Invalid; }
};

namespace detail {

inline std::optional<ParsedForm> parse_term(const BitStr& s, Cursor& cur, unsigned depth) {
    if (depth > 64) return std::nullopt;
    std::size_t start = cur.pos;
    Token tok = read_token(cur);
    switch (tok) {
    case Token::Bad:
        return std::nullopt;

    case Token::OpHalt:
    case Token::OpOut:
    case Token::OpPush:
    case Token::OpJnz:
    case Token::OpDup:
    case Token::OpDrop: {
        ParsedForm f;
        f.kind = ParsedForm::Kind::Base;
        Token t = tok;
        for (;;) {
            Instr ins{};
            switch (t) {
            case Token::OpHalt: ins.op = Op::Halt; break;
            case Token::OpOut: ins.op = Op::Out; break;
            case Token::OpDup: ins.op = Op::Dup; break;
            case Token::OpDrop: ins.op = Op::Drop; break;
            case Token::OpPush: {
                ins.op = Op::Push;
                bool b = false;
                if (!cur.next(b)) return std::nullopt;
                ins.push_bit = b;
                break;
            }
            case Token::OpJnz: {
                ins.op = Op::Jnz;
                std::uint64_t d1 = 0;
                if (!read_nat(cur, d1)) return std::nullopt;
                std::uint64_t d = d1 + 1;
                // backward only, and the target must exist
                if (d > f.code.size()) return std::nullopt;
                ins.jnz_back = static_cast<std::uint32_t>(d);
                break;
            }
            default:
                return std::nullopt; // marker token inside a base program
            }
            f.code.push_back(ins);
            if (ins.op == Op::Halt) break;
            t = read_token(cur);
            if (t == Token::Bad) return std::nullopt;
        }
        f.bits = s.slice(start, cur.pos - start);
        return f;
    }

    case Token::Apply: {
        auto head = parse_term(s, cur, depth + 1);
        if (!head) return std::nullopt;
        std::size_t arg_start = cur.pos;
        auto arg = parse_term(s, cur, depth + 1);
        if (!arg) return std::nullopt;
        BitStr arg_bits = s.slice(arg_start, cur.pos - arg_start);
        ParsedForm f;
        f.kind = ParsedForm::Kind::Apply;
        if (head->kind == ParsedForm::Kind::Apply) {
            f.head_form = head->head_form;
            f.args = head->args;
        } else {
            f.head_form = std::make_shared<ParsedForm>(std::move(*head));
            f.args = {};
        }
        f.args.push_back(std::move(arg_bits));
        f.bits = s.slice(start, cur.pos - start);
        return f;
    }

    case Token::Nat: {
        ParsedForm f;
        f.kind = ParsedForm::Kind::Primitive;
        f.head = Head::Nat;
        if (!read_nat(cur, f.nat)) return std::nullopt;
        f.bits = s.slice(start, cur.pos - start);
        return f;
    }

    case Token::Rho: {
        ParsedForm f;
        f.kind = ParsedForm::Kind::Primitive;
        f.head = Head::Rho;
        if (!read_rho_block(cur, f.rho_mantissa)) return std::nullopt;
        f.bits = s.slice(start, cur.pos - start);
        return f;
    }

    case Token::Poly: {
        ParsedForm f;
        f.kind = ParsedForm::Kind::Primitive;
        f.head = Head::Poly;
        std::uint64_t c1 = 0, k = 0;
        if (!read_nat(cur, c1) || !read_nat(cur, k)) return std::nullopt;
        f.nat = c1 + 1; // c >= 1
        f.nat2 = k;
        f.bits = s.slice(start, cur.pos - start);
        return f;
    }

    case Token::StarStar:
    case Token::Pi:
    case Token::T:
    case Token::Sm:
    case Token::Sum:
    case Token::Star: {
        ParsedForm f;
        f.kind = ParsedForm::Kind::Primitive;
        switch (tok) {
        case Token::StarStar: f.head = Head::StarStar; break;
        case Token::Pi: f.head = Head::Pi; break;
        case Token::T: f.head = Head::T; break;
        case Token::Sm: f.head = Head::Sm; break;
        case Token::Sum: f.head = Head::Sum; break;
        default: f.head = Head::Star; break;
        }
        f.bits = s.slice(start, cur.pos - start);
        return f;
    }
    }
    return std::nullopt;
}

} // namespace detail

/// Total parser: Invalid is a value, not an error.  A valid parse consumes
/// the whole string.
inline ParsedForm try_decompose(const BitStr& s) {
    detail::Cursor cur{&s};
    auto f = detail::parse_term(s, cur, 0);
    if (!f || !cur.done()) {
        ParsedForm inv;
        inv.bits = s;
        return inv;
    }
    return std::move(*f);
}

inline bool is_valid_program(const BitStr& s) { return try_decompose(s).valid(); }

// ------------------------------------------------------------------
// Encoders
// ------------------------------------------------------------------

inline BitStr codeword_bits(Head h) { return BitStr::from_string(codeword(h)); }
inline BitStr codeword_bits(Op op) { return BitStr::from_string(codeword(op)); }

/// P o w1 o ... o wk.  Head must be a valid program; every arg must be a
/// valid self-delimiting string of L.  Zero arguments return the head
/// unchanged.
inline BitStr encode_apply(const BitStr& head, const std::vector<BitStr>& args) {
    if (!is_valid_program(head)) throw encode_error("encode_apply: invalid head");
    if (args.empty()) return head;
    BitStr r;
    for (std::size_t i = 0; i < args.size(); ++i) r.append(codeword_bits(Head::Apply));
    r.append(head);
    for (const auto& a : args) {
        if (!is_valid_program(a)) throw encode_error("encode_apply: invalid argument");
        r.append(a);
    }
    return r;
}

/// Literal term running to l_{n+1}; the canonical program for the natural
/// number n.
inline BitStr nat_term(std::uint64_t n) {
    BitStr r = codeword_bits(Head::Nat);
    r.append(encode_nat(n));
    return r;
}

/// Raw block 0^|rho| 1 rho.  `width` >= the canonical mantissa width pads
/// with trailing zeros; the padded block decodes to the same value.
inline BitStr encode_rho(const Dyadic& rho, std::size_t width = SIZE_MAX) {
    BitStr m = rho.mantissa(); // throws for rho = 1
    std::size_t w = (width == SIZE_MAX) ? m.size() : width;
    if (w < m.size()) throw encode_error("encode_rho: width below mantissa width");
    BitStr r;
    for (std::size_t i = 0; i < w; ++i) r.push_back(false);
    r.push_back(true);
    r.append(m);
    for (std::size_t i = m.size(); i < w; ++i) r.push_back(false);
    return r;
}

/// Inverse of encode_rho on a standalone block; returns the value and the
/// written width.
inline std::pair<Dyadic, std::size_t> decode_rho(const BitStr& block) {
    detail::Cursor cur{&block};
    BitStr m;
    if (!detail::read_rho_block(cur, m) || !cur.done())
        throw decode_error("decode_rho: malformed block");
    return {Dyadic::from_mantissa(m), m.size()};
}

/// Rho literal term (rho marker + block).
inline BitStr rho_term(const Dyadic& rho, std::size_t width = SIZE_MAX) {
    BitStr r = codeword_bits(Head::Rho);
    r.append(encode_rho(rho, width));
    return r;
}

inline std::uint64_t decode_nat(const BitStr& s) {
    detail::Cursor cur{&s};
    std::uint64_t n = 0;
    if (!detail::read_nat(cur, n) || !cur.done())
        throw decode_error("decode_nat: malformed code");
    return n;
}

/// Structural re-encoder; inverse of try_decompose on valid forms.
inline BitStr encode_form(const ParsedForm& f) {
    switch (f.kind) {
    case ParsedForm::Kind::Invalid:
        throw encode_error("encode_form: invalid form");
    case ParsedForm::Kind::Base: {
        BitStr r;
        for (const auto& ins : f.code) {
            r.append(codeword_bits(ins.op));
            if (ins.op == Op::Push) r.push_back(ins.push_bit);
            if (ins.op == Op::Jnz) r.append(encode_nat(ins.jnz_back - 1));
        }
        return r;
    }
    case ParsedForm::Kind::Primitive: {
        BitStr r = codeword_bits(f.head);
        if (f.head == Head::Nat) r.append(encode_nat(f.nat));
        if (f.head == Head::Poly) {
            r.append(encode_nat(f.nat - 1));
            r.append(encode_nat(f.nat2));
        }
        if (f.head == Head::Rho) {
            for (std::size_t i = 0; i < f.rho_mantissa.size(); ++i) r.push_back(false);
            r.push_back(true);
            r.append(f.rho_mantissa);
        }
        return r;
    }
    case ParsedForm::Kind::Apply: {
        BitStr r;
        for (std::size_t i = 0; i < f.args.size(); ++i)
            r.append(codeword_bits(Head::Apply));
        r.append(encode_form(*f.head_form));
        for (const auto& a : f.args) r.append(a);
        return r;
    }
    }
    throw encode_error("encode_form: unreachable");
}

/// The published constants file.  Frozen by a golden test; hashed into the
/// cache fingerprint.
inline std::string constants_text() {
    std::string t;
    t += "# language constants (";
    t += kLanguageVersion;
    t += ", ";
    t += kCostScheduleVersion;
    t += ")\n";
    t += "codeword halt 0\n";
    t += "codeword out 100\n";
    t += "codeword apply 101\n";
    t += "codeword push 1100\n";
    t += "codeword jnz 1101\n";
    t += "codeword nat 11100\n";
    t += "codeword dup 111010\n";
    t += "codeword drop 111011\n";
    t += "codeword rho 111100\n";
    t += "codeword poly 111101\n";
    t += "codeword p** 111110\n";
    t += "codeword pi' 1111110\n";
    t += "codeword t 11111110\n";
    t += "codeword p_sm 111111110\n";
    t += "codeword p_sum 1111111110\n";
    t += "codeword p* 1111111111\n";
    t += "C 3\n";
    t += "C_apply 3\n";
    t += "C' 3\n";
    t += "eps 1\n";
    return t;
}

/// FNV-1a fingerprint of the language constants and cost schedule; a
/// mismatch invalidates any persisted cache.
inline std::string language_fingerprint() {
    std::uint64_t h = 1469598103934665603ull;
    for (char c : constants_text()) {
        h ^= static_cast<unsigned char>(c);
        h *= 1099511628211ull;
    }
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
    return std::string(buf);
}

} // namespace subrec
