#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <random>
#include <fstream>
#include <sstream>
#include <unordered_set>
#include <vector>

#include "subrec/codec.hpp"
#include "subrec/timefn.hpp"

using namespace subrec;

// Hand oracle: shortlex enumeration by explicit length-then-counter walk.
static std::vector<BitStr> shortlex_prefix(std::size_t count) {
    std::vector<BitStr> out;
    for (unsigned len = 1; out.size() < count; ++len)
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << len) && out.size() < count; ++v)
            out.push_back(BitStr::from_value(v, len));
    return out;
}

TEST_CASE("shortlex enumeration starts at 0 and is bijective") {
    CHECK(nth_string(1).str() == "0");
    CHECK(nth_string(2).str() == "1");
    CHECK(nth_string(5).str() == "10"); // "0","1","00","01","10" by hand
    CHECK(index_of(BitStr::from_string("0")) == 1);
    CHECK(index_of(BitStr::from_string("1")) == 2);
    CHECK(index_of(BitStr::from_string("00")) == 3);

    auto oracle = shortlex_prefix(64);
    for (std::size_t i = 0; i < oracle.size(); ++i)
        CHECK(nth_string(i + 1) == oracle[i]);

    for (std::uint64_t k = 1; k <= 100000; ++k)
        REQUIRE(index_of(nth_string(k)) == k);

    CHECK_THROWS_AS(nth_string(0), std::domain_error);
    CHECK_THROWS_AS(index_of(BitStr()), std::domain_error);
}

TEST_CASE("nat code round-trips and meets the published length bound") {
    CHECK(encode_nat(0).str() == "1");
    for (std::uint64_t n = 0; n <= 100000; ++n)
        REQUIRE(decode_nat(encode_nat(n)) == n);

    // |code(n)| <= C' + log2 n + (1+eps) log2 log2 n for n >= 2
    for (std::uint64_t n = 2; n <= 1000000; ++n) {
        double bound = kNatCodeC + std::log2(double(n)) +
                       (1.0 + kNatCodeEps) * std::log2(std::log2(double(n)));
        REQUIRE(double(encode_nat(n).size()) <= bound);
    }

    // n = 1000 against the instantiated bound
    CHECK(double(encode_nat(1000).size()) <=
          kNatCodeC + 10.0 + (1.0 + kNatCodeEps) * std::log2(10.0));

    // no code is a proper prefix of another
    std::unordered_set<BitStr, BitStrHash> codes;
    for (std::uint64_t n = 0; n <= 5000; ++n) codes.insert(encode_nat(n));
    for (const auto& c : codes)
        for (std::size_t cut = 1; cut < c.size(); ++cut)
            REQUIRE(codes.count(c.slice(0, cut)) == 0);

    CHECK_THROWS_AS(decode_nat(BitStr::from_string("00")), decode_error);
}

TEST_CASE("rho block layout") {
    CHECK(encode_rho(Dyadic::zero()).str() == "1");
    Dyadic three_quarters = Dyadic::from_mantissa(BitStr::from_string("11"));
    CHECK(encode_rho(three_quarters).str() == "00111");

    // padding changes the code, not the value
    Dyadic half = Dyadic::from_mantissa(BitStr::from_string("1"));
    auto [v1, w1] = decode_rho(encode_rho(half));
    auto [v3, w3] = decode_rho(encode_rho(half, 3));
    CHECK(w1 == 1);
    CHECK(w3 == 3);
    CHECK(v1 == v3);
    CHECK(v1 == half);

    CHECK_THROWS_AS(decode_rho(BitStr::from_string("001")), decode_error);
    CHECK_THROWS_AS(encode_rho(Dyadic::one()), std::domain_error);
}

TEST_CASE("apply encoding: size law with the published constant") {
    BitStr h = nat_term(3);
    CHECK(encode_apply(h, {}) == h); // zero-argument case: no overhead

    BitStr a = nat_term(0), b = BitStr::from_string("0");
    BitStr one_arg = encode_apply(h, {a});
    CHECK(one_arg.size() == h.size() + a.size() + kApplyOverhead);

    BitStr two_args = encode_apply(h, {a, b});
    CHECK(two_args.size() <= 2 * kApplyOverhead + h.size() + a.size() + b.size());
    CHECK(a.size() < two_args.size());
    CHECK(b.size() < two_args.size());

    ParsedForm f = try_decompose(two_args);
    REQUIRE(f.kind == ParsedForm::Kind::Apply);
    REQUIRE(f.args.size() == 2);
    CHECK(f.args[0] == a);
    CHECK(f.args[1] == b);
    CHECK(f.head_form->bits == h);
    CHECK(encode_form(f) == two_args);

    CHECK_THROWS_AS(encode_apply(BitStr::from_string("1"), {a}), encode_error);
    CHECK_THROWS_AS(encode_apply(h, {BitStr::from_string("1")}), encode_error);
}

TEST_CASE("try_decompose is total and round-trips") {
    CHECK_FALSE(try_decompose(BitStr()).valid());
    CHECK(try_decompose(BitStr::from_string("0")).kind == ParsedForm::Kind::Base);
    CHECK_FALSE(try_decompose(BitStr::from_string("1")).valid());

    // the minimal divergent loop: push1 jnz(1) halt (the jump re-enters
    // the push, so the trailing halt never runs)
    BitStr loop = BitStr::from_string("11001110110");
    ParsedForm lf = try_decompose(loop);
    REQUIRE(lf.kind == ParsedForm::Kind::Base);
    REQUIRE(lf.code.size() == 3);
    CHECK(lf.code[0].op == Op::Push);
    CHECK(lf.code[0].push_bit == true);
    CHECK(lf.code[1].op == Op::Jnz);
    CHECK(lf.code[1].jnz_back == 1);
    CHECK(lf.code[2].op == Op::Halt);
    // without the terminating halt the same stream is not a program
    CHECK_FALSE(try_decompose(BitStr::from_string("1100111011")).valid());

    // jnz as first instruction has no target
    CHECK_FALSE(try_decompose(BitStr::from_string("110110")).valid());
}

TEST_CASE("exhaustive prefix-freeness and round-trip up to 12 bits") {
    std::unordered_set<BitStr, BitStrHash> valid;
    for (unsigned len = 1; len <= 12; ++len) {
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
            BitStr s = BitStr::from_value(v, len);
            ParsedForm f = try_decompose(s);
            if (!f.valid()) continue;
            REQUIRE(encode_form(f) == s);
            valid.insert(s);
        }
    }
    REQUIRE(valid.count(BitStr::from_string("0")) == 1);
    for (const auto& p : valid) {
        for (std::size_t cut = 1; cut < p.size(); ++cut)
            REQUIRE(valid.count(p.slice(0, cut)) == 0);
        // truncation by one bit never parses as a whole
        REQUIRE_FALSE(try_decompose(p.slice(0, p.size() - 1)).valid());
    }
}

TEST_CASE("time function specs and terms") {
    auto tf = parse_time_fn_spec("poly:2,1");
    REQUIRE(tf.has_value());
    CHECK(tf->c == 2);
    CHECK(tf->k == 1);
    CHECK_FALSE(tf->is_diagonal());
    CHECK(tf->id() == "poly:2,1");

    auto dg = parse_time_fn_spec("diag:poly:2,1");
    REQUIRE(dg.has_value());
    CHECK(dg->is_diagonal());
    CHECK(dg->inner() == *tf);
    CHECK(dg->id() == "diag:poly:2,1");

    CHECK_FALSE(parse_time_fn_spec("poly:0,1").has_value());
    CHECK_FALSE(parse_time_fn_spec("nonsense").has_value());
    CHECK_FALSE(parse_time_fn_spec("poly:2").has_value());

    // terms round-trip through the recognizer
    auto back = parse_time_fn_term(tf->program());
    REQUIRE(back.has_value());
    CHECK(*back == *tf);
    auto dback = parse_time_fn_term(dg->program());
    REQUIRE(dback.has_value());
    CHECK(*dback == *dg);

    CHECK(poly_bound(2, 1, 3) == 10);
    CHECK(poly_bound(1, 0, 7) == 2);
}

TEST_CASE("the codeword table is prefix-free and complete") {
    std::vector<std::string> words;
    for (Op op : {Op::Halt, Op::Out, Op::Push, Op::Jnz, Op::Dup, Op::Drop})
        words.push_back(codeword(op));
    for (Head h : {Head::Apply, Head::Nat, Head::Rho, Head::Poly, Head::StarStar,
                   Head::Pi, Head::T, Head::Sm, Head::Sum, Head::Star})
        words.push_back(codeword(h));
    REQUIRE(words.size() == 16);
    for (const auto& a : words)
        for (const auto& b : words)
            if (a != b) REQUIRE(b.rfind(a, 0) != 0); // a is not a prefix of b
    Dyadic kraft;
    for (const auto& w : words) kraft += Dyadic::pow2_inv(unsigned(w.size()));
    REQUIRE(kraft == Dyadic::one());
}

TEST_CASE("parser is total on long random strings") {
    std::mt19937_64 rng(424242);
    for (int i = 0; i < 2000; ++i) {
        unsigned len = 1 + unsigned(rng() % 250);
        BitStr s;
        for (unsigned j = 0; j < len; ++j) s.push_back(rng() & 1);
        ParsedForm f = try_decompose(s);
        if (f.valid()) REQUIRE(encode_form(f) == s);
    }
}

TEST_CASE("published constants match the golden file") {
    std::ifstream golden(SUBREC_GOLDEN_DIR "/language_constants.txt");
    REQUIRE(golden.good());
    std::stringstream buf;
    buf << golden.rdbuf();
    CHECK(constants_text() == buf.str());
    CHECK(language_fingerprint().size() == 16);
}
