// Acceptance suite: one pass/fail line per criterion, exit 0 only if all
// pass.  Every tolerance is pinned here; all comparisons are exact.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <unistd.h>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_set>
#include <vector>

#include "subrec/subrec.hpp"

using namespace subrec;
using Clock = std::chrono::steady_clock;

namespace {

int g_failures = 0;

struct Criterion {
    const char* name;
    double limit_seconds; // 0: no stated limit
    Clock::time_point started = Clock::now();
    std::string detail;
    bool ok = true;

    explicit Criterion(const char* n, double limit = 0) : name(n), limit_seconds(limit) {}

    void expect(bool cond, const std::string& what) {
        if (!cond) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += what;
        }
    }

    void finish() {
        double secs = std::chrono::duration<double>(Clock::now() - started).count();
        if (limit_seconds > 0 && secs > limit_seconds) {
            ok = false;
            if (!detail.empty()) detail += "; ";
            detail += "runtime limit exceeded";
        }
        std::printf("[%s] %s (%.1fs%s%s)\n", ok ? "PASS" : "FAIL", name, secs,
                    detail.empty() ? "" : ": ", detail.c_str());
        std::fflush(stdout);
        if (!ok) ++g_failures;
    }
};

std::filesystem::path temp_dir(const char* tag) {
    auto p = std::filesystem::temp_directory_path() /
             (std::string("subrec_acceptance_") + tag + "_" + std::to_string(::getpid()));
    std::filesystem::remove_all(p);
    std::filesystem::create_directories(p);
    return p;
}

bool files_identical(const std::filesystem::path& a, const std::filesystem::path& b) {
    std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
    if (!fa || !fb) return false;
    std::ostringstream sa, sb;
    sa << fa.rdbuf();
    sb << fb.rdbuf();
    return sa.str() == sb.str();
}

unsigned max_workers() {
    unsigned n = std::thread::hardware_concurrency();
    return n == 0 ? 2 : n;
}

// 1. Codec laws: prefix-freeness and round-trip over all strings up to 16
//    bits, the apply size law with the published constant, and the
//    integer-code length bound up to 10^6.
void criterion_codec() {
    Criterion c("criterion 1: codec laws (exhaustive <= 16 bits)", 60);

    std::unordered_set<BitStr, BitStrHash> valid;
    for (unsigned len = 1; len <= 16; ++len)
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
            BitStr s = BitStr::from_value(v, len);
            ParsedForm f = try_decompose(s);
            if (!f.valid()) continue;
            if (!(encode_form(f) == s)) {
                c.expect(false, "round-trip failed at " + s.str());
                break;
            }
            valid.insert(s);
        }
    c.expect(!valid.empty(), "no valid programs found");
    for (const auto& p : valid) {
        for (std::size_t cut = 1; cut < p.size(); ++cut)
            if (valid.count(p.slice(0, cut))) {
                c.expect(false, "prefix violation at " + p.str());
                cut = p.size();
            }
    }

    // apply size law |P o w1 o ... o wk| <= C*k + |P| + sum |wi|
    std::vector<BitStr> heads = {BitStr::from_string("0"), nat_term(3),
                                 BitStr::from_string("100110110")};
    std::vector<BitStr> args = {BitStr::from_string("0"), nat_term(0), nat_term(12),
                                rho_term(Dyadic::from_mantissa(BitStr::from_string("01")))};
    for (const auto& h : heads)
        for (std::size_t k = 0; k <= args.size(); ++k) {
            std::vector<BitStr> use(args.begin(), args.begin() + k);
            BitStr composed = encode_apply(h, use);
            std::size_t sum = h.size();
            for (const auto& a : use) sum += a.size();
            c.expect(composed.size() <= kApplyOverhead * k + sum, "apply size law");
            for (const auto& a : use)
                c.expect(a.size() < composed.size(), "sub-part size law");
            ParsedForm f = try_decompose(composed);
            c.expect(f.valid() && encode_form(f) == composed, "apply round-trip");
        }

    // integer-code bound |code(n)| <= C' + log2 n + (1+eps) log2 log2 n
    for (std::uint64_t n = 2; n <= 1000000; ++n) {
        double bound = kNatCodeC + std::log2(double(n)) +
                       (1.0 + kNatCodeEps) * std::log2(std::log2(double(n)));
        if (double(encode_nat(n).size()) > bound) {
            c.expect(false, "nat-code bound failed at n=" + std::to_string(n));
            break;
        }
    }
    c.finish();
}

// 2 + 4. Submachine totality and shift law for every string up to 18 bits
//        under poly:2,1 and poly:1,2, plus the BB+ identity and
//        monotonicity over the same horizon.
void criterion_submachine_and_bb() {
    Criterion c("criterion 2: submachine totality and shift law (<= 18 bits)", 300);
    Machine::Config cfg;
    cfg.poly_horizon = 18;
    Machine m(cfg);
    for (const TimeFn& tf : {TimeFn::poly(2, 1), TimeFn::poly(1, 2)}) {
        for (unsigned len = 1; len <= 18 && c.ok; ++len)
            for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
                BitStr w = BitStr::from_value(v, len);
                std::uint64_t tb = m.time_bound(tf, w);
                RunOutcome o = m.run(w, StepBudget::with_fuel(tb));
                std::uint64_t want =
                    halted(o) ? index_of(std::get<Halted>(o).output) : 0;
                if (m.eval_sub_numeric(tf, w) != want) {
                    c.expect(false, tf.id() + " shift law failed at " + w.str());
                    break;
                }
            }
    }
    c.finish();

    Criterion c4("criterion 4: BB+ identity and monotone BB (<= 18)", 0);
    for (const TimeFn& tf : {TimeFn::poly(2, 1), TimeFn::poly(1, 2)}) {
        std::uint64_t prev = 0;
        for (unsigned n = 0; n <= 18; ++n) {
            std::uint64_t v = m.bb(tf, n);
            c4.expect(m.bb_plus(tf, n) == v + 1, "bb_plus identity");
            c4.expect(v >= prev, "bb monotonicity");
            prev = v;
        }
    }
    c4.finish();
}

// 3. Omega properties: zero at level 0, monotone, strictly below 1, and
//    exact equality between the parallel cached pipeline and the
//    single-threaded oracle for all levels up to 16, both poly families.
void criterion_omega() {
    Criterion c("criterion 3: Omega properties and oracle equality (<= 16)", 600);
    auto dir = temp_dir("omega");
    for (const TimeFn& tf : {TimeFn::poly(2, 1), TimeFn::poly(1, 2)}) {
        Machine pipeline;
        DiskCache cache(dir);
        sweep(pipeline, tf, 16, max_workers(), &cache);

        c.expect(pipeline.psum(tf, 0).is_zero(), "psum(0) != 0");
        Dyadic prev;
        for (unsigned n = 1; n <= 16; ++n) {
            Dyadic v = pipeline.psum(tf, n);
            c.expect(v >= prev, "psum not monotone");
            c.expect(v < Dyadic::one(), "psum reached 1");
            prev = v;
        }

        OracleReport rep = oracle_check(pipeline, tf, 16);
        c.expect(rep.pass, tf.id() + " oracle: " + rep.detail);

        // a second machine fed purely from the cache agrees bit-exactly
        Machine cached;
        DiskCache cache2(dir);
        sweep(cached, tf, 16, 1, &cache2);
        for (unsigned n = 1; n <= 16; ++n)
            c.expect(cached.psum(tf, n) == pipeline.psum(tf, n),
                     "cached psum mismatch");
    }
    std::filesystem::remove_all(dir);
    c.finish();
}

// 5. Sub-incompressibility, exhaustively to 16, and strict dominance for
//    the documented adversary family within the horizon.
void criterion_incompressibility_and_dominance() {
    Criterion c("criterion 5: sub-incompressibility (<= 16) and strict dominance", 0);
    TimeFn tf = TimeFn::poly(2, 1);
    Machine::Config cfg;
    cfg.poly_horizon = 22;
    Machine m(cfg);
    sweep(m, tf, 22, max_workers());

    for (unsigned n = 1; n <= 16; ++n) {
        std::uint64_t bbp = m.bb_plus(tf, n);
        for (unsigned s = 1; s <= n; ++s)
            for (const auto& rec : m.get_stratum(tf, s)->records) {
                std::uint64_t numeric = rec.halted_in_bound ? rec.output_index : 0;
                if (numeric >= bbp) {
                    c.expect(false, "program " + rec.program.str() +
                                        " reaches BB+ at level " + std::to_string(n));
                    s = n;
                    break;
                }
            }
    }

    auto rows = dominance_check(m, tf, 22);
    std::string n0s;
    for (const auto& row : rows) {
        c.expect(row.dominated, row.name + " not dominated within the horizon");
        n0s += row.name + " n0=" + std::to_string(row.n0) + " ";
    }
    c.detail = n0s;
    c.finish();
}

// 6. pi' consistency against psum for both poly families and the
//    diagonal, with the rho = 0 and rho = 1 endpoints.
void criterion_pi_omega() {
    Criterion c("criterion 6: pi' consistency (<= 14)", 0);
    Machine m;
    TimeFn fams[] = {TimeFn::poly(2, 1), TimeFn::poly(1, 2),
                     TimeFn::diagonal(TimeFn::poly(2, 1))};
    for (const TimeFn& tf : fams) {
        unsigned guard = m.horizon(tf);
        auto zero = m.pi_omega(tf, Dyadic::zero(), guard);
        c.expect(zero && *zero == 0, tf.id() + ": rho=0 must answer 0");
        c.expect(!m.pi_omega(tf, Dyadic::one(), guard).has_value(),
                 tf.id() + ": rho=1 must diverge");
        for (unsigned n = 1; n <= 14; ++n) {
            auto got = m.pi_omega(tf, m.psum(tf, n), guard);
            if (!(got && *got == m.bb_plus(tf, n))) {
                c.expect(false, tf.id() + " mismatch at level " + std::to_string(n));
                break;
            }
        }
    }
    c.finish();
}

// 7. Theorem: the diagonal time function is total; zero recursion-guard
//    violations over every valid program up to 14 bits.
void criterion_totality() {
    Criterion c("criterion 7: diagonal totality sweep (<= 14)", 1800);
    Machine::Config cfg;
    cfg.diag_horizon = 14;
    TotalityReport rep = verify_totality(TimeFn::poly(2, 1), 14, cfg);
    c.expect(rep.pass, rep.failure);
    c.expect(rep.guard_violations == 0, "guard violations");
    c.detail = "programs=" + std::to_string(rep.programs) +
               " max_depth=" + std::to_string(rep.max_depth);
    c.finish();
}

// 8. Theorem: for every level 1..8 the constructed witness computes
//    exactly BB+ on the diagonal submachine, within [N+1, 2N+C] for one
//    measured C.
void criterion_witness() {
    Criterion c("criterion 8: diagonal witness levels 1..8", 0);
    Machine m;
    TimeFn inner = TimeFn::poly(2, 1);
    long long measured_c = 0;
    std::vector<WitnessReport> reports;
    for (unsigned n = 1; n <= 8; ++n) {
        WitnessReport rep = build_witness(m, inner, n);
        c.expect(rep.pass, "witness failed at level " + std::to_string(n));
        c.expect(rep.output == rep.expected,
                 "output != bb_plus at level " + std::to_string(n));
        c.expect(rep.witness_size >= n + 1, "witness too small");
        measured_c = std::max(measured_c, rep.size_bound_constant);
        reports.push_back(rep);
    }
    for (const auto& rep : reports)
        c.expect((long long)rep.witness_size <= 2ll * rep.level + measured_c,
                 "single-C bound failed");
    c.detail = "measured C=" + std::to_string(measured_c);
    c.finish();
}

// 9. Extension law: the diagonal bound dominates the inner bound on every
//    swept string, and psum over the diagonal dominates psum over the
//    inner at every level up to 14.
void criterion_extension() {
    Criterion c("criterion 9: extension law (<= 14)", 0);
    Machine m;
    TimeFn inner = TimeFn::poly(2, 1);
    TimeFn diag = TimeFn::diagonal(inner);
    for (unsigned len = 1; len <= 14 && c.ok; ++len)
        for (std::uint64_t v = 0; v < (std::uint64_t{1} << len); ++v) {
            BitStr w = BitStr::from_value(v, len);
            if (m.time_bound(diag, w) < m.time_bound(inner, w)) {
                c.expect(false, "restriction at " + w.str());
                break;
            }
        }
    for (unsigned n = 1; n <= 14; ++n)
        c.expect(m.psum(diag, n) >= m.psum(inner, n),
                 "psum restriction at level " + std::to_string(n));
    c.finish();
}

// 10. Determinism: one worker versus all workers yields byte-identical
//     artifacts, and repeated pipeline runs reproduce identical reports.
void criterion_determinism() {
    Criterion c("criterion 10: schedule determinism and reproducibility", 0);
    TimeFn tf = TimeFn::poly(2, 1);

    auto dir1 = temp_dir("det1"), dir2 = temp_dir("det2");
    {
        Machine a, b;
        DiskCache ca(dir1), cb(dir2);
        sweep(a, tf, 12, 1, &ca);
        sweep(b, tf, 12, max_workers(), &cb);
    }
    for (unsigned n = 1; n <= 12; ++n) {
        auto name = "rec_" + DiskCache::sanitize(tf.id()) + "_" + std::to_string(n) +
                    ".bin";
        c.expect(files_identical(dir1 / name, dir2 / name),
                 "stratum file differs at size " + std::to_string(n));
    }
    c.expect(files_identical(dir1 / "manifest.json", dir2 / "manifest.json"),
             "manifest differs");
    std::filesystem::remove_all(dir1);
    std::filesystem::remove_all(dir2);

    // repeated pipeline runs: identical witness and dominance reports
    auto make_reports = [&tf]() {
        Machine m;
        nlohmann::json j = nlohmann::json::array();
        for (unsigned n = 1; n <= 6; ++n)
            j.push_back(witness_json(build_witness(m, TimeFn::poly(2, 1), n)));
        for (const auto& row : dominance_check(m, tf, 14))
            j.push_back({{"adversary", row.name},
                         {"dominated", row.dominated},
                         {"n0", row.n0}});
        return j.dump(2);
    };
    std::string r1 = make_reports();
    std::string r2 = make_reports();
    c.expect(r1 == r2, "repeated pipeline reports differ");
    c.finish();
}

} // namespace

int main() {
    std::printf("acceptance suite: language %s, %s\n", kLanguageVersion,
                kCostScheduleVersion);
    criterion_codec();
    criterion_submachine_and_bb();
    criterion_omega();
    criterion_incompressibility_and_dominance();
    criterion_pi_omega();
    criterion_totality();
    criterion_witness();
    criterion_extension();
    criterion_determinism();
    if (g_failures == 0) {
        std::printf("all criteria passed\n");
        return 0;
    }
    std::printf("%d criteria failed\n", g_failures);
    return 1;
}
