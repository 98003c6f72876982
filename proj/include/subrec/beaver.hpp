#pragma once
// BB and BB+ over a submachine, the pi' procedure that turns a lower
// Omega approximation into a BB+ value, shortest-program search, and the
// fixed adversary family for the strict-dominance suite.

#include <string>
#include <vector>

#include <json.hpp>

#include "subrec/submachine.hpp"
#include "subrec/vm.hpp"

namespace subrec {

struct BBRecord {
    unsigned level = 0;
    std::uint64_t bb = 0;
    std::uint64_t bb_plus = 0;
    BitStr witness; // a program of size <= level attaining bb, when bb > 0
};

inline std::uint64_t bb(Machine& m, const TimeFn& tf, unsigned n) { return m.bb(tf, n); }
inline std::uint64_t bb_plus(Machine& m, const TimeFn& tf, unsigned n) {
    return m.bb_plus(tf, n);
}
inline BitStr bb_witness(Machine& m, const TimeFn& tf, unsigned n) {
    return m.bb_witness(tf, n);
}

inline std::vector<BBRecord> bb_table(Machine& m, const TimeFn& tf, unsigned n_max) {
    std::vector<BBRecord> rows;
    for (unsigned n = 0; n <= n_max; ++n) {
        BBRecord r;
        r.level = n;
        r.bb = m.bb(tf, n);
        r.bb_plus = r.bb + 1;
        if (r.bb > 0) r.witness = m.bb_witness(tf, n);
        rows.push_back(std::move(r));
    }
    return rows;
}

inline std::string bb_table_csv(const std::vector<BBRecord>& rows) {
    std::string out = "level,bb,bb_plus,witness_bits,witness_size\n";
    for (const auto& r : rows) {
        out += std::to_string(r.level) + "," + std::to_string(r.bb) + "," +
               std::to_string(r.bb_plus) + "," + r.witness.str() + "," +
               std::to_string(r.witness.size()) + "\n";
    }
    return out;
}

inline nlohmann::json bb_table_json(const std::vector<BBRecord>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
        j.push_back({{"level", r.level},
                     {"bb", r.bb},
                     {"bb_plus", r.bb_plus},
                     {"witness_bits", r.witness.str()},
                     {"witness_size", r.witness.size()}});
    }
    return j;
}

struct PiOmegaResult {
    bool diverged = false;
    std::uint64_t value = 0; // BB+ value when halted, else the guard
    unsigned guard = 0;
};

/// rho = 0 answers 0.  Otherwise the minimal k <= guard with
/// psum(tf, k) >= rho yields bb(tf, k) + 1; no such k reports guarded
/// divergence as a value, not an exception.
inline PiOmegaResult pi_omega(Machine& m, const TimeFn& tf, const Dyadic& rho,
                              unsigned guard) {
    auto r = m.pi_omega(tf, rho, guard);
    if (!r) return {true, guard, guard};
    return {false, *r, guard};
}

struct SubComplexityResult {
    bool found = false;
    unsigned size = 0;  // size of the shortest program reaching the target
    unsigned bound = 0; // searched sizes 1..bound
};

/// Shortlex search for the shortest program with submachine numeric equal
/// to target.
inline SubComplexityResult sub_complexity(Machine& m, const TimeFn& tf,
                                          std::uint64_t target, unsigned bound) {
    auto r = m.sub_complexity(tf, target, bound);
    if (!r) return {false, 0, bound};
    return {true, *r, bound};
}

// ------------------------------------------------------------------
// Strict-dominance adversaries
// ------------------------------------------------------------------

struct Adversary {
    std::string name;
    BitStr program;
};

/// The fixed, documented adversary family run as P o N.  Base programs
/// see literal arguments decoded, so echo answers l_{N+1} itself.
inline std::vector<Adversary> adversary_family() {
    return {
        // out jnz(1) halt: copies its input
        {"identity-echo", BitStr::from_string("100110110")},
        // dup out out jnz(3) halt: emits every input bit twice
        {"doubler", BitStr::from_string("111010100100110101010")},
        // push1 out halt: constant "1"
        {"constant-emitter", BitStr::from_string("110011000")},
        // push0 push1 out jnz(1) halt: emits "10" then its input
        {"prefixed-encoder", BitStr::from_string("1100011001100110110")},
    };
}

struct DominanceRow {
    std::string name;
    bool dominated = false; // some n0 <= horizon works through the horizon
    unsigned n0 = 0;
    std::vector<std::uint64_t> outputs; // adversary numeric at each level
};

/// For each adversary P: the minimal N0 with
/// eval_sub(tf, P o N).numeric < bb_plus(tf, N) for all N in [N0, horizon].
inline std::vector<DominanceRow> dominance_check(Machine& m, const TimeFn& tf,
                                                 unsigned horizon) {
    std::vector<std::uint64_t> bbp(horizon + 1, 0);
    for (unsigned n = 1; n <= horizon; ++n) bbp[n] = m.bb_plus(tf, n);
    std::vector<DominanceRow> rows;
    for (const auto& adv : adversary_family()) {
        DominanceRow row;
        row.name = adv.name;
        row.outputs.resize(horizon + 1, 0);
        unsigned last_violation = 0;
        for (unsigned n = 1; n <= horizon; ++n) {
            BitStr w = encode_apply(adv.program, {nat_term(n)});
            row.outputs[n] = m.eval_sub_numeric(tf, w);
            if (row.outputs[n] >= bbp[n]) last_violation = n;
        }
        row.n0 = last_violation + 1;
        row.dominated = row.n0 <= horizon;
        rows.push_back(std::move(row));
    }
    return rows;
}

} // namespace subrec
