#pragma once
// The universal machine U: a deterministic, step-counted interpreter for
// the language L, with fuel-bounded execution and the reserved heads
// (t, p_sm, p_sum, pi', p*, p**) evaluated by structural recursion.
//
// Cost schedule (cost-schedule-v1, frozen; any fixed deterministic
// schedule preserves the verified properties, but it must not move):
//   invalid string                      1 step, output l_1
//   nat / rho / poly literal, bare head 1 step
//   base program                        1 step per instruction executed
//   applied literal or shape mismatch   1 step, output l_1
//   poly(c,k) applied to w              2 steps, output l_{fuel+1}
//   t o p                               2 + steps(U(p))
//   p_sm o tf o w                       3 + steps(U(tf o w)) + executed(w)
//   p_sum o tf o N                      2 + sum of level charges 1..N
//   pi' o tf o rho                      2 (rho = 0), else
//                                       2 + sum over levels 1..k of
//                                       (level charge + 1)
//   p* / p**                            1 + decision work (see code)
//   level charge at size n: per valid program p of size n,
//     1 + executed(p) + (1 if p halted in bound), where executed(p) is
//     its step count if it halted within its bound, else the bound.
//   Stratum construction itself is never charged: charges are a pure
//   function of the records, so cached and fresh runs cost the same.
//
// Conventions (frozen): a run whose output buffer is empty yields l_1;
// invalid parses halt with output l_1 in one step; every run costs at
// least one step, so only the empty computation fits in Fuel(0).

#include <algorithm>
#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <ostream>
#include <string>
#include <unordered_map>
#include <utility>
#include <variant>
#include <vector>

#include "subrec/bitstr.hpp"
#include "subrec/codec.hpp"
#include "subrec/dyadic.hpp"
#include "subrec/timefn.hpp"

namespace subrec {

struct StepBudget {
    bool bounded = false;
    std::uint64_t fuel = 0;

    static StepBudget unbounded() { return {}; }
    static StepBudget with_fuel(std::uint64_t f) { return {true, f}; }
};

struct Halted {
    BitStr output;
    std::uint64_t steps = 0;
};

struct Exhausted {
    std::uint64_t fuel = 0;
};

using RunOutcome = std::variant<Halted, Exhausted>;

inline bool halted(const RunOutcome& o) { return std::holds_alternative<Halted>(o); }

/// One enumerated program under one time function.  steps is the executed
/// count: the run's own steps when it halted within bound, else the bound.
struct RunRecord {
    BitStr program;
    std::uint64_t bound = 0;
    bool halted_in_bound = false;
    std::uint64_t output_index = 0; // index_of(raw output) when halted
    std::uint64_t steps = 0;
};

/// Everything known about the valid programs of one size under one time
/// function.  Records are in shortlex order.
struct Stratum {
    std::vector<RunRecord> records;
    Dyadic mass;                  // sum of 2^-size over halting records
    std::uint64_t max_numeric = 0; // max output_index over halting records
    BitStr argmax;                 // first program attaining max_numeric
};

/// pi'-form match: w parses as pi' o tf o rho-term with the expected tf.
struct FormMatch {
    bool matched = false;
    Dyadic rho;
    std::size_t rho_block_width = 0;
};

class Machine {
public:
    struct Config {
        unsigned poly_horizon = 20;
        unsigned diag_horizon = 16;
        bool memoize = true;
    };

    struct DiagStats {
        std::uint64_t fresh_evals = 0;
        unsigned max_depth = 0;
        std::uint64_t guard_violations = 0;
    };

    Machine() = default;
    explicit Machine(const Config& cfg) : cfg_(cfg) {}

    const Config& config() const { return cfg_; }

    unsigned horizon(const TimeFn& tf) const {
        return tf.is_diagonal() ? cfg_.diag_horizon : cfg_.poly_horizon;
    }

    // --------------------------------------------------------------
    // vm: run / run_steps
    // --------------------------------------------------------------

    RunOutcome run(const BitStr& w, StepBudget budget, std::ostream* trace = nullptr) {
        if (!trace) {
            if (auto hit = memo_lookup(w)) {
                if (!budget.bounded || hit->second <= budget.fuel)
                    return Halted{hit->first, hit->second};
                return Exhausted{budget.fuel};
            }
        }
        Meter m;
        m.bounded = budget.bounded;
        m.limit = budget.fuel;
        m.trace = trace;
        try {
            BitStr out = eval_string(w, m);
            return Halted{out, m.used};
        } catch (fuel_exhausted&) {
            return Exhausted{budget.fuel};
        }
    }

    struct StepsReport {
        bool halted = false;
        std::uint64_t value = 0; // steps when halted, else the guard
    };

    /// Steps of U(w), guarded: a non-halting w reports guard exhaustion
    /// explicitly rather than a silent value.
    StepsReport run_steps(const BitStr& w, std::uint64_t guard) {
        RunOutcome o = run(w, StepBudget::with_fuel(guard));
        if (auto* h = std::get_if<Halted>(&o)) return {true, h->steps};
        return {false, guard};
    }

    // --------------------------------------------------------------
    // submachine: time bounds and U_{P_T} evaluation
    // --------------------------------------------------------------

    std::uint64_t time_bound(const TimeFn& tf, const BitStr& w) {
        if (!tf.is_diagonal()) return poly_bound(tf.c, tf.k, w.size());
        Meter m; // unbounded
        return p_star_star_metered(tf.inner(), w, m);
    }

    /// num(U_{tf}(w)): 0 when w does not halt within its bound, else
    /// index_of(U(w)) (the submachine answers l_{k+1} for U(w) = l_k).
    std::uint64_t eval_sub_numeric(const TimeFn& tf, const BitStr& w) {
        std::uint64_t bound = time_bound(tf, w);
        RunOutcome o = run(w, StepBudget::with_fuel(bound));
        if (auto* h = std::get_if<Halted>(&o)) return index_of(h->output);
        return 0;
    }

    // --------------------------------------------------------------
    // omega: exact partial sums of the halting probability
    // --------------------------------------------------------------

    Dyadic psum(const TimeFn& tf, unsigned n_max) {
        check_horizon(tf, n_max);
        Dyadic acc;
        for (unsigned n = 1; n <= n_max; ++n) acc += get_stratum(tf, n)->mass;
        return acc;
    }

    // --------------------------------------------------------------
    // beaver: BB, BB+, pi' and shortest-program search
    // --------------------------------------------------------------

    std::uint64_t bb(const TimeFn& tf, unsigned n_max) {
        check_horizon(tf, n_max);
        std::uint64_t best = 0;
        for (unsigned n = 1; n <= n_max; ++n)
            best = std::max(best, get_stratum(tf, n)->max_numeric);
        return best;
    }

    std::uint64_t bb_plus(const TimeFn& tf, unsigned n_max) { return bb(tf, n_max) + 1; }

    /// First shortlex program attaining bb(tf, n_max); empty when bb = 0.
    BitStr bb_witness(const TimeFn& tf, unsigned n_max) {
        std::uint64_t best = bb(tf, n_max);
        if (best == 0) return BitStr();
        for (unsigned n = 1; n <= n_max; ++n) {
            auto st = get_stratum(tf, n);
            if (st->max_numeric == best) return st->argmax;
        }
        return BitStr();
    }

    /// Minimal k <= guard with psum(tf, k) >= rho, mapped to bb(tf,k)+1.
    /// rho = 0 answers 0; nullopt means diverged-up-to-guard.
    std::optional<std::uint64_t> pi_omega(const TimeFn& tf, const Dyadic& rho,
                                          unsigned guard) {
        if (rho.is_zero()) return 0;
        Dyadic acc;
        for (unsigned k = 1; k <= guard; ++k) {
            check_horizon(tf, k);
            acc += get_stratum(tf, k)->mass;
            if (acc >= rho) return bb(tf, k) + 1;
        }
        return std::nullopt;
    }

    /// Size of the shortest valid program whose submachine numeric equals
    /// target, in shortlex order; nullopt when none exists within bound.
    std::optional<unsigned> sub_complexity(const TimeFn& tf, std::uint64_t target,
                                           unsigned bound) {
        check_horizon(tf, bound);
        for (unsigned n = 1; n <= bound; ++n) {
            auto st = get_stratum(tf, n);
            for (const auto& rec : st->records) {
                std::uint64_t numeric = rec.halted_in_bound ? rec.output_index : 0;
                if (numeric == target) return n;
            }
        }
        return std::nullopt;
    }

    // --------------------------------------------------------------
    // diagonal: P* and the self-referential P**
    // --------------------------------------------------------------

    std::uint64_t p_star_time(const TimeFn& outer, const TimeFn& inner, const BitStr& w) {
        Meter m;
        return p_star_value_metered(outer, inner, w, m);
    }

    std::uint64_t p_star_star_time(const TimeFn& inner, const BitStr& w) {
        Meter m;
        return p_star_star_metered(inner, w, m);
    }

    FormMatch match_pi_form(const BitStr& w, const TimeFn& expected_tf) {
        return match_pi_form(try_decompose(w), expected_tf);
    }

    FormMatch match_pi_form(const ParsedForm& f, const TimeFn& expected_tf) {
        FormMatch r;
        if (f.kind != ParsedForm::Kind::Apply || f.args.size() != 2) return r;
        if (f.head_form->kind != ParsedForm::Kind::Primitive ||
            f.head_form->head != Head::Pi)
            return r;
        if (!(f.args[0] == expected_tf.program())) return r;
        ParsedForm rho = try_decompose(f.args[1]);
        if (rho.kind != ParsedForm::Kind::Primitive || rho.head != Head::Rho) return r;
        r.matched = true;
        r.rho = Dyadic::from_mantissa(rho.rho_mantissa);
        r.rho_block_width = rho.rho_mantissa.size();
        return r;
    }

    void reset_diag_stats() {
        std::lock_guard lk(stats_mu_);
        diag_stats_ = DiagStats{};
    }

    DiagStats diag_stats() const {
        std::lock_guard lk(stats_mu_);
        return diag_stats_;
    }

    // --------------------------------------------------------------
    // strata access (enumeration machinery)
    // --------------------------------------------------------------

    bool has_stratum(const TimeFn& tf, unsigned size) const {
        std::lock_guard lk(strata_mu_);
        return strata_.count({tf.id(), size}) != 0;
    }

    std::shared_ptr<const Stratum> get_stratum(const TimeFn& tf, unsigned size) {
        StratumKey key{tf.id(), size};
        {
            std::lock_guard lk(strata_mu_);
            auto it = strata_.find(key);
            if (it != strata_.end()) return it->second;
        }
        check_horizon(tf, size); // no silent enumeration past the horizon
        auto records = build_stratum_records(tf, size, 0, candidate_count(size));
        return install_stratum(tf, size, std::move(records));
    }

    /// Records for valid programs with value-counter in [from, to) at the
    /// given size.  Pure: safe to run from several workers; results are
    /// schedule-independent.
    std::vector<RunRecord> build_stratum_records(const TimeFn& tf, unsigned size,
                                                 std::uint64_t from, std::uint64_t to) {
        std::vector<RunRecord> out;
        for (std::uint64_t v = from; v < to; ++v) {
            BitStr s = BitStr::from_value(v, size);
            if (!is_valid_program(s)) continue;
            RunRecord rec;
            rec.program = s;
            rec.bound = time_bound(tf, s);
            RunOutcome o = run(s, StepBudget::with_fuel(rec.bound));
            if (auto* h = std::get_if<Halted>(&o)) {
                rec.halted_in_bound = true;
                rec.output_index = index_of(h->output);
                rec.steps = h->steps;
            } else {
                rec.halted_in_bound = false;
                rec.output_index = 0;
                rec.steps = rec.bound;
            }
            out.push_back(std::move(rec));
        }
        return out;
    }

    std::shared_ptr<const Stratum> install_stratum(const TimeFn& tf, unsigned size,
                                                   std::vector<RunRecord> records) {
        auto st = std::make_shared<Stratum>();
        st->records = std::move(records);
        for (const auto& rec : st->records) {
            if (!rec.halted_in_bound) continue;
            st->mass += Dyadic::pow2_inv(size);
            if (rec.output_index > st->max_numeric) {
                st->max_numeric = rec.output_index;
                st->argmax = rec.program;
            }
        }
        std::lock_guard lk(strata_mu_);
        auto [it, inserted] = strata_.emplace(StratumKey{tf.id(), size}, st);
        return it->second;
    }

    static std::uint64_t candidate_count(unsigned size) {
        return std::uint64_t{1} << size;
    }

    std::size_t memo_entries() const {
        std::lock_guard lk(memo_mu_);
        return halting_memo_.size();
    }

private:
    struct fuel_exhausted {};

    struct Meter {
        std::uint64_t used = 0;
        bool bounded = false;
        std::uint64_t limit = 0;
        std::ostream* trace = nullptr;

        void charge(std::uint64_t n) {
            std::uint64_t next = used + n;
            if (next < used) throw capacity_error("step counter overflow");
            used = next;
            if (bounded && used > limit) throw fuel_exhausted{};
        }
    };

    // ---- evaluation core ------------------------------------------------

    BitStr eval_string(const BitStr& w, Meter& m) {
        if (cfg_.memoize) {
            if (auto hit = memo_lookup(w)) {
                m.charge(hit->second);
                return hit->first;
            }
        }
        ParsedForm f = try_decompose(w);
        std::uint64_t t0 = m.used;
        BitStr out = eval_form(f, m);
        if (cfg_.memoize && f.kind == ParsedForm::Kind::Apply)
            memo_insert(w, out, m.used - t0);
        return out;
    }

    BitStr eval_form(const ParsedForm& f, Meter& m) {
        BitStr out = eval_form_raw(f, m);
        if (out.empty()) out = nth_string(1); // empty output reads as l_1
        return out;
    }

    BitStr eval_form_raw(const ParsedForm& f, Meter& m) {
        switch (f.kind) {
        case ParsedForm::Kind::Invalid:
            m.charge(1);
            return nth_string(1);
        case ParsedForm::Kind::Base:
            return run_base(f.code, BitStr(), m);
        case ParsedForm::Kind::Primitive:
            m.charge(1);
            if (f.head == Head::Nat) return nth_string(f.nat + 1);
            if (f.head == Head::Rho) return f.rho_mantissa;
            return BitStr(); // poly literal / bare head: l_1
        case ParsedForm::Kind::Apply:
            return eval_apply(f, m);
        }
        return BitStr();
    }

    /// Input a base program sees: literal arguments arrive decoded (nat to
    /// its string l_{n+1}, rho to its written mantissa); program arguments
    /// arrive as their own bits.
    BitStr value_string(const BitStr& arg) const {
        ParsedForm f = try_decompose(arg);
        if (f.kind == ParsedForm::Kind::Primitive) {
            if (f.head == Head::Nat) return nth_string(f.nat + 1);
            if (f.head == Head::Rho) return f.rho_mantissa;
        }
        return arg;
    }

    BitStr run_base(const std::vector<Instr>& code, const BitStr& input, Meter& m) {
        std::vector<std::uint8_t> stack;
        stack.reserve(input.size());
        for (std::size_t i = input.size(); i-- > 0;)
            stack.push_back(input.bit(i)); // first input bit on top
        std::string out;
        std::size_t ip = 0;
        for (;;) {
            const Instr& ins = code[ip];
            m.charge(1);
            if (m.trace)
                *m.trace << m.used << " op:" << static_cast<int>(ins.op)
                         << " stack:" << stack.size() << "\n";
            bool jumped = false;
            switch (ins.op) {
            case Op::Halt: {
                BitStr r;
                if (out.size() > BitStr::max_bits)
                    throw capacity_error("output too long to enumerate");
                for (char c : out) r.push_back(c == '1');
                return r;
            }
            case Op::Out:
                if (!stack.empty()) {
                    out.push_back(stack.back() ? '1' : '0');
                    stack.pop_back();
                }
                break;
            case Op::Push:
                stack.push_back(ins.push_bit ? 1 : 0);
                break;
            case Op::Dup:
                if (!stack.empty()) stack.push_back(stack.back());
                break;
            case Op::Drop:
                if (!stack.empty()) stack.pop_back();
                break;
            case Op::Jnz:
                if (!stack.empty()) {
                    ip -= ins.jnz_back;
                    jumped = true;
                }
                break;
            }
            if (!jumped) ++ip;
        }
    }

    BitStr eval_apply(const ParsedForm& f, Meter& m) {
        const ParsedForm& head = *f.head_form;
        if (head.kind == ParsedForm::Kind::Base) {
            BitStr input;
            for (const auto& a : f.args) input.append(value_string(a));
            return run_base(head.code, input, m);
        }
        // head.kind == Primitive (flattening leaves no Apply heads)
        if (m.trace) *m.trace << m.used + 1 << " head:" << head_name(head.head) << "\n";
        switch (head.head) {
        case Head::Nat:
        case Head::Rho:
        case Head::Apply:
            m.charge(1);
            return BitStr(); // applied literal: l_1

        case Head::Poly: {
            if (f.args.size() != 1) { m.charge(1); return BitStr(); }
            std::uint64_t fuel = 0;
            if (!poly_bound_checked(head.nat, head.nat2, f.args[0].size(), fuel)) {
                m.charge(1); // unrepresentable value: l_1 convention
                return BitStr();
            }
            m.charge(2);
            return nth_string(fuel + 1);
        }

        case Head::T: {
            if (f.args.size() != 1) { m.charge(1); return BitStr(); }
            m.charge(2);
            std::uint64_t t0 = m.used;
            (void)eval_string(f.args[0], m);
            std::uint64_t s = m.used - t0;
            return nth_string(s + 1);
        }

        case Head::Sm: {
            if (f.args.size() != 2) { m.charge(1); return BitStr(); }
            auto tf = parse_time_fn_term(f.args[0]);
            if (!tf) { m.charge(1); return BitStr(); }
            m.charge(2);
            std::uint64_t fuel = eval_timefn_value(*tf, f.args[1], m);
            m.charge(1);
            auto r = bounded_exec(f.args[1], fuel, m);
            if (!r) return nth_string(1);
            return nth_string(index_of(r->first) + 1); // l_k -> l_{k+1}
        }

        case Head::Sum: {
            if (f.args.size() != 2) { m.charge(1); return BitStr(); }
            auto tf = parse_time_fn_term(f.args[0]);
            ParsedForm narg = try_decompose(f.args[1]);
            if (!tf || narg.kind != ParsedForm::Kind::Primitive || narg.head != Head::Nat) {
                m.charge(1);
                return BitStr();
            }
            m.charge(1);
            Dyadic acc;
            for (std::uint64_t n = 1; n <= narg.nat; ++n) {
                check_horizon(*tf, n);
                auto st = get_stratum(*tf, static_cast<unsigned>(n));
                charge_level(*st, m);
                acc += st->mass;
            }
            m.charge(1);
            return acc.mantissa();
        }

        case Head::Pi: {
            if (f.args.size() != 2) { m.charge(1); return BitStr(); }
            auto tf = parse_time_fn_term(f.args[0]);
            ParsedForm rarg = try_decompose(f.args[1]);
            if (!tf || rarg.kind != ParsedForm::Kind::Primitive || rarg.head != Head::Rho) {
                m.charge(1);
                return BitStr();
            }
            m.charge(1);
            Dyadic rho = Dyadic::from_mantissa(rarg.rho_mantissa);
            if (rho.is_zero()) {
                m.charge(1);
                return nth_string(1); // returns 0
            }
            Dyadic acc;
            unsigned k = 0;
            for (unsigned n = 1;; ++n) {
                check_horizon(*tf, n); // desk-scale surrogate for divergence
                auto st = get_stratum(*tf, n);
                charge_level(*st, m);
                acc += st->mass;
                m.charge(1);
                if (acc >= rho) {
                    k = n;
                    break;
                }
            }
            std::uint64_t v = bb(*tf, k) + 1;
            m.charge(1);
            return nth_string(v + 1); // the string whose value is v
        }

        case Head::Star: {
            if (f.args.size() != 3) { m.charge(1); return BitStr(); }
            auto outer = parse_time_fn_term(f.args[0]);
            auto inner = parse_time_fn_term(f.args[1]);
            if (!outer || !inner) { m.charge(1); return BitStr(); }
            std::uint64_t v = p_star_value_metered(*outer, *inner, f.args[2], m);
            return nth_string(v + 1);
        }

        case Head::StarStar: {
            if (f.args.size() != 2) { m.charge(1); return BitStr(); }
            auto inner = parse_time_fn_term(f.args[0]);
            if (!inner) { m.charge(1); return BitStr(); }
            std::uint64_t v = p_star_star_metered(*inner, f.args[1], m);
            return nth_string(v + 1);
        }
        }
        m.charge(1);
        return BitStr();
    }

    /// Semantic fuel-bounded run of w, charging executed steps to m.
    /// Returns (output, steps) when w halts within fuel.
    std::optional<std::pair<BitStr, std::uint64_t>>
    bounded_exec(const BitStr& w, std::uint64_t fuel, Meter& m) {
        if (cfg_.memoize) {
            if (auto hit = memo_lookup(w)) {
                if (hit->second <= fuel) {
                    m.charge(hit->second);
                    return std::make_pair(hit->first, hit->second);
                }
                m.charge(fuel);
                return std::nullopt;
            }
        }
        Meter sub;
        sub.bounded = true;
        sub.limit = fuel;
        try {
            BitStr out = eval_string(w, sub);
            m.charge(sub.used);
            return std::make_pair(out, sub.used);
        } catch (fuel_exhausted&) {
            m.charge(fuel);
            return std::nullopt;
        }
    }

    void charge_level(const Stratum& st, Meter& m) {
        for (const auto& rec : st.records)
            m.charge(1 + rec.steps + (rec.halted_in_bound ? 1 : 0));
    }

    std::uint64_t eval_timefn_value(const TimeFn& tf, const BitStr& w, Meter& m) {
        if (!tf.is_diagonal()) {
            m.charge(2);
            return poly_bound(tf.c, tf.k, w.size());
        }
        return p_star_star_metered(tf.inner(), w, m);
    }

    /// True iff psum(tf, cutoff) >= rho, scanning levels 1.. and stopping
    /// as soon as the running sum reaches rho (monotonicity makes the
    /// early answer exact).  Undecidable within the horizon -> capacity.
    bool psum_reaches(const TimeFn& tf, const Dyadic& rho, std::size_t cutoff, Meter& m) {
        if (rho.is_zero()) return true;
        Dyadic acc;
        for (std::size_t n = 1; n <= cutoff; ++n) {
            check_horizon(tf, n);
            auto st = get_stratum(tf, static_cast<unsigned>(n));
            charge_level(*st, m);
            acc += st->mass;
            m.charge(1);
            if (acc >= rho) return true;
        }
        return false;
    }

    std::uint64_t p_star_value_metered(const TimeFn& outer, const TimeFn& inner,
                                       const BitStr& w, Meter& m) {
        m.charge(1);
        FormMatch mt = match_pi_form(w, outer);
        if (mt.matched && w.size() >= 1 &&
            psum_reaches(outer, mt.rho, w.size() - 1, m)) {
            m.charge(1);
            std::uint64_t t0 = m.used;
            (void)eval_string(w, m); // clause (i) certified this halts
            std::uint64_t s = m.used - t0;
            m.charge(1);
            std::uint64_t tb = eval_timefn_value(inner, w, m);
            return s > tb ? s : tb;
        }
        m.charge(1);
        return eval_timefn_value(inner, w, m);
    }

    struct GuardFrame {
        const Machine* machine;
        std::string id;
        std::size_t len;
    };

    static std::vector<GuardFrame>& guard_stack() {
        static thread_local std::vector<GuardFrame> stack;
        return stack;
    }

    std::uint64_t p_star_star_metered(const TimeFn& inner, const BitStr& w, Meter& m) {
        TimeFn diag = TimeFn::diagonal(inner);
        DiagKey key{diag.id(), w};
        if (cfg_.memoize) {
            std::lock_guard lk(diag_mu_);
            auto it = diag_memo_.find(key);
            if (it != diag_memo_.end()) {
                m.charge(it->second.second);
                return it->second.first;
            }
        }

        auto& stack = guard_stack();
        unsigned depth = 0;
        for (auto it = stack.rbegin(); it != stack.rend(); ++it) {
            if (it->machine != this || it->id != key.id) continue;
            ++depth;
            if (depth == 1 && w.size() >= it->len) {
                {
                    std::lock_guard lk(stats_mu_);
                    ++diag_stats_.guard_violations;
                }
                throw structural_error(
                    "diagonal recursion guard: evaluation of " + diag.id() +
                    " on a string of length " + std::to_string(w.size()) +
                    " nested inside length " + std::to_string(it->len));
            }
        }
        stack.push_back(GuardFrame{this, key.id, w.size()});
        {
            std::lock_guard lk(stats_mu_);
            ++diag_stats_.fresh_evals;
            diag_stats_.max_depth = std::max(diag_stats_.max_depth, depth);
        }

        std::uint64_t value = 0, cost = 0;
        try {
            std::uint64_t t0 = m.used;
            m.charge(1); // p** reads itself and delegates to p*
            value = p_star_value_metered(diag, inner, w, m);
            cost = m.used - t0;
        } catch (...) {
            stack.pop_back();
            throw;
        }
        stack.pop_back();
        if (cfg_.memoize) {
            std::lock_guard lk(diag_mu_);
            diag_memo_.emplace(key, std::make_pair(value, cost));
        }
        return value;
    }

    void check_horizon(const TimeFn& tf, std::uint64_t n) const {
        if (n > horizon(tf))
            throw capacity_error("enumeration horizon exceeded for " + tf.id() +
                                 " at size " + std::to_string(n));
    }

    // ---- memo ------------------------------------------------------------

    std::optional<std::pair<BitStr, std::uint64_t>> memo_lookup(const BitStr& w) const {
        std::lock_guard lk(memo_mu_);
        auto it = halting_memo_.find(w);
        if (it == halting_memo_.end()) return std::nullopt;
        return it->second;
    }

    void memo_insert(const BitStr& w, const BitStr& out, std::uint64_t steps) {
        std::lock_guard lk(memo_mu_);
        halting_memo_.emplace(w, std::make_pair(out, steps));
    }

    struct DiagKey {
        std::string id;
        BitStr w;
        bool operator==(const DiagKey& o) const { return id == o.id && w == o.w; }
    };
    struct DiagKeyHash {
        std::size_t operator()(const DiagKey& k) const {
            return std::hash<std::string>{}(k.id) * 1099511628211ull ^ k.w.hash();
        }
    };

    using StratumKey = std::pair<std::string, unsigned>;

    Config cfg_;

    mutable std::mutex memo_mu_;
    std::unordered_map<BitStr, std::pair<BitStr, std::uint64_t>, BitStrHash> halting_memo_;

    mutable std::mutex diag_mu_;
    std::unordered_map<DiagKey, std::pair<std::uint64_t, std::uint64_t>, DiagKeyHash>
        diag_memo_;

    mutable std::mutex strata_mu_;
    std::map<StratumKey, std::shared_ptr<const Stratum>> strata_;

    mutable std::mutex stats_mu_;
    DiagStats diag_stats_;
};

} // namespace subrec
