#pragma once
// The non-diagonal extension P* and the self-referential diagonal P**.
// P** is a reserved head whose semantics are its defining equation
// U(p** o P_T o w) = U(p* o (p** o P_T) o P_T o w); well-foundedness
// rests on the fact that the psum condition at cutoff |w|-1 only ever
// evaluates the diagonal bound on strictly shorter strings.  A hard
// recursion guard asserts this; any trip is a bug, not a timeout.

#include <string>
#include <vector>

#include <json.hpp>

#include "subrec/beaver.hpp"
#include "subrec/submachine.hpp"
#include "subrec/vm.hpp"

namespace subrec {

inline std::uint64_t p_star_time(Machine& m, const TimeFn& outer, const TimeFn& inner,
                                 const BitStr& w) {
    return m.p_star_time(outer, inner, w);
}

inline std::uint64_t p_star_star_time(Machine& m, const TimeFn& inner, const BitStr& w) {
    return m.p_star_star_time(inner, w);
}

struct TotalityReport {
    std::string time_fn_id;
    unsigned horizon = 0;
    std::uint64_t programs = 0;
    unsigned max_depth = 0;
    std::uint64_t guard_violations = 0;
    std::string failure;
    bool pass = false;
};

/// Evaluates U_{p** o inner}(w) for every valid program up to the horizon
/// on a fresh machine, so the reported recursion depth reflects real
/// evaluations rather than cache hits.
inline TotalityReport verify_totality(const TimeFn& inner, unsigned horizon,
                                      const Machine::Config& cfg = {}) {
    TimeFn diag = TimeFn::diagonal(inner);
    TotalityReport rep;
    rep.time_fn_id = diag.id();
    rep.horizon = horizon;
    Machine m(cfg);
    m.reset_diag_stats();
    try {
        for (unsigned n = 1; n <= horizon; ++n)
            rep.programs += m.get_stratum(diag, n)->records.size();
        auto stats = m.diag_stats();
        rep.max_depth = stats.max_depth;
        rep.guard_violations = stats.guard_violations;
        rep.pass = stats.guard_violations == 0;
    } catch (const std::exception& e) {
        rep.failure = e.what();
        rep.guard_violations = m.diag_stats().guard_violations;
        rep.pass = false;
    }
    return rep;
}

inline nlohmann::json totality_json(const TotalityReport& r) {
    return {{"time_fn", r.time_fn_id},   {"horizon", r.horizon},
            {"programs", r.programs},    {"max_recursion_depth", r.max_depth},
            {"guard_violations", r.guard_violations},
            {"failure", r.failure},      {"pass", r.pass}};
}

struct WitnessReport {
    unsigned level = 0;
    BitStr witness;
    std::size_t witness_size = 0;
    std::uint64_t output = 0;      // value the witness program computes
    std::uint64_t expected = 0;    // bb_plus(diag, level)
    std::uint64_t sub_numeric = 0; // the submachine's shifted reading
    long long size_bound_constant = 0; // minimal C with size <= 2*level + C
    bool pass = false;
};

/// The concrete program pi' o (p** o inner) o 0^|rho| 1 rho with
/// rho = psum(diag, level), padded with trailing zeros until
/// |witness| - 1 >= level.  Running it on the diagonal submachine must
/// compute exactly bb_plus(diag, level).
inline WitnessReport build_witness(Machine& m, const TimeFn& inner, unsigned level) {
    TimeFn diag = TimeFn::diagonal(inner);
    WitnessReport rep;
    rep.level = level;
    rep.expected = m.bb_plus(diag, level);

    Dyadic rho = m.psum(diag, level);
    std::size_t width = rho.mantissa_width();
    for (;;) {
        rep.witness = encode_apply(codeword_bits(Head::Pi),
                                   {diag.program(), rho_term(rho, width)});
        if (rep.witness.size() >= level + 1) break; // pad with trailing zeros
        ++width;
    }
    rep.witness_size = rep.witness.size();

    RunOutcome o = m.run(rep.witness, StepBudget::with_fuel(std::uint64_t{1} << 62));
    if (!halted(o)) return rep; // pass stays false
    rep.output = num_of(std::get<Halted>(o).output);
    rep.sub_numeric = m.eval_sub_numeric(diag, rep.witness);

    rep.size_bound_constant =
        static_cast<long long>(rep.witness_size) - 2ll * static_cast<long long>(level);
    rep.pass = rep.output == rep.expected && rep.sub_numeric >= rep.expected &&
               rep.witness_size >= level + 1;
    return rep;
}

inline nlohmann::json witness_json(const WitnessReport& r) {
    return {{"level", r.level},
            {"witness_bits", r.witness.str()},
            {"witness_size", r.witness_size},
            {"output", r.output},
            {"expected", r.expected},
            {"sub_numeric", r.sub_numeric},
            {"c_at_level", r.size_bound_constant},
            {"pass", r.pass}};
}

} // namespace subrec
