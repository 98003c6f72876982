#pragma once
// Turing submachines U_{P_T}: the universal machine wrapped by a total
// time-bound function.  U_{P_T}(w) answers l_1 when w does not halt
// within U(P_T o w) steps, and l_{k+1} when U(w) = l_k does.  The numeric
// view maps l_j to j-1, so l_1 reads as 0.

#include "subrec/timefn.hpp"
#include "subrec/vm.hpp"

namespace subrec {

struct SubOutput {
    BitStr value;
    std::uint64_t numeric = 0; // index_of(value) - 1
};

/// U(tf.program o w): for poly(c,k) exactly c*(|w|+1)^k + c.
inline std::uint64_t time_bound(Machine& m, const TimeFn& tf, const BitStr& w) {
    return m.time_bound(tf, w);
}

/// Total for every w: the submachine evaluation.
inline SubOutput eval_sub(Machine& m, const TimeFn& tf, const BitStr& w) {
    std::uint64_t n = m.eval_sub_numeric(tf, w);
    return SubOutput{nth_string(n + 1), n};
}

} // namespace subrec
