#pragma once
// Finite lower approximations to the time-bounded halting probability:
// psum(tf, N) sums 2^-|p| over the valid programs p of size <= N that
// halt within their tf bound.  Exact dyadic arithmetic throughout; the
// table for levels 0..N is the best available lower bound on Omega_tf.

#include <string>
#include <vector>

#include <json.hpp>

#include "subrec/vm.hpp"

namespace subrec {

struct OmegaApprox {
    unsigned level = 0;
    Dyadic value;
    std::string time_fn_id;
};

inline Dyadic psum(Machine& m, const TimeFn& tf, unsigned n) { return m.psum(tf, n); }

inline std::vector<OmegaApprox> omega_table(Machine& m, const TimeFn& tf, unsigned n_max) {
    std::vector<OmegaApprox> rows;
    Dyadic acc;
    rows.push_back({0, acc, tf.id()});
    for (unsigned n = 1; n <= n_max; ++n) {
        acc += m.get_stratum(tf, n)->mass;
        rows.push_back({n, acc, tf.id()});
    }
    return rows;
}

inline std::string omega_table_csv(const std::vector<OmegaApprox>& rows) {
    std::string out = "level,mantissa_bits,exact_fraction\n";
    for (const auto& r : rows) {
        out += std::to_string(r.level) + "," + r.value.mantissa().str() + "," +
               r.value.fraction_str() + "\n";
    }
    return out;
}

inline nlohmann::json omega_table_json(const std::vector<OmegaApprox>& rows) {
    nlohmann::json j = nlohmann::json::array();
    for (const auto& r : rows) {
        j.push_back({{"level", r.level},
                     {"mantissa_bits", r.value.mantissa().str()},
                     {"exact_fraction", r.value.fraction_str()},
                     {"time_fn", r.time_fn_id}});
    }
    return j;
}

} // namespace subrec
