#pragma once
// Enumeration machinery: parallel stratum sweeps, an append-only on-disk
// record cache with a JSON manifest, and the independent single-threaded
// oracle that cross-validates the cached pipeline.
//
// Cache layout under the cache directory:
//   manifest.json                      format version, language
//                                      fingerprint, per-stratum metadata
//   rec_<tf>_<size>.bin                record log, fixed-width binary
//
// Record log format (little-endian):
//   header:  'S' 'M' 'R' 'C'  u8 version=1  u8[3] reserved
//   record:  u64 program_bits   bit j of the program at bit j
//            u64 bound
//            u64 output_index
//            u64 steps
//            u8  program_len
//            u8  halted_in_bound
//            u8[6] reserved
// A stratum file is either absent or complete; completeness is recorded
// in the manifest only after the file has been fully written and
// renamed into place.  A fingerprint mismatch invalidates everything.

#include <cstring>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <json.hpp>

#include "subrec/vm.hpp"

namespace subrec {

struct StratumMeta {
    std::uint64_t count = 0;
    bool complete = false;
};

struct CacheManifest {
    int format_version = 1;
    std::string fingerprint;
    std::map<std::string, std::map<unsigned, StratumMeta>> strata;
};

class DiskCache {
public:
    static constexpr int kFormatVersion = 1;

    explicit DiskCache(std::filesystem::path dir) : dir_(std::move(dir)) {
        std::filesystem::create_directories(dir_);
        manifest_.format_version = kFormatVersion;
        manifest_.fingerprint = language_fingerprint();
        load_manifest();
    }

    const std::filesystem::path& dir() const { return dir_; }

    bool has(const std::string& tf_id, unsigned size) const {
        auto it = manifest_.strata.find(tf_id);
        if (it == manifest_.strata.end()) return false;
        auto jt = it->second.find(size);
        return jt != it->second.end() && jt->second.complete;
    }

    std::optional<std::vector<RunRecord>> load(const std::string& tf_id,
                                               unsigned size) const {
        if (!has(tf_id, size)) return std::nullopt;
        std::ifstream in(record_path(tf_id, size), std::ios::binary);
        if (!in) return std::nullopt;
        char magic[4];
        std::uint8_t version = 0, reserved[3];
        in.read(magic, 4);
        in.read(reinterpret_cast<char*>(&version), 1);
        in.read(reinterpret_cast<char*>(reserved), 3);
        if (!in || std::memcmp(magic, "SMRC", 4) != 0 || version != 1)
            return std::nullopt;
        std::vector<RunRecord> out;
        const std::uint64_t expect = manifest_.strata.at(tf_id).at(size).count;
        for (std::uint64_t i = 0; i < expect; ++i) {
            std::uint64_t bits = 0, bound = 0, oidx = 0, steps = 0;
            std::uint8_t len = 0, halted = 0, pad[6];
            in.read(reinterpret_cast<char*>(&bits), 8);
            in.read(reinterpret_cast<char*>(&bound), 8);
            in.read(reinterpret_cast<char*>(&oidx), 8);
            in.read(reinterpret_cast<char*>(&steps), 8);
            in.read(reinterpret_cast<char*>(&len), 1);
            in.read(reinterpret_cast<char*>(&halted), 1);
            in.read(reinterpret_cast<char*>(pad), 6);
            if (!in || len != size) return std::nullopt;
            RunRecord rec;
            BitStr p;
            for (unsigned j = 0; j < len; ++j) p.push_back((bits >> j) & 1u);
            rec.program = p;
            rec.bound = bound;
            rec.output_index = oidx;
            rec.steps = steps;
            rec.halted_in_bound = halted != 0;
            out.push_back(std::move(rec));
        }
        return out;
    }

    void store(const std::string& tf_id, unsigned size,
               const std::vector<RunRecord>& records) {
        if (size > 64) throw capacity_error("DiskCache: programs wider than 64 bits");
        auto tmp = dir_ / ("tmp_" + sanitize(tf_id) + "_" + std::to_string(size));
        {
            std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
            if (!out) throw std::runtime_error("DiskCache: cannot write " + tmp.string());
            out.write("SMRC", 4);
            std::uint8_t version = 1, reserved[3] = {0, 0, 0};
            out.write(reinterpret_cast<char*>(&version), 1);
            out.write(reinterpret_cast<char*>(reserved), 3);
            for (const auto& rec : records) {
                std::uint64_t bits = 0;
                for (std::size_t j = 0; j < rec.program.size(); ++j)
                    if (rec.program.bit(j)) bits |= std::uint64_t{1} << j;
                std::uint64_t bound = rec.bound, oidx = rec.output_index,
                              steps = rec.steps;
                std::uint8_t len = static_cast<std::uint8_t>(rec.program.size());
                std::uint8_t halted = rec.halted_in_bound ? 1 : 0, pad[6] = {};
                out.write(reinterpret_cast<char*>(&bits), 8);
                out.write(reinterpret_cast<char*>(&bound), 8);
                out.write(reinterpret_cast<char*>(&oidx), 8);
                out.write(reinterpret_cast<char*>(&steps), 8);
                out.write(reinterpret_cast<char*>(&len), 1);
                out.write(reinterpret_cast<char*>(&halted), 1);
                out.write(reinterpret_cast<char*>(pad), 6);
            }
            if (!out) throw std::runtime_error("DiskCache: write failed");
        }
        std::filesystem::rename(tmp, record_path(tf_id, size));
        manifest_.strata[tf_id][size] = StratumMeta{records.size(), true};
        save_manifest();
    }

    static std::string sanitize(const std::string& tf_id) {
        std::string s = tf_id;
        for (char& c : s)
            if (c == ':' || c == ',') c = '_';
        return s;
    }

private:
    std::filesystem::path record_path(const std::string& tf_id, unsigned size) const {
        return dir_ / ("rec_" + sanitize(tf_id) + "_" + std::to_string(size) + ".bin");
    }

    void load_manifest() {
        auto path = dir_ / "manifest.json";
        std::ifstream in(path);
        if (!in) return;
        nlohmann::json j;
        try {
            in >> j;
        } catch (...) {
            return; // unreadable manifest: treat as empty
        }
        if (j.value("format_version", -1) != kFormatVersion) return;
        if (j.value("fingerprint", "") != manifest_.fingerprint) return;
        const nlohmann::json strata = j.value("strata", nlohmann::json::object());
        for (const auto& [tf, sizes] : strata.items())
            for (const auto& [size, meta] : sizes.items())
                manifest_.strata[tf][static_cast<unsigned>(std::stoul(size))] =
                    StratumMeta{meta.value("count", std::uint64_t{0}),
                                meta.value("complete", false)};
    }

    void save_manifest() const {
        nlohmann::json strata = nlohmann::json::object();
        for (const auto& [tf, sizes] : manifest_.strata) {
            nlohmann::json per = nlohmann::json::object();
            for (const auto& [size, meta] : sizes)
                per[std::to_string(size)] = {{"count", meta.count},
                                             {"complete", meta.complete}};
            strata[tf] = per;
        }
        nlohmann::json j = {{"format_version", manifest_.format_version},
                            {"fingerprint", manifest_.fingerprint},
                            {"strata", strata}};
        auto tmp = dir_ / "manifest.json.tmp";
        {
            std::ofstream out(tmp, std::ios::trunc);
            out << j.dump(2) << "\n";
            if (!out) throw std::runtime_error("DiskCache: manifest write failed");
        }
        std::filesystem::rename(tmp, dir_ / "manifest.json");
    }

    std::filesystem::path dir_;
    CacheManifest manifest_;
};

/// Materialize every stratum of sizes 1..n_max into the machine,
/// loading complete cached strata and computing the rest with the given
/// worker count.  Results are independent of the partitioning.
inline void sweep(Machine& m, const TimeFn& tf, unsigned n_max, unsigned workers = 1,
                  DiskCache* cache = nullptr) {
    if (workers == 0) workers = 1;
    for (unsigned size = 1; size <= n_max; ++size) {
        if (!m.has_stratum(tf, size)) {
            if (cache) {
                if (auto recs = cache->load(tf.id(), size)) {
                    m.install_stratum(tf, size, std::move(*recs));
                    continue;
                }
            }
            if (size > m.horizon(tf))
                throw capacity_error("sweep beyond the enumeration horizon for " +
                                     tf.id() + " at size " + std::to_string(size));
            std::uint64_t total = Machine::candidate_count(size);
            unsigned nw = static_cast<unsigned>(
                std::min<std::uint64_t>(workers, std::max<std::uint64_t>(1, total / 64)));
            std::vector<std::vector<RunRecord>> parts(nw);
            std::vector<std::exception_ptr> errors(nw);
            std::vector<std::thread> threads;
            for (unsigned i = 0; i < nw; ++i) {
                std::uint64_t from = total * i / nw;
                std::uint64_t to = total * (i + 1) / nw;
                threads.emplace_back([&m, &tf, size, from, to, i, &parts, &errors] {
                    try {
                        parts[i] = m.build_stratum_records(tf, size, from, to);
                    } catch (...) {
                        errors[i] = std::current_exception();
                    }
                });
            }
            for (auto& t : threads) t.join();
            for (auto& e : errors)
                if (e) std::rethrow_exception(e);
            std::vector<RunRecord> records;
            for (auto& p : parts)
                for (auto& r : p) records.push_back(std::move(r));
            m.install_stratum(tf, size, std::move(records));
        }
        if (cache && !cache->has(tf.id(), size))
            cache->store(tf.id(), size, m.get_stratum(tf, size)->records);
    }
}

struct OracleReport {
    bool pass = false;
    std::string detail;
    BitStr offending;
};

/// Single-threaded, memoization-free re-derivation of every record and of
/// psum/bb/bb_plus at level n, compared bit-exactly against the pipeline.
/// The oracle recomputes time bounds through the in-language route
/// U(tf.program o w) rather than the direct formula.
inline OracleReport oracle_check(Machine& pipeline, const TimeFn& tf, unsigned n) {
    Machine::Config cfg = pipeline.config();
    cfg.memoize = false;
    Machine oracle(cfg);

    OracleReport rep;
    Dyadic oracle_psum;
    std::uint64_t oracle_bb = 0;

    for (unsigned size = 1; size <= n; ++size) {
        auto pipe = pipeline.get_stratum(tf, size);
        std::size_t seen = 0;
        for (std::uint64_t v = 0; v < Machine::candidate_count(size); ++v) {
            BitStr s = BitStr::from_value(v, size);
            if (!is_valid_program(s)) continue;
            // bound via the in-language route
            RunOutcome bo = oracle.run(encode_apply(tf.program(), {s}),
                                       StepBudget::unbounded());
            std::uint64_t bound = num_of(std::get<Halted>(bo).output);
            RunOutcome ro = oracle.run(s, StepBudget::with_fuel(bound));
            bool halted_in = halted(ro);
            std::uint64_t oidx = halted_in ? index_of(std::get<Halted>(ro).output) : 0;
            std::uint64_t steps = halted_in ? std::get<Halted>(ro).steps : bound;
            if (halted_in) {
                oracle_psum += Dyadic::pow2_inv(size);
                oracle_bb = std::max(oracle_bb, oidx);
            }
            if (seen >= pipe->records.size()) {
                rep.detail = "pipeline is missing a record at size " +
                             std::to_string(size);
                rep.offending = s;
                return rep;
            }
            const RunRecord& rec = pipe->records[seen++];
            if (rec.program != s || rec.bound != bound ||
                rec.halted_in_bound != halted_in || rec.output_index != oidx ||
                rec.steps != steps) {
                rep.detail = "record mismatch at size " + std::to_string(size);
                rep.offending = s;
                return rep;
            }
        }
        if (seen != pipe->records.size()) {
            rep.detail = "pipeline has extra records at size " + std::to_string(size);
            if (!pipe->records.empty()) rep.offending = pipe->records.back().program;
            return rep;
        }
    }

    if (pipeline.psum(tf, n) != oracle_psum) {
        rep.detail = "psum mismatch";
        return rep;
    }
    if (pipeline.bb(tf, n) != oracle_bb ||
        pipeline.bb_plus(tf, n) != oracle_bb + 1) {
        rep.detail = "bb mismatch";
        return rep;
    }
    rep.pass = true;
    rep.detail = "ok";
    return rep;
}

} // namespace subrec
