// subrec: a desk-scale laboratory for total (time-bounded) Turing
// machines over a small prefix-free language: halting-probability
// approximations, Busy Beaver Plus tables, and the self-referential
// diagonal extension, with verification suites for their laws.
//
// Exit codes: 0 success, 1 assertion/verification failure, 2 usage
// error, 3 guarded divergence.

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "subrec/subrec.hpp"

using namespace subrec;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitDiverged = 3;

struct Options {
    std::string time_fn = "poly:2,1";
    unsigned n = 10;
    unsigned horizon = 0; // 0: family default
    unsigned workers = 1;
    std::string format = "text";
    std::string cache_dir;
    unsigned guard = 0; // 0: enumeration horizon
    std::string rho;
    std::string out;
};

// Advisory lock: one command at a time per cache directory.
struct CacheLock {
    int fd = -1;
    ~CacheLock() {
        if (fd >= 0) close(fd);
    }
    bool acquire(const std::filesystem::path& dir) {
        std::filesystem::create_directories(dir);
        fd = open((dir / ".lock").c_str(), O_CREAT | O_RDWR, 0644);
        if (fd < 0) return false;
        return flock(fd, LOCK_EX | LOCK_NB) == 0;
    }
};

std::string cache_path(const Options& opt) {
    if (!opt.cache_dir.empty()) return opt.cache_dir;
    if (const char* env = std::getenv("SUBREC_CACHE")) return env;
    return {};
}

Machine::Config machine_config(const TimeFn& tf, unsigned depth) {
    Machine::Config cfg;
    if (tf.is_diagonal())
        cfg.diag_horizon = std::max(cfg.diag_horizon, depth);
    else
        cfg.poly_horizon = std::max(cfg.poly_horizon, depth);
    return cfg;
}

void write_out(const Options& opt, const std::string& text) {
    if (opt.out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(opt.out, std::ios::trunc);
    f << text;
    if (!f) throw std::runtime_error("cannot write " + opt.out);
}

struct Context {
    Options opt;
    TimeFn tf;
    Machine machine;
    std::unique_ptr<DiskCache> cache;
    CacheLock lock;

    Context(const Options& o, const TimeFn& t, unsigned depth)
        : opt(o), tf(t), machine(machine_config(t, depth)) {
        std::string dir = cache_path(opt);
        if (!dir.empty()) {
            if (!lock.acquire(dir))
                throw std::runtime_error("cache directory is locked: " + dir);
            cache = std::make_unique<DiskCache>(dir);
        }
    }
};

int cmd_omega(const Options& opt, const TimeFn& tf) {
    Context ctx(opt, tf, opt.n);
    sweep(ctx.machine, tf, opt.n, opt.workers, ctx.cache.get());
    auto rows = omega_table(ctx.machine, tf, opt.n);
    if (opt.format == "csv") {
        write_out(opt, omega_table_csv(rows));
    } else if (opt.format == "json") {
        write_out(opt, omega_table_json(rows).dump(2) + "\n");
    } else {
        std::string t = "level  mantissa          exact\n";
        for (const auto& r : rows) {
            std::string m = r.value.mantissa().str();
            if (m.empty()) m = "0";
            t += std::to_string(r.level) + "\t0." + m + "\t" +
                 r.value.fraction_str() + "\n";
        }
        write_out(opt, t);
    }
    return kExitOk;
}

int cmd_bb(const Options& opt, const TimeFn& tf) {
    Context ctx(opt, tf, opt.n);
    sweep(ctx.machine, tf, opt.n, opt.workers, ctx.cache.get());
    auto rows = bb_table(ctx.machine, tf, opt.n);
    if (opt.format == "csv") {
        write_out(opt, bb_table_csv(rows));
    } else if (opt.format == "json") {
        write_out(opt, bb_table_json(rows).dump(2) + "\n");
    } else {
        std::string t = "level  bb  bb_plus  witness\n";
        for (const auto& r : rows)
            t += std::to_string(r.level) + "\t" + std::to_string(r.bb) + "\t" +
                 std::to_string(r.bb_plus) + "\t" + r.witness.str() + "\n";
        write_out(opt, t);
    }
    return kExitOk;
}

int cmd_pi_omega(const Options& opt, const TimeFn& tf) {
    Dyadic rho;
    if (opt.rho == "1") {
        rho = Dyadic::one();
    } else {
        for (char c : opt.rho)
            if (c != '0' && c != '1')
                throw CLI::ValidationError("--rho must be a binary mantissa or \"1\"");
        rho = Dyadic::from_mantissa(BitStr::from_string(opt.rho));
    }
    Context ctx(opt, tf, opt.n);
    unsigned guard = opt.guard ? opt.guard : ctx.machine.horizon(tf);
    PiOmegaResult r = pi_omega(ctx.machine, tf, rho, guard);
    if (r.diverged) {
        std::cout << "diverged: psum stayed below rho through level " << r.guard
                  << "\n";
        return kExitDiverged;
    }
    std::cout << r.value << "\n";
    return kExitOk;
}

int cmd_sweep(const Options& opt, const TimeFn& tf) {
    Context ctx(opt, tf, opt.n);
    sweep(ctx.machine, tf, opt.n, opt.workers, ctx.cache.get());
    std::uint64_t total = 0;
    std::string t = "size  records  halted\n";
    for (unsigned s = 1; s <= opt.n; ++s) {
        auto st = ctx.machine.get_stratum(tf, s);
        std::uint64_t halted_count = 0;
        for (const auto& rec : st->records) halted_count += rec.halted_in_bound;
        t += std::to_string(s) + "\t" + std::to_string(st->records.size()) + "\t" +
             std::to_string(halted_count) + "\n";
        total += st->records.size();
    }
    t += "total\t" + std::to_string(total) + "\n";
    write_out(opt, t);
    return kExitOk;
}

int emit_report(const Options& opt, const nlohmann::json& j, bool pass) {
    write_out(opt, j.dump(2) + "\n");
    return pass ? kExitOk : kExitFail;
}

int cmd_verify_totality(const Options& opt, const TimeFn& tf) {
    TimeFn inner = tf.is_diagonal() ? tf.inner() : tf;
    unsigned horizon = opt.horizon ? opt.horizon : 14;
    TotalityReport rep = verify_totality(
        inner, horizon, machine_config(TimeFn::diagonal(inner), horizon));
    return emit_report(opt, totality_json(rep), rep.pass);
}

int cmd_verify_witness(const Options& opt, const TimeFn& tf) {
    TimeFn inner = tf.is_diagonal() ? tf.inner() : tf;
    TimeFn diag = TimeFn::diagonal(inner);
    unsigned n_max = opt.n;
    Context ctx(opt, diag, n_max);
    bool pass = true;
    long long c = 0;
    nlohmann::json levels = nlohmann::json::array();
    for (unsigned n = 1; n <= n_max; ++n) {
        WitnessReport rep = build_witness(ctx.machine, inner, n);
        pass = pass && rep.pass;
        c = std::max(c, rep.size_bound_constant);
        levels.push_back(witness_json(rep));
    }
    nlohmann::json j = {{"time_fn", diag.id()},
                        {"levels", levels},
                        {"measured_c", c},
                        {"pass", pass}};
    return emit_report(opt, j, pass);
}

int cmd_verify_dominance(const Options& opt, const TimeFn& tf) {
    unsigned horizon = opt.horizon ? opt.horizon : 22;
    Context ctx(opt, tf, horizon);
    sweep(ctx.machine, tf, horizon, opt.workers, ctx.cache.get());
    auto rows = dominance_check(ctx.machine, tf, horizon);
    bool pass = true;
    nlohmann::json adv = nlohmann::json::array();
    for (const auto& row : rows) {
        pass = pass && row.dominated;
        adv.push_back(
            {{"adversary", row.name}, {"dominated", row.dominated}, {"n0", row.n0}});
    }
    nlohmann::json j = {{"time_fn", tf.id()},
                        {"horizon", horizon},
                        {"adversaries", adv},
                        {"pass", pass}};
    return emit_report(opt, j, pass);
}

int cmd_verify_incompressibility(const Options& opt, const TimeFn& tf) {
    unsigned n_max = opt.n;
    Context ctx(opt, tf, n_max);
    sweep(ctx.machine, tf, n_max, opt.workers, ctx.cache.get());
    bool pass = true;
    std::uint64_t checked = 0;
    nlohmann::json bad = nlohmann::json::array();
    for (unsigned n = 1; n <= n_max && pass; ++n) {
        std::uint64_t bbp = ctx.machine.bb_plus(tf, n);
        for (unsigned s = 1; s <= n; ++s) {
            auto st = ctx.machine.get_stratum(tf, s);
            for (const auto& rec : st->records) {
                std::uint64_t numeric = rec.halted_in_bound ? rec.output_index : 0;
                ++checked;
                if (numeric >= bbp) {
                    pass = false;
                    bad.push_back({{"level", n}, {"program", rec.program.str()}});
                }
            }
        }
    }
    nlohmann::json j = {{"time_fn", tf.id()},
                        {"n_max", n_max},
                        {"checked", checked},
                        {"violations", bad},
                        {"pass", pass}};
    return emit_report(opt, j, pass);
}

int cmd_verify_oracle(const Options& opt, const TimeFn& tf) {
    unsigned n = opt.n;
    Context ctx(opt, tf, n);
    sweep(ctx.machine, tf, n, opt.workers, ctx.cache.get());
    OracleReport rep = oracle_check(ctx.machine, tf, n);
    nlohmann::json j = {{"time_fn", tf.id()},
                        {"n", n},
                        {"detail", rep.detail},
                        {"offending", rep.offending.str()},
                        {"pass", rep.pass}};
    return emit_report(opt, j, rep.pass);
}

int cmd_export(const Options& opt, const TimeFn& tf, const std::string& what) {
    if (what == "constants") {
        write_out(opt, constants_text());
        return kExitOk;
    }
    if (what == "omega") return cmd_omega(opt, tf);
    if (what == "bb") return cmd_bb(opt, tf);
    throw CLI::ValidationError("export target must be constants, omega or bb");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"subrec: halting probabilities and Busy Beaver Plus tables "
                 "over time-bounded submachines of a small prefix-free "
                 "language"};
    app.require_subcommand(1);

    Options opt;
    std::string verify_which, export_what;

    auto add_common = [&opt](CLI::App* sub) {
        sub->add_option("--time-fn", opt.time_fn,
                        "time function: poly:c,k or diag:poly:c,k");
        sub->add_option("--n", opt.n, "size / level limit");
        sub->add_option("--horizon", opt.horizon, "enumeration horizon override");
        sub->add_option("--workers", opt.workers, "worker threads")
            ->check(CLI::PositiveNumber);
        sub->add_option("--cache", opt.cache_dir,
                        "cache directory (env SUBREC_CACHE)");
        sub->add_option("--format", opt.format, "text, csv or json")
            ->check(CLI::IsMember({"text", "csv", "json"}));
        sub->add_option("--guard", opt.guard, "divergence guard (levels)");
        sub->add_option("--out", opt.out, "write output to a file");
    };

    CLI::App* omega = app.add_subcommand("omega", "halting-probability table");
    add_common(omega);
    CLI::App* bb = app.add_subcommand("bb", "BB / BB+ table with witnesses");
    add_common(bb);
    CLI::App* pi =
        app.add_subcommand("pi-omega", "BB+ from a lower Omega approximation");
    add_common(pi);
    pi->add_option("--rho", opt.rho,
                   "binary mantissa (\"011\" means 0.011), or \"1\"")
        ->required();
    CLI::App* sw = app.add_subcommand("sweep", "materialize enumeration strata");
    add_common(sw);
    CLI::App* verify = app.add_subcommand("verify", "run a verification suite");
    verify
        ->add_option("suite", verify_which,
                     "totality, witness, dominance, incompressibility or oracle")
        ->required()
        ->check(CLI::IsMember(
            {"totality", "witness", "dominance", "incompressibility", "oracle"}));
    add_common(verify);
    CLI::App* exp = app.add_subcommand("export", "write tables or constants");
    exp->add_option("what", export_what, "constants, omega or bb")->required();
    add_common(exp);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kExitUsage;
    }

    try {
        auto tf = parse_time_fn_spec(opt.time_fn);
        if (!tf) {
            std::cerr << "unknown time function: " << opt.time_fn
                      << " (expected poly:c,k or diag:poly:c,k)\n";
            return kExitUsage;
        }
        if (omega->parsed()) return cmd_omega(opt, *tf);
        if (bb->parsed()) return cmd_bb(opt, *tf);
        if (pi->parsed()) return cmd_pi_omega(opt, *tf);
        if (sw->parsed()) return cmd_sweep(opt, *tf);
        if (exp->parsed()) return cmd_export(opt, *tf, export_what);
        if (verify->parsed() && verify->count("--n") == 0) {
            // per-suite depth defaults
            if (verify_which == "witness") opt.n = 8;
            if (verify_which == "incompressibility") opt.n = 16;
            if (verify_which == "oracle") opt.n = 12;
        }
        if (verify->parsed()) {
            if (verify_which == "totality") return cmd_verify_totality(opt, *tf);
            if (verify_which == "witness") return cmd_verify_witness(opt, *tf);
            if (verify_which == "dominance") return cmd_verify_dominance(opt, *tf);
            if (verify_which == "incompressibility")
                return cmd_verify_incompressibility(opt, *tf);
            if (verify_which == "oracle") return cmd_verify_oracle(opt, *tf);
        }
        return kExitUsage;
    } catch (const CLI::Error& e) {
        std::cerr << e.what() << "\n";
        return kExitUsage;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitFail;
    }
}
