#include "rfseries/cli.hpp"

#include <cmath>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "rfseries/catalog.hpp"
#include "rfseries/engine.hpp"
#include "rfseries/errors.hpp"
#include "rfseries/output.hpp"
#include "rfseries/ramanujan.hpp"
#include "rfseries/series.hpp"

namespace rfs::cli {

namespace {

constexpr i64 kMaxSeriesQmax2 = 4096;    // grid memory guard for 2-variable series
constexpr i64 kMaxSeriesQmax1 = 10'000'000;

struct GlobalOpts {
    TruncationParams params;
    int threads = 0;
    bool json = false;
    std::string output_file;
};

std::string echo_command(int argc, const char* const* argv) {
    std::string cmd = "rfseries";
    for (int i = 1; i < argc; ++i) {
        cmd += ' ';
        cmd += argv[i];
    }
    return cmd;
}

int emit(const OutputRecord& rec, const GlobalOpts& g) {
    std::string text = g.json ? to_json(rec) : to_csv(rec);
    if (!g.output_file.empty()) {
        std::ofstream out(g.output_file, std::ios::binary);
        if (!out) {
            std::cerr << "error: cannot open output file '" << g.output_file << "'\n";
            return 2;
        }
        out << text;
        return 0;
    }
    std::cout << text;
    return 0;
}

void add_meta_params(OutputRecord& rec, const TruncationParams& p) {
    rec.add_meta("prime_cutoff", std::to_string(p.prime_cutoff));
    rec.add_meta("sum_cutoff", std::to_string(p.sum_cutoff));
    rec.add_meta("tol", format_double(p.tol));
}

Family load_family(const std::string& name, const std::optional<double>& s,
                   const TruncationParams& params) {
    return family(name, s, params);
}

// ---- csum ----------------------------------------------------------

int cmd_csum(i64 a, i64 b, bool row_mode, const GlobalOpts& g, OutputRecord rec) {
    rec.columns = {"q", "n", "c"};
    if (row_mode) {
        CsumRow row = csum_row(a, b);
        for (i64 q = 1; q <= a; ++q)
            rec.rows.push_back({q, b, row.at(q)});
    } else {
        rec.rows.push_back({a, b, csum(a, b)});
    }
    return emit(rec, g);
}

// ---- coeff ---------------------------------------------------------

int cmd_coeff(const std::string& fname, std::optional<double> s, i64 q1max, i64 q2max,
              const std::string& method_str, const GlobalOpts& g, OutputRecord rec) {
    Family fam = load_family(fname, s, g.params);
    if (fam.arity != 2)
        throw std::invalid_argument("coeff: family '" + fname + "' is one-variable; it has coefficients a_q, not a grid");

    CoeffTable::Method method;
    if (method_str == "euler_product") method = CoeffTable::Method::euler_product;
    else if (method_str == "double_sum") method = CoeffTable::Method::double_sum;
    else if (method_str == "closed_form") method = CoeffTable::Method::closed_form;
    else throw std::invalid_argument("coeff: unknown method '" + method_str + "'");

    i64 qmax = std::max(q1max, q2max);
    CoeffTable table = build_coeff_table(fam.fn2, qmax, method, g.params,
                                         fam.closed_coeff2 ? &fam.closed_coeff2 : nullptr,
                                         g.threads);
    if (table.method != method)
        throw std::invalid_argument(
            "coeff: the mean value of '" + fname +
            "' is numerically zero, so the euler_product formula does not apply; "
            "rerun with --method double_sum");

    rec.columns = {"q1", "q2", "value", "error", "note"};
    rec.add_meta("family", fam.name);
    if (fam.s) rec.add_meta("s", format_double(*fam.s));
    rec.add_meta("method", method_name(table.method));
    rec.add_meta("mean_value", format_double(table.mean));
    add_meta_params(rec, g.params);
    for (i64 q1 = 1; q1 <= q1max; ++q1)
        for (i64 q2 = 1; q2 <= q2max; ++q2)
            rec.rows.push_back({q1, q2, table.at(q1, q2), table.error_at(q1, q2),
                                std::string(q1 == 1 && q2 == 1 ? "mean_value" : "")});
    return emit(rec, g);
}

// ---- mean ----------------------------------------------------------

int cmd_mean(const std::string& fname, std::optional<double> s, const GlobalOpts& g,
             OutputRecord rec) {
    Family fam = load_family(fname, s, g.params);
    if (fam.arity != 2)
        throw std::invalid_argument("mean: family '" + fname + "' is one-variable");
    MeanResult mr = mean_value_report(fam.fn2, g.params);
    rec.columns = {"family", "s", "mean_value", "error_proxy"};
    rec.rows.push_back({fam.name, fam.s ? format_double(*fam.s) : std::string(""), mr.value,
                        mr.error_proxy});
    rec.add_meta("tail_corrected", mr.tail_corrected ? "true" : "false");
    add_meta_params(rec, g.params);
    return emit(rec, g);
}

// ---- check ---------------------------------------------------------

int cmd_check(const std::string& fname, std::optional<double> s, const GlobalOpts& g,
              OutputRecord rec) {
    Family fam = load_family(fname, s, g.params);
    if (fam.arity != 2)
        throw std::invalid_argument("check: family '" + fname + "' is one-variable");
    ConditionReport cr = condition_check(fam.fn2, g.params);
    rec.columns = {"prime_cutoff", "partial_sum"};
    for (auto& [cutoff, sum] : cr.checkpoints)
        rec.rows.push_back({cutoff, sum});
    rec.add_meta("family", fam.name);
    if (fam.s) rec.add_meta("s", format_double(*fam.s));
    rec.add_meta("total", format_double(cr.total));
    rec.add_meta("verdict",
                 cr.verdict == ConditionVerdict::stabilizing ? "stabilizing" : "suspect");
    if (!cr.note.empty()) rec.add_meta("note", cr.note);
    return emit(rec, g);
}

// ---- eval ----------------------------------------------------------

void check_series_qmax(const Family& fam, i64 qmax) {
    i64 cap = fam.arity == 2 ? kMaxSeriesQmax2 : kMaxSeriesQmax1;
    if (qmax > cap)
        throw std::invalid_argument("qmax " + std::to_string(qmax) + " exceeds the limit " +
                                    std::to_string(cap) + " for " +
                                    (fam.arity == 2 ? "two" : "one") + "-variable series");
}

int cmd_eval(const std::string& fname, std::optional<double> s, i64 n1, std::optional<i64> n2,
             i64 qmax, const GlobalOpts& g, OutputRecord rec) {
    Family fam = load_family(fname, s, g.params);
    if (fam.arity == 2 && !n2)
        throw std::invalid_argument("eval: family '" + fname + "' needs --n2");
    if (fam.arity == 1 && n2)
        throw std::invalid_argument("eval: family '" + fname + "' is one-variable; drop --n2");
    check_series_qmax(fam, qmax);
    TruncationParams params = g.params;
    params.series_qmax = qmax;
    SeriesContext ctx(fam, params, nullptr, g.threads);
    ConvergenceReport rep = ctx.evaluate(n1, n2.value_or(1));

    rec.columns = {"qmax", "partial_sum", "abs_error"};
    for (const auto& cp : rep.checkpoints)
        rec.rows.push_back({cp.qmax, cp.partial, cp.abs_error});
    rec.add_meta("family", fam.name);
    if (fam.s) rec.add_meta("s", format_double(*fam.s));
    rec.add_meta("n1", std::to_string(rep.n1));
    if (fam.arity == 2) rec.add_meta("n2", std::to_string(rep.n2));
    rec.add_meta("direct_value", format_double(rep.direct));
    rec.add_meta("tail_bound", format_double(rep.tail_bound));
    rec.add_meta("verdict", rep.bracketed ? "bracketed" : "not_bracketed");
    return emit(rec, g);
}

// ---- verify --------------------------------------------------------

int cmd_verify(const std::string& fname, std::optional<double> s, i64 nmax, i64 qmax,
               const GlobalOpts& g, OutputRecord rec) {
    std::vector<std::string> names;
    if (fname == "all") {
        if (s) throw std::invalid_argument("verify: --s cannot be combined with 'all'");
        names = family_names();
    } else {
        names.push_back(fname);
    }

    rec.columns = {"family", "n1", "n2", "direct", "partial_sum", "abs_error",
                   "tail_bound", "bracketed", "error_decayed"};
    bool all_pass = true;
    TruncationParams params = g.params;
    params.series_qmax = qmax;
    for (const auto& name : names) {
        Family fam = load_family(name, fname == "all" ? std::nullopt : s, params);
        check_series_qmax(fam, qmax);
        VerifyResult vr = verify_family(fam, nmax, params, g.threads);
        if (!vr.pass) all_pass = false;
        for (const auto& rep : vr.reports) {
            const Checkpoint& last = rep.checkpoints.back();
            rec.rows.push_back({rep.family, rep.n1,
                                fam.arity == 2 ? OutputRecord::Cell(rep.n2)
                                               : OutputRecord::Cell(std::string("")),
                                rep.direct, last.partial, last.abs_error, rep.tail_bound,
                                std::string(rep.bracketed ? "yes" : "no"),
                                std::string(rep.error_decayed ? "yes" : "no")});
        }
    }
    rec.add_meta("nmax", std::to_string(nmax));
    rec.add_meta("qmax", std::to_string(qmax));
    rec.add_meta("pass", all_pass ? "true" : "false");
    int rc = emit(rec, g);
    if (rc != 0) return rc;
    return all_pass ? 0 : 1;
}

}  // namespace

int run(int argc, const char* const* argv) {
    GlobalOpts g;

    CLI::App app{"Ramanujan-Fourier series toolkit: Ramanujan sums, two-variable "
                 "Dirichlet convolution, RF coefficients by independent methods, mean "
                 "values, and truncated series evaluation with tail bounds"};
    app.set_help_all_flag("--help-all", "print help for all subcommands");
    app.require_subcommand(1);
    app.fallthrough();

    app.add_option("--prime-cutoff", g.params.prime_cutoff,
                   "Euler products run over primes <= this")
        ->envname("RFSERIES_PRIME_CUTOFF")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--sum-cutoff", g.params.sum_cutoff, "double sums run over m1, m2 <= this")
        ->envname("RFSERIES_SUM_CUTOFF")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--tol", g.params.tol, "numeric tolerance")
        ->envname("RFSERIES_TOL")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    app.add_option("--threads", g.threads, "worker threads (0 = hardware)")
        ->envname("RFSERIES_THREADS")
        ->check(CLI::NonNegativeNumber)
        ->capture_default_str();
    app.add_flag("--json", g.json, "emit JSON instead of CSV");
    app.add_option("--output", g.output_file, "write output to a file instead of stdout")
        ->envname("RFSERIES_OUTPUT");

    // csum
    auto* sc_csum = app.add_subcommand("csum", "Ramanujan sums c_q(n)");
    i64 csum_a = 0, csum_b = 0;
    bool csum_row_mode = false;
    sc_csum->add_option("q", csum_a, "modulus q (row length with --row)")
        ->required()
        ->check(CLI::PositiveNumber);
    sc_csum->add_option("n", csum_b, "argument n")->required()->check(CLI::PositiveNumber);
    sc_csum->add_flag("--row", csum_row_mode, "emit the whole row c_1(n) .. c_qmax(n)");

    // coeff
    auto* sc_coeff = app.add_subcommand("coeff", "RF coefficient grid a_{q1,q2}");
    std::string co_fn;
    std::optional<double> co_s;
    i64 co_q1max = 8, co_q2max = 8;
    std::string co_method = "euler_product";
    sc_coeff->add_option("--function", co_fn, "family name")->required();
    sc_coeff->add_option("--s", co_s, "family parameter s");
    sc_coeff->add_option("--q1max", co_q1max, "grid extent in q1")->check(CLI::PositiveNumber);
    sc_coeff->add_option("--q2max", co_q2max, "grid extent in q2")->check(CLI::PositiveNumber);
    sc_coeff->add_option("--method", co_method, "euler_product | double_sum | closed_form")
        ->capture_default_str();

    // mean
    auto* sc_mean = app.add_subcommand("mean", "mean value M(f)");
    std::string mn_fn;
    std::optional<double> mn_s;
    sc_mean->add_option("--function", mn_fn, "family name")->required();
    sc_mean->add_option("--s", mn_s, "family parameter s");

    // check
    auto* sc_check = app.add_subcommand("check", "convergence-condition diagnostic");
    std::string ck_fn;
    std::optional<double> ck_s;
    sc_check->add_option("--function", ck_fn, "family name")->required();
    sc_check->add_option("--s", ck_s, "family parameter s");

    // eval
    auto* sc_eval = app.add_subcommand("eval", "truncated series evaluation with report");
    std::string ev_fn;
    std::optional<double> ev_s;
    i64 ev_n1 = 1, ev_qmax = TruncationParams{}.series_qmax;
    std::optional<i64> ev_n2;
    sc_eval->add_option("--function", ev_fn, "family name")->required();
    sc_eval->add_option("--s", ev_s, "family parameter s");
    sc_eval->add_option("--n1", ev_n1, "first argument")->required()->check(CLI::PositiveNumber);
    sc_eval->add_option("--n2", ev_n2, "second argument (two-variable families)")
        ->check(CLI::PositiveNumber);
    sc_eval->add_option("--qmax", ev_qmax, "series truncation")->check(CLI::PositiveNumber)
        ->capture_default_str();

    // verify
    auto* sc_verify = app.add_subcommand("verify", "verification harness over a grid of points");
    std::string vf_fn = "all";
    std::optional<double> vf_s;
    i64 vf_nmax = 10, vf_qmax = 1024;
    sc_verify->add_option("--function", vf_fn, "family name or 'all'")->capture_default_str();
    sc_verify->add_option("--s", vf_s, "family parameter s");
    sc_verify->add_option("--nmax", vf_nmax, "verify all points up to this")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sc_verify->add_option("--qmax", vf_qmax, "series truncation")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        std::cout << app.help();
        return 0;
    } catch (const CLI::CallForAllHelp& e) {
        std::cout << app.help("", CLI::AppFormatMode::All);
        return 0;
    } catch (const CLI::ParseError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return 2;
    }

    OutputRecord rec;
    rec.command = echo_command(argc, argv);

    try {
        g.params.validate();
        if (sc_csum->parsed()) return cmd_csum(csum_a, csum_b, csum_row_mode, g, std::move(rec));
        if (sc_coeff->parsed())
            return cmd_coeff(co_fn, co_s, co_q1max, co_q2max, co_method, g, std::move(rec));
        if (sc_mean->parsed()) return cmd_mean(mn_fn, mn_s, g, std::move(rec));
        if (sc_check->parsed()) return cmd_check(ck_fn, ck_s, g, std::move(rec));
        if (sc_eval->parsed())
            return cmd_eval(ev_fn, ev_s, ev_n1, ev_n2, ev_qmax, g, std::move(rec));
        if (sc_verify->parsed())
            return cmd_verify(vf_fn, vf_s, vf_nmax, vf_qmax, g, std::move(rec));
    } catch (const unsupported_family_error& e) {
        std::cerr << "unsupported family: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
    std::cerr << "usage error: no subcommand\n";
    return 2;
}

}  // namespace rfs::cli
