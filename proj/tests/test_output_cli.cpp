#include <doctest.h>

#include <iostream>
#include <random>
#include <sstream>

#include <json.hpp>

#include "rfseries/cli.hpp"
#include "rfseries/output.hpp"
#include "rfseries/zeta.hpp"

using namespace rfs;

namespace {

struct CliResult {
    int code = 0;
    std::string out;
    std::string err;
};

CliResult run_cli(const std::vector<std::string>& args) {
    std::vector<std::string> full = {"rfseries"};
    full.insert(full.end(), args.begin(), args.end());
    std::vector<const char*> argv;
    for (const auto& a : full) argv.push_back(a.c_str());

    std::ostringstream captured_out, captured_err;
    auto* old_out = std::cout.rdbuf(captured_out.rdbuf());
    auto* old_err = std::cerr.rdbuf(captured_err.rdbuf());
    CliResult res;
    res.code = rfs::cli::run(static_cast<int>(argv.size()), argv.data());
    std::cout.rdbuf(old_out);
    std::cerr.rdbuf(old_err);
    res.out = captured_out.str();
    res.err = captured_err.str();
    return res;
}

OutputRecord random_record(std::mt19937& rng) {
    OutputRecord rec;
    rec.command = "rfseries test";
    std::uniform_int_distribution<int> ncols(1, 5), nrows(0, 8), kind(0, 3);
    std::uniform_int_distribution<std::int64_t> ints(-1'000'000'000'000LL, 1'000'000'000'000LL);
    std::uniform_real_distribution<double> reals(-1e6, 1e6);
    const std::vector<std::string> strings = {"",      "plain", "with,comma", "quo\"te",
                                              "12345", "1.5",   "nan",        "line"};
    int cols = ncols(rng);
    for (int c = 0; c < cols; ++c) rec.columns.push_back("col" + std::to_string(c));
    int rows = nrows(rng);
    for (int r = 0; r < rows; ++r) {
        std::vector<OutputRecord::Cell> row;
        for (int c = 0; c < cols; ++c) {
            switch (kind(rng)) {
                case 0: row.emplace_back(ints(rng)); break;
                case 1: row.emplace_back(reals(rng)); break;
                case 2: row.emplace_back(1.0 / (1.0 + std::abs(reals(rng)))); break;
                default:
                    row.emplace_back(strings[static_cast<size_t>(rng()) % strings.size()]);
            }
        }
        rec.rows.push_back(std::move(row));
    }
    rec.add_meta("k", "v");
    rec.add_meta("cutoff", "1000");
    return rec;
}

}  // namespace

TEST_CASE("format_double keeps types distinguishable") {
    CHECK(format_double(1.5) == "1.5");
    CHECK(format_double(5.0) == "5.0");
    CHECK(format_double(-0.25) == "-0.25");
    CHECK(format_double(HUGE_VAL) == "inf");
}

TEST_CASE("CSV round-trips random records exactly") {
    std::mt19937 rng(20240811);
    for (int trial = 0; trial < 200; ++trial) {
        OutputRecord rec = random_record(rng);
        OutputRecord back = parse_csv(to_csv(rec));
        CHECK(back == rec);
    }
}

TEST_CASE("JSON and CSV encode identical values") {
    std::mt19937 rng(7);
    OutputRecord rec = random_record(rng);
    while (rec.rows.empty()) rec = random_record(rng);
    OutputRecord csv = parse_csv(to_csv(rec));
    nlohmann::json j = nlohmann::json::parse(to_json(rec));
    CHECK(j["schema_version"].get<int>() == rec.schema_version);
    CHECK(j["command"].get<std::string>() == rec.command);
    REQUIRE(j["rows"].size() == csv.rows.size());
    for (size_t r = 0; r < csv.rows.size(); ++r) {
        for (size_t c = 0; c < rec.columns.size(); ++c) {
            const auto& cell = csv.rows[r][c];
            const auto& jc = j["rows"][r][rec.columns[c]];
            if (std::holds_alternative<std::int64_t>(cell))
                CHECK(jc.get<std::int64_t>() == std::get<std::int64_t>(cell));
            else if (std::holds_alternative<double>(cell))
                CHECK(jc.get<double>() == std::get<double>(cell));
            else
                CHECK(jc.get<std::string>() == std::get<std::string>(cell));
        }
    }
}

TEST_CASE("cli: csum single and row modes") {
    CliResult r = run_cli({"csum", "6", "4"});
    CHECK(r.code == 0);
    OutputRecord rec = parse_csv(r.out);
    REQUIRE(rec.rows.size() == 1);
    CHECK(std::get<std::int64_t>(rec.rows[0][2]) == -1);

    CliResult row = run_cli({"csum", "--row", "3", "1"});
    CHECK(row.code == 0);
    OutputRecord rrec = parse_csv(row.out);
    REQUIRE(rrec.rows.size() == 3);
    CHECK(std::get<std::int64_t>(rrec.rows[0][2]) == 1);
    CHECK(std::get<std::int64_t>(rrec.rows[1][2]) == -1);
    CHECK(std::get<std::int64_t>(rrec.rows[2][2]) == -1);
}

TEST_CASE("cli: usage errors exit with code 2") {
    CHECK(run_cli({"csum", "0", "1"}).code == 2);
    CHECK(run_cli({"csum", "5"}).code == 2);
    CHECK(run_cli({"nosuchcommand"}).code == 2);
    CHECK(run_cli({"coeff", "--function", "nosuch"}).code == 2);
    CHECK(run_cli({"eval", "--function", "sigma_gcd", "--n1", "2"}).code == 2);  // missing --n2
    CHECK(run_cli({"mean", "--function", "sigma_gcd", "--s", "-3"}).code == 2);
}

TEST_CASE("cli: display-only families are rejected explicitly") {
    CliResult r = run_cli({"eval", "--function", "tau1", "--n1", "3"});
    CHECK(r.code == 2);
    CHECK(r.err.find("display-only") != std::string::npos);
    CHECK(run_cli({"coeff", "--function", "r1"}).code == 2);
}

TEST_CASE("cli: coeff closed form emits the expected grid") {
    CliResult r = run_cli({"coeff", "--function", "tau_gcd", "--q1max", "2", "--q2max", "2",
                           "--method", "closed_form"});
    REQUIRE(r.code == 0);
    OutputRecord rec = parse_csv(r.out);
    REQUIRE(rec.rows.size() == 4);
    // rows ordered (1,1),(1,2),(2,1),(2,2)
    CHECK(std::get<double>(rec.rows[3][2]) == doctest::Approx(zeta(2.0) / 4.0).epsilon(1e-13));
    CHECK(std::get<std::string>(rec.rows[0][4]) == "mean_value");
    CHECK(std::get<std::string>(rec.rows[1][4]).empty());
}

TEST_CASE("cli: coeff euler default reproduces 1/zeta(3) for phi_gcd") {
    CliResult r = run_cli({"coeff", "--function", "phi_gcd", "--s", "1", "--q1max", "1",
                           "--q2max", "1"});
    REQUIRE(r.code == 0);
    OutputRecord rec = parse_csv(r.out);
    REQUIRE(rec.rows.size() == 1);
    CHECK(std::get<double>(rec.rows[0][2]) ==
          doctest::Approx(1.0 / zeta(3.0)).epsilon(1e-9));
}

TEST_CASE("cli: eval and verify behave and exit as documented") {
    CliResult ev = run_cli({"eval", "--function", "sigma_gcd", "--s", "1", "--n1", "6", "--n2",
                            "4", "--qmax", "512"});
    REQUIRE(ev.code == 0);
    OutputRecord rec = parse_csv(ev.out);
    bool saw_direct = false, saw_verdict = false;
    for (auto& [k, v] : rec.metadata) {
        if (k == "direct_value") {
            CHECK(v == "1.5");
            saw_direct = true;
        }
        if (k == "verdict") {
            CHECK(v == "bracketed");
            saw_verdict = true;
        }
    }
    CHECK(saw_direct);
    CHECK(saw_verdict);

    CliResult rz = run_cli({"eval", "--function", "r_gcd", "--n1", "3", "--n2", "3", "--qmax",
                            "512"});
    REQUIRE(rz.code == 0);
    OutputRecord rrec = parse_csv(rz.out);
    for (auto& [k, v] : rrec.metadata)
        if (k == "direct_value") CHECK(v == "0.0");

    CHECK(run_cli({"verify", "--function", "tau_gcd", "--nmax", "2", "--qmax", "256"}).code == 0);
    CHECK(run_cli({"eval", "--function", "phi_product", "--n1", "1", "--n2", "1", "--qmax",
                   "99999"}).code == 2);  // exceeds the two-variable qmax guard
}

TEST_CASE("cli: flags beat environment variables beat defaults") {
    setenv("RFSERIES_PRIME_CUTOFF", "1234", 1);
    CliResult env_only = run_cli({"mean", "--function", "delta_gcd"});
    REQUIRE(env_only.code == 0);
    bool saw = false;
    for (auto& [k, v] : parse_csv(env_only.out).metadata)
        if (k == "prime_cutoff") {
            CHECK(v == "1234");
            saw = true;
        }
    CHECK(saw);

    CliResult flagged = run_cli({"--prime-cutoff", "4321", "mean", "--function", "delta_gcd"});
    REQUIRE(flagged.code == 0);
    for (auto& [k, v] : parse_csv(flagged.out).metadata)
        if (k == "prime_cutoff") CHECK(v == "4321");
    unsetenv("RFSERIES_PRIME_CUTOFF");

    CliResult dflt = run_cli({"mean", "--function", "delta_gcd", "--prime-cutoff", "100000"});
    REQUIRE(dflt.code == 0);

    // usage errors land on the diagnostic stream
    CliResult bad = run_cli({"csum", "0", "1"});
    CHECK(bad.code == 2);
    CHECK(!bad.err.empty());
    CHECK(bad.out.empty());
}

TEST_CASE("cli: json flag mirrors the CSV values") {
    CliResult c = run_cli({"csum", "5", "10"});
    CliResult j = run_cli({"--json", "csum", "5", "10"});
    REQUIRE(c.code == 0);
    REQUIRE(j.code == 0);
    OutputRecord rec = parse_csv(c.out);
    nlohmann::json parsed = nlohmann::json::parse(j.out);
    CHECK(parsed["rows"][0]["c"].get<std::int64_t>() ==
          std::get<std::int64_t>(rec.rows[0][2]));
    CHECK(parsed["rows"][0]["c"].get<std::int64_t>() == 4);
}
