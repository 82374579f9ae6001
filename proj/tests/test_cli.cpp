#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "cli.hpp"
#include "imagtime/analysis.hpp"

using namespace imagtime;
using namespace imagtime::cli;

namespace {

namespace fs = std::filesystem;

fs::path temp_file(const std::string& name) {
    static const fs::path dir = [] {
        fs::path d = fs::temp_directory_path() / "imagtime_cli_tests";
        fs::create_directories(d);
        return d;
    }();
    return dir / name;
}

std::string slurp(const fs::path& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

struct ParsedCsv {
    std::vector<std::string> header;
    std::vector<std::vector<std::string>> rows;
    std::vector<std::string> comments;
};

ParsedCsv parse_csv(const std::string& text) {
    ParsedCsv out;
    std::istringstream in(text);
    std::string line;
    while (std::getline(in, line)) {
        if (!line.empty() && line[0] == '#') {
            out.comments.push_back(line);
            continue;
        }
        std::vector<std::string> cells;
        std::string cell;
        std::istringstream ls(line);
        while (std::getline(ls, cell, ',')) cells.push_back(cell);
        if (line.size() && line.back() == ',') cells.push_back("");
        if (out.header.empty()) {
            out.header = cells;
        } else {
            out.rows.push_back(cells);
        }
    }
    return out;
}

} // namespace

TEST_CASE("parse_args maps flags onto the run spec") {
    RunSpec spec = parse_args({"solve", "--h", "0.1", "--K", "400", "--tau", "0.1",
                               "--scheme", "linimp", "--out", "run.csv"});
    CHECK(spec.command == Command::Solve);
    CHECK(spec.h == 0.1);
    CHECK(spec.K == 400);
    CHECK(spec.tau == 0.1);
    CHECK(spec.scheme == SchemeKind::LinearlyImplicit);
    CHECK(spec.out == "run.csv");
    // documented defaults
    CHECK(spec.max_iters == 100000);
    CHECK(spec.tol == 1e-12);
    CHECK(spec.init.kind == InitKind::Perturbed);
    CHECK(spec.init.eps == 0.05);
    CHECK(spec.record_every == 1);

    RunSpec semi = parse_args({"solve", "--scheme", "semiexp", "--out", "x.csv"});
    CHECK(semi.scheme == SchemeKind::SemiExplicit);
}

TEST_CASE("parse_args rejects bad input") {
    CHECK_THROWS_AS(parse_args({"solve", "--tau", "-1", "--out", "x.csv"}), UsageError);
    CHECK_THROWS_AS(parse_args({"solve", "--tau", "2.0", "--out", "x.csv"}), UsageError);
    CHECK_THROWS_AS(parse_args({"solve"}), UsageError); // missing output path
    CHECK_THROWS_AS(parse_args({"solve", "--frobnicate", "--out", "x.csv"}), UsageError);
    CHECK_THROWS_AS(parse_args({"solve", "--scheme", "magic", "--out", "x.csv"}), UsageError);
    CHECK_THROWS_AS(parse_args({"warp", "--out", "x.csv"}), UsageError);
    CHECK_THROWS_AS(parse_args({}), UsageError);
    CHECK_THROWS_AS(parse_args({"solve", "--eps", "0.7", "--out", "x.csv"}), UsageError);
    // sweep lists must be nonempty and strictly monotone
    CHECK_THROWS_AS(parse_args({"sweep-h", "--h-list", "0.1,0.4,0.2", "--out", "x.csv"}),
                    UsageError);
    CHECK_THROWS_AS(parse_args({"sweep-h", "--h-list", "0.1,-0.2", "--out", "x.csv"}),
                    UsageError);
    CHECK_THROWS_AS(parse_args({"sweep-tau", "--tau-list", "0.1,1.5", "--out", "x.csv"}),
                    UsageError);
    CHECK_THROWS_AS(parse_args({"ground-state", "--tol", "1e-15", "--out", "x.csv"}),
                    UsageError);
}

TEST_CASE("parse_args handles help and sweep lists") {
    CHECK_THROWS_AS(parse_args({"--help"}), HelpRequested);

    RunSpec spec = parse_args({"sweep-h", "--h-list", "0.4,0.2,0.1", "--kh", "40",
                               "--out", "sweep.csv"});
    CHECK(spec.command == Command::SweepH);
    REQUIRE(spec.h_list.size() == 3);
    CHECK(spec.kh == 40.0);
    // K = round(kh / h) for each point
    CHECK(std::lround(spec.kh / spec.h_list[0]) == 100);
    CHECK(std::lround(spec.kh / spec.h_list[1]) == 200);
    CHECK(std::lround(spec.kh / spec.h_list[2]) == 400);

    RunSpec desc = parse_args({"sweep-tau", "--tau-list", "0.04,0.02,0.01",
                               "--out", "x.csv"});
    REQUIRE(desc.tau_list.size() == 3); // descending lists are fine
}

TEST_CASE("IMAGTIME_THREADS seeds the worker count, the flag wins") {
    ::setenv("IMAGTIME_THREADS", "3", 1);
    RunSpec from_env = parse_args({"solve", "--out", "x.csv"});
    CHECK(from_env.threads == 3);
    RunSpec from_flag = parse_args({"sweep-k", "--kh-list", "5,10", "--threads", "5",
                                    "--out", "x.csv"});
    CHECK(from_flag.threads == 5);
    ::setenv("IMAGTIME_THREADS", "not-a-number", 1);
    RunSpec garbage = parse_args({"solve", "--out", "x.csv"});
    CHECK(garbage.threads == 0); // unparsable env is ignored
    ::unsetenv("IMAGTIME_THREADS");
}

TEST_CASE("format_cell: scientific floats, integers, empties") {
    CHECK(format_cell(Cell{1.0}) == "1.0000000000000000e+00");
    CHECK(format_cell(Cell{0.1}) == "1.0000000000000001e-01");
    CHECK(format_cell(Cell{static_cast<long long>(42)}) == "42");
    CHECK(format_cell(Cell{std::monostate{}}).empty());
    CHECK(format_cell(Cell{std::string("linimp")}) == "linimp");

    // every finite double round-trips bit-exactly
    for (double v : {1.0, 0.1, 3.0 / 7.0, 1e-13, 6.626e-34, 1.0 / 3.0, 123456.789}) {
        const std::string s = format_cell(Cell{v});
        CHECK(std::strtod(s.c_str(), nullptr) == v);
    }
}

TEST_CASE("write_csv: layout, empty report, io failure") {
    CsvReport report;
    report.header = {"a", "b", "c"};
    report.leading_comments = {"# hello"};
    report.rows.push_back({Cell{1.0}, Cell{std::monostate{}}, Cell{static_cast<long long>(7)}});
    report.trailing_comments = {"# bye"};
    const fs::path path = temp_file("layout.csv");
    write_csv(report, path.string());
    const std::string text = slurp(path);
    CHECK(text ==
          "# hello\na,b,c\n1.0000000000000000e+00,,7\n# bye\n");

    CsvReport empty;
    empty.header = {"x", "y"};
    const fs::path epath = temp_file("empty.csv");
    write_csv(empty, epath.string());
    CHECK(slurp(epath) == "x,y\n");

    CHECK_THROWS_AS(write_csv(empty, "/nonexistent-dir/impossible/x.csv"), Error);
}

TEST_CASE("execute solve: loop contract, nonconvergence flag, exit codes") {
    const fs::path path = temp_file("solve_one.csv");
    RunSpec spec = parse_args({"solve", "--h", "0.2", "--K", "50", "--tau", "0.1",
                               "--max-iters", "1", "--out", path.string()});
    const int code = execute(spec);
    CHECK(code == 1); // one iteration cannot converge from a perturbed start
    ParsedCsv csv = parse_csv(slurp(path));
    REQUIRE(csv.header.size() == 7);
    CHECK(csv.header[0] == "n");
    CHECK(csv.header[5] == "err_ref_h1disc");
    REQUIRE(csv.rows.size() == 1); // exactly one data row
    CHECK(csv.rows[0][0] == "1");
    CHECK(csv.rows[0][5].empty()); // no reference requested
    CHECK(csv.rows[0][6].empty());
    bool flagged = false;
    for (const auto& c : csv.comments) flagged |= c.find("nonconverged") != std::string::npos;
    CHECK(flagged);

    const fs::path full = temp_file("solve_full.csv");
    RunSpec ok = parse_args({"solve", "--h", "0.2", "--K", "50", "--tau", "0.2",
                             "--tol", "1e-11", "--errors", "--record-every", "50",
                             "--out", full.string()});
    CHECK(execute(ok) == 0);
    ParsedCsv converged = parse_csv(slurp(full));
    CHECK(converged.rows.size() >= 2);
    CHECK_FALSE(converged.rows.back()[5].empty()); // err columns filled with --errors
    CHECK_FALSE(converged.rows.back()[6].empty());

    RunSpec bad = ok;
    bad.out = "/nonexistent-dir/impossible/x.csv";
    CHECK(execute(bad) == 3);
}

TEST_CASE("execute ground-state matches the library computation") {
    const fs::path path = temp_file("gs.csv");
    RunSpec spec = parse_args({"ground-state", "--h", "0.2", "--K", "100",
                               "--out", path.string()});
    CHECK(execute(spec) == 0);
    ParsedCsv csv = parse_csv(slurp(path));
    REQUIRE(csv.rows.size() == 1);
    REQUIRE(csv.header == std::vector<std::string>{"h", "K", "lambda_h", "residual",
                                                   "iterations"});
    long iters = 0;
    GroundStateRef ref = compute_ground_state(Grid(0.2, 100), 0.5, 1e-13, &iters);
    CHECK(std::strtod(csv.rows[0][2].c_str(), nullptr) == ref.lambda_h);
    CHECK(std::strtod(csv.rows[0][3].c_str(), nullptr) == ref.residual);
    CHECK(csv.rows[0][4] == std::to_string(iters));
}

TEST_CASE("execute compare-schemes emits one row per scheme") {
    const fs::path path = temp_file("compare.csv");
    RunSpec spec = parse_args({"compare-schemes", "--h", "0.2", "--K", "100",
                               "--tau", "0.02", "--init", "soliton",
                               "--max-iters", "20000", "--out", path.string()});
    CHECK(execute(spec) == 0);
    ParsedCsv csv = parse_csv(slurp(path));
    REQUIRE(csv.header == std::vector<std::string>{"scheme", "fixed_point_distance",
                                                   "rate", "r_squared"});
    REQUIRE(csv.rows.size() == 3);
    CHECK(csv.rows[0][0] == "linimp");
    CHECK(csv.rows[1][0] == "semiexp");
    CHECK(csv.rows[2][0] == "fullimp");
    // the alternative schemes stop away from the ground state; linimp does not
    const double d_lin = std::strtod(csv.rows[0][1].c_str(), nullptr);
    const double d_semi = std::strtod(csv.rows[1][1].c_str(), nullptr);
    const double d_full = std::strtod(csv.rows[2][1].c_str(), nullptr);
    CHECK(d_semi > 100.0 * d_lin);
    CHECK(d_full > 100.0 * d_lin);
}

TEST_CASE("execute sweeps: determinism and worker-count invariance") {
    auto run_with_threads = [&](int threads, const std::string& name) {
        const fs::path path = temp_file(name);
        RunSpec spec = parse_args({"sweep-k", "--h", "0.2", "--kh-list", "5,10,20",
                                   "--threads", std::to_string(threads),
                                   "--out", path.string()});
        REQUIRE(execute(spec) == 0);
        return slurp(path);
    };
    const std::string serial = run_with_threads(1, "sweep_serial.csv");
    const std::string serial_again = run_with_threads(1, "sweep_serial2.csv");
    const std::string parallel = run_with_threads(4, "sweep_parallel.csv");
    CHECK(serial == serial_again);
    CHECK(serial == parallel);

    ParsedCsv csv = parse_csv(serial);
    REQUIRE(csv.rows.size() == 3); // rows in sweep order
    CHECK(csv.rows[0][2] == format_cell(Cell{5.0}));
    CHECK(csv.rows[2][2] == format_cell(Cell{20.0}));
}

TEST_CASE("execute coercivity and cngf-check produce the documented columns") {
    {
        const fs::path path = temp_file("coercivity.csv");
        RunSpec spec = parse_args({"coercivity", "--h-list", "0.4,0.2", "--kh", "20",
                                   "--out", path.string()});
        CHECK(execute(spec) == 0);
        ParsedCsv csv = parse_csv(slurp(path));
        REQUIRE(csv.header == std::vector<std::string>{"h", "K", "lambda_h", "residual",
                                                       "min_eig_A"});
        REQUIRE(csv.rows.size() == 2);
        for (const auto& row : csv.rows) {
            CHECK(std::strtod(row[4].c_str(), nullptr) > 0.0);
        }
    }
    {
        const fs::path path = temp_file("cngf.csv");
        RunSpec spec = parse_args({"cngf-check", "--h", "0.2", "--K", "100",
                                   "--tau-list", "0.02,0.01", "--T", "2",
                                   "--out", path.string()});
        CHECK(execute(spec) == 0);
        ParsedCsv csv = parse_csv(slurp(path));
        REQUIRE(csv.header == std::vector<std::string>{"tau", "steps",
                                                       "discrepancy_h1disc"});
        REQUIRE(csv.rows.size() == 2);
        CHECK(csv.rows[0][1] == "100");
        CHECK(csv.rows[1][1] == "200");
    }
}
