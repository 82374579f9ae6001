#pragma once

#include <string>
#include <variant>
#include <vector>

#include "imagtime/flow.hpp"

namespace imagtime::cli {

class UsageError : public Error {
public:
    using Error::Error;
};

/// Thrown by parse_args when --help is requested; carries the help text.
struct HelpRequested {
    std::string text;
};

enum class Command {
    Solve,
    GroundState,
    SweepH,
    SweepK,
    SweepTau,
    CompareSchemes,
    Coercivity,
    CngfCheck,
};

struct RunSpec {
    Command command = Command::Solve;

    double h = 0.1;
    int K = 400;
    double tau = 0.1;
    SchemeKind scheme = SchemeKind::LinearlyImplicit;
    long max_iters = 100000;
    double tol = 1e-12;
    InitSpec init{InitKind::Perturbed, 0.05, 0};
    long record_every = 1;
    bool with_errors = false; // solve: fill the err_* columns (needs a reference)

    double kh = 40.0;                 // fixed K*h product for sweep-h
    std::vector<double> h_list;       // sweep-h
    std::vector<double> kh_list;      // sweep-k
    std::vector<double> tau_list;     // sweep-tau, cngf-check
    double cngf_dt = 1e-3;            // cngf-check
    double cngf_time = 5.0;           // cngf-check

    int threads = 0; // 0 = hardware concurrency; IMAGTIME_THREADS overrides, flag wins

    std::string out;
};

/// Parses argv (excluding the program name) into a validated RunSpec.
/// Throws UsageError on unknown flags, out-of-range values, or a missing
/// output path.
RunSpec parse_args(const std::vector<std::string>& args);

/// Runs the experiment and writes the CSV. Returns the process exit code:
/// 0 success, 1 solver nonconvergence (partial CSV written), 3 I/O failure.
int execute(const RunSpec& spec);

/// One CSV cell: empty, a double (17 significant digits, scientific), an
/// integer, or verbatim text.
using Cell = std::variant<std::monostate, double, long long, std::string>;

struct CsvReport {
    std::vector<std::string> header;
    std::vector<std::vector<Cell>> rows;
    std::vector<std::string> leading_comments;  // written before the header
    std::vector<std::string> trailing_comments; // written after the data
};

std::string format_cell(const Cell& cell);

/// UTF-8, comma-separated, LF line endings, '#' comment lines; numeric
/// cells re-parse to the exact in-memory value.
void write_csv(const CsvReport& report, const std::string& path);

} // namespace imagtime::cli
