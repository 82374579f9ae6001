#include <cstdio>
#include <string>
#include <vector>

#include "cli.hpp"

int main(int argc, char** argv) {
    const std::vector<std::string> args(argv + 1, argv + argc);
    try {
        const imagtime::cli::RunSpec spec = imagtime::cli::parse_args(args);
        return imagtime::cli::execute(spec);
    } catch (const imagtime::cli::HelpRequested& help) {
        std::fputs(help.text.c_str(), stdout);
        return 0;
    } catch (const imagtime::cli::UsageError& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 2;
    } catch (const imagtime::Error& e) {
        std::fprintf(stderr, "error: %s\n", e.what());
        return 1;
    }
}
