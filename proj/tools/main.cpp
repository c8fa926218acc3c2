#include "tamed/cli.hpp"

#include <iostream>

int main(int argc, char** argv) {
    tamed::cli::RunConfig config;
    try {
        config = tamed::cli::parse_args(argc, argv);
    } catch (const tamed::cli::UsageError& e) {
        (e.exit_code() == 0 ? std::cout : std::cerr) << e.what() << '\n';
        return e.exit_code();
    }
    return tamed::cli::run(config, std::cout, std::cerr);
}
