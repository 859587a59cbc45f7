#include <cstdlib>
#include <iostream>
#include <string>

#include "kalikow/validation.hpp"

int main(int argc, char** argv) {
    kalikow::validation::SuiteOptions options;
    if (const char* s = std::getenv("KALIKOW_ACCEPTANCE_SCALE")) options.scale = std::stod(s);
    if (argc > 1) options.seed = std::stoull(argv[1]);
    int failed = 0;
    for (const auto& name : kalikow::validation::suite_names()) {
        try {
            const auto report = kalikow::validation::run_suite(name, options);
            std::cout << report.summary_line() << std::endl;
            failed += report.passed ? 0 : 1;
        } catch (const std::exception& e) {
            std::cout << "FAIL  " << name << ": error: " << e.what() << std::endl;
            ++failed;
        }
    }
    std::cout << (failed ? "acceptance: " + std::to_string(failed) + " criteria failed" : "acceptance: all criteria passed")
              << std::endl;
    return failed ? 1 : 0;
}
