// Prints one PASS/FAIL line per acceptance criterion; exits 1 if any fail.

#include "momentray/acceptance.hpp"

#include <iostream>

int main() {
    momentray::AcceptanceOptions opt;
    bool ok = true;
    momentray::run_acceptance(opt, [&](const momentray::CriterionResult& r) {
        std::cout << momentray::format_line(r) << std::endl;
        ok = ok && r.pass;
    });
    return ok ? 0 : 1;
}
