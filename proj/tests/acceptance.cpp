#include <cstdio>
#include <cstdlib>
#include <string>

#include "condaj/check.hpp"

int main(int argc, char** argv) {
    condaj::CheckOptions options;
    for (int i = 1; i < argc; ++i) {
        const std::string arg = argv[i];
        if (arg == "--quick") options.quick = true;
        else if (arg == "--seed" && i + 1 < argc) options.seed = std::strtoull(argv[++i], nullptr, 10);
        else if (arg == "--threads" && i + 1 < argc) options.threads = std::strtoull(argv[++i], nullptr, 10);
        else {
            std::fprintf(stderr, "usage: condaj_acceptance [--quick] [--seed N] [--threads N]\n");
            return 2;
        }
    }
    options.on_result = [](const condaj::CriterionResult& r) {
        std::printf("%s\n", condaj::format_result(r).c_str());
        std::fflush(stdout);
    };
    const auto results = condaj::run_acceptance(options);
    int failed = 0;
    for (const auto& r : results)
        if (!r.passed && !r.skipped) ++failed;
    std::printf("%d of %zu criteria failed\n", failed, results.size());
    return failed == 0 ? 0 : 1;
}
