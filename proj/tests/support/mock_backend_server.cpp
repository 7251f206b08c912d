// Mock inpainting backend behind the line protocol, for process-level tests.
#include <cstdlib>
#include <cstring>
#include <iostream>

#include "hsi/masking/protocol.hpp"

int main(int argc, char** argv) {
    hsi::MockInpaintBackend::Options o;
    for (int i = 1; i + 1 < argc; i += 2) {
        if (!std::strcmp(argv[i], "--drift")) o.drift = std::atof(argv[i + 1]);
        else if (!std::strcmp(argv[i], "--fail-at")) o.fail_at = std::atoi(argv[i + 1]);
        else if (!std::strcmp(argv[i], "--layers")) o.layers = std::atoi(argv[i + 1]);
    }
    hsi::MockInpaintBackend backend(o);
    hsi::serve_protocol(backend, std::cin, std::cout);
    return 0;
}
