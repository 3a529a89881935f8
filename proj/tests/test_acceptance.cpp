#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdio>

#include "gldeg/acceptance.hpp"

using namespace gldeg;

TEST_CASE("acceptance battery: one line per criterion") {
    auto results = run_acceptance();
    REQUIRE(results.size() == 12);
    for (const auto& r : results) {
        std::printf("criterion %2d [%s] %-45s %s\n", r.id, r.pass ? "PASS" : "FAIL",
                    r.name.c_str(), r.detail.c_str());
        std::fflush(stdout);
        CHECK_MESSAGE(r.pass, r.name, ": ", r.detail);
    }
}
