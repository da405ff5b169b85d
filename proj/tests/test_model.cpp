#include <doctest.h>

#include "photofeedback/model.hpp"

using namespace photofeedback;

TEST_CASE("default scenario validates") {
    ScenarioConfig c;
    c.overdamped = true;
    auto r = validate(c);
    CHECK(r.ok());
}
