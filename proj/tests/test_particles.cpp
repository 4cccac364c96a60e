#include <doctest.h>

TEST_SUITE("particles") {
TEST_CASE("placeholder") { CHECK(true); }
}
