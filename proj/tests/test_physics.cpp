#include <doctest.h>

TEST_SUITE("physics") {
TEST_CASE("placeholder") { CHECK(true); }
}
