#include <doctest.h>

TEST_SUITE("linalg") {
TEST_CASE("placeholder") { CHECK(true); }
}
