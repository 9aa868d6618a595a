#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "rieszlab/cli.hpp"

using namespace rieszlab;

TEST_CASE("placeholder") { CHECK(true); }
