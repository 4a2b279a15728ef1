#include <sstream>

#include "doctest.h"
#include "popnet/errors.hpp"
#include "popnet/kvconfig.hpp"

using namespace popnet;

namespace {
KeyValues parse(const std::string& text) {
  std::istringstream in(text);
  return KeyValues::parse(in);
}
}  // namespace

TEST_SUITE("kvconfig") {

TEST_CASE("parses comments, blanks and trimmed values") {
  const auto kv = parse("# header\n\n  H =  30  \nmu=0.5 # trailing\nname = a b\n");
  CHECK(kv.get_int("H") == 30);
  CHECK(kv.get_double("mu") == 0.5);
  CHECK(kv.raw("name") == "a b");
  CHECK_FALSE(kv.get("missing").has_value());
  CHECK(kv.get_double("missing", 2.5) == 2.5);
}

TEST_CASE("errors carry line numbers and key names") {
  try {
    parse("a = 1\nnot a pair\n");
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
  }
  CHECK_THROWS_AS(parse("a = 1\na = 2\n"), ParseError);
  const auto kv = parse("H = abc\nx = 1.5\n");
  CHECK_THROWS_WITH_AS(kv.get_int("H"), doctest::Contains("H"), ConfigError);
  CHECK_THROWS_AS(kv.get_int("x"), ConfigError);
  CHECK_THROWS_AS(kv.raw("nope"), ConfigError);
}

TEST_CASE("lists and canonical text") {
  const auto kv = parse("nu = 0.25, 0.25 0.5\nb = 2\na = 1\n");
  CHECK(kv.get_doubles("nu") == std::vector<double>{0.25, 0.25, 0.5});
  CHECK(kv.to_text() == "a = 1\nb = 2\nnu = 0.25, 0.25 0.5\n");
  const auto again = parse(kv.to_text());
  CHECK(again.entries() == kv.entries());
}

TEST_CASE("u64 seeds") {
  const auto kv = parse("seed = 18446744073709551615\nneg = -1\n");
  CHECK(kv.get_u64("seed") == 18446744073709551615ULL);
  CHECK_THROWS_AS(kv.get_u64("neg"), ConfigError);
}

}  // TEST_SUITE
