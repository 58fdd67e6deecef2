#include <doctest.h>

#include "crashsev/csv.hpp"
#include "crashsev/error.hpp"

using namespace crashsev;

TEST_CASE("plain rows parse into header and cells") {
  const auto t = parse_csv_text("a,b,c\n1,2,3\n4,5,6\n");
  REQUIRE(t.header.size() == 3);
  REQUIRE(t.rows.size() == 2);
  CHECK(t.header[0] == "a");
  CHECK(t.rows[1][2] == "6");
  CHECK(t.find_col("b") == 1);
  CHECK(t.find_col("missing") == -1);
}

TEST_CASE("quoted fields keep commas, quotes, and newlines") {
  const auto t = parse_csv_text(
      "name,note\n\"x,y\",\"she said \"\"hi\"\"\"\nplain,\"line1\nline2\"\n");
  REQUIRE(t.rows.size() == 2);
  CHECK(t.rows[0][0] == "x,y");
  CHECK(t.rows[0][1] == "she said \"hi\"");
  CHECK(t.rows[1][1] == "line1\nline2");
}

TEST_CASE("crlf line endings are tolerated") {
  const auto t = parse_csv_text("a,b\r\n1,2\r\n");
  REQUIRE(t.rows.size() == 1);
  CHECK(t.rows[0][1] == "2");
}

TEST_CASE("csv_field quotes only when necessary") {
  CHECK(csv_field("plain") == "plain");
  CHECK(csv_field("with,comma") == "\"with,comma\"");
  CHECK(csv_field("with \"quote\"") == "\"with \"\"quote\"\"\"");
  CHECK(csv_field("with\nnewline") == "\"with\nnewline\"");
  CHECK(csv_field("") == "");
}

TEST_CASE("serialize then parse round-trips awkward content") {
  CsvTable t;
  t.header = {"id", "text"};
  t.rows = {{"1", "a,b"}, {"2", "multi\nline"}, {"3", "quote \" inside"}};
  const auto back = parse_csv_text(to_csv_text(t));
  REQUIRE(back.rows.size() == t.rows.size());
  for (std::size_t i = 0; i < t.rows.size(); ++i) {
    CHECK(back.rows[i] == t.rows[i]);
  }
}

TEST_CASE("ragged row is an error") {
  CHECK_THROWS_AS(parse_csv_text("a,b\n1,2,3\n"), DataError);
}
