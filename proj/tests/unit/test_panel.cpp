#include <sstream>

#include "doctest.h"
#include "fixtures.hpp"
#include "twfe/csv.hpp"
#include "twfe/error.hpp"
#include "twfe/panel.hpp"

using namespace twfe;
using doctest::Approx;

namespace {

ErrorCode code_of(auto&& f) {
  try {
    f();
  } catch (const Error& e) {
    return e.code();
  }
  FAIL("expected an error");
  return ErrorCode::InvalidArgument;
}

std::vector<Observation> parse(const std::string& text, ColumnMap map = {}) {
  std::istringstream in(text);
  return observations_from_csv(read_csv(in), map);
}

}  // namespace

TEST_CASE("aggregation to cell means") {
  const auto obs = parse(
      "group,time,outcome,treatment\n"
      "b,2,4,1\n"
      "a,1,1,0\n"
      "a,1,3,0\n"
      "a,2,2,0\n"
      "b,1,5,0\n"
      "b,2,6,1\n");
  const CellTable c = aggregate_cells(obs);
  REQUIRE(c.groups() == 2);
  REQUIRE(c.periods() == 2);
  CHECK(c.group_labels()[0] == "a");
  CHECK(c.count(0, 0) == 2);
  CHECK(c.outcome(0, 0) == Approx(2.0));
  CHECK(c.outcome(1, 1) == Approx(5.0));
  CHECK(c.treatment(1, 1) == 1);
  CHECK(c.total_count() == 6);
  CHECK(c.treated_count() == 2);
  CHECK(c.period_treatment_mean(1) == Approx(2.0 / 3));
}

TEST_CASE("cell-level rows with a count column") {
  const auto obs = parse(
      "g,t,y,d,n\n"
      "1,1,2.0,0,3\n"
      "1,2,2.5,1,3\n"
      "2,1,1.0,0,2\n"
      "2,2,1.5,0,2\n",
      ColumnMap{"g", "t", "y", "d", std::nullopt, std::string("n")});
  const CellTable c = aggregate_cells(obs);
  CHECK(c.count(0, 1) == 3);
  CHECK(c.total_count() == 10);
}

TEST_CASE("numeric label order") {
  CHECK(sorted_labels({"10", "9", "2"}) == std::vector<std::string>{"2", "9", "10"});
  CHECK(sorted_labels({"b", "10", "a"}) == std::vector<std::string>{"10", "a", "b"});
}

TEST_CASE("validation errors") {
  CHECK(code_of([] { aggregate_cells(parse("group,time,outcome,treatment\n")); }) == ErrorCode::EmptyInput);
  CHECK(code_of([] { aggregate_cells(parse("group,time,outcome,treatment\na,1,1,0.5\n")); }) ==
        ErrorCode::InvalidTreatment);
  CHECK(code_of([] { aggregate_cells(parse("group,time,outcome,treatment\na,1,1,0\na,1,2,1\n")); }) ==
        ErrorCode::MixedTreatmentInCell);
  CHECK(code_of([] {
          aggregate_cells(parse("unit,group,time,outcome,treatment\nu,a,1,1,0\nu,a,1,2,0\n"));
        }) == ErrorCode::DuplicateObservation);
  CHECK(code_of([] {
          aggregate_cells(parse("group,time,outcome,treatment\na,1,1,0\na,2,1,0\nb,1,1,0\n"));
        }) == ErrorCode::MissingCell);
  CHECK(code_of([] { parse("group,time,outcome\na,1,1\n"); }) == ErrorCode::MissingColumn);
  CHECK(code_of([] { parse("group,time,outcome,treatment\na,1,x,0\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { parse("group,time,outcome,treatment\na,1,1\n"); }) == ErrorCode::ParseError);
  CHECK(code_of([] { read_csv_file("/nonexistent/file.csv"); }) == ErrorCode::IoError);
}

TEST_CASE("quoted fields, CRLF and BOM") {
  const auto obs = parse("\xEF\xBB\xBFgroup,time,outcome,treatment\r\n\"a, inc\",1,\"2.5\",0\r\n\r\n");
  REQUIRE(obs.size() == 1);
  CHECK(obs[0].group == "a, inc");
  CHECK(obs[0].outcome == 2.5);
}

TEST_CASE("treatments within rounding of 0/1 are snapped") {
  const CellTable c = aggregate_cells(parse("group,time,outcome,treatment\na,1,1,1.0000000001\n"));
  CHECK(c.treatment(0, 0) == 1);
}

TEST_CASE("design report") {
  const DesignReport two = validate_design(fixture::two_by_three());
  CHECK(two.is_staggered);
  CHECK(two.constant_growth);
  CHECK(two.time_invariant_counts);
  CHECK(two.stable_groups_ok[1]);
  CHECK_FALSE(two.stable_groups_ok[2]);
  CHECK_FALSE(two.all_stable_groups_ok());

  const DesignReport three = validate_design(fixture::three_groups());
  CHECK(three.all_stable_groups_ok());

  const DesignReport general = validate_design(fixture::from_paths({"010", "000"}));
  CHECK_FALSE(general.is_staggered);

  const DesignReport growth =
      validate_design(fixture::from_paths({"001", "011"}, {}, {1, 2, 4, 3, 6, 12}));
  CHECK(growth.constant_growth);
  CHECK_FALSE(growth.time_invariant_counts);
  const DesignReport uneven = validate_design(fixture::from_paths({"001", "011"}, {}, {1, 2, 4, 3, 6, 11}));
  CHECK_FALSE(uneven.constant_growth);
}

TEST_CASE("resampling relabels duplicates") {
  const CellTable c = fixture::two_by_three();
  const std::vector<int> draw{1, 1, 0};
  const CellTable r = c.select_groups(draw);
  REQUIRE(r.groups() == 3);
  CHECK(r.group_labels()[0] == "2");
  CHECK(r.group_labels()[1] == "2#1");
  CHECK(r.group_labels()[2] == "1");
  for (int t = 0; t < 3; ++t) {
    CHECK(r.outcome(1, t) == c.outcome(1, t));
    CHECK(r.treatment(2, t) == c.treatment(0, t));
  }
  const std::vector<int> bad{2};
  CHECK(code_of([&] { c.select_groups(bad); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("error names") {
  CHECK(error_name(ErrorCode::NoSwitchers) == "NoSwitchers");
  CHECK(Error(ErrorCode::MissingColumn, "x").name() == "MissingColumn");
}
