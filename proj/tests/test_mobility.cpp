#include <gtest/gtest.h>

#include "anonsim/mobility.hpp"

using namespace anonsim;
using namespace anonsim::mobility;

TEST(ParseCheckins, GroupsAndSorts) {
  auto traces = parse_checkins(
      "user,date,country\n"
      "u1,2016-01-02,US\n"
      "u2,2016-01-01,FR\n"
      "u1,2016-01-01,DE\n");
  ASSERT_EQ(traces.size(), 2u);
  EXPECT_EQ(traces[0].user, "u1");
  EXPECT_EQ(traces[0].n_points(), 2u);
  EXPECT_EQ(traces[0].checkins[0].country, "DE");  // sorted by day
  EXPECT_EQ(traces[0].checkins[1].country, "US");
  EXPECT_EQ(traces[1].user, "u2");
  EXPECT_EQ(traces[1].n_points(), 1u);
}

TEST(ParseCheckins, EmptyAndErrors) {
  EXPECT_TRUE(parse_checkins("").empty());
  EXPECT_TRUE(parse_checkins("user,date,country\n").empty());
  EXPECT_THROW(parse_checkins("user,date,country\nu1,2016-13-01,US\n"), ParseError);
  EXPECT_THROW(parse_checkins("user,date,country\nu1,2015-02-29,US\n"), ParseError);
  EXPECT_THROW(parse_checkins("user,date,country\nu1,2016-01-01\n"), ParseError);
  EXPECT_THROW(parse_checkins("bad header\n"), ParseError);
  // leap day parses
  EXPECT_EQ(parse_checkins("user,date,country\nu1,2016-02-29,US\n").size(), 1u);
}

TEST(Dates, RoundTrip) {
  for (std::int64_t day : {std::int64_t{0}, std::int64_t{16801}, std::int64_t{17000},
                           std::int64_t{-1}}) {
    auto s = format_iso_date(day);
    EXPECT_EQ(parse_iso_date(s, 1), day) << s;
  }
  EXPECT_EQ(format_iso_date(16801), "2016-01-01");
}

TEST(CountrySequence, FirstAppearanceOrder) {
  MobilityTrace t;
  t.user = "u";
  std::int64_t day = 0;
  for (const char* c : {"US", "FR", "US", "DE"})
    t.checkins.push_back({"u", day++, c});
  EXPECT_EQ(country_sequence(t), (std::vector<std::string>{"US", "FR", "DE"}));

  MobilityTrace single{"u", {{"u", 0, "US"}}};
  EXPECT_EQ(country_sequence(single), std::vector<std::string>{"US"});
  EXPECT_TRUE(country_sequence(MobilityTrace{}).empty());
}

TEST(AsSequence, MappingAndCollapse) {
  CountryAsMap map;
  map.mapping = {{"US", 6}, {"FR", 4}, {"CA", 6}};
  MobilityTrace t{"u", {{"u", 0, "US"}, {"u", 1, "FR"}}};
  EXPECT_EQ(as_sequence(t, map), (std::vector<AsId>{6, 4}));

  MobilityTrace collapse{"u", {{"u", 0, "US"}, {"u", 1, "CA"}}};
  EXPECT_EQ(as_sequence(collapse, map), (std::vector<AsId>{6}));

  MobilityTrace unmapped{"u", {{"u", 0, "US"}, {"u", 1, "XX"}}};
  try {
    as_sequence(unmapped, map);
    FAIL() << "expected ValidationError";
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("XX"), std::string::npos);
  }
}

TEST(AsSequence, NeverHasConsecutiveDuplicates) {
  CountryAsMap map;
  map.mapping = {{"A", 1}, {"B", 1}, {"C", 2}, {"D", 3}};
  auto traces = gen_mobility_traces(20, 30, {"A", "B", "C", "D"}, 0.5, 99);
  for (const auto& t : traces) {
    auto seq = as_sequence(t, map);
    for (std::size_t i = 1; i < seq.size(); ++i) EXPECT_NE(seq[i], seq[i - 1]);
  }
}

TEST(ParseCountryMap, BasicAndErrors) {
  auto map = parse_country_map("country,asn\nUS,6\nFR,4\n");
  EXPECT_EQ(map.at("US"), 6u);
  EXPECT_EQ(map.at("FR"), 4u);
  EXPECT_THROW(map.at("XX"), ValidationError);
  EXPECT_THROW(parse_country_map("country,asn\nUS,0\n"), ParseError);
  EXPECT_THROW(parse_country_map("country,asn\nUS,6\nUS,4\n"), ParseError);
}

TEST(GenTraces, DegenerateAndDeterministic) {
  auto frozen = gen_mobility_traces(5, 10, {"US", "FR", "DE"}, 0.0, 1);
  for (const auto& t : frozen) EXPECT_EQ(country_sequence(t).size(), 1u);

  auto none = gen_mobility_traces(3, 0, {"US"}, 0.5, 1);
  ASSERT_EQ(none.size(), 3u);
  for (const auto& t : none) EXPECT_EQ(t.n_points(), 0u);

  auto a = gen_mobility_traces(5, 10, {"US", "FR"}, 0.5, 7);
  auto b = gen_mobility_traces(5, 10, {"US", "FR"}, 0.5, 7);
  EXPECT_EQ(checkins_to_csv(a), checkins_to_csv(b));
  EXPECT_THROW(gen_mobility_traces(1, 1, {}, 0.5, 1), ValidationError);
}

TEST(GenTraces, CsvRoundTrip) {
  auto traces = gen_mobility_traces(4, 6, {"US", "FR", "DE"}, 0.6, 13);
  auto parsed = parse_checkins(checkins_to_csv(traces));
  ASSERT_EQ(parsed.size(), traces.size());
  for (std::size_t i = 0; i < traces.size(); ++i) {
    EXPECT_EQ(parsed[i].user, traces[i].user);
    EXPECT_EQ(country_sequence(parsed[i]), country_sequence(traces[i]));
  }
}

TEST(DayLocations, LastCheckinOfDayWins) {
  CountryAsMap map;
  map.mapping = {{"US", 6}, {"FR", 4}};
  MobilityTrace t{"u", {{"u", 3, "US"}, {"u", 3, "FR"}, {"u", 5, "US"}}};
  auto locs = day_locations(t, map);
  EXPECT_EQ(locs.size(), 2u);
  EXPECT_EQ(locs.at(3), 4u);
  EXPECT_EQ(locs.at(5), 6u);
}
