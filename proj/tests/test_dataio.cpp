#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>
#include <vector>

#include "suncast/dataio.hpp"

using namespace suncast;

namespace {

struct TempFile {
  std::string path;
  explicit TempFile(const std::string& contents) {
    static int counter = 0;
    path = "suncast_test_" + std::to_string(counter++) + ".csv";
    std::ofstream f(path);
    f << contents;
  }
  ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("iso8601 minute parsing round trips") {
  CHECK(data::parse_iso8601_minutes("1970-01-01T00:00") == 0);
  CHECK(data::parse_iso8601_minutes("1970-01-01T00:30") == 30);
  CHECK(data::parse_iso8601_minutes("1970-01-02T00:00") == 1440);
  for (const std::string& s :
       {"2012-01-01T00:00", "2013-02-28T23:30", "2016-02-29T12:00", "1999-12-31T23:30"}) {
    CHECK(data::format_iso8601_minutes(data::parse_iso8601_minutes(s)) == s);
  }
  CHECK_THROWS_AS(data::parse_iso8601_minutes("not-a-time"), ParseError);
  CHECK_THROWS_AS(data::parse_iso8601_minutes("2012-13-01T00:00"), ParseError);
}

TEST_CASE("load_csv reads the long format and skips comments") {
  TempFile f(
      "# generated fixture\n"
      "timestamp,kwh\n"
      "2012-01-01T00:00,0.0\n"
      "2012-01-01T00:30,0.5\n"
      "2012-01-01T01:00,1.25\n");
  auto s = data::load_csv(f.path);
  REQUIRE(s.size() == 3);
  CHECK(s.values[1] == doctest::Approx(0.5));
  CHECK(s.timestamps[2] - s.timestamps[0] == 60);
}

TEST_CASE("loader rejects malformed inputs with typed errors") {
  SUBCASE("missing header") {
    TempFile f("time,energy\n2012-01-01T00:00,0.0\n");
    CHECK_THROWS_AS(data::load_csv(f.path), MissingColumn);
  }
  SUBCASE("gap in timestamps") {
    TempFile f(
        "timestamp,kwh\n"
        "2012-01-01T00:00,0.0\n"
        "2012-01-01T01:00,0.5\n");
    CHECK_THROWS_AS(data::load_csv(f.path), GapError);
  }
  SUBCASE("duplicate / out-of-order timestamps") {
    TempFile f(
        "timestamp,kwh\n"
        "2012-01-01T00:30,0.0\n"
        "2012-01-01T00:30,0.5\n");
    CHECK_THROWS_AS(data::load_csv(f.path), NonMonotonicTimestamps);
  }
  SUBCASE("negative generation") {
    TempFile f(
        "timestamp,kwh\n"
        "2012-01-01T00:00,-1.0\n");
    CHECK_THROWS_AS(data::load_csv(f.path), InvalidValue);
  }
  SUBCASE("non-numeric value") {
    TempFile f(
        "timestamp,kwh\n"
        "2012-01-01T00:00,abc\n");
    CHECK_THROWS_AS(data::load_csv(f.path), ParseError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(data::load_csv("definitely_missing_file.csv"), NotFound);
  }
}

TEST_CASE("save_csv then load_csv round trips values exactly") {
  data::Series s;
  for (int i = 0; i < 5; ++i) {
    s.timestamps.push_back(static_cast<std::int64_t>(22118400 + 30 * i));
    s.values.push_back(0.123456789012345 * i);
  }
  TempFile f("");
  data::save_csv(s, f.path, "round trip fixture");
  auto back = data::load_csv(f.path);
  REQUIRE(back.size() == s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    CHECK(back.timestamps[i] == s.timestamps[i]);
    CHECK(back.values[i] == doctest::Approx(s.values[i]).epsilon(1e-14));
  }
}

TEST_CASE("wide-format converter extracts one customer's generation rows") {
  auto day_row = [](const std::string& cust, const std::string& cat,
                    const std::string& date, double base) {
    std::string row = cust + "," + cat + "," + date;
    for (int i = 0; i < 48; ++i) row += "," + std::to_string(base + 0.01 * i);
    return row + "\n";
  };
  std::string header = "customer,category,date";
  for (int i = 0; i < 48; ++i) header += ",v" + std::to_string(i);
  // rows deliberately shuffled and interleaved with other customers
  TempFile f(header + "\n" +
             day_row("7", "GG", "2012-7-2", 2.0) +
             day_row("7", "GC", "2012-7-1", 9.0) +
             day_row("8", "GG", "2012-7-1", 5.0) +
             day_row("7", "GG", "2012-7-1", 1.0));
  auto s = data::convert_wide_csv(f.path, "7", "GG");
  REQUIRE(s.size() == 96);
  // sorted by day, half-hour cadence, values from the matching rows only
  CHECK(s.values[0] == doctest::Approx(1.0));
  CHECK(s.values[47] == doctest::Approx(1.47));
  CHECK(s.values[48] == doctest::Approx(2.0));
  CHECK(s.timestamps[1] - s.timestamps[0] == 30);
  CHECK(s.timestamps[48] - s.timestamps[47] == 30);
  CHECK(s.timestamps.front() == data::parse_iso8601_minutes("2012-07-01T00:00"));

  CHECK_THROWS_AS(data::convert_wide_csv(f.path, "42", "GG"), NotFound);
}

TEST_CASE("scaler maps train extrema to [0,1] and extrapolates linearly") {
  std::vector<double> train = {2.0, 4.0, 6.0, 12.0};
  auto sc = data::Scaler::fit(train);
  CHECK(sc.transform(2.0) == doctest::Approx(0.0));
  CHECK(sc.transform(12.0) == doctest::Approx(1.0));
  CHECK(sc.transform(13.0) == doctest::Approx(1.1));
  CHECK(sc.inverse(sc.transform(7.7)) == doctest::Approx(7.7).epsilon(1e-14));
  auto vec = sc.transform(train);
  auto back = sc.inverse(vec);
  for (std::size_t i = 0; i < train.size(); ++i)
    CHECK(back[i] == doctest::Approx(train[i]).epsilon(1e-14));
  CHECK_THROWS_AS(data::Scaler::fit(std::vector<double>{3.0, 3.0, 3.0}), DegenerateScale);
  CHECK_THROWS_AS(data::Scaler::fit(std::vector<double>{}), DegenerateScale);
}

TEST_CASE("window counts and alignment") {
  {
    std::vector<double> v = {1.0, 2.0, 3.0};
    auto ws = data::make_windows(v, 1, 1);
    REQUIRE(ws.count() == 2);
    CHECK(ws.inputs(0, 0) == doctest::Approx(1.0));
    CHECK(ws.targets(0, 0) == doctest::Approx(2.0));
    CHECK(ws.inputs(1, 0) == doctest::Approx(2.0));
    CHECK(ws.targets(1, 0) == doctest::Approx(3.0));
  }
  {
    std::vector<double> v(100);
    for (int i = 0; i < 100; ++i) v[i] = i;
    auto ws = data::make_windows(v, 48, 48);
    REQUIRE(ws.count() == 5);  // 100 - 48 - 48 + 1
    CHECK(ws.inputs(4, 0) == doctest::Approx(4.0));
    CHECK(ws.inputs(4, 47) == doctest::Approx(51.0));
    CHECK(ws.targets(4, 0) == doctest::Approx(52.0));
    CHECK(ws.targets(4, 47) == doctest::Approx(99.0));
  }
  CHECK_THROWS_AS(data::make_windows(std::vector<double>{1.0, 2.0}, 2, 1), TooShort);
}

TEST_CASE("chronological split carves validation from the training tail") {
  data::Series s;
  for (int i = 0; i < 100; ++i) {
    s.timestamps.push_back(30LL * i);
    s.values.push_back(static_cast<double>(i));
  }
  auto sp = data::split(s, 0.8, 0.25);
  CHECK(sp.train.size() == 60);
  CHECK(sp.validation.size() == 20);
  CHECK(sp.test.size() == 20);
  CHECK(sp.train.values.front() == doctest::Approx(0.0));
  CHECK(sp.train.values.back() == doctest::Approx(59.0));
  CHECK(sp.validation.values.front() == doctest::Approx(60.0));
  CHECK(sp.test.values.front() == doctest::Approx(80.0));
  CHECK_THROWS_AS(data::split(s, 0.0, 0.2), InvalidValue);
  CHECK_THROWS_AS(data::split(s, 0.8, 1.0), InvalidValue);
}

TEST_CASE("synthetic generator: determinism, cadence, night zeros, outliers") {
  auto a = data::synth_solar(10, 7, 0.02, 3.0);
  auto b = data::synth_solar(10, 7, 0.02, 3.0);
  REQUIRE(a.size() == 480);  // 48 half-hours per day
  CHECK(a.timestamps == b.timestamps);
  CHECK(a.values == b.values);
  a.validate();

  // starts 2012-01-01T00:00 and steps by 30 minutes
  CHECK(a.timestamps.front() == data::parse_iso8601_minutes("2012-01-01T00:00"));
  CHECK(a.timestamps[1] - a.timestamps[0] == 30);

  // nights are exactly zero; days produce something.
  double day_total = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    int half_hour = static_cast<int>(i % 48);
    double hour = half_hour / 2.0;
    if (hour < 6.0 || hour >= 18.0) {
      CHECK(a.values[i] == 0.0);
    } else {
      day_total += a.values[i];
    }
    CHECK(a.values[i] >= 0.0);
  }
  CHECK(day_total > 0.0);

  auto c = data::synth_solar(10, 8, 0.02, 3.0);
  CHECK(a.values != c.values);

  // outlier_rate=0 removes spikes: higher rate must change the series
  auto clean = data::synth_solar(10, 7, 0.0, 3.0);
  CHECK(clean.values != a.values);
}

TEST_CASE("series validate catches bad cadence") {
  data::Series s;
  s.timestamps = {0, 30, 75};
  s.values = {0.0, 0.0, 0.0};
  CHECK_THROWS_AS(s.validate(), GapError);
  s.timestamps = {0, 30, 30};
  CHECK_THROWS_AS(s.validate(), NonMonotonicTimestamps);
  s.timestamps = {0, 30, 60};
  s.values = {0.0, -0.5, 0.0};
  CHECK_THROWS_AS(s.validate(), InvalidValue);
}
