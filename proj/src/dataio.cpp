#include "suncast/dataio.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <random>
#include <sstream>

namespace suncast::data {

namespace {

constexpr std::int64_t kStepMinutes = 30;

// days since 1970-01-01 (civil calendar)
std::int64_t days_from_civil(int y, int m, int d) {
  y -= m <= 2;
  const std::int64_t era = (y >= 0 ? y : y - 399) / 400;
  const unsigned yoe = static_cast<unsigned>(y - era * 400);
  const unsigned doy = (153u * (m + (m > 2 ? -3 : 9)) + 2) / 5 + d - 1;
  const unsigned doe = yoe * 365 + yoe / 4 - yoe / 100 + doy;
  return era * 146097 + static_cast<std::int64_t>(doe) - 719468;
}

void civil_from_days(std::int64_t z, int& y, int& m, int& d) {
  z += 719468;
  const std::int64_t era = (z >= 0 ? z : z - 146096) / 146097;
  const unsigned doe = static_cast<unsigned>(z - era * 146097);
  const unsigned yoe = (doe - doe / 1460 + doe / 36524 - doe / 146096) / 365;
  const std::int64_t yy = static_cast<std::int64_t>(yoe) + era * 400;
  const unsigned doy = doe - (365 * yoe + yoe / 4 - yoe / 100);
  const unsigned mp = (5 * doy + 2) / 153;
  d = static_cast<int>(doy - (153 * mp + 2) / 5 + 1);
  m = static_cast<int>(mp + (mp < 10 ? 3 : -9));
  y = static_cast<int>(yy + (m <= 2));
}

std::vector<std::string> split_fields(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, sep)) out.push_back(field);
  if (!line.empty() && line.back() == sep) out.push_back("");
  return out;
}

std::string trim(const std::string& s) {
  const auto a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  const auto b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

}  // namespace

std::int64_t parse_iso8601_minutes(const std::string& s) {
  int y, mo, d, h, mi;
  int sec = 0;
  char sep;
  int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &y, &mo, &d, &sep, &h,
                      &mi, &sec);
  if (n < 6 || (sep != 'T' && sep != ' '))
    throw ParseError("bad timestamp: " + s);
  if (mo < 1 || mo > 12 || d < 1 || d > 31 || h < 0 || h > 23 || mi < 0 ||
      mi > 59 || sec != 0)
    throw ParseError("bad timestamp: " + s);
  return days_from_civil(y, mo, d) * 1440 + h * 60 + mi;
}

std::string format_iso8601_minutes(std::int64_t minutes) {
  std::int64_t day = minutes / 1440;
  std::int64_t rem = minutes % 1440;
  if (rem < 0) {
    rem += 1440;
    day -= 1;
  }
  int y, m, d;
  civil_from_days(day, y, m, d);
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%04d-%02d-%02dT%02lld:%02lld", y, m, d,
                static_cast<long long>(rem / 60),
                static_cast<long long>(rem % 60));
  return buf;
}

void Series::validate() const {
  if (timestamps.size() != values.size())
    throw InvalidValue("Series: timestamp/value length mismatch");
  for (std::size_t i = 0; i < values.size(); ++i) {
    if (!std::isfinite(values[i]) || values[i] < 0)
      throw InvalidValue("Series: non-finite or negative value at index " +
                         std::to_string(i));
    if (i > 0) {
      const std::int64_t dt = timestamps[i] - timestamps[i - 1];
      if (dt <= 0)
        throw NonMonotonicTimestamps("Series: non-increasing timestamp at " +
                                     format_iso8601_minutes(timestamps[i]));
      if (dt != kStepMinutes)
        throw GapError("Series: missing interval(s) after " +
                       format_iso8601_minutes(timestamps[i - 1]));
    }
  }
}

Series load_csv(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw NotFound("cannot open " + path);
  std::string line;
  bool header_seen = false;
  Series s;
  std::size_t lineno = 0;
  while (std::getline(f, line)) {
    ++lineno;
    line = trim(line);
    if (line.empty() || line[0] == '#') continue;
    if (!header_seen) {
      auto cols = split_fields(line, ',');
      if (cols.size() < 2 || trim(cols[0]) != "timestamp" ||
          trim(cols[1]) != "kwh")
        throw MissingColumn(path + ": expected header timestamp,kwh");
      header_seen = true;
      continue;
    }
    auto cols = split_fields(line, ',');
    if (cols.size() < 2)
      throw ParseError(path + ":" + std::to_string(lineno) + ": expected 2 fields");
    s.timestamps.push_back(parse_iso8601_minutes(trim(cols[0])));
    char* end = nullptr;
    const std::string vs = trim(cols[1]);
    const double v = std::strtod(vs.c_str(), &end);
    if (end == vs.c_str() || *end != '\0')
      throw ParseError(path + ":" + std::to_string(lineno) + ": bad kwh value");
    s.values.push_back(v);
  }
  if (!header_seen) throw MissingColumn(path + ": missing header");
  s.validate();
  return s;
}

void save_csv(const Series& s, const std::string& path,
              const std::string& header_comment) {
  std::ofstream f(path);
  if (!f) throw ParseError("cannot write " + path);
  if (!header_comment.empty()) f << "# " << header_comment << "\n";
  f << "timestamp,kwh\n";
  char buf[64];
  for (std::size_t i = 0; i < s.size(); ++i) {
    std::snprintf(buf, sizeof(buf), "%.17g", s.values[i]);
    f << format_iso8601_minutes(s.timestamps[i]) << "," << buf << "\n";
  }
}

Series convert_wide_csv(const std::string& path, const std::string& customer_id,
                        const std::string& category) {
  std::ifstream f(path);
  if (!f) throw NotFound("cannot open " + path);
  std::string line;
  if (!std::getline(f, line)) throw ParseError(path + ": empty file");
  auto header = split_fields(trim(line), ',');
  auto col = [&](const std::string& name) {
    for (std::size_t i = 0; i < header.size(); ++i)
      if (trim(header[i]) == name) return static_cast<int>(i);
    throw MissingColumn(path + ": missing column " + name);
  };
  const int c_customer = col("customer");
  const int c_category = col("category");
  const int c_date = col("date");
  // half-hour value columns are everything after the date column
  const int first_value = c_date + 1;
  if (static_cast<int>(header.size()) - first_value != 48)
    throw MissingColumn(path + ": expected 48 half-hour columns after date");

  struct DayRow {
    std::int64_t day_minutes;
    std::array<double, 48> vals;
  };
  std::vector<DayRow> rows;
  while (std::getline(f, line)) {
    line = trim(line);
    if (line.empty()) continue;
    auto cols = split_fields(line, ',');
    if (trim(cols[c_customer]) != customer_id) continue;
    if (trim(cols[c_category]) != category) continue;
    DayRow r;
    int y, mo, d;
    if (std::sscanf(trim(cols[c_date]).c_str(), "%d-%d-%d", &y, &mo, &d) != 3)
      throw ParseError(path + ": bad date " + cols[c_date]);
    r.day_minutes = days_from_civil(y, mo, d) * 1440;
    for (int i = 0; i < 48; ++i) {
      const std::string vs = trim(cols[first_value + i]);
      char* end = nullptr;
      r.vals[i] = std::strtod(vs.c_str(), &end);
      if (end == vs.c_str()) throw ParseError(path + ": bad value " + vs);
    }
    rows.push_back(r);
  }
  if (rows.empty())
    throw NotFound(path + ": no rows for customer " + customer_id +
                   " category " + category);
  std::sort(rows.begin(), rows.end(),
            [](const DayRow& a, const DayRow& b) { return a.day_minutes < b.day_minutes; });
  Series s;
  for (const auto& r : rows)
    for (int i = 0; i < 48; ++i) {
      s.timestamps.push_back(r.day_minutes + i * kStepMinutes);
      s.values.push_back(r.vals[i]);
    }
  s.validate();
  return s;
}

Scaler Scaler::fit(const std::vector<double>& train_values) {
  if (train_values.empty()) throw DegenerateScale("Scaler::fit: empty input");
  const auto [mn, mx] = std::minmax_element(train_values.begin(), train_values.end());
  if (*mx <= *mn) throw DegenerateScale("Scaler::fit: constant series");
  return {*mn, *mx};
}

std::vector<double> Scaler::transform(const std::vector<double>& v) const {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = transform(v[i]);
  return out;
}

std::vector<double> Scaler::inverse(const std::vector<double>& v) const {
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) out[i] = inverse(v[i]);
  return out;
}

WindowSet make_windows(const std::vector<double>& scaled, int k, int H) {
  if (k < 1 || H < 1) throw InvalidValue("make_windows: k and H must be >= 1");
  const int L = static_cast<int>(scaled.size());
  const int N = L - k - H + 1;
  if (N < 1)
    throw TooShort("make_windows: series length " + std::to_string(L) +
                   " < k + H = " + std::to_string(k + H));
  WindowSet ws;
  ws.k = k;
  ws.H = H;
  ws.inputs.resize(N, k);
  ws.targets.resize(N, H);
  for (int i = 0; i < N; ++i) {
    for (int j = 0; j < k; ++j) ws.inputs(i, j) = scaled[i + j];
    for (int h = 0; h < H; ++h) ws.targets(i, h) = scaled[i + k + h];
  }
  return ws;
}

SplitSeries split(const Series& s, double train_fraction,
                  double validation_fraction) {
  if (train_fraction <= 0 || train_fraction >= 1 || validation_fraction <= 0 ||
      validation_fraction >= 1)
    throw InvalidValue("split: fractions must lie in (0,1)");
  const std::size_t L = s.size();
  const std::size_t n_trainval =
      static_cast<std::size_t>(std::llround(train_fraction * static_cast<double>(L)));
  const std::size_t n_val = static_cast<std::size_t>(
      std::llround(validation_fraction * static_cast<double>(n_trainval)));
  const std::size_t n_train = n_trainval - n_val;
  if (n_train == 0 || n_val == 0 || n_trainval >= L)
    throw InvalidValue("split: degenerate segment sizes");
  auto slice = [&](std::size_t a, std::size_t b) {
    Series out;
    out.timestamps.assign(s.timestamps.begin() + a, s.timestamps.begin() + b);
    out.values.assign(s.values.begin() + a, s.values.begin() + b);
    return out;
  };
  return {slice(0, n_train), slice(n_train, n_trainval), slice(n_trainval, L)};
}

Series synth_solar(int days, std::uint64_t seed, double outlier_rate,
                   double outlier_scale) {
  if (days < 1) throw InvalidValue("synth_solar: days < 1");
  if (outlier_rate < 0 || outlier_rate >= 1)
    throw InvalidValue("synth_solar: outlier_rate must be in [0,1)");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> nd(0.0, 1.0);
  std::uniform_real_distribution<double> ud(0.0, 1.0);
  const std::int64_t start = days_from_civil(2012, 1, 1) * 1440;
  Series s;
  s.timestamps.reserve(static_cast<std::size_t>(days) * 48);
  s.values.reserve(static_cast<std::size_t>(days) * 48);
  double amplitude = 1.0;
  constexpr double kPi = 3.14159265358979323846;
  for (int d = 0; d < days; ++d) {
    amplitude = std::clamp(amplitude + 0.25 * nd(rng), 0.3, 1.5);
    for (int i = 0; i < 48; ++i) {
      const double hour = 0.5 * i;
      // daylight 06:00-18:00
      double env = hour > 6.0 && hour < 18.0
                       ? std::sin(kPi * (hour - 6.0) / 12.0)
                       : 0.0;
      double v = 0.0;
      if (env > 0.0) {
        v = amplitude * env * (1.0 + 0.50 * nd(rng));
        if (ud(rng) < outlier_rate) {
          const double sign = ud(rng) < 0.5 ? -1.0 : 1.0;
          v += sign * outlier_scale * amplitude * (0.5 + ud(rng));
        }
        v = std::max(v, 0.0);
      }
      s.timestamps.push_back(start + (static_cast<std::int64_t>(d) * 48 + i) *
                                          kStepMinutes);
      s.values.push_back(v);
    }
  }
  return s;
}

}  // namespace suncast::data
