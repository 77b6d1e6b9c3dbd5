#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "gale/common.hpp"
#include "gale/csv.hpp"
#include "gale/rng.hpp"

namespace gale::ingest {

struct DateTime {
  int year = 0, month = 0, day = 0, hour = 0, minute = 0;
  auto operator<=>(const DateTime&) const = default;

  /// Accepts "YYYY-MM-DD HH:MM" with an optional ":SS" (seconds dropped) and
  /// 'T' as an alternative separator.
  static std::optional<DateTime> parse(const std::string& s) {
    DateTime dt;
    int sec = 0;
    char sep = 0;
    const int n = std::sscanf(s.c_str(), "%d-%d-%d%c%d:%d:%d", &dt.year, &dt.month, &dt.day, &sep,
                              &dt.hour, &dt.minute, &sec);
    if (n < 6 || (sep != ' ' && sep != 'T')) return std::nullopt;
    if (dt.month < 1 || dt.month > 12 || dt.day < 1 || dt.day > 31) return std::nullopt;
    if (dt.hour < 0 || dt.hour > 23 || dt.minute < 0 || dt.minute > 59) return std::nullopt;
    return dt;
  }

  std::string to_string() const {
    char buf[24];
    std::snprintf(buf, sizeof(buf), "%04d-%02d-%02d %02d:%02d", year, month, day, hour, minute);
    return buf;
  }
};

struct Station {
  std::string site_name;
  double latitude = 0.0;
  double longitude = 0.0;
};

using StationTable = std::map<std::string, Station>;

/// The ten coastal measuring sites of the source network.
inline StationTable default_station_table() {
  return {
      {"WM01", {"Alexander Bay", -28.583331, 16.4833}},
      {"WM02", {"Calvinia", -31.4707, 19.7760}},
      {"WM03", {"Vredendal", -31.6391, 18.5285}},
      {"WM04", {"Vredenburg", -32.9000, 17.9833}},
      {"WM05", {"Napier", -34.4667, 19.9000}},
      {"WM06", {"Sutherland", -32.3743, 20.8064}},
      {"WM07", {"Prince Albert", -33.2167, 22.0333}},
      {"WM08", {"Humansdorp", -34.0027, 24.7440}},
      {"WM09", {"Noupoort", -31.1874, 24.9499}},
      {"WM10", {"Butterworth", -32.3308, 28.1498}},
  };
}

/// station_id,site_name,latitude,longitude with a header row.
inline StationTable read_station_table(const std::string& path) {
  csv::Reader rd(path);
  const int c_id = rd.require_column("station_id");
  const int c_name = rd.require_column("site_name");
  const int c_lat = rd.require_column("latitude");
  const int c_lon = rd.require_column("longitude");
  StationTable table;
  std::vector<std::string> f;
  while (rd.next(f)) {
    Station s;
    s.site_name = f.at(c_name);
    if (!csv::parse_double(f.at(c_lat), s.latitude) || !csv::parse_double(f.at(c_lon), s.longitude))
      throw data_error(path + ": bad coordinates at line " + std::to_string(rd.line_number()));
    table[f.at(c_id)] = s;
  }
  if (table.empty()) throw data_error(path + ": no stations");
  return table;
}

struct WindRecord {
  std::string station_id;
  DateTime date_time;
  double latitude = 0.0, longitude = 0.0;
  int year = 0, month = 0;
  double altitude = 0.0;
  double wind_speed = 0.0;
  double wind_direct_avg = 0.0;
  double cos_direct = 0.0, sin_direct = 0.0;
  int f_month = 0;   // repeating month index, 1..12
  int c_month = 0;   // consecutive month index from the dataset origin, >= 1

  bool operator==(const WindRecord&) const = default;
};

struct SkipReport {
  std::size_t total_rows = 0;
  std::size_t kept = 0;
  std::size_t bad_timestamp = 0;
  std::size_t bad_altitude = 0;
  std::size_t missing_speed = 0;
  std::size_t nonpositive_speed = 0;
  std::size_t missing_direction = 0;

  std::string to_string() const {
    std::ostringstream os;
    os << "rows read:            " << total_rows << '\n'
       << "records kept:         " << kept << '\n'
       << "bad timestamp:        " << bad_timestamp << '\n'
       << "bad altitude:         " << bad_altitude << '\n'
       << "missing speed:        " << missing_speed << '\n'
       << "speed at/below floor: " << nonpositive_speed << '\n'
       << "missing direction:    " << missing_direction << '\n';
    return os.str();
  }
};

struct MonthOrigin {
  int year = 0, month = 0;
};

inline int consecutive_month(int year, int month, const MonthOrigin& origin) {
  return 12 * (year - origin.year) + (month - origin.month) + 1;
}

/// Parse the per-station raw files and merge them into the prime-dataset
/// schema: derive the temporal and directional covariates, attach station
/// coordinates, drop rows with missing speed or direction (tallied in the
/// report). Output order is (station, timestamp, altitude).
inline std::vector<WindRecord> conglomerate(const std::vector<std::string>& raw_files,
                                            const StationTable& stations,
                                            std::optional<MonthOrigin> origin, SkipReport& report,
                                            char delim = ',', double min_speed = 0.0) {
  std::vector<WindRecord> out;
  for (const auto& path : raw_files) {
    csv::Reader rd(path, delim);
    const int c_station = rd.require_column("station_ID");
    const int c_time = rd.require_column("date_time");
    const int c_alt = rd.require_column("altitude");
    const int c_speed = rd.require_column("wind_speed");
    const int c_dir = rd.require_column("wind_direct_avg");
    std::vector<std::string> f;
    while (rd.next(f)) {
      ++report.total_rows;
      if (static_cast<int>(f.size()) <= std::max({c_station, c_time, c_alt, c_speed, c_dir})) {
        ++report.bad_timestamp;
        continue;
      }
      const std::string& sid = f[c_station];
      auto st = stations.find(sid);
      if (st == stations.end())
        throw data_error(path + ": unknown station_ID '" + sid + "' at line " +
                         std::to_string(rd.line_number()));
      const auto dt = DateTime::parse(f[c_time]);
      if (!dt) {
        ++report.bad_timestamp;
        continue;
      }
      WindRecord r;
      if (!csv::parse_double(f[c_alt], r.altitude)) {
        ++report.bad_altitude;
        continue;
      }
      if (!csv::parse_double(f[c_speed], r.wind_speed)) {
        ++report.missing_speed;
        continue;
      }
      if (r.wind_speed <= min_speed) {
        ++report.nonpositive_speed;
        continue;
      }
      if (!csv::parse_double(f[c_dir], r.wind_direct_avg) || r.wind_direct_avg < 0.0 ||
          r.wind_direct_avg >= 360.0) {
        ++report.missing_direction;
        continue;
      }
      r.station_id = sid;
      r.date_time = *dt;
      r.latitude = st->second.latitude;
      r.longitude = st->second.longitude;
      r.year = dt->year;
      r.month = dt->month;
      const double rad = r.wind_direct_avg * M_PI / 180.0;
      r.cos_direct = std::cos(rad);
      r.sin_direct = std::sin(rad);
      r.f_month = r.month;
      out.push_back(std::move(r));
    }
  }
  std::sort(out.begin(), out.end(), [](const WindRecord& a, const WindRecord& b) {
    return std::tie(a.station_id, a.date_time, a.altitude) <
           std::tie(b.station_id, b.date_time, b.altitude);
  });
  if (!origin && !out.empty()) {
    MonthOrigin o{out.front().year, out.front().month};
    for (const auto& r : out) {
      if (r.year < o.year || (r.year == o.year && r.month < o.month)) o = {r.year, r.month};
    }
    origin = o;
  }
  for (auto& r : out) {
    r.c_month = consecutive_month(r.year, r.month, *origin);
    if (r.c_month < 1)
      throw data_error("record at " + r.date_time.to_string() + " predates the dataset origin");
  }
  report.kept = out.size();
  return out;
}

/// Displace each record uniformly within a disc of the given radius around
/// its station, so every observation occupies a distinct location.
/// Deterministic for a given seed; collisions are re-drawn.
inline void jitter(std::vector<WindRecord>& records, const StationTable& stations, double radius,
                   std::uint64_t seed) {
  if (radius < 0.0) throw config_error("jitter: radius must be >= 0");
  if (radius == 0.0) return;  // degenerate by contract: station coordinates kept
  Rng rng(seed);
  std::set<std::pair<double, double>> taken;
  for (auto& r : records) {
    auto st = stations.find(r.station_id);
    if (st == stations.end()) throw data_error("jitter: unknown station_ID '" + r.station_id + "'");
    for (int attempt = 0;; ++attempt) {
      if (attempt > 128) throw numeric_error("jitter: could not find a distinct location");
      const double rr = radius * std::sqrt(rng.uniform());
      const double th = 2.0 * M_PI * rng.uniform();
      const double lat = st->second.latitude + rr * std::sin(th);
      const double lon = st->second.longitude + rr * std::cos(th);
      if (taken.insert({lat, lon}).second) {
        r.latitude = lat;
        r.longitude = lon;
        break;
      }
    }
  }
}

/// Uniform subsample of n records without replacement, deterministic for a
/// given seed. Input order is preserved in the output.
inline std::vector<WindRecord> sample(const std::vector<WindRecord>& records, std::size_t n,
                                      std::uint64_t seed) {
  if (n > records.size())
    throw data_error("sample: requested " + std::to_string(n) + " records but only " +
                     std::to_string(records.size()) + " available");
  std::vector<std::size_t> idx(records.size());
  for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
  Rng rng(seed);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t j = i + rng.below(idx.size() - i);
    std::swap(idx[i], idx[j]);
  }
  idx.resize(n);
  std::sort(idx.begin(), idx.end());
  std::vector<WindRecord> out;
  out.reserve(n);
  for (const auto i : idx) out.push_back(records[i]);
  return out;
}

inline constexpr const char* kPrimeHeader =
    "station_ID,date_time,latitude,longitude,year,month,altitude,wind_speed,wind_direct_avg,"
    "cos_direct,sin_direct,f_month,c_month";

inline void write_prime(const std::vector<WindRecord>& records, const std::string& path) {
  std::ofstream f(path);
  if (!f) throw data_error("cannot write " + path);
  f << kPrimeHeader << '\n';
  for (const auto& r : records) {
    f << r.station_id << ',' << r.date_time.to_string() << ',' << csv::format_double(r.latitude)
      << ',' << csv::format_double(r.longitude) << ',' << r.year << ',' << r.month << ','
      << csv::format_double(r.altitude) << ',' << csv::format_double(r.wind_speed) << ','
      << csv::format_double(r.wind_direct_avg) << ',' << csv::format_double(r.cos_direct) << ','
      << csv::format_double(r.sin_direct) << ',' << r.f_month << ',' << r.c_month << '\n';
  }
}

inline std::vector<WindRecord> read_prime(const std::string& path) {
  csv::Reader rd(path);
  std::string header;
  for (std::size_t i = 0; i < rd.header().size(); ++i) {
    if (i) header += ',';
    header += rd.header()[i];
  }
  if (header != kPrimeHeader)
    throw data_error(path + ": unexpected header, not a prime dataset file");
  std::vector<WindRecord> out;
  std::vector<std::string> f;
  while (rd.next(f)) {
    if (f.size() != 13) throw data_error(path + ": bad field count at line " + std::to_string(rd.line_number()));
    WindRecord r;
    r.station_id = f[0];
    const auto dt = DateTime::parse(f[1]);
    if (!dt) throw data_error(path + ": bad timestamp at line " + std::to_string(rd.line_number()));
    r.date_time = *dt;
    bool ok = csv::parse_double(f[2], r.latitude) && csv::parse_double(f[3], r.longitude) &&
              csv::parse_int(f[4], r.year) && csv::parse_int(f[5], r.month) &&
              csv::parse_double(f[6], r.altitude) && csv::parse_double(f[7], r.wind_speed) &&
              csv::parse_double(f[8], r.wind_direct_avg) && csv::parse_double(f[9], r.cos_direct) &&
              csv::parse_double(f[10], r.sin_direct) && csv::parse_int(f[11], r.f_month) &&
              csv::parse_int(f[12], r.c_month);
    if (!ok) throw data_error(path + ": bad field at line " + std::to_string(rd.line_number()));
    out.push_back(std::move(r));
  }
  return out;
}

}  // namespace gale::ingest
