#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "pvregime/common.hpp"
#include "pvregime/errors.hpp"

namespace pvregime {

// Uniformly sampled PV power, one row of 2N samples per day. Sample index k
// runs over [-N, N); night and gaps are NaN-marked, never interpolated.
// Values are clipped to [0, nameplate] on the way in.
class PowerSeries {
public:
  PowerSeries(CivilDate start, int n_days, int sample_period_min, double nameplate)
      : start_(start),
        period_(sample_period_min),
        nameplate_(nameplate) {
    if (sample_period_min <= 0 || 1440 % sample_period_min != 0)
      throw std::invalid_argument("sample period must divide 1440 minutes");
    if (nameplate <= 0) throw std::invalid_argument("nameplate must be positive");
    if (n_days < 0) throw std::invalid_argument("negative day count");
    n_half_ = 720 / sample_period_min;
    values_.assign(static_cast<size_t>(n_days) * samples_per_day(), kNaN);
  }

  int days() const { return static_cast<int>(values_.size()) / samples_per_day(); }
  int half_samples() const { return n_half_; }  // N
  int samples_per_day() const { return 2 * n_half_; }
  int sample_period() const { return period_; }
  double nameplate() const { return nameplate_; }
  const CivilDate& start_date() const { return start_; }
  long clipped_count() const { return clipped_; }

  bool has(int day, int k) const { return std::isfinite(raw(day, k)); }
  double value(int day, int k) const { return raw(day, k); }

  void set(int day, int k, double watts) {
    if (watts < 0.0) {
      watts = 0.0;
      ++clipped_;
    } else if (watts > nameplate_) {
      watts = nameplate_;
      ++clipped_;
    }
    values_[idx(day, k)] = watts;
  }

  void clear(int day, int k) { values_[idx(day, k)] = kNaN; }

  CivilDate date_of(int day) const {
    return civil_from_days(days_from_civil(start_) + day);
  }

private:
  double raw(int day, int k) const { return values_[idx(day, k)]; }
  size_t idx(int day, int k) const {
    if (day < 0 || day >= days() || k < -n_half_ || k >= n_half_)
      throw std::out_of_range("PowerSeries index (day " + std::to_string(day) +
                              ", k " + std::to_string(k) + ")");
    return static_cast<size_t>(day) * samples_per_day() +
           static_cast<size_t>(k + n_half_);
  }

  CivilDate start_;
  int period_;
  int n_half_;
  double nameplate_;
  std::vector<double> values_;
  long clipped_ = 0;
};

// Closed window [k_lo, k_hi] of one day.
struct DaySlice {
  int day = 0;
  int k_lo = 0;
  int k_hi = 0;
  int length() const { return k_hi - k_lo + 1; }
};

struct DaylightInterval {
  bool empty = true;
  int k_lo = 0;
  int k_hi = 0;
};

// Per day, the maximal contiguous interval whose endpoints are the first and
// last samples strictly above threshold. Missing samples never qualify.
inline std::vector<DaylightInterval> daylight_mask(const PowerSeries& series,
                                                   double threshold) {
  if (threshold < 0) throw std::invalid_argument("daylight threshold must be >= 0");
  std::vector<DaylightInterval> out(static_cast<size_t>(series.days()));
  const int n = series.half_samples();
  for (int d = 0; d < series.days(); ++d) {
    int lo = n, hi = -n - 1;
    for (int k = -n; k < n; ++k) {
      if (series.has(d, k) && series.value(d, k) > threshold) {
        lo = std::min(lo, k);
        hi = std::max(hi, k);
      }
    }
    if (hi >= lo) out[static_cast<size_t>(d)] = DaylightInterval{false, lo, hi};
  }
  return out;
}

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string cur;
  for (char c : line) {
    if (c == ',') {
      fields.push_back(cur);
      cur.clear();
    } else if (c != '\r') {
      cur += c;
    }
  }
  fields.push_back(cur);
  for (auto& f : fields) {
    size_t b = f.find_first_not_of(" \t");
    size_t e = f.find_last_not_of(" \t");
    f = b == std::string::npos ? std::string() : f.substr(b, e - b + 1);
  }
  return fields;
}

inline CivilDate parse_date(const std::string& s, long line_no) {
  CivilDate d;
  char extra;
  if (std::sscanf(s.c_str(), "%d-%d-%d%c", &d.year, &d.month, &d.day, &extra) != 3 ||
      d.month < 1 || d.month > 12 || d.day < 1 || d.day > 31)
    throw ParseError("bad date '" + s + "'", line_no);
  return d;
}

// Minute of day, or throws.
inline int parse_time(const std::string& s, long line_no) {
  int hh, mm;
  char extra;
  if (std::sscanf(s.c_str(), "%d:%d%c", &hh, &mm, &extra) != 2 || hh < 0 || hh > 23 ||
      mm < 0 || mm > 59)
    throw ParseError("bad time '" + s + "'", line_no);
  return hh * 60 + mm;
}

inline double parse_number(const std::string& s, long line_no) {
  try {
    size_t pos = 0;
    double v = std::stod(s, &pos);
    if (pos != s.size()) throw ParseError("trailing junk in number '" + s + "'", line_no);
    if (!std::isfinite(v)) throw ParseError("non-finite value '" + s + "'", line_no);
    return v;
  } catch (const std::invalid_argument&) {
    throw ParseError("bad number '" + s + "'", line_no);
  } catch (const std::out_of_range&) {
    throw ParseError("number out of range '" + s + "'", line_no);
  }
}

}  // namespace detail

// Reads `date,time,power_w` or `date,time,current_a,voltage_v` rows (header
// decides which), snapping timestamps to the sampling grid. A timestamp
// landing exactly between two grid points is rejected rather than guessed.
inline PowerSeries ingest_csv(const std::string& path, int sample_period_min,
                              double nameplate) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);

  std::string line;
  long line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty file: " + path);
  ++line_no;
  auto header = detail::split_csv_line(line);
  bool has_power, has_iv;
  {
    std::string joined;
    for (auto& h : header) joined += h + ",";
    has_power = joined.find("power_w") != std::string::npos;
    has_iv = joined.find("current_a") != std::string::npos &&
             joined.find("voltage_v") != std::string::npos;
  }
  if (!has_power && !has_iv)
    throw ParseError("header must name power_w or current_a/voltage_v columns", 1);

  struct Row {
    long day_serial;
    int minute;
    double watts;
    long line_no;
  };
  std::vector<Row> rows;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line == "\r") continue;
    auto f = detail::split_csv_line(line);
    size_t want = has_power ? 3 : 4;
    if (f.size() != want)
      throw ParseError("expected " + std::to_string(want) + " fields, got " +
                           std::to_string(f.size()),
                       line_no);
    CivilDate date = detail::parse_date(f[0], line_no);
    int minute = detail::parse_time(f[1], line_no);
    double watts;
    if (has_power) {
      watts = detail::parse_number(f[2], line_no);
    } else {
      double amps = detail::parse_number(f[2], line_no);
      double volts = detail::parse_number(f[3], line_no);
      watts = amps * volts;
    }
    rows.push_back(Row{days_from_civil(date), minute, watts, line_no});
  }
  if (rows.empty()) throw ParseError("no data rows in " + path);

  // Snap each timestamp to the nearest grid minute; an exact tie is ambiguous.
  struct Placed {
    long day_serial;
    int slot;  // 0 .. 2N-1
    double watts;
    long line_no;
  };
  std::vector<Placed> placed;
  placed.reserve(rows.size());
  for (const auto& r : rows) {
    int rem = r.minute % sample_period_min;
    int snapped;
    if (rem == 0) {
      snapped = r.minute;
    } else if (2 * rem == sample_period_min) {
      throw GridError("timestamp halfway between grid points", r.line_no);
    } else {
      snapped = 2 * rem < sample_period_min ? r.minute - rem
                                            : r.minute + (sample_period_min - rem);
    }
    long day = r.day_serial;
    int slot = snapped / sample_period_min;
    if (snapped == 1440) {  // rounded up past midnight
      ++day;
      slot = 0;
    }
    placed.push_back(Placed{day, slot, r.watts, r.line_no});
  }

  long first = placed[0].day_serial, last = placed[0].day_serial;
  for (const auto& r : placed) {
    first = std::min(first, r.day_serial);
    last = std::max(last, r.day_serial);
  }
  int n_days = static_cast<int>(last - first + 1);

  PowerSeries series(civil_from_days(first), n_days, sample_period_min, nameplate);
  const int n = series.half_samples();
  for (const auto& r : placed) {
    int day = static_cast<int>(r.day_serial - first);
    int k = r.slot - n;
    if (series.has(day, k))
      throw GridError("duplicate sample at grid point", r.line_no);
    series.set(day, k, r.watts);
  }
  return series;
}

// Canonical writer: power form, LF endings, 6 significant digits.
inline void emit_csv(const PowerSeries& series, std::ostream& out) {
  out << "date,time,power_w\n";
  const int n = series.half_samples();
  char buf[64];
  for (int d = 0; d < series.days(); ++d) {
    CivilDate date = series.date_of(d);
    for (int k = -n; k < n; ++k) {
      if (!series.has(d, k)) continue;
      int minute = (k + n) * series.sample_period();
      std::snprintf(buf, sizeof buf, "%04d-%02d-%02d,%02d:%02d,%.6g\n", date.year,
                    date.month, date.day, minute / 60, minute % 60,
                    series.value(d, k));
      out << buf;
    }
  }
}

inline void emit_csv(const PowerSeries& series, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path);
  emit_csv(series, out);
}

}  // namespace pvregime
