#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "mnrv/market_sim.hpp"

namespace mnrv {

struct Tick {
  std::int64_t t_us = 0;  // UTC, microseconds since the epoch
  double mid = 0.0;
};

struct RawTickFile {
  std::vector<Tick> ticks;
  int tz_offset_seconds = 0;  // local day = UTC + offset
};

// RFC 3339 timestamp to UTC microseconds.
std::int64_t parse_rfc3339(const std::string& s);
// "UTC", "Z", "+09:00", "-0500". Named zones other than UTC are not supported.
int parse_tz_offset(const std::string& s);

RawTickFile read_ticks(std::istream& in);
RawTickFile read_ticks(const std::filesystem::path& path);

struct ResampleOptions {
  double scale = 100.0;           // p = scale * log(mid)
  std::int64_t day_seconds = 86400;
};

// Previous-tick sampling on an equal grid of m points per day. A grid slot with
// no tick in (tau - delta, tau] counts as missing before it is filled.
IntradayPanel resample(const RawTickFile& raw, std::size_t m, const ResampleOptions& opt = {});

struct CleaningRule {
  int max_missing = 500;          // exclude when missing >= this
  int max_zero_returns = 1000;    // exclude when zero returns > this
  double max_flat_minutes = 35.0; // exclude when the price is flat for longer than this
  std::int64_t day_seconds = 86400;
};

struct DayVerdict {
  std::size_t day = 0;
  std::string label;
  bool kept = true;
  std::vector<std::string> reasons;  // missing | zero_returns | flat
  int missing = 0;
  int zero_returns = 0;
  double longest_flat_minutes = 0.0;
};

struct FilterReport {
  std::vector<DayVerdict> days;
  std::size_t kept() const;
  std::size_t excluded() const { return days.size() - kept(); }
};

struct FilterResult {
  IntradayPanel panel;
  FilterReport report;
};

FilterResult filter_days(const IntradayPanel& panel, const CleaningRule& rule = {});

void write_ticks_csv(const RawTickFile& raw, const std::filesystem::path& path);
std::string format_rfc3339(std::int64_t t_us);

}  // namespace mnrv
