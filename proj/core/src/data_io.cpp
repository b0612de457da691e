#include "mnrv/data_io.hpp"

#include <algorithm>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <istream>
#include <sstream>

#include "mnrv/error.hpp"

namespace mnrv {

namespace {

constexpr std::int64_t kUs = 1'000'000;

std::int64_t floor_div(std::int64_t a, std::int64_t b) {
  std::int64_t q = a / b;
  if ((a % b != 0) && ((a < 0) != (b < 0))) --q;
  return q;
}

int digits(const std::string& s, std::size_t pos, std::size_t n) {
  if (pos + n > s.size()) throw std::invalid_argument("short");
  int v = 0;
  for (std::size_t i = pos; i < pos + n; ++i) {
    if (s[i] < '0' || s[i] > '9') throw std::invalid_argument("digit");
    v = v * 10 + (s[i] - '0');
  }
  return v;
}

std::string trim(std::string s) {
  while (!s.empty() && (s.back() == '\r' || s.back() == ' ' || s.back() == '\t')) s.pop_back();
  std::size_t i = 0;
  while (i < s.size() && (s[i] == ' ' || s[i] == '\t')) ++i;
  return s.substr(i);
}

std::string day_label(std::int64_t day) {
  using namespace std::chrono;
  year_month_day ymd{sys_days{days{day}}};
  char buf[16];
  std::snprintf(buf, sizeof buf, "%04d-%02u-%02u", static_cast<int>(ymd.year()),
                static_cast<unsigned>(ymd.month()), static_cast<unsigned>(ymd.day()));
  return buf;
}

}  // namespace

std::int64_t parse_rfc3339(const std::string& s) {
  using namespace std::chrono;
  try {
    if (s.size() < 20) throw std::invalid_argument("short");
    int Y = digits(s, 0, 4), M = digits(s, 5, 2), D = digits(s, 8, 2);
    int h = digits(s, 11, 2), mi = digits(s, 14, 2), sec = digits(s, 17, 2);
    if (s[4] != '-' || s[7] != '-' || s[13] != ':' || s[16] != ':') throw std::invalid_argument("sep");
    if (s[10] != 'T' && s[10] != 't' && s[10] != ' ') throw std::invalid_argument("T");
    if (h > 23 || mi > 59 || sec > 60) throw std::invalid_argument("range");
    std::size_t pos = 19;
    std::int64_t frac = 0;
    if (pos < s.size() && s[pos] == '.') {
      ++pos;
      std::int64_t scale = 100000;
      std::size_t start = pos;
      while (pos < s.size() && s[pos] >= '0' && s[pos] <= '9') {
        if (scale > 0) frac += (s[pos] - '0') * scale;
        scale /= 10;
        ++pos;
      }
      if (pos == start) throw std::invalid_argument("frac");
    }
    if (pos >= s.size()) throw std::invalid_argument("offset");
    int offset = 0;
    if (s[pos] == 'Z' || s[pos] == 'z') {
      ++pos;
    } else if (s[pos] == '+' || s[pos] == '-') {
      int sign = s[pos] == '-' ? -1 : 1;
      int oh = digits(s, pos + 1, 2), om = digits(s, pos + 4, 2);
      if (s[pos + 3] != ':') throw std::invalid_argument("offset");
      offset = sign * (oh * 3600 + om * 60);
      pos += 6;
    } else {
      throw std::invalid_argument("offset");
    }
    if (pos != s.size()) throw std::invalid_argument("trailing");
    year_month_day ymd{year{Y}, month{static_cast<unsigned>(M)}, day{static_cast<unsigned>(D)}};
    if (!ymd.ok()) throw std::invalid_argument("date");
    std::int64_t days_since = sys_days{ymd}.time_since_epoch().count();
    std::int64_t secs = days_since * 86400 + h * 3600 + mi * 60 + sec - offset;
    return secs * kUs + frac;
  } catch (const std::invalid_argument&) {
    fail(ErrorKind::io, "bad RFC 3339 timestamp '" + s + "'");
  }
}

std::string format_rfc3339(std::int64_t t_us) {
  std::int64_t secs = floor_div(t_us, kUs);
  std::int64_t frac = t_us - secs * kUs;
  std::int64_t day = floor_div(secs, 86400);
  std::int64_t rem = secs - day * 86400;
  char buf[64];
  if (frac == 0)
    std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lldZ", day_label(day).c_str(),
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60));
  else
    std::snprintf(buf, sizeof buf, "%sT%02lld:%02lld:%02lld.%06lldZ", day_label(day).c_str(),
                  static_cast<long long>(rem / 3600), static_cast<long long>(rem / 60 % 60),
                  static_cast<long long>(rem % 60), static_cast<long long>(frac));
  return buf;
}

int parse_tz_offset(const std::string& s) {
  if (s.empty() || s == "UTC" || s == "utc" || s == "Z" || s == "Etc/UTC") return 0;
  std::string t = s;
  if (t.rfind("UTC", 0) == 0) t = t.substr(3);
  if (t.size() >= 3 && (t[0] == '+' || t[0] == '-')) {
    int sign = t[0] == '-' ? -1 : 1;
    std::string rest = t.substr(1);
    rest.erase(std::remove(rest.begin(), rest.end(), ':'), rest.end());
    if (rest.size() == 2 || rest.size() == 4) {
      bool ok = std::all_of(rest.begin(), rest.end(), [](char c) { return c >= '0' && c <= '9'; });
      if (ok) {
        int hh = std::stoi(rest.substr(0, 2));
        int mm = rest.size() == 4 ? std::stoi(rest.substr(2, 2)) : 0;
        if (hh <= 18 && mm < 60) return sign * (hh * 3600 + mm * 60);
      }
    }
  }
  fail(ErrorKind::invalid_argument, "timezone '" + s + "': only UTC and fixed offsets like +09:00 are supported");
}

RawTickFile read_ticks(std::istream& in) {
  RawTickFile raw;
  std::string line;
  if (!std::getline(in, line)) fail(ErrorKind::io, "tick file is empty");
  line = trim(line);
  bool quotes;
  if (line == "timestamp,bid,ask") quotes = true;
  else if (line == "timestamp,mid") quotes = false;
  else fail(ErrorKind::io, "tick file header must be 'timestamp,bid,ask' or 'timestamp,mid'");

  auto number = [](const std::string& s, std::size_t row) {
    double v = 0.0;
    auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || !std::isfinite(v) || v <= 0.0)
      fail(ErrorKind::io, "row " + std::to_string(row) + ": bad price '" + s + "'");
    return v;
  };

  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    line = trim(line);
    if (line.empty()) continue;
    std::vector<std::string> cols;
    std::stringstream ss(line);
    std::string c;
    while (std::getline(ss, c, ',')) cols.push_back(trim(c));
    if (cols.size() != (quotes ? 3u : 2u))
      fail(ErrorKind::io, "row " + std::to_string(row) + ": wrong number of columns");
    Tick t;
    try {
      t.t_us = parse_rfc3339(cols[0]);
    } catch (const Error& e) {
      fail(ErrorKind::io, "row " + std::to_string(row) + ": " + e.what());
    }
    t.mid = quotes ? 0.5 * (number(cols[1], row) + number(cols[2], row)) : number(cols[1], row);
    if (!raw.ticks.empty() && t.t_us <= raw.ticks.back().t_us)
      fail(ErrorKind::io, "row " + std::to_string(row) + ": timestamps are not strictly increasing");
    raw.ticks.push_back(t);
  }
  if (raw.ticks.empty()) fail(ErrorKind::io, "tick file has no rows");
  return raw;
}

RawTickFile read_ticks(const std::filesystem::path& path) {
  std::ifstream f(path);
  if (!f) fail(ErrorKind::io, "cannot read " + path.string());
  return read_ticks(f);
}

void write_ticks_csv(const RawTickFile& raw, const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot write " + path.string());
  f << "timestamp,mid\n";
  char buf[64];
  for (const auto& t : raw.ticks) {
    auto r = std::to_chars(buf, buf + sizeof buf, t.mid);
    f << format_rfc3339(t.t_us) << ',' << std::string_view(buf, static_cast<std::size_t>(r.ptr - buf)) << '\n';
  }
}

IntradayPanel resample(const RawTickFile& raw, std::size_t m, const ResampleOptions& opt) {
  require(!raw.ticks.empty(), "resample: no ticks");
  require(m >= 1 && opt.day_seconds % static_cast<std::int64_t>(m) == 0,
          "resample: m must divide the trading-day length in seconds");
  require(opt.scale > 0.0, "resample: scale must be > 0");
  const std::int64_t day_us = opt.day_seconds * kUs;
  const std::int64_t delta = day_us / static_cast<std::int64_t>(m);
  const std::int64_t off = static_cast<std::int64_t>(raw.tz_offset_seconds) * kUs;
  auto local = [&](std::size_t i) { return raw.ticks[i].t_us + off; };

  const std::int64_t first_day = floor_div(local(0), day_us);
  const std::int64_t last_day = floor_div(local(raw.ticks.size() - 1) - 1, day_us);
  if (last_day < first_day) fail(ErrorKind::io, "resample: ticks do not cover a full grid slot");
  const std::size_t N = static_cast<std::size_t>(last_day - first_day + 1);

  IntradayPanel P;
  P.n_days = N;
  P.m = m;
  P.p_obs.assign(N * m + 1, 0.0);
  P.missing.assign(N, 0);
  P.day_labels.resize(N);
  for (std::size_t d = 0; d < N; ++d) P.day_labels[d] = day_label(first_day + static_cast<std::int64_t>(d));

  std::size_t i = 0;  // next tick not yet consumed
  double last = raw.ticks.front().mid;
  const std::int64_t t0 = first_day * day_us;
  for (std::size_t k = 0; k <= N * m; ++k) {
    const std::int64_t tau = t0 + static_cast<std::int64_t>(k) * delta;
    bool any = false;
    while (i < raw.ticks.size() && local(i) <= tau) {
      last = raw.ticks[i].mid;
      any = true;
      ++i;
    }
    if (k > 0 && !any) ++P.missing[(k - 1) / m];
    P.p_obs[k] = opt.scale * std::log(last);
  }
  return P;
}

std::size_t FilterReport::kept() const {
  return static_cast<std::size_t>(std::count_if(days.begin(), days.end(), [](const auto& d) { return d.kept; }));
}

FilterResult filter_days(const IntradayPanel& panel, const CleaningRule& rule) {
  panel.validate();
  require(rule.max_missing > 0 && rule.max_zero_returns > 0 && rule.max_flat_minutes > 0.0,
          "cleaning thresholds must be > 0");
  const std::size_t m = panel.m;
  const double delta_min = static_cast<double>(rule.day_seconds) / static_cast<double>(m) / 60.0;

  FilterResult out;
  std::vector<std::size_t> keep;
  for (std::size_t d = 0; d < panel.n_days; ++d) {
    DayVerdict v;
    v.day = d;
    v.label = panel.day_labels.empty() ? std::to_string(d) : panel.day_labels[d];
    v.missing = panel.missing.empty() ? 0 : panel.missing[d];
    int run = 0, longest = 0;
    for (std::size_t i = 1; i <= m; ++i) {
      bool flat = panel.p_obs[d * m + i] == panel.p_obs[d * m + i - 1];
      if (flat) {
        ++v.zero_returns;
        longest = std::max(longest, ++run);
      } else {
        run = 0;
      }
    }
    v.longest_flat_minutes = longest * delta_min;
    if (v.missing >= rule.max_missing) v.reasons.push_back("missing");
    if (v.zero_returns > rule.max_zero_returns) v.reasons.push_back("zero_returns");
    if (v.longest_flat_minutes > rule.max_flat_minutes + 1e-9) v.reasons.push_back("flat");
    v.kept = v.reasons.empty();
    if (v.kept) keep.push_back(d);
    out.report.days.push_back(std::move(v));
  }

  IntradayPanel& Q = out.panel;
  Q.m = m;
  Q.sub_steps = panel.sub_steps;
  Q.n_days = keep.size();
  Q.generator = panel.generator;
  auto rebuild = [&](const std::vector<double>& src, std::vector<double>& dst) {
    if (src.empty()) return;
    dst.assign(keep.size() * m + 1, 0.0);
    if (keep.empty()) {
      dst[0] = src[0];
      return;
    }
    dst[0] = src[keep[0] * m];
    for (std::size_t j = 0; j < keep.size(); ++j) {
      const std::size_t base = keep[j] * m;
      for (std::size_t i = 1; i <= m; ++i)
        dst[j * m + i] = dst[j * m + i - 1] + (src[base + i] - src[base + i - 1]);
    }
  };
  rebuild(panel.p_obs, Q.p_obs);
  rebuild(panel.p_true, Q.p_true);
  // Nothing dropped: keep the original levels bit-exact.
  if (keep.size() == panel.n_days) {
    Q.p_obs = panel.p_obs;
    Q.p_true = panel.p_true;
  }
  for (std::size_t d : keep) {
    if (!panel.iv_true.empty()) Q.iv_true.push_back(panel.iv_true[d]);
    if (!panel.iq_true.empty()) Q.iq_true.push_back(panel.iq_true[d]);
    if (!panel.missing.empty()) Q.missing.push_back(panel.missing[d]);
    if (!panel.day_labels.empty()) Q.day_labels.push_back(panel.day_labels[d]);
  }
  return out;
}

}  // namespace mnrv
