#include "mnrv/panel_io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "mnrv/codec.hpp"
#include "mnrv/error.hpp"

namespace mnrv {

namespace fs = std::filesystem;
using nlohmann::json;

fs::path sidecar_path(const fs::path& csv) {
  fs::path s = csv;
  s.replace_extension(".json");
  return s;
}

namespace {

void put_double(std::string& out, double v) {
  char buf[32];
  auto res = std::to_chars(buf, buf + sizeof buf, v);
  out.append(buf, res.ptr);
}

double parse_double(std::string_view s, std::size_t line) {
  double v = 0.0;
  auto res = std::from_chars(s.data(), s.data() + s.size(), v);
  if (res.ec != std::errc() || res.ptr != s.data() + s.size())
    fail(ErrorKind::io, "panel csv: bad number '" + std::string(s) + "' on line " + std::to_string(line));
  return v;
}

}  // namespace

void save_panel(const IntradayPanel& panel, const fs::path& csv) {
  panel.validate();
  std::string out;
  out.reserve(panel.p_obs.size() * 48);
  out += "day,index,p_true,p_obs\n";
  for (std::size_t k = 0; k < panel.p_obs.size(); ++k) {
    std::size_t day = k == 0 ? 0 : (k - 1) / panel.m;
    std::size_t idx = k - day * panel.m;
    out += std::to_string(day);
    out += ',';
    out += std::to_string(idx);
    out += ',';
    if (panel.has_truth()) put_double(out, panel.p_true[k]);
    out += ',';
    put_double(out, panel.p_obs[k]);
    out += '\n';
  }
  std::ofstream f(csv, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot write " + csv.string());
  f << out;

  json side;
  side["format"] = "mnrv-panel";
  side["version"] = 1;
  side["n_days"] = panel.n_days;
  side["m"] = panel.m;
  side["sub_steps"] = panel.sub_steps;
  if (panel.generator) side["generator"] = *panel.generator;
  side["iv_true"] = panel.iv_true;
  side["iq_true"] = panel.iq_true;
  side["missing"] = panel.missing;
  side["day_labels"] = panel.day_labels;
  if (!panel.sigma2_path.empty()) side["sigma2_path"] = panel.sigma2_path;
  std::ofstream s(sidecar_path(csv), std::ios::binary);
  if (!s) fail(ErrorKind::io, "cannot write " + sidecar_path(csv).string());
  s << side.dump(1) << '\n';
}

IntradayPanel load_panel(const fs::path& csv) {
  std::ifstream s(sidecar_path(csv), std::ios::binary);
  if (!s) fail(ErrorKind::io, "missing panel sidecar " + sidecar_path(csv).string());
  json side;
  try {
    s >> side;
  } catch (const json::exception& e) {
    fail(ErrorKind::io, std::string("panel sidecar: ") + e.what());
  }
  IntradayPanel P;
  P.n_days = side.at("n_days").get<std::size_t>();
  P.m = side.at("m").get<std::size_t>();
  P.sub_steps = side.value("sub_steps", std::size_t{0});
  if (side.contains("generator")) P.generator = side["generator"].get<GeneratorInfo>();
  P.iv_true = side.value("iv_true", std::vector<double>{});
  P.iq_true = side.value("iq_true", std::vector<double>{});
  P.missing = side.value("missing", std::vector<int>{});
  P.day_labels = side.value("day_labels", std::vector<std::string>{});
  P.sigma2_path = side.value("sigma2_path", std::vector<double>{});

  std::ifstream f(csv, std::ios::binary);
  if (!f) fail(ErrorKind::io, "cannot read " + csv.string());
  std::stringstream buf;
  buf << f.rdbuf();
  std::string text = buf.str();

  std::size_t total = P.n_days * P.m + 1;
  P.p_obs.reserve(total);
  std::vector<double> ptrue;
  ptrue.reserve(total);
  bool any_true = false, any_missing_true = false;
  std::size_t pos = text.find('\n');
  if (pos == std::string::npos || text.compare(0, pos, "day,index,p_true,p_obs") != 0)
    fail(ErrorKind::io, "panel csv: unexpected header");
  std::size_t line = 1;
  ++pos;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string::npos) end = text.size();
    std::string_view row(text.data() + pos, end - pos);
    pos = end + 1;
    ++line;
    if (row.empty()) continue;
    std::string_view cols[4];
    std::size_t c = 0, start = 0;
    for (std::size_t i = 0; i <= row.size() && c < 4; ++i) {
      if (i == row.size() || row[i] == ',') {
        cols[c++] = row.substr(start, i - start);
        start = i + 1;
      }
    }
    if (c != 4) fail(ErrorKind::io, "panel csv: expected 4 columns on line " + std::to_string(line));
    if (cols[2].empty()) {
      any_missing_true = true;
    } else {
      any_true = true;
      ptrue.push_back(parse_double(cols[2], line));
    }
    P.p_obs.push_back(parse_double(cols[3], line));
  }
  if (P.p_obs.size() != total)
    fail(ErrorKind::io, "panel csv: expected " + std::to_string(total) + " rows, found " +
                            std::to_string(P.p_obs.size()));
  if (any_true && any_missing_true) fail(ErrorKind::io, "panel csv: p_true partially missing");
  if (any_true) P.p_true = std::move(ptrue);
  P.validate();
  return P;
}

}  // namespace mnrv
