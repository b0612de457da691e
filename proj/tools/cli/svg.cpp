#include "cli/svg.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "mnrv/error.hpp"

namespace mnrv::cli {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", v);
  return buf;
}

std::string tick_label(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.4g", v);
  return buf;
}

std::string escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

// Round step for about n ticks over [lo, hi].
double nice_step(double lo, double hi, int n) {
  double raw = (hi - lo) / n;
  double mag = std::pow(10.0, std::floor(std::log10(raw)));
  double f = raw / mag;
  double nice = f < 1.5 ? 1 : f < 3 ? 2 : f < 7 ? 5 : 10;
  return nice * mag;
}

const char* kColors[] = {"#1f77b4", "#d62728", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b"};

}  // namespace

std::string line_plot_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series) {
  require(!series.empty(), "plot needs at least one series");
  double xmin = std::numeric_limits<double>::infinity(), xmax = -xmin;
  double ymin = xmin, ymax = -xmin;
  for (const auto& s : series) {
    require(s.x.size() == s.y.size() && !s.x.empty(), "plot series '" + s.label + "' is empty or ragged");
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double x = spec.log_x ? std::log10(s.x[i]) : s.x[i];
      double e = i < s.err.size() ? s.err[i] : 0.0;
      xmin = std::min(xmin, x);
      xmax = std::max(xmax, x);
      ymin = std::min(ymin, s.y[i] - e);
      ymax = std::max(ymax, s.y[i] + e);
    }
  }
  if (xmax == xmin) xmin -= 0.5, xmax += 0.5;
  if (ymax == ymin) ymin -= 0.5 * std::max(1e-12, std::abs(ymin)), ymax += 0.5 * std::max(1e-12, std::abs(ymax));
  double pad = 0.05 * (ymax - ymin);
  ymin -= pad;
  ymax += pad;

  const double L = 80, R = 20, T = 40, B = 60;
  const double W = spec.width - L - R, H = spec.height - T - B;
  auto px = [&](double x) { return L + (x - xmin) / (xmax - xmin) * W; };
  auto py = [&](double y) { return T + (ymax - y) / (ymax - ymin) * H; };

  std::ostringstream o;
  o << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << spec.width << "\" height=\"" << spec.height
    << "\" font-family=\"sans-serif\" font-size=\"12\">\n";
  o << "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  o << "<text x=\"" << num(L + W / 2) << "\" y=\"22\" text-anchor=\"middle\" font-size=\"14\">" << escape(spec.title)
    << "</text>\n";
  o << "<rect x=\"" << num(L) << "\" y=\"" << num(T) << "\" width=\"" << num(W) << "\" height=\"" << num(H)
    << "\" fill=\"none\" stroke=\"black\"/>\n";

  double ystep = nice_step(ymin, ymax, 5);
  for (double y = std::ceil(ymin / ystep) * ystep; y <= ymax; y += ystep) {
    o << "<line x1=\"" << num(L - 4) << "\" x2=\"" << num(L) << "\" y1=\"" << num(py(y)) << "\" y2=\"" << num(py(y))
      << "\" stroke=\"black\"/>";
    o << "<text x=\"" << num(L - 6) << "\" y=\"" << num(py(y) + 4) << "\" text-anchor=\"end\">"
      << tick_label(std::abs(y) < ystep * 1e-9 ? 0.0 : y) << "</text>\n";
  }
  if (spec.log_x) {
    std::vector<double> xs;
    for (const auto& s : series) xs.insert(xs.end(), s.x.begin(), s.x.end());
    std::sort(xs.begin(), xs.end());
    xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
    for (double x : xs) {
      double lx = px(std::log10(x));
      o << "<line x1=\"" << num(lx) << "\" x2=\"" << num(lx) << "\" y1=\"" << num(T + H) << "\" y2=\"" << num(T + H + 4)
        << "\" stroke=\"black\"/>";
      o << "<text x=\"" << num(lx) << "\" y=\"" << num(T + H + 18) << "\" text-anchor=\"middle\">" << tick_label(x)
        << "</text>\n";
    }
  } else {
    double xstep = nice_step(xmin, xmax, 6);
    for (double x = std::ceil(xmin / xstep) * xstep; x <= xmax; x += xstep) {
      o << "<line x1=\"" << num(px(x)) << "\" x2=\"" << num(px(x)) << "\" y1=\"" << num(T + H) << "\" y2=\""
        << num(T + H + 4) << "\" stroke=\"black\"/>";
      o << "<text x=\"" << num(px(x)) << "\" y=\"" << num(T + H + 18) << "\" text-anchor=\"middle\">"
        << tick_label(x) << "</text>\n";
    }
  }
  o << "<text x=\"" << num(L + W / 2) << "\" y=\"" << num(spec.height - 15) << "\" text-anchor=\"middle\">"
    << escape(spec.xlabel) << "</text>\n";
  o << "<text transform=\"translate(18," << num(T + H / 2) << ") rotate(-90)\" text-anchor=\"middle\">"
    << escape(spec.ylabel) << "</text>\n";

  for (std::size_t k = 0; k < series.size(); ++k) {
    const auto& s = series[k];
    const char* col = kColors[k % (sizeof kColors / sizeof *kColors)];
    o << "<polyline fill=\"none\" stroke=\"" << col << "\" stroke-width=\"1.5\" points=\"";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double x = spec.log_x ? std::log10(s.x[i]) : s.x[i];
      o << (i ? " " : "") << num(px(x)) << ',' << num(py(s.y[i]));
    }
    o << "\"/>\n";
    for (std::size_t i = 0; i < s.x.size(); ++i) {
      double x = px(spec.log_x ? std::log10(s.x[i]) : s.x[i]);
      if (i < s.err.size() && s.err[i] > 0)
        o << "<line x1=\"" << num(x) << "\" x2=\"" << num(x) << "\" y1=\"" << num(py(s.y[i] - s.err[i])) << "\" y2=\""
          << num(py(s.y[i] + s.err[i])) << "\" stroke=\"" << col << "\"/>";
      o << "<circle cx=\"" << num(x) << "\" cy=\"" << num(py(s.y[i])) << "\" r=\"3\" fill=\"" << col << "\"/>\n";
    }
    double ly = T + 14 + 16 * static_cast<double>(k);
    o << "<line x1=\"" << num(L + 10) << "\" x2=\"" << num(L + 30) << "\" y1=\"" << num(ly) << "\" y2=\"" << num(ly)
      << "\" stroke=\"" << col << "\" stroke-width=\"2\"/>";
    o << "<text x=\"" << num(L + 36) << "\" y=\"" << num(ly + 4) << "\">" << escape(s.label) << "</text>\n";
  }
  o << "</svg>\n";
  return o.str();
}

}  // namespace mnrv::cli
