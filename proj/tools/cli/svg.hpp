#pragma once

#include <string>
#include <vector>

namespace mnrv::cli {

struct PlotSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
  std::vector<double> err;  // optional half-width of an error bar per point
};

struct PlotSpec {
  std::string title;
  std::string xlabel;
  std::string ylabel;
  bool log_x = false;
  int width = 640;
  int height = 420;
};

// Line chart with markers, axis ticks and a legend.
std::string line_plot_svg(const PlotSpec& spec, const std::vector<PlotSeries>& series);

}  // namespace mnrv::cli
