#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mnrv/models.hpp"

namespace mnrv {

struct EvalReport {
  double mse = 0.0;
  double qlike = 0.0;
  double mz_a = 0.0;
  double mz_b = 0.0;
  double mz_se_a = 0.0;
  double mz_se_b = 0.0;
  double mz_r2 = 0.0;
  double mz_adj_r2 = 0.0;
  std::size_t n = 0;
  std::size_t skipped = 0;  // missing estimates left out of the score
};

EvalReport score(std::span<const double> target, std::span<const double> estimate);
// Scores only the days that have an estimate.
EvalReport score_partial(std::span<const double> target, const std::vector<std::optional<double>>& estimate);

struct RollingOptions {
  std::size_t jobs = 1;
  FitOptions fit;
  // Fit the first window with the configured multistart, then start every other
  // window from that optimum with a single start.
  bool anchor_warm_start = true;
};

struct RollingResult {
  std::size_t window = 0;
  std::size_t first_day = 0;  // index of the first predicted day
  std::vector<std::optional<double>> predictions;
  std::vector<std::string> failures;  // one message per failed window, empty on success
  std::size_t failure_count = 0;
};

// Refit on days [k, k+W) and predict day k+W, for k = 0..P-1.
RollingResult rolling_one_ahead(const ModelSpec& spec, const IntradayPanel& panel, std::size_t W, std::size_t P,
                                const RollingOptions& options = {});
RollingResult rolling_one_ahead(const ModelSpec& spec, std::span<const double> ncrv,
                                std::span<const double> returns, std::size_t W, std::size_t P,
                                const RollingOptions& options = {});

}  // namespace mnrv
