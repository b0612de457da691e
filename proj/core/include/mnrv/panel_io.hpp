#pragma once

#include <filesystem>

#include "mnrv/market_sim.hpp"

namespace mnrv {

// Columnar CSV (day,index,p_true,p_obs) plus a JSON sidecar next to it with the
// same stem. The sidecar carries the generator parameters, seed and per-day series.
std::filesystem::path sidecar_path(const std::filesystem::path& csv);
void save_panel(const IntradayPanel& panel, const std::filesystem::path& csv);
IntradayPanel load_panel(const std::filesystem::path& csv);

}  // namespace mnrv
