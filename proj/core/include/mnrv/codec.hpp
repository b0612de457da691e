#pragma once

#include <nlohmann/json.hpp>

#include "mnrv/market_sim.hpp"

namespace mnrv {

void to_json(nlohmann::json& j, const HestonParams& h);
void from_json(const nlohmann::json& j, HestonParams& h);
void to_json(nlohmann::json& j, const SrSarvParams& s);
void from_json(const nlohmann::json& j, SrSarvParams& s);
void to_json(nlohmann::json& j, const NoiseParams& n);
void from_json(const nlohmann::json& j, NoiseParams& n);
void to_json(nlohmann::json& j, const GeneratorInfo& g);
void from_json(const nlohmann::json& j, GeneratorInfo& g);

}  // namespace mnrv
