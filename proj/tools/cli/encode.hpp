#pragma once

#include <nlohmann/json.hpp>

#include "mnrv/data_io.hpp"
#include "mnrv/evaluation.hpp"
#include "mnrv/models.hpp"

namespace mnrv {

void to_json(nlohmann::json& j, const EvalReport& r);
void from_json(const nlohmann::json& j, EvalReport& r);
void to_json(nlohmann::json& j, const IvArma& a);
void to_json(nlohmann::json& j, const Ma1Params& u);
void to_json(nlohmann::json& j, const UMoments& u);
void to_json(nlohmann::json& j, const ReturnAcov& a);
void to_json(nlohmann::json& j, const QSelection& q);
void to_json(nlohmann::json& j, const Identification& id);
void to_json(nlohmann::json& j, const FitResult& f);
void to_json(nlohmann::json& j, const FittedModel& f);
void to_json(nlohmann::json& j, const DayVerdict& d);
void to_json(nlohmann::json& j, const FilterReport& r);

}  // namespace mnrv
