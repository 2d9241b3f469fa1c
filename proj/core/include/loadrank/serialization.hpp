#pragma once

// JSON documents exchanged by the CLI, the HTTP API and files on disk.
// Parsers throw ValidationError with the offending path in the message.

#include <map>
#include <json.hpp>
#include <string>
#include <vector>

#include "loadrank/chiller.hpp"
#include "loadrank/controller.hpp"
#include "loadrank/domain.hpp"
#include "loadrank/emulator.hpp"
#include "loadrank/occupancy.hpp"

namespace loadrank {

using Json = nlohmann::json;

inline constexpr const char* kBuildingSchema = "loadrank.building/v1";
inline constexpr const char* kOccupancyModelsSchema = "loadrank.occupancy_models/v1";
inline constexpr const char* kChillerModelSchema = "loadrank.chiller_model/v1";
inline constexpr const char* kEventReportSchema = "loadrank.event_report/v1";

/// Parses JSON text, mapping syntax errors to ValidationError.
Json parse_json(const std::string& text);

Json to_json(const Building& building);
/// Accepts explicit "settings" or a "preset" (hvac_offsets, dimming, plug).
/// Validates the result.
Building building_from_json(const Json& j);

Json to_json(const CriteriaConfig& config);
/// {"weights": [..], "nu": x, "criteria": [..]}; missing keys keep `base`.
CriteriaConfig criteria_from_json(const Json& j, const CriteriaConfig& base = {});

Json to_json(const OccupancyModel& model);
OccupancyModel occupancy_model_from_json(const Json& j);
Json occupancy_models_to_json(const std::map<std::string, OccupancyModel>& models);
std::map<std::string, OccupancyModel> occupancy_models_from_json(const Json& j);

Json to_json(const ChillerFitStats& stats);
Json to_json(const ChillerModel& model);
ChillerModel chiller_model_from_json(const Json& j);

Json to_json(const ScoreDistribution& d);

Json to_json(const CurtailmentEvent& event);
CurtailmentEvent event_from_json(const Json& j);

Json to_json(const ScenarioConfig& scenario);
ScenarioConfig scenario_from_json(const Json& j);

Json to_json(const MeasurementRecord& record);
Json to_json(const FleetRanking& ranking);
Json to_json(const DispatchPlan& plan);
Json to_json(const EventReport& report);

}  // namespace loadrank
